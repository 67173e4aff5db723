#include <leinert/census.hpp>
#include <leinert/growth.hpp>

#include <gtest/gtest.h>

#include <set>

using namespace leinert;

namespace {

const GroupSignature F22({2, 2});
const GroupSignature Z3({1, 1, 1});

std::vector<BigInt> bad_counts(const GroupSignature& sig, unsigned max_len) {
  std::vector<BigInt> out;
  for (const auto& [len, e] : run_census(sig, max_len).entries) out.push_back(e.bad);
  return out;
}

std::vector<BigInt> big(std::initializer_list<long> v) { return {v.begin(), v.end()}; }

// Every valid string by odometer, no pruning.
template <class F>
void for_each_valid(const GroupSignature& sig, unsigned len, F&& f) {
  unsigned s = sig.total_generators();
  std::vector<unsigned> idx(len, 0);
  for (;;) {
    bool ok = true;
    for (unsigned i = 1; i < len && ok; ++i) ok = idx[i] != idx[i - 1];
    if (ok) {
      std::vector<Letter> l;
      for (unsigned i = 0; i < len; ++i) {
        auto [fa, g] = sig.base_at(idx[i]);
        l.push_back({fa, g, static_cast<std::int8_t>(i % 2 ? 1 : -1)});
      }
      f(Word(sig, l));
    }
    unsigned k = 0;
    while (k < len && ++idx[k] == s) idx[k++] = 0;
    if (k == len) return;
  }
}

// Walks on the 2s-regular tree counted through the distance from the root.
BigInt tree_walks(unsigned s, unsigned steps, bool first_return) {
  std::vector<BigInt> cur(steps + 2, 0), next(steps + 2, 0);
  cur[0] = 1;
  for (unsigned t = 1; t <= steps; ++t) {
    std::fill(next.begin(), next.end(), 0);
    for (unsigned d = 0; d <= steps; ++d) {
      if (cur[d] == 0) continue;
      if (d == 0) {
        next[1] += cur[d] * (2 * s);
      } else {
        next[d - 1] += cur[d];
        next[d + 1] += cur[d] * (2 * s - 1);
      }
    }
    if (first_return && t < steps) next[0] = 0;
    cur.swap(next);
  }
  return cur[0];
}

}  // namespace

TEST(Census, ValidStringCount) {
  EXPECT_EQ(valid_string_count(4, 8), 8748);
  EXPECT_EQ(valid_string_count(3, 6), 96);
  auto c = run_census(F22, 10);
  for (const auto& [len, e] : c.entries) EXPECT_EQ(e.total_valid, valid_string_count(4, len));
}

TEST(Census, Z3Counts) {
  EXPECT_EQ(bad_counts(Z3, 12), big({0, 0, 6, 6, 42, 120}));
  EXPECT_EQ(count_bad_exact(Z3, 6, false), 6);
  EXPECT_EQ(count_bad_exact(Z3, 8, false), 6);
}

TEST(Census, F2xF2Counts) {
  EXPECT_EQ(bad_counts(F22, 12), big({0, 0, 0, 16, 32, 144}));
  EXPECT_EQ(count_bad_exact(F22, 4, false), 0);
  EXPECT_EQ(count_bad_exact(F22, 8, true), 16);
}

TEST(Census, F3xF2Counts) {
  EXPECT_EQ(bad_counts(GroupSignature({3, 2}), 10), big({0, 0, 0, 48, 144}));
}

TEST(Census, LeinertControlsAreEmpty) {
  for (auto sig : {GroupSignature({1, 1}), GroupSignature({1, 2})})
    for (const auto& [len, e] : run_census(sig, 12).entries) EXPECT_EQ(e.bad, 0) << sig.to_string() << " " << len;
}

TEST(Census, MatchesUnprunedEnumeration) {
  for (auto sig : {F22, Z3, GroupSignature({1, 2}), GroupSignature({2, 1, 1})}) {
    for (unsigned len = 2; len <= 8; len += 2) {
      long bad = 0, kernels = 0;
      for_each_valid(sig, len, [&](const Word& w) {
        if (is_bad(w)) {
          ++bad;
          if (is_kernel(w)) ++kernels;
        }
      });
      auto e = census_length(sig, len);
      EXPECT_EQ(e.bad, bad) << sig.to_string() << " " << len;
      EXPECT_EQ(e.kernels, kernels) << sig.to_string() << " " << len;
    }
  }
}

TEST(Census, EveryEnumeratedStringIsBad) {
  for (unsigned len : {8u, 10u, 12u}) {
    std::size_t seen = 0, kernels = 0;
    for_each_bad_string(F22, len, [&](const Word& w, bool kernel) {
      ++seen;
      ASSERT_EQ(classify_string(w).kind, StringKind::Valid);
      ASSERT_TRUE(is_bad(w));
      ASSERT_EQ(kernel, is_kernel(w));
      kernels += kernel;
    });
    auto e = census_length(F22, len);
    EXPECT_EQ(e.bad, seen);
    EXPECT_EQ(e.kernels, kernels);
    EXPECT_LE(e.kernels, e.bad);
  }
}

TEST(Census, InvariantUnderRelabeling) {
  std::set<std::string> bad;
  std::vector<Word> words;
  for_each_bad_string(F22, 10, [&](const Word& w, bool) {
    bad.insert(w.to_string());
    words.push_back(w);
  });
  // swap generators inside factor 1, then swap the two factors
  for (const auto& w : words) {
    std::vector<Letter> a, b;
    for (auto l : w.letters()) {
      Letter m = l;
      if (m.factor == 0) m.gen = static_cast<std::uint16_t>(1 - m.gen);
      a.push_back(m);
      Letter n = l;
      n.factor = static_cast<std::uint16_t>(1 - n.factor);
      b.push_back(n);
    }
    EXPECT_TRUE(bad.count(Word(F22, a).to_string()));
    EXPECT_TRUE(bad.count(Word(F22, b).to_string()));
  }
  EXPECT_EQ(census_length(GroupSignature({3, 2}), 8).bad, census_length(GroupSignature({2, 3}), 8).bad);
}

TEST(Census, ThreadCountDoesNotChangeCounts) {
  auto one = census_length(GroupSignature({3, 2}), 10, {kDefaultBudget, 1});
  auto four = census_length(GroupSignature({3, 2}), 10, {kDefaultBudget, 4});
  EXPECT_EQ(one.bad, four.bad);
  EXPECT_EQ(one.kernels, four.kernels);
}

TEST(Census, BudgetIsEnforced) {
  EXPECT_THROW(census_length(F22, 98), BudgetExceeded);
  EXPECT_THROW(census_length(F22, 7), std::invalid_argument);
  EXPECT_THROW(run_census(F22, 99), BudgetExceeded);
  EXPECT_THROW(census_length(F22, 8, {1000.0, 1}), BudgetExceeded);
  EXPECT_NO_THROW(census_length(F22, 8, {8748.0, 1}));
  EXPECT_THROW(census_length(F22, 7), std::invalid_argument);
}

TEST(Census, CsvFormat) {
  auto csv = census_csv(run_census(F22, 8));
  EXPECT_EQ(csv,
            "length,total_valid,bad,kernels,frequency\n"
            "2,12,0,0,0\n4,108,0,0,0\n6,972,0,0,0\n8,8748,16,16,0.001828989483\n");
}

TEST(Formulas, B8) {
  EXPECT_EQ(closed_form_b8(2, 2), 8);
  EXPECT_EQ(closed_form_b8(3, 2), 24);
  for (unsigned k = 1; k < 6; ++k) EXPECT_EQ(closed_form_b8(1, k), 0);
  // enumeration is twice the formula
  EXPECT_EQ(count_bad_exact(F22, 8, false), 2 * closed_form_b8(2, 2));
  EXPECT_EQ(count_bad_exact(GroupSignature({3, 2}), 8, false), 2 * closed_form_b8(3, 2));
}

TEST(Formulas, B12) {
  EXPECT_EQ(closed_form_b12(8, 4), 176);
  EXPECT_EQ(closed_form_b12(0, 7), 0);
  EXPECT_THROW(closed_form_b12(8, 1), std::invalid_argument);
  EXPECT_EQ(count_bad_exact(F22, 12, false), 144);
}

TEST(Formulas, ConjugationExtension) {
  EXPECT_EQ(conjugation_extension_count(4), 2);
  EXPECT_EQ(conjugation_extension_count(2), 0);
  for_each_bad_string(F22, 8, [&](const Word& w, bool kernel) {
    ASSERT_TRUE(kernel);
    EXPECT_EQ(conjugation_extension_brute_force(w), 2u) << w.to_string();
  });
}

TEST(Compositions, CountMatchesEnumeration) {
  auto three = enumerate_compositions(3);
  std::set<std::vector<unsigned>> got(three.begin(), three.end());
  std::set<std::vector<unsigned>> want{{3}, {1, 2}, {2, 1}, {1, 1, 1}};
  EXPECT_EQ(got, want);
  EXPECT_EQ(compositions_count(1), 1);
  for (unsigned n = 1; n <= 12; ++n) {
    auto all = enumerate_compositions(n);
    EXPECT_EQ(compositions_count(n), all.size());
    for (const auto& c : all) {
      unsigned sum = 0;
      for (unsigned p : c) {
        EXPECT_GE(p, 1u);
        sum += p;
      }
      EXPECT_EQ(sum, n);
    }
  }
  EXPECT_EQ(compositions_count(12), 2048);
}

TEST(Compositions, SumIdentityVanishes) {
  for (unsigned s = 1; s <= 5; ++s)
    for (unsigned n = 1; n <= 8; ++n) EXPECT_EQ(composition_sum_identity(s, n), 0) << s << " " << n;
}

TEST(WalkCounts, ClosedForms) {
  EXPECT_EQ(closed_form_first_return(1, 1), 2);
  EXPECT_EQ(closed_form_first_return(1, 3), 2);
  EXPECT_EQ(closed_form_return_walks(2, 2), 28);
  EXPECT_EQ(closed_form_return_walks(1, 1), 2);
}

TEST(WalkCounts, HandValues) {
  EXPECT_EQ(brute_force_return_walks(1, 2, true), 2);
  EXPECT_EQ(brute_force_return_walks(1, 6, true), 4);
  EXPECT_EQ(brute_force_return_walks(2, 2, false), 4);
  EXPECT_EQ(brute_force_return_walks(1, 10, false), 252);
  EXPECT_EQ(brute_force_return_walks(1, 3, false), 0);
}

TEST(WalkCounts, MatchDistanceChain) {
  for (unsigned s = 1; s <= 3; ++s)
    for (unsigned steps = 1; steps <= 12; ++steps)
      for (bool first : {true, false})
        EXPECT_EQ(brute_force_return_walks(s, steps, first), tree_walks(s, steps, first)) << s << " " << steps;
}

TEST(WalkCounts, Conservation) {
  for (unsigned s = 1; s <= 2; ++s)
    for (unsigned steps = 0; steps <= 8; ++steps) EXPECT_EQ(brute_force_walk_total(s, steps), ipow(BigInt(2 * s), steps));
}

TEST(WalkCounts, ComparisonTable) {
  auto rows = walk_comparison_table(2, 10);
  EXPECT_EQ(rows.size(), 20u);
  auto csv = walk_comparison_csv(rows);
  EXPECT_NE(csv.find("1,6,first_return,2,4,disagree"), std::string::npos);
  EXPECT_NE(csv.find("2,4,return,28,28,agree"), std::string::npos);
}

TEST(Growth, AllZeroIsInsufficient) {
  EXPECT_THROW(growth_rate(run_census(GroupSignature({1, 1}), 12)), InsufficientData);
}

TEST(Growth, ExactGeometric) {
  std::vector<std::pair<unsigned, double>> pts;
  for (unsigned n = 1; n <= 6; ++n) pts.emplace_back(n, 0.3 * std::pow(0.6, n));
  auto g = fit_growth(pts);
  EXPECT_NEAR(g.rate, 0.6, 1e-12);
  EXPECT_NEAR(g.residual, 0.0, 1e-12);
  EXPECT_NEAR(std::exp(g.intercept), 0.3, 1e-12);
}

TEST(Growth, F2xF2RateBelowOne) {
  auto g = growth_rate(run_census(F22, 14));
  EXPECT_GT(g.rate, 0.0);
  EXPECT_LT(g.rate, 1.0);
  for (const auto& p : g.points) {
    EXPECT_GE(p.frequency, 0.0);
    EXPECT_LE(p.frequency, 1.0);
  }
}
