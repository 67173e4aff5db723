#pragma once

// Exact enumeration of bad valid strings and closed-form walk counts.

#include <leinert/exact.hpp>
#include <leinert/group.hpp>
#include <leinert/parallel.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace leinert {

inline constexpr double kDefaultBudget = 1e9;

/// s(s-1)^{length-1}, the number of valid strings of the given even length.
inline BigInt valid_string_count(unsigned s, unsigned length) {
  if (length == 0) return 0;
  return BigInt(s) * ipow(BigInt(s - 1), length - 1);
}

namespace detail {

// Depth-first walk over valid strings with per-factor reduction stacks.
// A prefix is abandoned once its reduced length exceeds the letters left.
class ValidStringSearch {
 public:
  ValidStringSearch(const GroupSignature& sig, unsigned length)
      : sig_(sig), length_(length), stacks_(sig.factor_count()), path_(length) {
    for (unsigned b = 0; b < sig.total_generators(); ++b) {
      auto [f, g] = sig.base_at(b);
      bases_.push_back({f, g, 1});
    }
    for (auto& st : stacks_) st.reserve(length);
  }

  struct Tally {
    std::uint64_t bad = 0;
    std::uint64_t kernels = 0;
  };

  /// Visits the subtree with the given fixed prefix of base indices.
  /// on_bad(letters, is_kernel) is called for every bad leaf when set.
  Tally run(std::span<const unsigned> prefix_bases,
            const std::function<void(std::span<const Letter>, bool)>* on_bad = nullptr) {
    tally_ = {};
    on_bad_ = on_bad;
    for (auto& st : stacks_) st.clear();
    reduced_ = 0;
    for (std::size_t i = 0; i < prefix_bases.size(); ++i) {
      if (i > 0 && prefix_bases[i] == prefix_bases[i - 1]) return tally_;
      if (!push(i, prefix_bases[i])) return tally_;
    }
    if (prefix_bases.size() == length_) {
      leaf();
    } else {
      descend(prefix_bases.size(), prefix_bases.empty() ? ~0u : prefix_bases.back());
    }
    return tally_;
  }

 private:
  bool push(std::size_t pos, unsigned base) {
    Letter l = bases_[base];
    l.exp = pos % 2 == 0 ? -1 : 1;
    path_[pos] = l;
    auto& st = stacks_[l.factor];
    FreeLetter fl{l.gen, l.exp};
    if (!st.empty() && st.back().gen == fl.gen && st.back().exp == -fl.exp) {
      st.pop_back();
      --reduced_;
      undo_[pos] = {true, FreeLetter{l.gen, static_cast<std::int8_t>(-l.exp)}};
    } else {
      st.push_back(fl);
      ++reduced_;
      undo_[pos] = {false, {}};
    }
    return reduced_ <= length_ - pos - 1;
  }

  void pop(std::size_t pos) {
    const Letter& l = path_[pos];
    auto& st = stacks_[l.factor];
    if (undo_[pos].popped) {
      st.push_back(undo_[pos].removed);
      ++reduced_;
    } else {
      st.pop_back();
      --reduced_;
    }
  }

  void descend(std::size_t pos, unsigned prev) {
    for (unsigned b = 0; b < bases_.size(); ++b) {
      if (b == prev) continue;
      bool ok = push(pos, b);
      if (ok) {
        if (pos + 1 == length_) {
          leaf();
        } else {
          descend(pos + 1, b);
        }
      }
      pop(pos);
    }
  }

  void leaf() {
    if (reduced_ != 0) return;
    std::span<const Letter> w(path_.data(), length_);
    bool kernel = !has_proper_bad_substring(sig_, w);
    ++tally_.bad;
    if (kernel) ++tally_.kernels;
    if (on_bad_) (*on_bad_)(w, kernel);
  }

  struct Undo {
    bool popped = false;
    FreeLetter removed;
  };

  const GroupSignature& sig_;
  unsigned length_;
  std::vector<Letter> bases_;
  std::vector<std::vector<FreeLetter>> stacks_;
  std::vector<Letter> path_;
  std::array<Undo, 1024> undo_{};
  std::size_t reduced_ = 0;
  Tally tally_;
  const std::function<void(std::span<const Letter>, bool)>* on_bad_ = nullptr;
};

inline void check_search_args(const GroupSignature& sig, unsigned length, double budget) {
  if (length < 2 || length % 2) throw std::invalid_argument("length must be even and >= 2");
  if (length > 1000) throw BudgetExceeded("length " + std::to_string(length) + " exceeds the search depth limit");
  BigInt space = valid_string_count(sig.total_generators(), length);
  if (space.convert_to<double>() > budget)
    throw BudgetExceeded("search space " + space.str() + " for length " + std::to_string(length) +
                         " exceeds budget " + std::to_string(static_cast<long double>(budget)));
}

}  // namespace detail

struct CensusEntry {
  BigInt total_valid;
  BigInt bad;
  BigInt kernels;

  double frequency() const {
    if (total_valid == 0) return 0.0;
    return Rational(bad, total_valid).convert_to<double>();
  }
};

struct CensusOptions {
  double budget = kDefaultBudget;
  unsigned threads = 0;
};

/// Bad and kernel counts at one even length, subtrees split over the first
/// two letters.
inline CensusEntry census_length(const GroupSignature& sig, unsigned length, const CensusOptions& opt = {}) {
  detail::check_search_args(sig, length, opt.budget);
  unsigned s = sig.total_generators();
  CensusEntry out;
  out.total_valid = valid_string_count(s, length);
  std::vector<std::pair<unsigned, unsigned>> tasks;
  for (unsigned b0 = 0; b0 < s; ++b0)
    for (unsigned b1 = 0; b1 < s; ++b1)
      if (b1 != b0) tasks.emplace_back(b0, b1);
  std::vector<detail::ValidStringSearch::Tally> tallies(tasks.size());
  parallel_for(tasks.size(), opt.threads, [&](std::size_t i) {
    detail::ValidStringSearch search(sig, length);
    unsigned prefix[2] = {tasks[i].first, tasks[i].second};
    tallies[i] = search.run(std::span<const unsigned>(prefix, 2));
  });
  std::uint64_t bad = 0, kernels = 0;
  for (const auto& t : tallies) {
    bad += t.bad;
    kernels += t.kernels;
  }
  out.bad = bad;
  out.kernels = kernels;
  return out;
}

inline BigInt count_bad_exact(const GroupSignature& sig, unsigned length, bool kernel_only,
                              const CensusOptions& opt = {}) {
  auto e = census_length(sig, length, opt);
  return kernel_only ? e.kernels : e.bad;
}

/// Calls visit(word, is_kernel) for every bad valid string, in lexicographic
/// order of base indices. Sequential.
inline void for_each_bad_string(const GroupSignature& sig, unsigned length,
                                const std::function<void(const Word&, bool)>& visit, double budget = kDefaultBudget) {
  detail::check_search_args(sig, length, budget);
  std::function<void(std::span<const Letter>, bool)> cb = [&](std::span<const Letter> w, bool kernel) {
    visit(Word(sig, std::vector<Letter>(w.begin(), w.end())), kernel);
  };
  detail::ValidStringSearch search(sig, length);
  search.run({}, &cb);
}

struct BadStringCensus {
  GroupSignature signature;
  std::map<unsigned, CensusEntry> entries;
};

inline BadStringCensus run_census(const GroupSignature& sig, unsigned max_length, const CensusOptions& opt = {}) {
  if (max_length < 2) throw std::invalid_argument("max length must be >= 2");
  detail::check_search_args(sig, max_length - max_length % 2, opt.budget);
  BadStringCensus out{sig, {}};
  for (unsigned len = 2; len <= max_length; len += 2) out.entries.emplace(len, census_length(sig, len, opt));
  return out;
}

inline std::string census_csv(const BadStringCensus& c) {
  std::ostringstream os;
  os << "length,total_valid,bad,kernels,frequency\n";
  for (const auto& [len, e] : c.entries)
    os << len << ',' << e.total_valid << ',' << e.bad << ',' << e.kernels << ','
       << std::setprecision(10) << e.frequency() << '\n';
  return os.str();
}

// Closed forms for comparison against enumeration.

inline BigInt closed_form_b8(unsigned s1, unsigned s2) {
  return BigInt(2) * s1 * (BigInt(s1) - 1) * s2 * (BigInt(s2) - 1);
}

inline BigInt closed_form_b12(const BigInt& b8, unsigned s) {
  if (s < 2) throw std::invalid_argument("s must be >= 2");
  BigInt t = s;
  return b8 * ((t - 2) * (t - 3) + 4 * (t - 1) + 2 * (t - 2) * (t - 2));
}

inline BigInt conjugation_extension_count(unsigned s) {
  if (s < 2) throw std::invalid_argument("s must be >= 2");
  return BigInt(s) - 2;
}

/// Letters z (as bases) for which z^{-1} conj(w) z is a bad valid string.
inline unsigned conjugation_extension_brute_force(const Word& kernel) {
  const auto& sig = kernel.signature();
  Word flipped = conjugate(kernel);
  unsigned count = 0;
  for (unsigned b = 0; b < sig.total_generators(); ++b) {
    auto [f, g] = sig.base_at(b);
    Letter z{f, g, 1};
    Word ext = Word(sig, {z.inverse()}) * flipped * Word(sig, {z});
    if (is_valid_string(ext.letters()) && is_bad(ext)) ++count;
  }
  return count;
}

inline BigInt compositions_count(unsigned n) {
  if (n == 0) throw std::invalid_argument("N must be >= 1");
  return ipow(BigInt(2), n - 1);
}

/// All ordered tuples of positive integers summing to n.
inline std::vector<std::vector<unsigned>> enumerate_compositions(unsigned n) {
  if (n == 0) throw std::invalid_argument("N must be >= 1");
  std::vector<std::vector<unsigned>> out;
  // bit i of mask set means a cut after position i+1
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    std::vector<unsigned> parts;
    unsigned run = 1;
    for (unsigned i = 0; i + 1 < n; ++i) {
      if (mask >> i & 1u) {
        parts.push_back(run);
        run = 1;
      } else {
        ++run;
      }
    }
    parts.push_back(run);
    out.push_back(std::move(parts));
  }
  return out;
}

inline BigInt closed_form_first_return(unsigned s, unsigned l) {
  if (l == 0) throw std::invalid_argument("l must be >= 1");
  return BigInt(2 * s) * ipow(BigInt(2 * s - 1), l - 1);
}

inline BigInt closed_form_return_walks(unsigned s, unsigned n) {
  if (n == 0) throw std::invalid_argument("N must be >= 1");
  return BigInt(2 * s) * ipow(BigInt(4 * s - 1), n - 1);
}

inline BigInt binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  BigInt out = 1;
  for (unsigned i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

/// sum_k C(N-1,k-1) (2s/(2s-1))^k (2s-1)^N - 2s(4s-1)^{N-1}, exactly.
inline Rational composition_sum_identity(unsigned s, unsigned n) {
  if (s == 0 || n == 0) throw std::invalid_argument("s and N must be >= 1");
  Rational ratio(BigInt(2 * s), BigInt(2 * s - 1));
  Rational sum = 0;
  Rational power = 1;
  for (unsigned k = 1; k <= n; ++k) {
    power *= ratio;
    sum += Rational(binomial(n - 1, k - 1)) * power;
  }
  sum *= Rational(ipow(BigInt(2 * s - 1), n));
  return sum - Rational(closed_form_return_walks(s, n));
}

struct WalkCountOptions {
  std::size_t max_states = 50'000'000;
  bool prune = true;
};

/// Walks of the given length on F_s (steps x^{+-1}) from e back to e; with
/// first_return_only the walk may not visit e in between. Dynamic programming
/// over reduced words.
inline BigInt brute_force_return_walks(unsigned s, unsigned steps, bool first_return_only,
                                       const WalkCountOptions& opt = {}) {
  if (s == 0) throw std::invalid_argument("s must be >= 1");
  GroupSignature sig({s});
  std::unordered_map<NormalForm, BigInt, NormalFormHash> cur, next;
  cur.emplace(NormalForm(1), BigInt(1));
  for (unsigned t = 1; t <= steps; ++t) {
    next.clear();
    unsigned remaining = steps - t;
    for (const auto& [nf, count] : cur) {
      for (std::uint16_t g = 0; g < s; ++g)
        for (std::int8_t e : {std::int8_t(-1), std::int8_t(1)}) {
          NormalForm to = nf.times(Letter{0, g, e});
          if (opt.prune && to.length() > remaining) continue;
          if (first_return_only && t < steps && to.is_identity()) continue;
          next[to] += count;
        }
    }
    if (next.size() > opt.max_states) throw BudgetExceeded("walk DP exceeded the state budget");
    cur.swap(next);
  }
  auto it = cur.find(NormalForm(1));
  return it == cur.end() ? BigInt(0) : it->second;
}

/// Total number of walks tracked by the unpruned DP; equals (2s)^steps when
/// no mass is lost.
inline BigInt brute_force_walk_total(unsigned s, unsigned steps, const WalkCountOptions& opt = {}) {
  GroupSignature sig({s});
  std::unordered_map<NormalForm, BigInt, NormalFormHash> cur, next;
  cur.emplace(NormalForm(1), BigInt(1));
  for (unsigned t = 1; t <= steps; ++t) {
    next.clear();
    for (const auto& [nf, count] : cur)
      for (std::uint16_t g = 0; g < s; ++g)
        for (std::int8_t e : {std::int8_t(-1), std::int8_t(1)}) next[nf.times(Letter{0, g, e})] += count;
    if (next.size() > opt.max_states) throw BudgetExceeded("walk DP exceeded the state budget");
    cur.swap(next);
  }
  BigInt total = 0;
  for (const auto& kv : cur) total += kv.second;
  return total;
}

struct WalkComparisonRow {
  unsigned s = 0;
  unsigned steps = 0;
  bool first_return = false;
  BigInt formula;
  BigInt oracle;
  bool agree() const { return formula == oracle; }
};

/// Closed forms vs the DP for s <= max_s and even steps <= max_steps.
inline std::vector<WalkComparisonRow> walk_comparison_table(unsigned max_s, unsigned max_steps) {
  std::vector<WalkComparisonRow> rows;
  for (unsigned s = 1; s <= max_s; ++s)
    for (unsigned steps = 2; steps <= max_steps; steps += 2)
      for (bool first : {true, false}) {
        WalkComparisonRow r{s, steps, first, {}, {}};
        r.formula = first ? closed_form_first_return(s, steps / 2) : closed_form_return_walks(s, steps / 2);
        r.oracle = brute_force_return_walks(s, steps, first);
        rows.push_back(std::move(r));
      }
  return rows;
}

inline std::string walk_comparison_csv(const std::vector<WalkComparisonRow>& rows) {
  std::ostringstream os;
  os << "s,steps,kind,formula,oracle,status\n";
  for (const auto& r : rows)
    os << r.s << ',' << r.steps << ',' << (r.first_return ? "first_return" : "return") << ',' << r.formula << ','
       << r.oracle << ',' << (r.agree() ? "agree" : "disagree") << '\n';
  return os.str();
}

}  // namespace leinert
