#pragma once

// Monte Carlo estimate of the bad-string frequency.

#include <leinert/group.hpp>
#include <leinert/growth.hpp>
#include <leinert/parallel.hpp>
#include <leinert/rng.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace leinert {

enum class StringModel { ValidStrings, ReducedStrings };

struct TestSet {
  bool parity = true;
  bool adjacent_repeat = true;
  bool reduce_reorder = true;
};

struct SampleConfig {
  GroupSignature signature{std::vector<unsigned>{2, 2}};
  unsigned length = 8;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  StringModel model = StringModel::ValidStrings;
  TestSet tests;
  /// Cap on reduction passes in the rotation test; unset means reduce fully.
  std::optional<unsigned> reduce_pass_cap;
  unsigned threads = 0;
};

struct TestTallies {
  std::uint64_t parity_rejected = 0;
  std::uint64_t adjacent_rejected = 0;
  std::uint64_t reduce_rejected = 0;
};

struct SampleReport {
  SampleConfig config;
  std::uint64_t bad_count = 0;
  double frequency = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  TestTallies tallies;
};

inline constexpr double kWilsonZ95 = 1.959963984540054;

inline std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kWilsonZ95) {
  if (trials == 0) return {0.0, 1.0};
  double n = static_cast<double>(trials);
  double p = static_cast<double>(successes) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2 * n)) / denom;
  double half = z / denom * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

/// ValidStrings: uniform over the s(s-1)^{length-1} valid strings.
/// ReducedStrings: uniform over the 2s(2s-1)^{length-1} freely reduced strings.
inline Word sample_string(const GroupSignature& sig, unsigned length, StringModel model, SplitMix64& rng) {
  unsigned s = sig.total_generators();
  std::vector<Letter> letters;
  letters.reserve(length);
  if (model == StringModel::ValidStrings) {
    if (length % 2) throw std::invalid_argument("valid strings have even length");
    if (s < 2 && length > 1) throw std::invalid_argument("valid strings need at least 2 generators");
    unsigned prev = 0;
    for (unsigned i = 0; i < length; ++i) {
      unsigned b = static_cast<unsigned>(i == 0 ? rng.below(s) : rng.below(s - 1));
      if (i > 0 && b >= prev) ++b;
      prev = b;
      auto [f, g] = sig.base_at(b);
      letters.push_back({f, g, static_cast<std::int8_t>(i % 2 == 0 ? -1 : 1)});
    }
  } else {
    std::uint32_t prev = 0;
    for (unsigned i = 0; i < length; ++i) {
      std::uint32_t code;
      if (i == 0) {
        code = static_cast<std::uint32_t>(rng.below(2 * s));
      } else {
        std::uint32_t forbidden = prev ^ 1u;  // inverse letter
        code = static_cast<std::uint32_t>(rng.below(2 * s - 1));
        if (code >= forbidden) ++code;
      }
      prev = code;
      letters.push_back(decode(sig, code));
    }
  }
  return Word(sig, std::move(letters));
}

/// Zero exponent sum for every generator.
inline bool parity_test(const Word& w) {
  for (int v : abelianization(w.signature(), w.letters()))
    if (v != 0) return false;
  return true;
}

/// No two equal adjacent letters.
inline bool adjacent_repeat_test(const Word& w) {
  auto l = w.letters();
  for (std::size_t i = 0; i + 1 < l.size(); ++i)
    if (l[i] == l[i + 1]) return false;
  return true;
}

namespace detail {

// One scan per factor projection removing cancelling neighbours; repeated
// `cap` times (or to fixpoint when cap is unset).
inline bool reduces_by_passes(const GroupSignature& sig, std::span<const Letter> w, std::optional<unsigned> cap) {
  if (!cap) return reduces_to_identity(sig, w);
  std::vector<std::vector<FreeLetter>> proj(sig.factor_count());
  for (auto l : w) proj[l.factor].push_back({l.gen, l.exp});
  for (unsigned pass = 0; pass < *cap; ++pass) {
    bool changed = false;
    for (auto& p : proj) {
      std::vector<FreeLetter> out;
      out.reserve(p.size());
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (i + 1 < p.size() && p[i].gen == p[i + 1].gen && p[i].exp == -p[i + 1].exp) {
          ++i;
          changed = true;
        } else {
          out.push_back(p[i]);
        }
      }
      p.swap(out);
    }
    if (!changed) break;
  }
  for (const auto& p : proj)
    if (!p.empty()) return false;
  return true;
}

}  // namespace detail

/// True iff some cyclic rotation reduces to e.
inline bool reduce_reorder_test(const Word& w, std::optional<unsigned> pass_cap = std::nullopt) {
  if (w.empty()) return true;
  auto l = w.letters();
  std::vector<Letter> rot(l.size());
  for (std::size_t r = 0; r < l.size(); ++r) {
    for (std::size_t i = 0; i < l.size(); ++i) rot[i] = l[(i + r) % l.size()];
    if (detail::reduces_by_passes(w.signature(), rot, pass_cap)) return true;
  }
  return false;
}

inline constexpr std::uint64_t kSampleChunk = 4096;

inline SampleReport estimate_bad_frequency(const SampleConfig& cfg) {
  if (cfg.samples == 0) throw std::invalid_argument("samples must be >= 1");
  if (cfg.length < 2) throw std::invalid_argument("length must be >= 2");
  std::uint64_t chunks = (cfg.samples + kSampleChunk - 1) / kSampleChunk;
  struct Partial {
    std::uint64_t bad = 0;
    TestTallies t;
  };
  std::vector<Partial> parts(chunks);
  parallel_for(chunks, cfg.threads, [&](std::size_t c) {
    SplitMix64 rng(derive_stream(cfg.seed, c));
    std::uint64_t begin = c * kSampleChunk;
    std::uint64_t end = std::min(cfg.samples, begin + kSampleChunk);
    Partial& p = parts[c];
    for (std::uint64_t i = begin; i < end; ++i) {
      Word w = sample_string(cfg.signature, cfg.length, cfg.model, rng);
      if (cfg.tests.parity && !parity_test(w)) {
        ++p.t.parity_rejected;
        continue;
      }
      if (cfg.tests.adjacent_repeat && !adjacent_repeat_test(w)) {
        ++p.t.adjacent_rejected;
        continue;
      }
      bool identity = cfg.tests.reduce_reorder ? reduce_reorder_test(w, cfg.reduce_pass_cap)
                                               : reduces_to_identity(w.signature(), w.letters());
      if (!identity) {
        ++p.t.reduce_rejected;
        continue;
      }
      ++p.bad;
    }
  });
  SampleReport rep;
  rep.config = cfg;
  for (const auto& p : parts) {
    rep.bad_count += p.bad;
    rep.tallies.parity_rejected += p.t.parity_rejected;
    rep.tallies.adjacent_rejected += p.t.adjacent_rejected;
    rep.tallies.reduce_rejected += p.t.reduce_rejected;
  }
  rep.frequency = static_cast<double>(rep.bad_count) / static_cast<double>(cfg.samples);
  std::tie(rep.wilson_lo, rep.wilson_hi) = wilson_interval(rep.bad_count, cfg.samples);
  return rep;
}

inline std::string sample_csv_header() { return "length,samples,bad,freq,wilson_lo,wilson_hi\n"; }

inline std::string sample_csv_row(const SampleReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << r.config.length << ',' << r.config.samples << ',' << r.bad_count << ',' << r.frequency << ','
     << r.wilson_lo << ',' << r.wilson_hi << '\n';
  return os.str();
}

/// Runs estimate_bad_frequency per length (seed derived per length) and fits
/// the decay of the frequency in n = length/2.
inline GrowthEstimate estimate_decay_rate(const GroupSignature& sig, const std::vector<unsigned>& lengths,
                                          std::uint64_t samples_per_length, std::uint64_t seed,
                                          unsigned threads = 0, std::vector<SampleReport>* reports = nullptr) {
  std::vector<std::pair<unsigned, double>> pts;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    SampleConfig cfg;
    cfg.signature = sig;
    cfg.length = lengths[i];
    cfg.samples = samples_per_length;
    cfg.seed = derive_stream(seed, 1000 + lengths[i]);
    cfg.threads = threads;
    auto rep = estimate_bad_frequency(cfg);
    pts.emplace_back(lengths[i] / 2, rep.frequency);
    if (reports) reports->push_back(rep);
  }
  return fit_growth(pts);
}

/// Non-physical: frequencies exp(-n|x|) with x ~ Normal(mu, sigma), capped
/// to [0,1], for exercising the fitting code only.
inline std::vector<std::pair<unsigned, double>> synthetic_frequencies(const std::vector<unsigned>& ns, double mu,
                                                                      double sigma, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::pair<unsigned, double>> out;
  for (unsigned n : ns) {
    double x = mu + sigma * rng.normal();
    double f = std::exp(-static_cast<double>(n) * std::abs(x));
    out.emplace_back(n, std::min(1.0, f));
  }
  return out;
}

}  // namespace leinert
