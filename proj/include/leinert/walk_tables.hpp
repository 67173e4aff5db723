#pragma once

// Return probabilities of the alternating walk on F_{s1} x ... x F_{sm}.
//
// Steps 1, 3, 5, ... multiply by y^{-1} and steps 2, 4, ... by y, where
// y = x_{ij} with probability alpha_{ij} and y = e with probability alpha_0.
// Two steps together are one step of T*T for T = alpha_0 + sum alpha_{ij} x_{ij}.
//
// "First return" quantities exclude visits at even times only; with
// alpha_0 = 0 odd-time visits to e cannot happen anyway.

#include <leinert/exact.hpp>
#include <leinert/group.hpp>
#include <leinert/series.hpp>

#include <boost/integer/common_factor_rt.hpp>

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace leinert {

struct WalkWeights {
  Rational alpha0 = 0;
  /// alpha[i][j] for generator x_{ij}; shapes must match the signature.
  std::vector<std::vector<Rational>> alpha;

  /// alpha_0 given, the rest split evenly over the s generators.
  static WalkWeights uniform(const GroupSignature& sig, const Rational& alpha0 = 0) {
    WalkWeights w;
    w.alpha0 = alpha0;
    Rational each = (Rational(1) - alpha0) / Rational(sig.total_generators());
    for (unsigned s : sig.factors()) w.alpha.emplace_back(s, each);
    return w;
  }

  Rational total() const {
    Rational t = alpha0;
    for (const auto& row : alpha)
      for (const auto& v : row) t += v;
    return t;
  }

  bool is_probability() const {
    if (alpha0 < 0) return false;
    for (const auto& row : alpha)
      for (const auto& v : row)
        if (v < 0) return false;
    return total() == 1;
  }

  void check(const GroupSignature& sig) const {
    if (alpha.size() != sig.factor_count()) throw std::invalid_argument("weights do not match the signature");
    for (std::size_t i = 0; i < alpha.size(); ++i)
      if (alpha[i].size() != sig.rank(i)) throw std::invalid_argument("weights do not match the signature");
  }

  const Rational& at(const GroupSignature& sig, unsigned base) const {
    auto [f, g] = sig.base_at(base);
    return alpha[f][g];
  }
};

struct ProbabilityTables {
  GroupSignature signature{std::vector<unsigned>{1}};
  WalkWeights weights;
  unsigned n_max = 0;
  std::vector<Rational> mu;                  // mu[n] = Pr[X_2n = e], n = 0..n_max
  std::vector<Rational> p;                   // p[t], odd t < 2 n_max; phase-shifted return
  std::vector<std::vector<Rational>> f;      // f[g][t], t = 0..2 n_max, zero at odd t
  std::vector<std::vector<Rational>> a;      // a[g][t], even t = 0..2 n_max
  std::vector<std::vector<Rational>> b;      // b[g][t], odd t < 2 n_max
  std::vector<std::vector<Rational>> d;      // d[g][t], t = 0..2 n_max
  std::vector<Rational> f0;                  // first even return after an identity first step
  std::vector<Rational> f_first;             // true first return, any parity, non-identity first step

  Rational f_total(std::size_t t) const {
    Rational s = 0;
    for (const auto& row : f) s += row[t];
    return s;
  }
};

struct DpOptions {
  std::size_t max_states = 5'000'000;
};

namespace detail {

struct IntegerWeights {
  BigInt denom;                 // W
  BigInt w0;                    // alpha0 * W
  std::vector<BigInt> w;        // alpha_g * W by base index
};

inline IntegerWeights integer_weights(const GroupSignature& sig, const WalkWeights& ww) {
  BigInt den = boost::multiprecision::denominator(ww.alpha0);
  for (const auto& row : ww.alpha)
    for (const auto& v : row) den = boost::integer::lcm(den, BigInt(boost::multiprecision::denominator(v)));
  IntegerWeights out;
  out.denom = den;
  out.w0 = boost::multiprecision::numerator(ww.alpha0 * Rational(den));
  for (unsigned g = 0; g < sig.total_generators(); ++g)
    out.w.push_back(boost::multiprecision::numerator(ww.at(sig, g) * Rational(den)));
  return out;
}

using MassMap = std::unordered_map<NormalForm, BigInt, NormalFormHash>;

struct PassSpec {
  unsigned steps = 0;                 // relative steps to run after the start
  bool first_step_inverse = true;     // relative step 1 applies y^{-1}
  std::optional<unsigned> forced_first;  // base index of y at step 1, or kIdentity
  bool prune = true;
  // kill(r, nf): drop mass at element nf at relative time r (after recording)
  std::function<bool(unsigned, const NormalForm&)> kill;
  // probe(r, nf): element whose mass is recorded at each r
  std::optional<NormalForm> probe;
};

inline constexpr unsigned kIdentity = ~0u;

struct PassResult {
  std::vector<BigInt> at_e;      // numerator over W^r
  std::vector<BigInt> at_probe;  // numerator over W^r
  std::vector<BigInt> total;     // all tracked mass, numerator over W^r
};

inline PassResult run_pass(const GroupSignature& sig, const IntegerWeights& iw, const PassSpec& spec,
                           const DpOptions& opt) {
  PassResult res;
  res.at_e.assign(spec.steps + 1, 0);
  res.at_probe.assign(spec.steps + 1, 0);
  res.total.assign(spec.steps + 1, 0);
  MassMap cur, next;
  cur.emplace(NormalForm(sig.factor_count()), BigInt(1));
  res.at_e[0] = 1;
  res.total[0] = 1;
  unsigned s = sig.total_generators();
  std::vector<Letter> pos, neg;
  for (unsigned g = 0; g < s; ++g) {
    auto [f, j] = sig.base_at(g);
    pos.push_back({f, j, 1});
    neg.push_back({f, j, -1});
  }
  for (unsigned r = 1; r <= spec.steps; ++r) {
    next.clear();
    bool inverse = ((r % 2) == 1) == spec.first_step_inverse;
    unsigned remaining = spec.steps - r;
    auto deposit = [&](NormalForm&& to, BigInt&& m) {
      if (spec.prune && to.length() > remaining) return;
      auto [it, fresh] = next.try_emplace(std::move(to), std::move(m));
      if (!fresh) it->second += m;
    };
    for (const auto& [nf, mass] : cur) {
      if (r == 1 && spec.forced_first) {
        if (*spec.forced_first == kIdentity) {
          deposit(NormalForm(nf), mass * iw.w0);
        } else {
          unsigned g = *spec.forced_first;
          deposit(nf.times(inverse ? neg[g] : pos[g]), mass * iw.w[g]);
        }
        continue;
      }
      if (iw.w0 != 0) deposit(NormalForm(nf), mass * iw.w0);
      for (unsigned g = 0; g < s; ++g) {
        if (iw.w[g] == 0) continue;
        deposit(nf.times(inverse ? neg[g] : pos[g]), mass * iw.w[g]);
      }
    }
    if (next.size() > opt.max_states)
      throw BudgetExceeded("walk DP exceeded " + std::to_string(opt.max_states) + " states at step " +
                           std::to_string(r));
    for (auto it = next.begin(); it != next.end();) {
      res.total[r] += it->second;
      if (it->first.is_identity()) res.at_e[r] += it->second;
      if (spec.probe && it->first == *spec.probe) res.at_probe[r] += it->second;
      if (spec.kill && spec.kill(r, it->first)) {
        it = next.erase(it);
      } else {
        ++it;
      }
    }
    cur.swap(next);
  }
  return res;
}

inline NormalForm single_letter(const GroupSignature& sig, unsigned base, std::int8_t exp) {
  auto [f, j] = sig.base_at(base);
  NormalForm nf(sig.factor_count());
  nf.multiply({f, j, exp});
  return nf;
}

}  // namespace detail

/// Exact tables up to walks of length 2 n_max (a up to 2 n_max relative steps).
inline ProbabilityTables dp_tables(const GroupSignature& sig, const WalkWeights& w, unsigned n_max,
                                   const DpOptions& opt = {}) {
  w.check(sig);
  if (!w.is_probability()) throw std::invalid_argument("dp_tables needs probability weights summing to 1");
  if (n_max == 0) throw std::invalid_argument("n_max must be >= 1");
  using namespace detail;
  auto iw = integer_weights(sig, w);
  unsigned s = sig.total_generators();
  unsigned T = 2 * n_max;
  std::vector<BigInt> pw(T + 1, 1);
  for (unsigned r = 1; r <= T; ++r) pw[r] = pw[r - 1] * iw.denom;
  auto frac = [&](const BigInt& num, unsigned r) { return Rational(num, pw[r]); };

  ProbabilityTables t;
  t.signature = sig;
  t.weights = w;
  t.n_max = n_max;

  {
    PassSpec spec;
    spec.steps = T;
    auto r = run_pass(sig, iw, spec, opt);
    for (unsigned n = 0; n <= n_max; ++n) t.mu.push_back(frac(r.at_e[2 * n], 2 * n));
  }
  {
    PassSpec spec;
    spec.steps = T - 1;
    spec.first_step_inverse = false;
    auto r = run_pass(sig, iw, spec, opt);
    t.p.assign(T, 0);
    for (unsigned k = 1; k < T; k += 2) t.p[k] = frac(r.at_e[k], k);
  }
  auto kill_e_even = [](unsigned r, const NormalForm& nf) { return r % 2 == 0 && nf.is_identity(); };
  t.f.assign(s, std::vector<Rational>(T + 1, 0));
  t.d.assign(s, std::vector<Rational>(T + 1, 0));
  t.a.assign(s, std::vector<Rational>(T + 1, 0));
  t.b.assign(s, std::vector<Rational>(T, 0));
  t.f_first.assign(T + 1, 0);
  for (unsigned g = 0; g < s; ++g) {
    {
      PassSpec spec;
      spec.steps = T;
      spec.forced_first = g;
      spec.kill = kill_e_even;
      spec.probe = single_letter(sig, g, -1);
      auto r = run_pass(sig, iw, spec, opt);
      for (unsigned k = 2; k <= T; k += 2) {
        t.f[g][k] = frac(r.at_e[k], k);
        t.d[g][k] = t.f[g][k] - frac(r.at_probe[k - 1] * iw.w[g], k);
      }
    }
    {
      PassSpec spec;
      spec.steps = T;
      spec.forced_first = g;
      spec.kill = [](unsigned, const NormalForm& nf) { return nf.is_identity(); };
      auto r = run_pass(sig, iw, spec, opt);
      for (unsigned k = 1; k <= T; ++k) t.f_first[k] += frac(r.at_e[k], k);
    }
    NormalForm target = single_letter(sig, g, 1);
    {
      PassSpec spec;
      spec.steps = T;
      spec.first_step_inverse = false;
      spec.kill = [target](unsigned r, const NormalForm& nf) { return r % 2 == 1 && nf == target; };
      auto r = run_pass(sig, iw, spec, opt);
      for (unsigned k = 0; k <= T; k += 2) t.a[g][k] = frac(r.at_e[k], k);
    }
    {
      PassSpec spec;
      spec.steps = T - 1;
      spec.kill = [target](unsigned r, const NormalForm& nf) { return r % 2 == 0 && nf == target; };
      auto r = run_pass(sig, iw, spec, opt);
      for (unsigned k = 1; k < T; k += 2) t.b[g][k] = frac(r.at_e[k], k);
    }
  }
  {
    PassSpec spec;
    spec.steps = T;
    spec.forced_first = kIdentity;
    spec.kill = kill_e_even;
    auto r = run_pass(sig, iw, spec, opt);
    t.f0.assign(T + 1, 0);
    for (unsigned k = 2; k <= T; k += 2) t.f0[k] = frac(r.at_e[k], k);
  }
  return t;
}

/// Total probability mass after `steps` steps of the unpruned walk.
inline Rational dp_total_mass(const GroupSignature& sig, const WalkWeights& w, unsigned steps,
                              const DpOptions& opt = {}) {
  w.check(sig);
  auto iw = detail::integer_weights(sig, w);
  detail::PassSpec spec;
  spec.steps = steps;
  spec.prune = false;
  auto r = detail::run_pass(sig, iw, spec, opt);
  return Rational(r.total[steps], ipow(iw.denom, steps));
}

struct IdentityResidual {
  std::string name;
  std::vector<Rational> per_n;  // residual at n = 1..n_max (index n-1)
  Rational max_abs = 0;
  /// Smallest n with a nonzero residual, if any.
  std::optional<unsigned> first_nonzero;
};

struct RecurrenceReport {
  IdentityResidual mu, p, a, b, fifth;
  std::vector<const IdentityResidual*> all() const { return {&mu, &p, &a, &b, &fifth}; }
};

namespace detail {
inline void finish(IdentityResidual& r) {
  for (std::size_t i = 0; i < r.per_n.size(); ++i) {
    Rational v = abs(r.per_n[i]);
    if (v > r.max_abs) r.max_abs = v;
    if (v != 0 && !r.first_nonzero) r.first_nonzero = static_cast<unsigned>(i + 1);
  }
}
}  // namespace detail

/// Residuals (lhs - rhs) of the first-return identities for n = 1..n_max.
/// For a, b and the fifth identity the residual at n is the worst over all
/// generators.
inline RecurrenceReport verify_recurrences(const ProbabilityTables& t, const WalkWeights& w) {
  const auto& sig = t.signature;
  unsigned N = t.n_max;
  unsigned s = sig.total_generators();
  const Rational& a0 = w.alpha0;
  auto fT = [&](unsigned k) { return t.f_total(k); };
  RecurrenceReport rep;
  rep.mu.name = "mu";
  rep.p.name = "p";
  rep.a.name = "a";
  rep.b.name = "b";
  rep.fifth.name = "f=alpha^2 a+d";
  for (unsigned n = 1; n <= N; ++n) {
    Rational rhs = a0 * t.p[2 * n - 1];
    for (unsigned k = 1; k <= n; ++k) rhs += fT(2 * k) * t.mu[n - k];
    rep.mu.per_n.push_back(t.mu[n] - rhs);

    rhs = a0 * t.mu[n - 1];
    for (unsigned k = 1; k < n; ++k) rhs += fT(2 * k) * t.p[2 * n - 2 * k - 1];
    rep.p.per_n.push_back(t.p[2 * n - 1] - rhs);

    Rational worst_a = 0, worst_b = 0, worst_f = 0;
    for (unsigned g = 0; g < s; ++g) {
      Rational ra = a0 * t.b[g][2 * n - 1];
      for (unsigned k = 1; k <= n; ++k) ra += (fT(2 * k) - t.f[g][2 * k]) * t.a[g][2 * n - 2 * k];
      ra = t.a[g][2 * n] - ra;
      if (abs(ra) > abs(worst_a)) worst_a = ra;

      Rational rb = a0 * t.a[g][2 * n - 2];
      for (unsigned k = 1; k < n; ++k) rb += fT(2 * k) * t.b[g][2 * n - 2 * k - 1];
      rb = t.b[g][2 * n - 1] - rb;
      if (abs(rb) > abs(worst_b)) worst_b = rb;

      const Rational& al = w.at(sig, g);
      Rational rf = t.f[g][2 * n] - (al * al * t.a[g][2 * n - 2] + t.d[g][2 * n]);
      if (abs(rf) > abs(worst_f)) worst_f = rf;
    }
    rep.a.per_n.push_back(worst_a);
    rep.b.per_n.push_back(worst_b);
    rep.fifth.per_n.push_back(worst_f);
  }
  for (auto* r : {&rep.mu, &rep.p, &rep.a, &rep.b, &rep.fifth}) detail::finish(*r);
  return rep;
}

using RSeries = Series<Rational>;

struct GeneratingFunctions {
  std::size_t degree = 0;
  RSeries G, H, F, F0, F_first;
  std::vector<RSeries> F_g, A_g, B_g, D_g;
  /// G - 1/(1 - F - F0)
  RSeries renewal_residual;
  /// F_g - (alpha_g^2 z^2 A_g + D_g), one per generator
  std::vector<RSeries> split_residual;
  /// (G + H) - 1/(1 - alpha0 z - F_first)
  RSeries whole_walk_residual;
  /// H - alpha0 z G/(1 - F) and F0 - alpha0^2 z^2/(1 - F); zero only
  /// when no odd-time excursion returns to e.
  RSeries h_residual, f0_residual;

  static bool is_zero(const RSeries& s) {
    for (const auto& c : s.coefficients())
      if (c != 0) return false;
    return true;
  }
};

inline GeneratingFunctions generating_functions(const ProbabilityTables& t) {
  const auto& sig = t.signature;
  std::size_t K = 2 * t.n_max;
  unsigned s = sig.total_generators();
  GeneratingFunctions gf;
  gf.degree = K;
  gf.G = RSeries(K);
  gf.H = RSeries(K);
  for (unsigned n = 0; n <= t.n_max; ++n) gf.G[2 * n] = t.mu[n];
  for (unsigned k = 1; k < K; k += 2) gf.H[k] = t.p[k];
  gf.F = RSeries(K);
  gf.F0 = RSeries(K, t.f0);
  gf.F_first = RSeries(K, t.f_first);
  RSeries z2 = RSeries::monomial(K, 2);
  RSeries one = RSeries::constant(K, Rational(1));
  for (unsigned g = 0; g < s; ++g) {
    gf.F_g.emplace_back(K, t.f[g]);
    gf.A_g.emplace_back(K, t.a[g]);
    gf.B_g.emplace_back(K, t.b[g]);
    gf.D_g.emplace_back(K, t.d[g]);
    gf.F += gf.F_g.back();
    const Rational& al = t.weights.at(sig, g);
    gf.split_residual.push_back(gf.F_g[g] - ((z2 * gf.A_g[g]).scaled(al * al) + gf.D_g[g]));
  }
  gf.renewal_residual = gf.G - (one - gf.F - gf.F0).reciprocal();
  RSeries a0z = RSeries::monomial(K, 1, t.weights.alpha0);
  gf.whole_walk_residual = (gf.G + gf.H) - (one - a0z - gf.F_first).reciprocal();
  RSeries inv = (one - gf.F).reciprocal();
  gf.h_residual = gf.H - a0z * gf.G * inv;
  gf.f0_residual = gf.F0 - (a0z * a0z) * inv;
  return gf;
}

}  // namespace leinert
