#pragma once

// Radius-of-convergence bounds for the return generating function G(z).
// Lower side: G = P(zG). Upper side: G = Q(z, G), which adds a correction
// D(z) for walks that return through bad strings.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace leinert {

class PastRadius : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NoAdmissibleRoot : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- P ---------------------------------------------------------------------

/// P(t) = 1 + 1/2 sum_x (sqrt(1 + 4 alpha(x)^2 t^2) - 1).
inline double eval_P(double t, const std::vector<double>& weights) {
  double s = 0;
  for (double a : weights) s += std::sqrt(1 + 4 * a * a * t * t) - 1;
  return 1 + 0.5 * s;
}

/// dP/dt = sum_x 2 alpha^2 t / sqrt(1 + 4 alpha^2 t^2).
inline double eval_P_prime(double t, const std::vector<double>& weights) {
  double s = 0;
  for (double a : weights) s += 2 * a * a * t / std::sqrt(1 + 4 * a * a * t * t);
  return s;
}

struct WoessRadius {
  double r = 0;      // radius of convergence
  double theta = 0;  // argmin of P(t)/t; +inf in the limit case
  bool limit = false;
};

namespace detail {
// t P'(t) - P(t), up to the positive factor 1; increasing in t.
inline double stationarity(double t, const std::vector<double>& w) {
  double s = 0;
  for (double a : w) s += 1 - 1 / std::sqrt(1 + 4 * a * a * t * t);
  return 0.5 * s - 1;
}
inline double stationarity_dt(double t, const std::vector<double>& w) {
  double s = 0;
  for (double a : w) {
    double q = std::sqrt(1 + 4 * a * a * t * t);
    s += 4 * a * a * t / (q * q * q);
  }
  return 0.5 * s;
}
}  // namespace detail

/// r^{-1} = min_{t >= 0} P(t)/t. With at most two nonzero weights the ratio
/// decreases forever and r^{-1} = sum alpha.
inline WoessRadius woess_radius(const std::vector<double>& weights) {
  std::vector<double> w;
  for (double a : weights) {
    if (a < 0) throw std::invalid_argument("weights must be nonnegative");
    if (a > 0) w.push_back(a);
  }
  if (w.empty()) throw std::invalid_argument("need at least one positive weight");
  double sum = std::accumulate(w.begin(), w.end(), 0.0);
  if (w.size() <= 2) return {1 / sum, std::numeric_limits<double>::infinity(), true};

  auto ratio = [&](double u) {
    double t = std::exp(u);
    return eval_P(t, w) / t;
  };
  double amax = *std::max_element(w.begin(), w.end());
  double lo = std::log(1e-3 / amax), hi = std::log(1e3 / amax);
  while (detail::stationarity(std::exp(hi), w) < 0) hi += 2;
  while (detail::stationarity(std::exp(lo), w) > 0) lo -= 2;
  const double g = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = ratio(x1), f2 = ratio(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = ratio(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = ratio(x2);
    }
  }
  double t = std::exp(0.5 * (lo + hi));
  for (int it = 0; it < 50; ++it) {
    double step = detail::stationarity(t, w) / detail::stationarity_dt(t, w);
    t -= step;
    if (std::abs(step) <= 1e-15 * t) break;
  }
  return {t / eval_P(t, w), t, false};
}

struct VerticalTangent {
  double x = 0;  // radius candidate
  double y = 0;  // G at the radius
  bool converged = false;
  unsigned iterations = 0;
};

/// Solves x P'(xy) = 1, y = P(xy) by damped two-dimensional Newton: the point
/// where z -> G(z) defined by G = P(zG) turns vertical.
inline VerticalTangent radius_from_vertical_tangent(const std::vector<double>& weights, unsigned max_iters = 200) {
  double amax = 0, sum = 0;
  unsigned positive = 0;
  for (double a : weights) {
    amax = std::max(amax, a);
    sum += a;
    positive += a > 0;
  }
  if (amax <= 0) throw std::invalid_argument("need at least one positive weight");
  VerticalTangent out;
  if (positive <= 2) {
    // no finite solution; y runs off to infinity while x -> 1/sum(alpha)
    out.x = 1 / sum;
    out.y = std::numeric_limits<double>::infinity();
    return out;
  }
  // start near the sign change of t P'(t) - P(t) on a coarse log grid; far
  // from it Newton slides onto the branch where y grows without bound
  double t0 = 1.0 / amax;
  for (int k = -30; k <= 60; ++k) {
    double t = std::ldexp(1.0 / amax, k);
    if (t * eval_P_prime(t, weights) >= eval_P(t, weights)) {
      t0 = t / std::sqrt(2.0);
      break;
    }
  }
  double y = eval_P(t0, weights), x = t0 / y;
  auto residual = [&](double xx, double yy, double& r1, double& r2) {
    double t = xx * yy;
    r1 = xx * eval_P_prime(t, weights) - 1;
    r2 = yy - eval_P(t, weights);
  };
  for (unsigned it = 1; it <= max_iters; ++it) {
    double r1, r2;
    residual(x, y, r1, r2);
    double t = x * y;
    double p1 = eval_P_prime(t, weights);
    double p2 = 0;  // P''(t)
    for (double a : weights) {
      double q = std::sqrt(1 + 4 * a * a * t * t);
      p2 += 2 * a * a / (q * q * q);
    }
    // Jacobian of (x P'(xy) - 1, y - P(xy)) in (x, y)
    double j11 = p1 + x * y * p2, j12 = x * x * p2;
    double j21 = -y * p1, j22 = 1 - x * p1;
    double det = j11 * j22 - j12 * j21;
    if (!std::isfinite(det) || std::abs(det) < 1e-300) break;
    double dx = (r1 * j22 - r2 * j12) / det;
    double dy = (j11 * r2 - j21 * r1) / det;
    double norm0 = std::hypot(r1, r2);
    double lambda = 1;
    for (int k = 0; k < 40; ++k) {
      double nx = x - lambda * dx, ny = y - lambda * dy;
      if (nx > 0 && ny > 0) {
        double s1, s2;
        residual(nx, ny, s1, s2);
        if (std::hypot(s1, s2) < norm0) {
          x = nx;
          y = ny;
          break;
        }
      }
      lambda /= 2;
    }
    out.iterations = it;
    residual(x, y, r1, r2);
    if (std::hypot(r1, r2) < 1e-13) {
      out.converged = true;
      break;
    }
    if (lambda < 1e-10) break;
  }
  out.x = x;
  out.y = y;
  return out;
}

// ---- D bound and Q ---------------------------------------------------------

/// Upper bound for the bad-string series D_{ij}(t).
struct DBound {
  enum class Kind { Zero, GeometricRate, RadiusForm };
  Kind kind = Kind::Zero;
  double value = 0;  // c for GeometricRate, R for RadiusForm

  static DBound zero() { return {}; }
  static DBound geometric(double c) {
    if (!(c > 0)) throw std::invalid_argument("rate c must be positive");
    return {Kind::GeometricRate, c};
  }
  static DBound radius(double R) {
    if (!(R > 0)) throw std::invalid_argument("radius R must be positive");
    return {Kind::RadiusForm, R};
  }

  /// Accepts "zero", "c=<float>", "R=<float>".
  static DBound parse(const std::string& text) {
    if (text == "zero" || text == "0") return zero();
    auto eq = text.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("invalid D bound '" + text + "'");
    std::string key = text.substr(0, eq);
    double v = 0;
    try {
      std::size_t used = 0;
      v = std::stod(text.substr(eq + 1), &used);
      if (used != text.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::invalid_argument("invalid D bound '" + text + "'");
    }
    if (key == "c") return geometric(v);
    if (key == "R" || key == "r") return radius(v);
    throw std::invalid_argument("invalid D bound '" + text + "'");
  }

  /// Singularity of the bound; +inf for Zero.
  double singularity() const {
    switch (kind) {
      case Kind::Zero:
        return std::numeric_limits<double>::infinity();
      case Kind::GeometricRate:
        return 1 / value;
      case Kind::RadiusForm:
        return value;
    }
    return 0;
  }

  double eval(double t) const {
    switch (kind) {
      case Kind::Zero:
        return 0;
      case Kind::GeometricRate: {
        double u = value * value * t * t;
        if (u >= 1) throw PastRadius("D bound singular at t = " + std::to_string(t));
        return u / (1 - u);
      }
      case Kind::RadiusForm: {
        double R2 = value * value;
        if (t * t >= R2) throw PastRadius("D bound singular at t = " + std::to_string(t));
        return t * t / (R2 - t * t);
      }
    }
    return 0;
  }

  double eval_dt(double t) const {
    if (kind == Kind::Zero) return 0;
    double R2 = kind == Kind::RadiusForm ? value * value : 1 / (value * value);
    double den = R2 - t * t;
    return 2 * t * R2 / (den * den);
  }

  std::string to_string() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
      case Kind::Zero:
        return "zero";
      case Kind::GeometricRate:
        os << "c=" << value;
        return os.str();
      case Kind::RadiusForm:
        os << "R=" << value;
        return os.str();
    }
    return {};
  }
};

/// F_s x F_s with all 2s generator weights equal to a.
struct RadiusProblem {
  unsigned s = 2;
  double a = 0.25;
  DBound d_bound;

  void check() const {
    if (s < 1) throw std::invalid_argument("s must be >= 1");
    if (!(a > 0)) throw std::invalid_argument("a must be positive");
  }
  std::vector<double> weights() const { return std::vector<double>(2 * s, a); }
  /// 1/(2a sqrt(2s-1)), the D = 0 radius.
  double z_free() const { return 1 / (2 * a * std::sqrt(2.0 * s - 1)); }
};

/// Q(t, g) = 1 + 1/2 sum_{ij} (sqrt((1 + D(t) g)^2 + 4 a^2 g^2 t^2) + D(t) g - 1).
inline double eval_Q(double t, double g, const RadiusProblem& pb) {
  double D = pb.d_bound.eval(t);
  double n = 2.0 * pb.s;
  double u = 1 + D * g;
  return 1 + 0.5 * n * (std::sqrt(u * u + 4 * pb.a * pb.a * g * g * t * t) + D * g - 1);
}

inline double eval_Q_dt(double t, double g, const RadiusProblem& pb) {
  double D = pb.d_bound.eval(t), Dp = pb.d_bound.eval_dt(t);
  double n = 2.0 * pb.s, a2 = pb.a * pb.a;
  double u = 1 + D * g;
  double root = std::sqrt(u * u + 4 * a2 * g * g * t * t);
  return 0.5 * n * ((u * g * Dp + 4 * a2 * g * g * t) / root + Dp * g);
}

inline double eval_Q_dg(double t, double g, const RadiusProblem& pb) {
  double D = pb.d_bound.eval(t);
  double n = 2.0 * pb.s, a2 = pb.a * pb.a;
  double u = 1 + D * g;
  double root = std::sqrt(u * u + 4 * a2 * g * g * t * t);
  return 0.5 * n * ((u * D + 4 * a2 * g * t * t) / root + D);
}

struct Quadratic {
  double A = 0, B = 0, C = 0;
};

/// Coefficients of A G^2 + B G + C = 0 obtained by squaring G = Q(z, G).
inline Quadratic quadratic_coeffs(double z, double D, unsigned s, double a) {
  double sd = s;
  return {1 - 2 * sd * D - 4 * a * a * z * z * sd * sd, -4 * sd * sd * D + 2 * sd * D + 2 * sd - 2, 1 - 2 * sd};
}

/// Root of the quadratic on the branch with G(0) = 1, written as
/// 2C/(-B - sqrt(B^2 - 4AC)) so that A -> 0 gives -C/B without cancellation.
inline double solve_G_upper(double z, const RadiusProblem& pb) {
  pb.check();
  if (z < 0) throw std::invalid_argument("z must be >= 0");
  double D = pb.d_bound.eval(z);
  auto [A, B, C] = quadratic_coeffs(z, D, pb.s, pb.a);
  double disc = B * B - 4 * A * C;
  if (disc < 0) throw PastRadius("negative discriminant at z = " + std::to_string(z));
  double den = -B - std::sqrt(disc);
  if (den == 0) throw PastRadius("branch diverges at z = " + std::to_string(z));
  double g = 2 * C / den;
  if (!(g > 0)) throw PastRadius("no positive solution at z = " + std::to_string(z));
  return g;
}

/// g <- f(g) from g = 1 until successive iterates agree to tol.
inline std::optional<double> fixed_point(const std::function<double(double)>& f, double tol = 1e-14,
                                         unsigned max_iters = 1000000) {
  double g = 1;
  for (unsigned i = 0; i < max_iters; ++i) {
    double next = f(g);
    if (!std::isfinite(next)) return std::nullopt;
    if (std::abs(next - g) <= tol * std::max(1.0, std::abs(next))) return next;
    g = next;
  }
  return std::nullopt;
}

inline std::optional<double> solve_G_fixed_point(double z, const RadiusProblem& pb, double tol = 1e-14) {
  return fixed_point([&](double g) { return eval_Q(z, g, pb); }, tol);
}

/// Solution of G = P(zG) from the fixed point iteration.
inline std::optional<double> solve_G_lower(double z, const std::vector<double>& weights, double tol = 1e-14) {
  return fixed_point([&](double g) { return eval_P(z * g, weights); }, tol);
}

// ---- discriminant ------------------------------------------------------------

/// (B^2 - 4AC)(R^2 - w)^2 as a cubic in w = z^2, highest power first.
inline std::array<double, 4> discriminant_cubic(unsigned s, double a, double R) {
  double s2 = double(s) * s, s3 = s2 * s, s4 = s2 * s2, a2 = a * a, R2 = R * R, R4 = R2 * R2;
  return {-32 * a2 * s3 + 16 * a2 * s2, 64 * a2 * R2 * s3 - 32 * a2 * R2 * s2 + 16 * s4,
          -32 * a2 * R4 * s3 + 16 * a2 * R4 * s2 - 16 * R2 * s3, 4 * R4 * s2};
}

struct DiscriminantEval {
  double value = 0;  // B^2 - 4AC
  double scale = 0;  // max(B^2, |4AC|)
};

/// Un-expanded discriminant at z with D(z) = z^2/(R^2 - z^2).
inline DiscriminantEval discriminant_at(double z, unsigned s, double a, double R) {
  double D = std::isinf(R) ? 0.0 : z * z / (R * R - z * z);
  auto [A, B, C] = quadratic_coeffs(z, D, s, a);
  return {B * B - 4 * A * C, std::max(B * B, std::abs(4 * A * C))};
}

inline double radius_from_discriminant(const RadiusProblem& pb) {
  pb.check();
  unsigned s = pb.s;
  double a = pb.a;
  if (pb.d_bound.kind == DBound::Kind::Zero) return pb.z_free();
  double R = pb.d_bound.singularity();
  auto c = discriminant_cubic(s, a, R);
  Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
  comp(0, 0) = -c[1] / c[0];
  comp(0, 1) = -c[2] / c[0];
  comp(0, 2) = -c[3] / c[0];
  comp(1, 0) = 1;
  comp(2, 1) = 1;
  Eigen::EigenSolver<Eigen::Matrix3d> es(comp, false);
  auto cubic = [&](double w) { return ((c[0] * w + c[1]) * w + c[2]) * w + c[3]; };
  auto cubic_dw = [&](double w) { return (3 * c[0] * w + 2 * c[1]) * w + c[2]; };
  double R2 = R * R;
  std::optional<double> best;
  for (int i = 0; i < 3; ++i) {
    auto ev = es.eigenvalues()[i];
    if (std::abs(ev.imag()) > 1e-7 * std::max(1.0, std::abs(ev.real()))) continue;
    double w = ev.real();
    for (int it = 0; it < 50; ++it) {
      double d = cubic_dw(w);
      if (d == 0) break;
      double step = cubic(w) / d;
      w -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(w))) break;
    }
    if (w <= 0 || w >= R2) continue;
    if (!best || w < *best) best = w;
  }
  if (!best) throw NoAdmissibleRoot("discriminant has no root in (0, R^2): G converges on the whole disc |z| < R");
  double z = std::sqrt(*best);
  // polish on the un-expanded form
  for (int it = 0; it < 30; ++it) {
    auto e = discriminant_at(z, s, a, R);
    double h = 1e-7 * z;
    double dv = (discriminant_at(z + h, s, a, R).value - discriminant_at(z - h, s, a, R).value) / (2 * h);
    if (dv == 0 || !std::isfinite(dv)) break;
    double step = e.value / dv;
    if (std::abs(step) > 1e-3 * z) break;
    z -= step;
    if (std::abs(step) <= 1e-15 * z) break;
  }
  return z;
}

inline double discriminant_scaled_residual(double z, const RadiusProblem& pb) {
  double R = pb.d_bound.singularity();
  auto e = discriminant_at(z, pb.s, pb.a, R);
  return std::abs(e.value) / e.scale;
}

enum class RBranch { Plus, Minus };

/// R^2 for which z is a root of the discriminant:
/// [K z^4 - 2s z^2 +- 2a(2s-1)^{3/2} z^3] / (K z^2 - 1) with K = 4a^2(2s-1).
/// Plus is the branch as usually displayed; Minus gives the smallest root.
inline double r_squared_closed_form(double z, unsigned s, double a, RBranch branch = RBranch::Plus) {
  double m = 2.0 * s - 1;
  double K = 4 * a * a * m;
  double den = K * z * z - 1;
  if (std::abs(den) < 1e-14) throw std::domain_error("R^2 closed form singular at z = 1/(2a sqrt(2s-1))");
  double cross = 2 * a * std::pow(m, 1.5) * z * z * z;
  double num = K * z * z * z * z - 2.0 * s * z * z + (branch == RBranch::Plus ? cross : -cross);
  return num / den;
}

/// Both values (1 +- 2az sqrt(2s-1))/(2s-1).
inline std::pair<double, double> d_closed_form(double z, unsigned s, double a) {
  double m = 2.0 * s - 1;
  double k = 2 * a * z * std::sqrt(m);
  return {(1 + k) / m, (1 - k) / m};
}

/// z = +-(1 - (2s-1)D)/(2a sqrt(2s-1)).
inline std::pair<double, double> d_closed_form_inverse(double D, unsigned s, double a) {
  double m = 2.0 * s - 1;
  double z = (1 - m * D) / (2 * a * std::sqrt(m));
  return {z, -z};
}

// ---- reports -------------------------------------------------------------------

struct BoundReport {
  RadiusProblem problem;
  double r_lower = 0;  // radius from G = P(zG)
  double r_upper = 0;  // radius from G = Q(z, G)
  double gap = 0;      // r_lower - r_upper
  double relative_gap = 0;
  double theta = 0;
  double z_free = 0;
};

inline BoundReport bound_report(const RadiusProblem& pb) {
  pb.check();
  BoundReport rep;
  rep.problem = pb;
  auto wr = woess_radius(pb.weights());
  rep.r_lower = wr.r;
  rep.theta = wr.theta;
  rep.r_upper = radius_from_discriminant(pb);
  rep.gap = rep.r_lower - rep.r_upper;
  rep.relative_gap = rep.gap / rep.r_lower;
  rep.z_free = pb.z_free();
  return rep;
}

struct SandwichPoint {
  double z = 0;
  double g = 0;   // G value used
  double p = 0;   // P(z g)
  double q = 0;   // Q(z, g)
  bool holds(double slack) const { return p <= g + slack && g <= q + slack; }
};

/// Evaluates P(zG) <= G <= Q(z,G) at the upper solution and the lower
/// solution for each z.
inline std::vector<SandwichPoint> sandwich(const RadiusProblem& pb, const std::vector<double>& zs) {
  std::vector<SandwichPoint> out;
  auto w = pb.weights();
  for (double z : zs) {
    double gq = solve_G_upper(z, pb);
    out.push_back({z, gq, eval_P(z * gq, w), eval_Q(z, gq, pb)});
    auto gp = solve_G_lower(z, w);
    if (!gp) throw PastRadius("lower fixed point diverged at z = " + std::to_string(z));
    out.push_back({z, *gp, eval_P(z * *gp, w), eval_Q(z, *gp, pb)});
  }
  return out;
}

struct CurveRow {
  unsigned s = 0;
  double a = 0;
  double z_lower = 0;
  double z_upper = 0;
  double z_free_formula = 0;
};

inline std::vector<CurveRow> curve_points(unsigned s_min, unsigned s_max, const std::function<double(unsigned)>& a_rule,
                                          const DBound& d_bound) {
  std::vector<CurveRow> rows;
  for (unsigned s = s_min; s <= s_max; ++s) {
    RadiusProblem pb{s, a_rule(s), d_bound};
    auto rep = bound_report(pb);
    rows.push_back({s, pb.a, rep.r_lower, rep.r_upper, pb.z_free()});
  }
  return rows;
}

inline std::string curve_csv(const std::vector<CurveRow>& rows) {
  std::ostringstream os;
  os.precision(12);
  os << "s,a,z_lower,z_upper,z_free_formula\n";
  for (const auto& r : rows) os << r.s << ',' << r.a << ',' << r.z_lower << ',' << r.z_upper << ',' << r.z_free_formula << '\n';
  return os.str();
}

}  // namespace leinert
