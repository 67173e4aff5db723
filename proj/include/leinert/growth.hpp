#pragma once

#include <leinert/census.hpp>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace leinert {

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GrowthPoint {
  unsigned n = 0;  // half length
  double frequency = 0.0;
  double root = 0.0;  // frequency^{1/n}
};

struct GrowthEstimate {
  std::vector<GrowthPoint> points;
  double rate = 0.0;       // exp(slope) of log frequency against n
  double intercept = 0.0;  // log frequency at n = 0
  double residual = 0.0;   // RMS of the log-space residuals
};

/// Least squares of log(frequency) on n over the nonzero points.
inline GrowthEstimate fit_growth(const std::vector<std::pair<unsigned, double>>& freq_by_n) {
  GrowthEstimate out;
  std::vector<std::pair<double, double>> xy;
  for (auto [n, f] : freq_by_n) {
    if (f < 0.0 || f > 1.0) throw std::invalid_argument("frequency outside [0,1]");
    out.points.push_back({n, f, n ? std::pow(f, 1.0 / n) : f});
    if (f > 0.0) xy.emplace_back(static_cast<double>(n), std::log(f));
  }
  if (xy.size() < 3) throw InsufficientData("need at least 3 nonzero frequencies, got " + std::to_string(xy.size()));
  double mx = 0, my = 0;
  for (auto [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= xy.size();
  my /= xy.size();
  double sxx = 0, sxy = 0;
  for (auto [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0) throw InsufficientData("need at least two distinct lengths");
  double slope = sxy / sxx;
  out.intercept = my - slope * mx;
  out.rate = std::exp(slope);
  double ss = 0;
  for (auto [x, y] : xy) {
    double r = y - (out.intercept + slope * x);
    ss += r * r;
  }
  out.residual = std::sqrt(ss / xy.size());
  return out;
}

inline GrowthEstimate growth_rate(const BadStringCensus& census) {
  std::vector<std::pair<unsigned, double>> pts;
  for (const auto& [len, e] : census.entries) pts.emplace_back(len / 2, e.frequency());
  return fit_growth(pts);
}

}  // namespace leinert
