#pragma once

// Truncated power series c_0 + c_1 t + ... + c_K t^K.

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace leinert {

class IllConditioned : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

template <class T>
class Series {
 public:
  explicit Series(std::size_t degree = 0) : c_(degree + 1, T(0)) {}
  Series(std::size_t degree, std::vector<T> coeffs) : c_(degree + 1, T(0)) {
    for (std::size_t i = 0; i < coeffs.size() && i <= degree; ++i) c_[i] = std::move(coeffs[i]);
  }

  static Series constant(std::size_t degree, T v) {
    Series s(degree);
    s.c_[0] = std::move(v);
    return s;
  }
  /// t^k
  static Series monomial(std::size_t degree, std::size_t k, T v = T(1)) {
    Series s(degree);
    if (k <= degree) s.c_[k] = std::move(v);
    return s;
  }

  std::size_t degree() const noexcept { return c_.size() - 1; }
  const T& operator[](std::size_t i) const { return c_.at(i); }
  T& operator[](std::size_t i) { return c_.at(i); }
  const std::vector<T>& coefficients() const noexcept { return c_; }

  Series& operator+=(const Series& o) {
    check(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Series& operator-=(const Series& o) {
    check(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator-(Series a) {
    for (auto& v : a.c_) v = -v;
    return a;
  }

  Series scaled(const T& k) const {
    Series out(*this);
    for (auto& v : out.c_) v *= k;
    return out;
  }

  friend Series operator*(const Series& a, const Series& b) {
    a.check(b);
    Series out(a.degree());
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      if (a.c_[i] == T(0)) continue;
      for (std::size_t j = 0; i + j < a.c_.size(); ++j) out.c_[i + j] += a.c_[i] * b.c_[j];
    }
    return out;
  }

  /// 1/a by the recursion b_0 = 1/a_0, b_n = -(sum_{k>=1} a_k b_{n-k}) / a_0.
  Series reciprocal() const {
    if (c_[0] == T(0)) throw IllConditioned("reciprocal of a series with zero constant term");
    Series out(degree());
    out.c_[0] = T(1) / c_[0];
    for (std::size_t n = 1; n < c_.size(); ++n) {
      T acc(0);
      for (std::size_t k = 1; k <= n; ++k) acc += c_[k] * out.c_[n - k];
      out.c_[n] = -acc / c_[0];
    }
    return out;
  }

  /// Square root with constant term 1, by Newton iteration y <- (y + a/y)/2,
  /// doubling the number of correct coefficients per step.
  Series sqrt() const {
    if (c_[0] != T(1)) throw IllConditioned("series square root needs constant term 1");
    Series y = constant(degree(), T(1));
    std::size_t correct = 1;
    while (correct < c_.size()) {
      y = (y + (*this) * y.reciprocal()).scaled(T(1) / T(2));
      correct *= 2;
    }
    return y;
  }

  /// Same coefficient vector at a different truncation degree.
  Series truncated(std::size_t degree) const {
    Series out(degree);
    for (std::size_t i = 0; i <= degree && i < c_.size(); ++i) out.c_[i] = c_[i];
    return out;
  }

  friend bool operator==(const Series& a, const Series& b) { return a.c_ == b.c_; }

 private:
  void check(const Series& o) const {
    if (o.c_.size() != c_.size()) throw std::invalid_argument("series truncation degrees differ");
  }
  std::vector<T> c_;
};

template <class T>
Series<T> series_add(const Series<T>& a, const Series<T>& b) {
  return a + b;
}
template <class T>
Series<T> series_mul(const Series<T>& a, const Series<T>& b) {
  return a * b;
}
template <class T>
Series<T> series_scale(const Series<T>& a, const T& k) {
  return a.scaled(k);
}
template <class T>
Series<T> series_sqrt(const Series<T>& a) {
  return a.sqrt();
}
template <class T>
Series<T> series_reciprocal(const Series<T>& a) {
  return a.reciprocal();
}

}  // namespace leinert
