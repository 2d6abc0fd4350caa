#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace natc {

// Dense row-major matrix. The scalar type is a template parameter so that the
// same code runs in float for training and in double for oracle checks.
template <class Real>
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Real> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, Real fill = Real(0)) : rows(r), cols(c), a(r * c, fill) {}

  Real& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const Real& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  std::span<Real> row(std::size_t i) { return {a.data() + i * cols, cols}; }
  std::span<const Real> row(std::size_t i) const { return {a.data() + i * cols, cols}; }

  void fill(Real v) { a.assign(a.size(), v); }
};

template <class Real>
inline constexpr Real kNegInf = -std::numeric_limits<Real>::infinity();

// log(exp(x) + exp(y)) with -inf as the absorbing empty-sum element.
template <class Real>
inline Real log_add(Real x, Real y) {
  if (x == kNegInf<Real>) return y;
  if (y == kNegInf<Real>) return x;
  const Real m = x > y ? x : y;
  const Real d = x > y ? y - x : x - y;
  return m + std::log1p(std::exp(d));
}

template <class Real>
inline Real log_sum(std::span<const Real> xs) {
  Real m = kNegInf<Real>;
  for (Real x : xs) m = m > x ? m : x;
  if (m == kNegInf<Real>) return m;
  Real s = 0;
  for (Real x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace natc
