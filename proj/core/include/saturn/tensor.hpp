#pragma once

// Minimal dense row-major matrix used by the message-passing network and the policy.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace saturn {

using Vector = std::vector<double>;

struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }
  std::size_t size() const noexcept { return data.size(); }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// out += m * x
inline void gemv_acc(const Tensor& m, std::span<const double> x, std::span<double> out) {
  assert(x.size() == m.cols && out.size() == m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* w = m.data.data() + r * m.cols;
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) s += w[c] * x[c];
    out[r] += s;
  }
}

/// out += m^T * x
inline void gemv_t_acc(const Tensor& m, std::span<const double> x, std::span<double> out) {
  assert(x.size() == m.rows && out.size() == m.cols);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* w = m.data.data() + r * m.cols;
    const double xr = x[r];
    for (std::size_t c = 0; c < m.cols; ++c) out[c] += w[c] * xr;
  }
}

/// g += a * b^T
inline void outer_acc(std::span<const double> a, std::span<const double> b, Tensor& g) {
  assert(a.size() == g.rows && b.size() == g.cols);
  for (std::size_t r = 0; r < g.rows; ++r) {
    double* row = g.data.data() + r * g.cols;
    const double ar = a[r];
    if (ar == 0.0) continue;
    for (std::size_t c = 0; c < g.cols; ++c) row[c] += ar * b[c];
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double l2_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace saturn
