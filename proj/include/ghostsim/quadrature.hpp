#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>

#include "ghostsim/grid.hpp"

namespace ghostsim {

namespace detail {

// Composite Simpson node coefficient (1,4,2,4,...,4,1)/3 for an odd node count.
// For an even count the last panel falls back to the trapezoid rule.
inline double quad_coeff(std::size_t i, std::size_t n) {
  const bool odd_count = (n % 2 == 1);
  const std::size_t simpson_last = odd_count ? n - 1 : n - 2;
  if (i > simpson_last) return 0.5;  // trapezoid end node
  double c;
  if (i == 0 || i == simpson_last)
    c = 1.0 / 3.0;
  else
    c = (i % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0;
  if (!odd_count && i == simpson_last) c += 0.5;  // node shared with the trapezoid panel
  return c;
}

}  // namespace detail

/// Composite quadrature of complex samples over the grid extent.
/// Simpson weighting on odd counts; trapezoid closing panel on even counts.
inline std::complex<double> integrate_sampled(const Grid1D& grid,
                                              std::span<const std::complex<double>> values) {
  if (values.size() != grid.count)
    throw std::invalid_argument("integrate_sampled: sample count mismatch");
  if (grid.count < 3) throw std::invalid_argument("integrate_sampled: need count >= 3");
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t i = 0; i < grid.count; ++i) {
    const auto v = values[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::invalid_argument("integrate_sampled: non-finite sample");
    acc += detail::quad_coeff(i, grid.count) * v;
  }
  return acc * grid.step;
}

inline std::complex<double> integrate_sampled(const ComplexField& field) {
  return integrate_sampled(field.grid, field.values);
}

/// Real-valued overload (counting rates, probabilities).
inline double integrate_sampled(const Grid1D& grid, std::span<const double> values) {
  if (values.size() != grid.count)
    throw std::invalid_argument("integrate_sampled: sample count mismatch");
  if (grid.count < 3) throw std::invalid_argument("integrate_sampled: need count >= 3");
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.count; ++i) {
    if (!std::isfinite(values[i]))
      throw std::invalid_argument("integrate_sampled: non-finite sample");
    acc += detail::quad_coeff(i, grid.count) * values[i];
  }
  return acc * grid.step;
}

/// Closed form of the Gaussian-windowed chirp transform:
///   int exp(-x^2/(2 a^2)) exp(i beta x^2) exp(-i k x) dx
///     = sqrt(pi/gamma) exp(-k^2/(4 gamma)),  gamma = 1/(2 a^2) - i beta.
/// Principal square root; Re(gamma) > 0 for a > 0 so the branch is unambiguous.
inline std::complex<double> gaussian_chirp_integral(double a, double beta, double k) {
  if (!(a > 0.0)) throw std::invalid_argument("gaussian_chirp_integral: a must be > 0");
  const std::complex<double> gamma(1.0 / (2.0 * a * a), -beta);
  return std::sqrt(std::numbers::pi / gamma) * std::exp(-k * k / (4.0 * gamma));
}

/// Sampling rule for Gaussian-windowed chirped integrands: extent spans
/// +-halfwidth_sigmas*a and the fastest local phase (|beta|*extent + |k|)
/// advances by less than pi/4 per step. Count is odd and at least 33.
inline Grid1D recommend_grid(double a, double beta_max, double k_max,
                             double halfwidth_sigmas = 8.0) {
  if (!(a > 0.0)) throw std::invalid_argument("recommend_grid: a must be > 0");
  if (!(halfwidth_sigmas > 0.0))
    throw std::invalid_argument("recommend_grid: halfwidth_sigmas must be > 0");
  const double halfwidth = halfwidth_sigmas * a;
  const double extent = 2.0 * halfwidth;
  const double rate = std::abs(beta_max) * extent + std::abs(k_max);
  std::size_t count = 33;
  if (rate > 0.0) {
    const double step_bound = (std::numbers::pi / 4.0) / rate;
    const auto n = static_cast<std::size_t>(std::ceil(extent / step_bound)) + 1;
    count = std::max(count, n);
  }
  if (count % 2 == 0) ++count;
  return Grid1D::centered(halfwidth, count);
}

}  // namespace ghostsim
