#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ghostsim/analysis.hpp"
#include "ghostsim/distribution.hpp"
#include "ghostsim/grid.hpp"
#include "ghostsim/kernels.hpp"
#include "ghostsim/parallel.hpp"
#include "ghostsim/quadrature.hpp"

namespace ghostsim {

// ---------------------------------------------------------------------------
// Default grids
// ---------------------------------------------------------------------------

/// Width estimate of a single-point diffraction-plane kernel |f|^2.
inline double diffraction_fwhm_estimate(const KernelContext& ctx) {
  const auto& g = ctx.geometry;
  const double beta = std::numbers::pi * (g.d3 - g.d2) / (g.lambda * g.d2 * g.d3);
  const double gamma_mag = std::hypot(1.0 / (2.0 * g.a_p * g.a_p), beta);
  return 4.0 * g.a_p * gamma_mag * std::sqrt(std::log(2.0)) * g.lambda * g.d3 /
         (2.0 * std::numbers::pi);
}

/// Ghost-plane grid wide enough for the magnified slit image plus tails.
inline Grid1D default_signal_grid(SignalPlane plane, const KernelContext& ctx,
                                  std::size_t count = 641) {
  const auto& g = ctx.geometry;
  if (count % 2 == 0) ++count;
  if (plane == SignalPlane::ghost) {
    const double hw = ctx.M * g.w / 2.0 + 12.0 * ctx.psf_sigma();
    return Grid1D::centered(hw, count);
  }
  return Grid1D::centered(1.7 * diffraction_fwhm_estimate(ctx), count);
}

/// Ghost-plane grid used for detection probabilities (Eq-level: the
/// normalizing integrals over x2s). Covers the image plus 8 amplitude sigmas.
inline Grid1D ghost_probability_grid(const KernelContext& ctx, std::size_t count = 401) {
  const auto& g = ctx.geometry;
  if (count % 2 == 0) ++count;
  return Grid1D::centered(ctx.M * g.w / 2.0 + 8.0 * ctx.psf_sigma(), count);
}

/// Single-slit lobe scale lambda*fc/w of the collector focal plane.
inline double focus_lobe(const KernelContext& ctx) {
  return ctx.geometry.lambda * ctx.geometry.fc / ctx.geometry.w;
}

/// Analytic capture estimate for the xD1 integration range [-R, R]. The
/// slit-edge tails of |g|^2 fall off as 1/xD1^2, which integrates to the
/// lambda*fc/(pi^2 R w) fraction lying outside the range.
inline double focus_coverage_estimate(const KernelContext& ctx, double halfwidth) {
  const auto& g = ctx.geometry;
  const double tail = g.lambda * g.fc / (std::numbers::pi * std::numbers::pi * halfwidth * g.w);
  return std::max(0.0, 1.0 - tail);
}

/// Half-range of the xD1 integration; the default targets >= 99.9% capture.
inline double focus_capture_halfwidth(const KernelContext& ctx) {
  if (ctx.policy.focus_capture_halfwidth > 0.0) return ctx.policy.focus_capture_halfwidth;
  const auto& g = ctx.geometry;
  const double tail_budget = 1e-3;
  const double min_for_budget =
      1.35 * g.lambda * g.fc / (std::numbers::pi * std::numbers::pi * g.w * tail_budget);
  return std::max(12.0 * focus_lobe(ctx), min_for_budget);
}

/// Uniform xD1 grid over the capture range, resolving the lobe scale.
inline Grid1D focus_xD1_grid(const KernelContext& ctx) {
  const double hw = focus_capture_halfwidth(ctx);
  const double step = focus_lobe(ctx) / ctx.policy.focus_samples_per_lobe;
  auto count = static_cast<std::size_t>(std::ceil(2.0 * hw / step)) + 1;
  count = std::max<std::size_t>(count, 129);
  if (count % 2 == 0) ++count;
  return Grid1D::centered(hw, count);
}

namespace detail {

inline void warn_focus_coverage(const KernelContext& ctx, double halfwidth) {
  const double cov = focus_coverage_estimate(ctx, halfwidth);
  if (cov < 0.999) {
    std::cerr << "[ghostsim] warning: xD1 range +-" << halfwidth << " m captures ~"
              << 100.0 * cov << "% of the collector-plane pattern energy (< 99.9%)\n";
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Non-collapse (Heisenberg) correlated counting rates
// ---------------------------------------------------------------------------

/// Correlated counting rate of the non-collapse evolution.
/// Slit detector: Int_{-w/2}^{w/2} dx1i |f(x1i, plane, x_m)|^2.
/// Focus detector: Int dxD1 |g(xD1, plane, x_m)|^2 over the capture range.
inline Distribution heisenberg_ccr(const PlaneSelector& sel, const Grid1D& signal_grid,
                                   const KernelContext& ctx) {
  std::vector<double> out(signal_grid.count);
  if (sel.idler_detector == IdlerDetector::slit_plane) {
    const Grid1D sgrid = slit_grid(ctx);
    parallel_for(signal_grid.count, [&](std::size_t j) {
      const double x_m = signal_grid.position(j);
      double acc = 0.0;
      for (std::size_t i = 0; i < sgrid.count; ++i)
        acc += detail::quad_coeff(i, sgrid.count) *
               std::norm(kernel_f(sgrid.position(i), sel.signal_plane, x_m, ctx));
      out[j] = acc * sgrid.step;
    });
  } else {
    const Grid1D dgrid = focus_xD1_grid(ctx);
    detail::warn_focus_coverage(ctx, std::abs(dgrid.last()));
    parallel_for(signal_grid.count, [&](std::size_t j) {
      const auto gs = kernel_g_sweep(dgrid, sel.signal_plane, signal_grid.position(j), ctx);
      double acc = 0.0;
      for (std::size_t i = 0; i < dgrid.count; ++i)
        acc += detail::quad_coeff(i, dgrid.count) * std::norm(gs[i]);
      out[j] = acc * dgrid.step;
    });
  }
  return Distribution(signal_grid, std::move(out), Normalization::raw);
}

// ---------------------------------------------------------------------------
// Pure-state collapse
// ---------------------------------------------------------------------------

/// Collapsed signal amplitude for the uniform slit-integrated idler state:
/// psi(x_m) = Int_{-w/2}^{w/2} dx1i f(x1i, plane, x_m).
inline ComplexField pure_collapse_state(SignalPlane plane, const Grid1D& signal_grid,
                                        const KernelContext& ctx) {
  ComplexField out(signal_grid);
  const Grid1D sgrid = slit_grid(ctx);
  parallel_for(signal_grid.count, [&](std::size_t j) {
    const double x_m = signal_grid.position(j);
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < sgrid.count; ++i)
      acc += detail::quad_coeff(i, sgrid.count) * kernel_f(sgrid.position(i), plane, x_m, ctx);
    out.values[j] = acc * sgrid.step;
  });
  return out;
}

inline Distribution counting_rate(const ComplexField& state,
                                  Normalization n = Normalization::raw) {
  std::vector<double> v(state.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::norm(state.values[i]);
  Distribution d(state.grid, std::move(v), Normalization::raw);
  return n == Normalization::raw ? d : normalize(d, n);
}

/// Boundary |psi|^2 relative to the peak; the propagation precondition wants
/// this below 1e-8.
inline double boundary_leakage(const ComplexField& state) {
  double peak = 0.0;
  for (const auto& v : state.values) peak = std::max(peak, std::norm(v));
  if (peak == 0.0) return 0.0;
  return std::max(std::norm(state.values.front()), std::norm(state.values.back())) / peak;
}

/// Fresnel propagation of a ghost-plane state to the diffraction plane:
/// psi(x3s) = (i lambda dz)^{-1/2} Int dx2s e^{i pi (x3s-x2s)^2/(lambda dz)}
/// psi(x2s) with dz = d3 - d2. The unitary prefactor keeps Int |psi|^2
/// invariant; it drops out of every normalized distribution.
inline ComplexField propagate_state(const ComplexField& state_at_d2, const Grid1D& out_grid,
                                    const KernelContext& ctx) {
  const auto& g = ctx.geometry;
  const double dz = g.d3 - g.d2;
  if (boundary_leakage(state_at_d2) >= 1e-8)
    std::cerr << "[ghostsim] warning: propagate_state input grid truncates |psi|^2 above "
                 "1e-8 of peak; boundary leakage will alias\n";
  const std::complex<double> pref = 1.0 / std::sqrt(std::complex<double>(0.0, g.lambda * dz));
  ComplexField out(out_grid);
  const auto& in = state_at_d2;
  parallel_for(out_grid.count, [&](std::size_t j) {
    const double x3 = out_grid.position(j);
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < in.grid.count; ++i)
      acc += detail::quad_coeff(i, in.grid.count) *
             fresnel_kernel(x3, g.d3, in.grid.position(i), g.d2, g.lambda) * in.values[i];
    out.values[j] = pref * acc * in.grid.step;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Mixed-state collapse ensemble
// ---------------------------------------------------------------------------

/// Diagonal density-matrix ensemble of collapsed signal states, indexed by
/// the idler detection position (x1i across the slit, or xD1 across the
/// collector focal plane). Basis fields are unit-normalized on their grid;
/// P is the detection probability density with sum(P * weights) = 1.
struct CollapseEnsemble {
  IdlerDetector idler = IdlerDetector::slit_plane;
  SignalPlane plane = SignalPlane::ghost;
  Grid1D idler_positions;
  std::vector<ComplexField> basis_fields;
  std::vector<double> K;        ///< per-basis normalizer applied to basis_fields
  std::vector<double> P;        ///< probability density over idler_positions
  std::vector<double> weights;  ///< integration weights (trapezoid ends)
  double K2 = 0.0;              ///< global probability normalizer
};

/// Point-spread basis states and detection probabilities of the mixed-state
/// collapse. Probabilities are always evaluated at the ghost plane (the
/// collapse plane), whatever signal plane the basis fields live on.
inline CollapseEnsemble build_ensemble(IdlerDetector idler, SignalPlane plane,
                                       const Grid1D& signal_grid, const KernelContext& ctx) {
  CollapseEnsemble e;
  e.idler = idler;
  e.plane = plane;

  const Grid1D pgrid = ghost_probability_grid(ctx);
  if (idler == IdlerDetector::slit_plane) {
    e.idler_positions = slit_grid(ctx);
    const std::size_t n = e.idler_positions.count;
    e.basis_fields.assign(n, ComplexField(signal_grid));
    e.P.assign(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
      const double x1i = e.idler_positions.position(i);
      auto& field = e.basis_fields[i];
      for (std::size_t j = 0; j < signal_grid.count; ++j)
        field.values[j] = kernel_f(x1i, plane, signal_grid.position(j), ctx);
      std::vector<double> prob(pgrid.count);
      for (std::size_t j = 0; j < pgrid.count; ++j)
        prob[j] = std::norm(kernel_f(x1i, SignalPlane::ghost, pgrid.position(j), ctx));
      e.P[i] = integrate_sampled(pgrid, std::span<const double>(prob));
    });
  } else {
    e.idler_positions = focus_xD1_grid(ctx);
    detail::warn_focus_coverage(ctx, std::abs(e.idler_positions.last()));
    const std::size_t n = e.idler_positions.count;
    e.basis_fields.assign(n, ComplexField(signal_grid));
    e.P.assign(n, 0.0);
    // g(xD1_n, x_m) for all n at once, one signal position per pass
    parallel_for(signal_grid.count, [&](std::size_t j) {
      const auto gs = kernel_g_sweep(e.idler_positions, plane, signal_grid.position(j), ctx);
      for (std::size_t i = 0; i < n; ++i) e.basis_fields[i].values[j] = gs[i];
    });
    std::vector<std::vector<double>> prob(pgrid.count);
    parallel_for(pgrid.count, [&](std::size_t j) {
      const auto gs =
          kernel_g_sweep(e.idler_positions, SignalPlane::ghost, pgrid.position(j), ctx);
      auto& row = prob[j];
      row.resize(n);
      for (std::size_t i = 0; i < n; ++i) row[i] = std::norm(gs[i]);
    });
    parallel_for(n, [&](std::size_t i) {
      std::vector<double> col(pgrid.count);
      for (std::size_t j = 0; j < pgrid.count; ++j) col[j] = prob[j][i];
      e.P[i] = integrate_sampled(pgrid, std::span<const double>(col));
    });
  }

  // unit-normalize each basis on the signal grid
  const std::size_t n = e.idler_positions.count;
  std::vector<double> norms(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const auto& vals = e.basis_fields[i].values;
    std::vector<double> mag(vals.size());
    for (std::size_t j = 0; j < mag.size(); ++j) mag[j] = std::norm(vals[j]);
    norms[i] = integrate_sampled(signal_grid, std::span<const double>(mag));
  });
  e.K.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(norms[i] > 0.0)) throw std::invalid_argument("build_ensemble: zero-norm basis state");
    e.K[i] = 1.0 / std::sqrt(norms[i]);
  }
  parallel_for(n, [&](std::size_t i) {
    for (auto& v : e.basis_fields[i].values) v *= e.K[i];
  });

  // probability normalization: sum P_n * weight_n = 1
  e.weights.assign(n, e.idler_positions.step);
  e.weights.front() *= 0.5;
  e.weights.back() *= 0.5;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += e.P[i] * e.weights[i];
  if (!(total > 0.0)) throw std::invalid_argument("build_ensemble: zero total probability");
  e.K2 = 1.0 / total;
  for (auto& p : e.P) p *= e.K2;
  return e;
}

/// Incoherent probability-weighted sum over the ensemble:
/// CR(x_m) = sum_n P_n dx |psi_n(x_m)|^2.
inline Distribution mixed_collapse_cr(const CollapseEnsemble& e) {
  const std::size_t n = e.basis_fields.size();
  if (n == 0 || e.P.size() != n || e.weights.size() != n)
    throw std::invalid_argument("mixed_collapse_cr: malformed ensemble");
  const Grid1D& grid = e.basis_fields.front().grid;
  std::vector<double> out(grid.count, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double wp = e.P[i] * e.weights[i];
    const auto& vals = e.basis_fields[i].values;
    for (std::size_t j = 0; j < grid.count; ++j) out[j] += wp * std::norm(vals[j]);
  }
  return Distribution(grid, std::move(out), Normalization::raw);
}

/// Index of the basis state whose idler position is nearest to `position`.
inline std::size_t nearest_basis_index(const CollapseEnsemble& e, double position) {
  const auto& g = e.idler_positions;
  const double raw = (position - g.start) / g.step;
  const auto i = static_cast<long>(std::llround(raw));
  if (i < 0 || static_cast<std::size_t>(i) >= g.count)
    throw std::invalid_argument("nearest_basis_index: position outside the ensemble range");
  return static_cast<std::size_t>(i);
}

/// The detection-probability curve of the ensemble (Fig-10/19 style output).
inline Distribution idler_probability(const CollapseEnsemble& e) {
  return Distribution(e.idler_positions, e.P, Normalization::raw);
}

// ---------------------------------------------------------------------------
// Model comparison
// ---------------------------------------------------------------------------

struct EquivalenceReport {
  PlaneSelector sel;
  ComparisonReport comparison;
  bool pass = false;
};

/// Mixed-collapse vs Heisenberg counting rates through their independent
/// code paths, area-normalized; a failure is a report, not an exception.
inline EquivalenceReport equivalence_check(const KernelContext& ctx, const PlaneSelector& sel,
                                           double tolerance) {
  const Grid1D grid = default_signal_grid(sel.signal_plane, ctx);
  const Distribution heis = heisenberg_ccr(sel, grid, ctx);
  const Distribution mixed =
      mixed_collapse_cr(build_ensemble(sel.idler_detector, sel.signal_plane, grid, ctx));
  EquivalenceReport r;
  r.sel = sel;
  r.comparison = compare(mixed, heis, tolerance);
  r.pass = r.comparison.pass;
  return r;
}

}  // namespace ghostsim
