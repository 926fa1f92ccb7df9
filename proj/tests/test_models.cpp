#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "ghostsim/analysis.hpp"
#include "ghostsim/models.hpp"
#include "oracles.hpp"

using namespace ghostsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using std::numbers::pi;

namespace {

const KernelContext& ref_ctx() {
  static const KernelContext ctx = KernelContext::create(reference_geometry());
  return ctx;
}

/// Reduced collector capture range: keeps the focus-detector tests quick.
/// Probabilities and basis states at a given xD1 are unaffected by the range.
KernelContext short_range_ctx(const GhostGeometry& g) {
  GridPolicy policy;
  policy.focus_capture_halfwidth = 12.0 * g.lambda * g.fc / g.w;
  return KernelContext::create(g, policy);
}

void check_mirror_symmetry(const Distribution& d, double tol) {
  const double peak = *std::max_element(d.values.begin(), d.values.end());
  for (std::size_t i = 0; i < d.grid.count; ++i) {
    const std::size_t j = d.grid.count - 1 - i;
    CHECK(std::abs(d.values[i] - d.values[j]) <= tol * peak);
  }
}

}  // namespace

TEST_CASE("heisenberg slit/ghost reproduces the magnified slit image") {
  const auto& ctx = ref_ctx();
  const auto& g = ctx.geometry;
  const Grid1D grid = default_signal_grid(SignalPlane::ghost, ctx);
  const Distribution d =
      heisenberg_ccr({SignalPlane::ghost, IdlerDetector::slit_plane}, grid, ctx);

  for (double v : d.values) CHECK(v >= 0.0);
  check_mirror_symmetry(d, 1e-6);

  const double width = fwhm(d);
  CHECK(std::abs(width - ctx.M * g.w) / (ctx.M * g.w) < 0.06);

  // rect (x) Gaussian convolution oracle: the image is the magnified slit
  // smeared by the point spread |f|^2 (intensity std = psf_sigma/sqrt(2))
  const double expected =
      oracle::rect_gauss_fwhm(ctx.M * g.w, ctx.psf_sigma() / std::numbers::sqrt2);
  CHECK_THAT(width, WithinRel(expected, 0.01));

  // half-plateau value at the geometric image edge
  const auto at = [&](double x) {
    const auto i = static_cast<std::size_t>(std::llround((x - grid.start) / grid.step));
    return d.values[i];
  };
  const double plateau = at(0.0);
  CHECK_THAT(at(ctx.M * g.w / 2.0) / plateau, WithinAbs(0.5, 0.02));
  CHECK_THAT(at(-ctx.M * g.w / 2.0) / plateau, WithinAbs(0.5, 0.02));
}

TEST_CASE("heisenberg slit/diffraction spreads past the ghost image") {
  const auto& ctx = ref_ctx();
  const Grid1D grid = default_signal_grid(SignalPlane::diffraction, ctx);
  const Distribution d =
      heisenberg_ccr({SignalPlane::diffraction, IdlerDetector::slit_plane}, grid, ctx);
  const double width = fwhm(d);
  CHECK_THAT(width, WithinRel(0.033674, 5e-3));
  const Grid1D ggrid = default_signal_grid(SignalPlane::ghost, ctx);
  const double ghost_width =
      fwhm(heisenberg_ccr({SignalPlane::ghost, IdlerDetector::slit_plane}, ggrid, ctx));
  CHECK(width > 5.0 * ghost_width);
  check_mirror_symmetry(d, 1e-6);
}

TEST_CASE("pure collapse approximates the image but narrows in diffraction") {
  const auto& ctx = ref_ctx();
  const Grid1D ggrid = default_signal_grid(SignalPlane::ghost, ctx);
  const Distribution pure_g = counting_rate(pure_collapse_state(SignalPlane::ghost, ggrid, ctx));
  const Distribution heis_g =
      heisenberg_ccr({SignalPlane::ghost, IdlerDetector::slit_plane}, ggrid, ctx);
  const auto ghost_cmp = compare(pure_g, heis_g, 1.0);
  CHECK(ghost_cmp.rel_l2 < 0.05);  // "very similar" image
  CHECK_THAT(fwhm(pure_g), WithinRel(fwhm(heis_g), 0.05));

  const Grid1D dgrid = default_signal_grid(SignalPlane::diffraction, ctx);
  const Distribution pure_d =
      counting_rate(pure_collapse_state(SignalPlane::diffraction, dgrid, ctx));
  const Distribution heis_d =
      heisenberg_ccr({SignalPlane::diffraction, IdlerDetector::slit_plane}, dgrid, ctx);
  const double ratio = fwhm(pure_d) / fwhm(heis_d);
  CHECK(ratio < 0.5);
  CHECK_THAT(ratio, WithinRel(0.1168, 0.05));

  // w -> 0: the collapsed state degenerates to a single point spread
  GhostGeometry tiny = ctx.geometry;
  tiny.w = 1e-8;
  const auto tctx = KernelContext::create(tiny);
  const Grid1D tgrid = Grid1D::centered(60e-6, 241);
  const auto psi = pure_collapse_state(SignalPlane::ghost, tgrid, tctx);
  for (std::size_t i = 0; i < tgrid.count; ++i) {
    const double expect = std::norm(kernel_f(0.0, SignalPlane::ghost, tgrid.position(i), tctx)) *
                          tiny.w * tiny.w;
    CHECK_THAT(std::norm(psi.values[i]), WithinRel(expect, 1e-6));
  }
}

TEST_CASE("propagation route matches the direct diffraction form") {
  const auto& ctx = ref_ctx();
  // ghost-plane state on a fine grid with negligible boundary amplitude
  const Grid1D in_grid = Grid1D::centered(0.25e-3, 513);
  const auto psi_g = pure_collapse_state(SignalPlane::ghost, in_grid, ctx);
  CHECK(boundary_leakage(psi_g) < 1e-8);

  const Grid1D out_grid = default_signal_grid(SignalPlane::diffraction, ctx);
  const auto psi_prop = propagate_state(psi_g, out_grid, ctx);
  const auto psi_dir = pure_collapse_state(SignalPlane::diffraction, out_grid, ctx);

  const Distribution prop_cr = counting_rate(psi_prop, Normalization::peak1);
  const Distribution dir_cr = counting_rate(psi_dir, Normalization::peak1);
  double maxdiff = 0.0;
  for (std::size_t i = 0; i < out_grid.count; ++i)
    maxdiff = std::max(maxdiff, std::abs(prop_cr.values[i] - dir_cr.values[i]));
  CHECK(maxdiff < 1e-3);

  // unitary propagation conserves the norm
  std::vector<double> in_mag(in_grid.count), out_mag(out_grid.count);
  for (std::size_t i = 0; i < in_grid.count; ++i) in_mag[i] = std::norm(psi_g.values[i]);
  for (std::size_t i = 0; i < out_grid.count; ++i) out_mag[i] = std::norm(psi_prop.values[i]);
  const double n_in = integrate_sampled(in_grid, std::span<const double>(in_mag));
  const double n_out = integrate_sampled(out_grid, std::span<const double>(out_mag));
  CHECK(std::abs(n_out / n_in - 1.0) < 5e-3);
}

TEST_CASE("propagation reproduces Gaussian-beam spreading") {
  const auto& ctx = ref_ctx();
  const auto& g = ctx.geometry;
  const double w0 = 100e-6;
  const Grid1D in_grid = Grid1D::centered(0.5e-3, 1025);
  ComplexField gauss(in_grid);
  for (std::size_t i = 0; i < in_grid.count; ++i) {
    const double x = in_grid.position(i);
    gauss.values[i] = std::exp(-x * x / (w0 * w0));
  }
  const Grid1D out_grid = Grid1D::centered(15e-3, 801);
  const auto out = propagate_state(gauss, out_grid, ctx);
  const double expect_radius = oracle::gaussian_beam_radius(w0, g.lambda, g.d3 - g.d2);
  const double expect_fwhm = expect_radius * std::sqrt(2.0 * std::log(2.0));
  CHECK_THAT(fwhm(counting_rate(out)), WithinRel(expect_fwhm, 0.01));
}

TEST_CASE("slit-plane ensemble: flat probability, narrow shifted bases") {
  const auto& ctx = ref_ctx();
  const Grid1D grid = default_signal_grid(SignalPlane::ghost, ctx);
  const auto e = build_ensemble(IdlerDetector::slit_plane, SignalPlane::ghost, grid, ctx);

  // detection probability is constant across the slit
  const auto [pmin, pmax] = std::minmax_element(e.P.begin(), e.P.end());
  CHECK((*pmax - *pmin) / *pmax < 1e-6);

  // completeness and per-basis normalization
  double total = 0.0;
  for (std::size_t i = 0; i < e.P.size(); ++i) total += e.P[i] * e.weights[i];
  CHECK_THAT(total, WithinAbs(1.0, 1e-6));
  for (std::size_t i = 0; i < e.basis_fields.size(); i += 64) {
    std::vector<double> mag(grid.count);
    for (std::size_t j = 0; j < grid.count; ++j) mag[j] = std::norm(e.basis_fields[i].values[j]);
    CHECK_THAT(integrate_sampled(grid, std::span<const double>(mag)), WithinAbs(1.0, 1e-6));
  }

  // the central basis is the narrow point spread, not the slit image
  const std::size_t mid = nearest_basis_index(e, 0.0);
  std::vector<double> v(grid.count);
  for (std::size_t j = 0; j < grid.count; ++j) v[j] = std::norm(e.basis_fields[mid].values[j]);
  const Distribution central(grid, std::move(v));
  CHECK_THAT(fwhm(central), WithinRel(1.8485e-5, 0.03));
  check_mirror_symmetry(central, 1e-6);

  // a basis at x1i = +42 um images to -M * 42 um
  const std::size_t off = nearest_basis_index(e, 42e-6);
  const double x1i_n = e.idler_positions.position(off);
  const auto& vals = e.basis_fields[off].values;
  std::size_t ipk = 0;
  for (std::size_t j = 1; j < grid.count; ++j)
    if (std::norm(vals[j]) > std::norm(vals[ipk])) ipk = j;
  CHECK(std::abs(grid.position(ipk) - (-ctx.M * x1i_n)) <= grid.step);

  // a signal grid far outside the kernel support has no basis to normalize
  const Grid1D far(9.9e-3, 1e-6, 201);
  CHECK_THROWS_AS(build_ensemble(IdlerDetector::slit_plane, SignalPlane::ghost, far, ctx),
                  std::invalid_argument);
}

TEST_CASE("collector-focus ensemble: imaging bases, smooth probability") {
  const auto ctx = short_range_ctx(reference_geometry());
  const Grid1D grid = default_signal_grid(SignalPlane::ghost, ctx);
  const auto e = build_ensemble(IdlerDetector::collector_focus, SignalPlane::ghost, grid, ctx);

  double total = 0.0;
  for (std::size_t i = 0; i < e.P.size(); ++i) total += e.P[i] * e.weights[i];
  CHECK_THAT(total, WithinAbs(1.0, 1e-6));

  // the xD1 = 0 basis state carries the full slit image (the pure-collapse shape)
  const std::size_t mid = nearest_basis_index(e, 0.0);
  std::vector<double> v(grid.count);
  for (std::size_t j = 0; j < grid.count; ++j) v[j] = std::norm(e.basis_fields[mid].values[j]);
  const Distribution central(grid, std::move(v));
  const Distribution pure_g = counting_rate(pure_collapse_state(SignalPlane::ghost, grid, ctx));
  const auto cmp = compare(central, pure_g, 1e-6);
  CHECK(cmp.pass);
  CHECK_THAT(fwhm(central), WithinRel(ctx.M * ctx.geometry.w, 0.06));

  // detection probability is a smooth pump-limited bump: no Fraunhofer zeros
  // at +-lambda fc / w for this pump radius (coherence across the slit is
  // only ~sqrt(2) psf_sigma / M wide)
  const Distribution prob = idler_probability(e);
  const double lobe = oracle::fraunhofer_lobe(ctx.geometry);
  const double p0 = prob.values[nearest_basis_index(e, 0.0)];
  const double p1 = prob.values[nearest_basis_index(e, lobe)];
  CHECK_THAT(p1 / p0, WithinAbs(0.9554587806667035, 5e-3));
  CHECK_THAT(fwhm(prob), WithinRel(1.7159778062813308e-3, 0.01));
  check_mirror_symmetry(prob, 1e-5);
}

TEST_CASE("single-slit zeros emerge when the pump aperture shrinks") {
  // with a 20 um pump the point spread dwarfs the slit, the conditioned idler
  // fills it coherently, and the focal-plane probability becomes the
  // uniform-slit Fraunhofer pattern
  GhostGeometry g = reference_geometry();
  g.a_p = 20e-6;
  GridPolicy policy;
  policy.focus_capture_halfwidth = 2.0 * g.lambda * g.fc / g.w;
  const auto ctx = KernelContext::create(g, policy);
  const Grid1D grid = default_signal_grid(SignalPlane::ghost, ctx, 401);
  const auto e = build_ensemble(IdlerDetector::collector_focus, SignalPlane::ghost, grid, ctx);
  const Distribution prob = idler_probability(e);
  const double lobe = oracle::fraunhofer_lobe(g);
  const double p0 = prob.values[nearest_basis_index(e, 0.0)];
  const double p1 = prob.values[nearest_basis_index(e, lobe)];
  CHECK(p1 / p0 < 0.01);

  // the first minimum right of center sits at the single-slit zero
  const auto& P = prob.values;
  std::size_t i = nearest_basis_index(e, 0.0);
  while (i + 1 < P.size() && P[i + 1] < P[i]) ++i;
  CHECK(std::abs(e.idler_positions.position(i) - lobe) <= 2.0 * e.idler_positions.step);
}

TEST_CASE("mixed collapse equals the single point spread for a point slit") {
  GhostGeometry tiny = reference_geometry();
  tiny.w = 1e-8;
  const auto ctx = KernelContext::create(tiny);
  const Grid1D grid = Grid1D::centered(60e-6, 241);
  const auto e = build_ensemble(IdlerDetector::slit_plane, SignalPlane::ghost, grid, ctx);
  const Distribution cr = mixed_collapse_cr(e);
  const Distribution single = normalize(cr, Normalization::peak1);
  const double ref0 = std::norm(kernel_f(0.0, SignalPlane::ghost, 0.0, ctx));
  for (std::size_t j = 0; j < grid.count; j += 16) {
    const double expect =
        std::norm(kernel_f(0.0, SignalPlane::ghost, grid.position(j), ctx)) / ref0;
    CHECK_THAT(single.values[j], WithinAbs(expect, 1e-6));
  }
}

TEST_CASE("mixed state equals Heisenberg through independent paths") {
  const auto& ctx = ref_ctx();
  // slit detector, both planes, at the full default grids
  for (SignalPlane plane : {SignalPlane::ghost, SignalPlane::diffraction}) {
    const auto rep = equivalence_check(ctx, {plane, IdlerDetector::slit_plane}, 1e-3);
    CAPTURE(static_cast<int>(plane));
    CHECK(rep.pass);
    CHECK(rep.comparison.max_abs_diff > 1e-12);  // distinct discretizations
  }
  // focus detector on the reduced shared range
  const auto sctx = short_range_ctx(reference_geometry());
  for (SignalPlane plane : {SignalPlane::ghost, SignalPlane::diffraction}) {
    const auto rep = equivalence_check(sctx, {plane, IdlerDetector::collector_focus}, 1e-3);
    CAPTURE(static_cast<int>(plane));
    CHECK(rep.pass);
  }

  // the same comparator flags the pure-state collapse in the diffraction plane
  const Grid1D dgrid = default_signal_grid(SignalPlane::diffraction, ctx);
  const auto cmp = compare(
      counting_rate(pure_collapse_state(SignalPlane::diffraction, dgrid, ctx)),
      heisenberg_ccr({SignalPlane::diffraction, IdlerDetector::slit_plane}, dgrid, ctx), 1e-3);
  CHECK_FALSE(cmp.pass);
  CHECK(cmp.rel_l2 > 0.3);

  // a tolerance below the discretization floor fails with a finite residual
  const auto strict =
      equivalence_check(ctx, {SignalPlane::ghost, IdlerDetector::slit_plane}, 1e-12);
  CHECK_FALSE(strict.pass);
  CHECK(strict.comparison.max_abs_diff > 1e-12);
}

TEST_CASE("focus-detector counting rate approaches the slit-plane rate (Plancherel)") {
  const Grid1D grid = default_signal_grid(SignalPlane::ghost, ref_ctx());
  const Distribution slit_cr =
      heisenberg_ccr({SignalPlane::ghost, IdlerDetector::slit_plane}, grid, ref_ctx());

  // modest capture range: visible edge softening
  const auto sctx = short_range_ctx(reference_geometry());
  const Distribution short_cr =
      heisenberg_ccr({SignalPlane::ghost, IdlerDetector::collector_focus}, grid, sctx);
  const double short_diff = compare(short_cr, slit_cr, 1.0).max_abs_diff;

  // full capture range: the transform energy matches the slit integral
  const Distribution full_cr =
      heisenberg_ccr({SignalPlane::ghost, IdlerDetector::collector_focus}, grid, ref_ctx());
  const double full_diff = compare(full_cr, slit_cr, 1.0).max_abs_diff;
  CHECK(full_diff < 2.5e-2);
  CHECK(full_diff < short_diff);
}

TEST_CASE("focus capture range policy") {
  const auto& ctx = ref_ctx();
  const double lobe = focus_lobe(ctx);
  CHECK(focus_coverage_estimate(ctx, 6.0 * lobe) < 0.999);
  CHECK(focus_coverage_estimate(ctx, focus_capture_halfwidth(ctx)) >= 0.999);
  const Grid1D dgrid = focus_xD1_grid(ctx);
  CHECK(dgrid.count % 2 == 1);
  CHECK(dgrid.step <= lobe / 8.0);
}
