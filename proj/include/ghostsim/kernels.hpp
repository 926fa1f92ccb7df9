#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ghostsim/geometry.hpp"
#include "ghostsim/grid.hpp"
#include "ghostsim/parallel.hpp"
#include "ghostsim/quadrature.hpp"

namespace ghostsim {

enum class SignalPlane { ghost, diffraction };
enum class IdlerDetector { slit_plane, collector_focus };

struct PlaneSelector {
  SignalPlane signal_plane = SignalPlane::ghost;
  IdlerDetector idler_detector = IdlerDetector::slit_plane;
};

/// Sampling policy shared by every kernel/model evaluation.
struct GridPolicy {
  double halfwidth_sigmas = 8.0;       ///< pump Gaussian truncation, +-N*a_p
  double max_phase_step = std::numbers::pi / 4.0;  ///< max phase advance per step
  std::size_t slit_points_default = 513;
  std::size_t slit_points_min = 129;
  double focus_capture_halfwidth = 0.0;  ///< xD1 half-range; 0 = auto (>=99.9% energy)
  double focus_samples_per_lobe = 16.0;  ///< xD1 sampling of the lambda*fc/w lobe scale
  std::size_t psf_xos_points = 4097;     ///< pump-face nodes for the mismatch PSF
};

/// Validated geometry plus derived quantities; all kernels take one of these.
struct KernelContext {
  GhostGeometry geometry;
  GridPolicy policy;
  double M = 0.0;

  static KernelContext create(const GhostGeometry& g, const GridPolicy& policy = {}) {
    const GeometryReport rep = validate(g);
    if (!rep.pass) throw std::invalid_argument("KernelContext: invalid geometry: " + rep.message);
    KernelContext ctx;
    ctx.geometry = g;
    ctx.policy = policy;
    ctx.M = magnification(g);
    return ctx;
  }

  /// Amplitude width of the ghost-plane point spread, lambda*d2/(2 pi a_p).
  double psf_sigma() const {
    return geometry.lambda * geometry.d2 / (2.0 * std::numbers::pi * geometry.a_p);
  }
};

/// Free-space impulse response exp(i pi (x2-x0)^2 / (lambda (z2-z0))).
/// Unimodular by construction.
inline std::complex<double> fresnel_kernel(double x2, double z2, double x0, double z0,
                                           double lambda) {
  if (z2 == z0) throw std::invalid_argument("fresnel_kernel: coincident planes");
  const double dx = x2 - x0;
  return std::polar(1.0, std::numbers::pi * dx * dx / (lambda * (z2 - z0)));
}

/// Stationary point of the imaging-lens plane integral,
/// x_L0 = (d1 (d1+d2)/d2) (x1i/S0 + x0i/d1).
inline double imaging_lens_stationary_point(double x1i, double x0i, const GhostGeometry& g) {
  return (g.d1 * (g.d1 + g.d2) / g.d2) * (x1i / g.S0 + x0i / g.d1);
}

/// Stationary-phase value of the imaging-lens plane integral. Valid when the
/// imaging condition holds (the quadratic lens-plane term vanishes):
///   phi = (pi x1i^2/(lambda S0)) (d2 - M d1)/d2
///         - pi x0i^2/(lambda d2) - 2 pi M x1i x0i/(lambda d2).
inline std::complex<double> imaging_lens_phase(double x1i, double x0i, const GhostGeometry& g) {
  const double M = magnification(g);
  const double lam = g.lambda;
  const double phi = (std::numbers::pi * x1i * x1i / (lam * g.S0)) * ((g.d2 - M * g.d1) / g.d2) -
                     std::numbers::pi * x0i * x0i / (lam * g.d2) -
                     2.0 * std::numbers::pi * M * x1i * x0i / (lam * g.d2);
  return std::polar(1.0, phi);
}

/// Stationary point of the collector-lens plane integral, x_co = x1i + xD1.
inline double collector_lens_stationary_point(double x1i, double xD1) { return x1i + xD1; }

/// Stationary-phase value of the collector-lens plane integral,
/// exp(-i 2 pi x1i xD1 / (lambda fc)).
inline std::complex<double> collector_lens_phase(double x1i, double xD1, double fc,
                                                 double lambda) {
  if (!(fc > 0.0)) throw std::invalid_argument("collector_lens_phase: fc must be > 0");
  return std::polar(1.0, -2.0 * std::numbers::pi * x1i * xD1 / (lambda * fc));
}

/// Chirp rate of the pump-face integral for the selected signal plane:
/// 0 at the ghost plane, pi (d2-d3)/(lambda d2 d3) at the diffraction plane.
inline double kernel_chirp_rate(SignalPlane plane, const KernelContext& ctx) {
  const auto& g = ctx.geometry;
  if (plane == SignalPlane::ghost) return 0.0;
  return std::numbers::pi * (g.d2 - g.d3) / (g.lambda * g.d2 * g.d3);
}

/// Spatial frequency of the pump-face integral:
/// 2 pi (M x1i + x_m)/(lambda d2) at the ghost plane,
/// 2 pi (M x1i + x_m d2/d3)/(lambda d2) at the diffraction plane.
inline double kernel_frequency(double x1i, SignalPlane plane, double x_m,
                               const KernelContext& ctx) {
  const auto& g = ctx.geometry;
  const double u =
      (plane == SignalPlane::ghost) ? ctx.M * x1i + x_m : ctx.M * x1i + x_m * (g.d2 / g.d3);
  return 2.0 * std::numbers::pi * u / (g.lambda * g.d2);
}

/// Point-detection kernel f: the pump-face Gaussian transform times the
/// leading detector-plane phase. Ghost plane:
///   f = e^{i pi x_m^2/(lambda d2)} * Int dx0 e^{-x0^2/(2 a_p^2)}
///         e^{-i 2 pi x0 (M x1i + x_m)/(lambda d2)}
/// Diffraction plane adds the chirp e^{i pi x0^2 (d2-d3)/(lambda d2 d3)} and
/// scales x_m by d2/d3 in the frequency. Both are gaussian_chirp_integral
/// instances, evaluated in closed form.
inline std::complex<double> kernel_f(double x1i, SignalPlane plane, double x_m,
                                     const KernelContext& ctx) {
  const auto& g = ctx.geometry;
  const double z = (plane == SignalPlane::ghost) ? g.d2 : g.d3;
  const double beta = kernel_chirp_rate(plane, ctx);
  const double k = kernel_frequency(x1i, plane, x_m, ctx);
  const auto lead = std::polar(1.0, std::numbers::pi * x_m * x_m / (g.lambda * z));
  return lead * gaussian_chirp_integral(g.a_p, beta, k);
}

/// Slit integration grid for the x1i integrals. The step resolves the kernel
/// envelope (scale psf_sigma/M) and keeps the collector phase below
/// max_phase_step per step at the largest |xD1| requested.
inline Grid1D slit_grid(const KernelContext& ctx, double max_abs_xD1 = 0.0) {
  const auto& g = ctx.geometry;
  double step = ctx.psf_sigma() / (4.0 * ctx.M);
  if (max_abs_xD1 > 0.0) {
    const double rate = 2.0 * std::numbers::pi * max_abs_xD1 / (g.lambda * g.fc);
    step = std::min(step, ctx.policy.max_phase_step / rate);
  }
  auto count = static_cast<std::size_t>(std::ceil(g.w / step)) + 1;
  count = std::max({count, ctx.policy.slit_points_default, ctx.policy.slit_points_min});
  if (count % 2 == 0) ++count;
  return Grid1D(-g.w / 2.0, g.w / static_cast<double>(count - 1), count);
}

/// Collector-focus kernel g: the slit-windowed transform of f,
///   g(xD1) = Int_{-w/2}^{w/2} dx1i e^{-i 2 pi x1i xD1/(lambda fc)} f(x1i, ...).
inline std::complex<double> kernel_g(double xD1, SignalPlane plane, double x_m,
                                     const KernelContext& ctx) {
  const auto& g = ctx.geometry;
  const Grid1D grid = slit_grid(ctx, std::abs(xD1));
  std::vector<std::complex<double>> vals(grid.count);
  for (std::size_t j = 0; j < grid.count; ++j) {
    const double x1i = grid.position(j);
    vals[j] = collector_lens_phase(x1i, xD1, g.fc, g.lambda) * kernel_f(x1i, plane, x_m, ctx);
  }
  return integrate_sampled(grid, vals);
}

/// Batch form of kernel_g: one signal position, every xD1 of a sweep. Shares
/// the slit samples of f across the sweep (the grid honors the phase rule at
/// the largest |xD1|), which is what the distribution models iterate.
inline std::vector<std::complex<double>> kernel_g_sweep(const Grid1D& xD1_grid,
                                                        SignalPlane plane, double x_m,
                                                        const KernelContext& ctx) {
  const auto& g = ctx.geometry;
  const double max_abs = std::max(std::abs(xD1_grid.start), std::abs(xD1_grid.last()));
  const Grid1D sgrid = slit_grid(ctx, max_abs);
  std::vector<std::complex<double>> fw(sgrid.count);
  for (std::size_t j = 0; j < sgrid.count; ++j)
    fw[j] = detail::quad_coeff(j, sgrid.count) * sgrid.step *
            kernel_f(sgrid.position(j), plane, x_m, ctx);

  std::vector<std::complex<double>> out(xD1_grid.count);
  const double x0 = sgrid.start;
  for (std::size_t i = 0; i < xD1_grid.count; ++i) {
    const double omega = 2.0 * std::numbers::pi * xD1_grid.position(i) / (g.lambda * g.fc);
    const auto rot = std::polar(1.0, -omega * sgrid.step);
    std::complex<double> ph = std::polar(1.0, -omega * x0);
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < sgrid.count; ++j) {
      if ((j & 0xff) == 0) ph = std::polar(1.0, -omega * sgrid.position(j));  // drift resync
      acc += fw[j] * ph;
      ph *= rot;
    }
    out[i] = acc;
  }
  return out;
}

namespace detail {

inline double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace detail

/// Ghost-plane point spread with the crystal-length phase mismatch included:
///   |Int dx0 e^{i pi x0^2/(lambda d2)} e^{-i 2 pi x0 x2s/(lambda d2)} A_P(x0)
///      * Int dk sinc(k^2 L/(2 k_i)) e^{i k^2 (lambda d2/(4 pi) + L/(2 k_i))}
///        e^{-i k x0}|^2
/// with A_P(x0) = exp(-x0^2/(2 a_p^2)) and k_i = 2 pi n_crystal/lambda.
/// The inner transform is evaluated once per pump-face node and reused for
/// every x2s. The k grid is truncated at the 6th sinc zero,
/// k_max = sqrt(12 pi k_i / L). For L = 0 the matched closed form applies.
class MismatchPsf {
 public:
  MismatchPsf(const KernelContext& ctx, double L) : ctx_(ctx), L_(L) {
    if (L < 0.0) throw std::invalid_argument("MismatchPsf: L must be >= 0");
    if (L_ == 0.0) return;  // analytic matched limit
    const auto& g = ctx.geometry;
    const double k_i = 2.0 * std::numbers::pi * g.n_crystal / g.lambda;
    const double c2 = g.lambda * g.d2 / (4.0 * std::numbers::pi) + L / (2.0 * k_i);
    const double kappa_max = std::sqrt(12.0 * std::numbers::pi * k_i / L);
    const double xos_max = ctx.policy.halfwidth_sigmas * g.a_p;

    // kappa step: pi/4 phase rule against the chirp + pump-face frequency,
    // and at least 16 nodes across the narrowest (outermost) sinc lobe.
    const double rate = 2.0 * c2 * kappa_max + xos_max;
    const double lobe =
        std::sqrt(2.0 * std::numbers::pi * k_i / L) * (std::sqrt(6.0) - std::sqrt(5.0));
    const double kstep = std::min(ctx.policy.max_phase_step / rate, lobe / 16.0);
    auto nk = static_cast<std::size_t>(std::ceil(2.0 * kappa_max / kstep)) + 1;
    if (nk % 2 == 0) ++nk;
    kappa_grid_ = Grid1D::centered(kappa_max, nk);

    std::size_t nx = ctx.policy.psf_xos_points;
    if (nx % 2 == 0) ++nx;
    xos_grid_ = Grid1D::centered(xos_max, nx);

    // sinc * chirp samples with quadrature weights folded in
    std::vector<std::complex<double>> sk(nk);
    for (std::size_t j = 0; j < nk; ++j) {
      const double kap = kappa_grid_.position(j);
      const double arg = kap * kap * L / (2.0 * k_i);
      sk[j] = detail::quad_coeff(j, nk) * kappa_grid_.step * detail::sinc(arg) *
              std::polar(1.0, kap * kap * c2);
    }

    // envelope H(x0) = A_P(x0) e^{i pi x0^2/(lambda d2)} * inner(x0), with the
    // outer quadrature weight folded in; the leading chirp nearly cancels the
    // stationary phase of inner, so H is slowly varying on this grid.
    env_.resize(nx);
    const double lead = std::numbers::pi / (g.lambda * g.d2);
    parallel_for(nx, [&](std::size_t i) {
      const double x0 = xos_grid_.position(i);
      std::complex<double> inner{0.0, 0.0};
      const auto rot = std::polar(1.0, -x0 * kappa_grid_.step);
      std::complex<double> ph = std::polar(1.0, -x0 * kappa_grid_.start);
      for (std::size_t j = 0; j < nk; ++j) {
        if ((j & 0xff) == 0) ph = std::polar(1.0, -x0 * kappa_grid_.position(j));
        inner += sk[j] * ph;
        ph *= rot;
      }
      env_[i] = detail::quad_coeff(i, nx) * xos_grid_.step *
                std::exp(-x0 * x0 / (2.0 * g.a_p * g.a_p)) * std::polar(1.0, lead * x0 * x0) *
                inner;
    });
  }

  /// Point spread value (arbitrary units, nonnegative) at signal position x2s.
  double operator()(double x2s) const {
    const auto& g = ctx_.geometry;
    if (L_ == 0.0) {
      const double k = 2.0 * std::numbers::pi * x2s / (g.lambda * g.d2);
      return std::norm(gaussian_chirp_integral(g.a_p, 0.0, k));
    }
    const double freq = 2.0 * std::numbers::pi * x2s / (g.lambda * g.d2);
    std::complex<double> acc{0.0, 0.0};
    const auto rot = std::polar(1.0, -freq * xos_grid_.step);
    std::complex<double> ph = std::polar(1.0, -freq * xos_grid_.start);
    for (std::size_t i = 0; i < env_.size(); ++i) {
      if ((i & 0xff) == 0) ph = std::polar(1.0, -freq * xos_grid_.position(i));
      acc += env_[i] * ph;
      ph *= rot;
    }
    return std::norm(acc);
  }

  double crystal_length() const { return L_; }
  const Grid1D& kappa_grid() const { return kappa_grid_; }
  const Grid1D& pump_grid() const { return xos_grid_; }

 private:
  KernelContext ctx_;
  double L_ = 0.0;
  Grid1D kappa_grid_;
  Grid1D xos_grid_;
  std::vector<std::complex<double>> env_;
};

/// One-shot evaluation; sweeps should construct a MismatchPsf and reuse it.
inline double psf_with_mismatch(double x2s, const KernelContext& ctx, double L) {
  return MismatchPsf(ctx, L)(x2s);
}

}  // namespace ghostsim
