#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghostsim/analysis.hpp"
#include "ghostsim/models.hpp"

namespace ghostsim {

enum class ScenarioModel { heisenberg, pure, mixed, mixed_basis, idler_prob, psf_mismatch };

inline std::string to_string(ScenarioModel m) {
  switch (m) {
    case ScenarioModel::heisenberg: return "heisenberg";
    case ScenarioModel::pure: return "pure";
    case ScenarioModel::mixed: return "mixed";
    case ScenarioModel::mixed_basis: return "mixed_basis";
    case ScenarioModel::idler_prob: return "idler_prob";
    case ScenarioModel::psf_mismatch: return "psf_mismatch";
  }
  throw std::logic_error("to_string(ScenarioModel): bad value");
}

inline ScenarioModel scenario_model_from(const std::string& s) {
  if (s == "heisenberg") return ScenarioModel::heisenberg;
  if (s == "pure") return ScenarioModel::pure;
  if (s == "mixed") return ScenarioModel::mixed;
  if (s == "mixed_basis") return ScenarioModel::mixed_basis;
  if (s == "idler_prob") return ScenarioModel::idler_prob;
  if (s == "psf_mismatch") return ScenarioModel::psf_mismatch;
  throw std::invalid_argument("unknown model '" + s + "'");
}

/// One runnable configuration: model, detector combination, grid and output.
struct Scenario {
  std::string name;
  ScenarioModel model = ScenarioModel::heisenberg;
  PlaneSelector sel;
  double basis_at = 0.0;   ///< idler position of the mixed_basis state (m)
  bool weighted = false;   ///< scale the basis state by its detection probability
  double L = -1.0;         ///< psf_mismatch crystal length; < 0 = geometry value
  std::size_t grid_points = 0;   ///< 0 = auto
  double grid_halfwidth = 0.0;   ///< 0 = auto (three expected widths)
  Normalization normalization = Normalization::peak1;
  std::string description;
};

/// One named scenario per reference figure.
inline std::vector<Scenario> scenario_registry() {
  using SM = ScenarioModel;
  const PlaneSelector sg{SignalPlane::ghost, IdlerDetector::slit_plane};
  const PlaneSelector sd{SignalPlane::diffraction, IdlerDetector::slit_plane};
  const PlaneSelector fg{SignalPlane::ghost, IdlerDetector::collector_focus};
  const PlaneSelector fd{SignalPlane::diffraction, IdlerDetector::collector_focus};
  std::vector<Scenario> v;
  auto add = [&](std::string name, SM m, PlaneSelector s, std::string desc) -> Scenario& {
    Scenario sc;
    sc.name = std::move(name);
    sc.model = m;
    sc.sel = s;
    sc.description = std::move(desc);
    v.push_back(std::move(sc));
    return v.back();
  };
  add("fig02", SM::heisenberg, sg, "non-collapse CCR, slit idler, ghost plane");
  add("fig03", SM::heisenberg, sd, "non-collapse CCR, slit idler, diffraction plane");
  add("fig04", SM::pure, sg, "pure-state collapse, ghost plane");
  add("fig05", SM::pure, sd, "pure-state collapse, diffraction plane");
  add("fig06", SM::mixed_basis, sg, "mixed-collapse basis at x1i=0, ghost plane");
  add("fig07", SM::mixed_basis, sd, "mixed-collapse basis at x1i=0, diffraction plane");
  add("fig08", SM::mixed_basis, sg, "mixed-collapse basis at x1i=+42um, ghost plane").basis_at =
      42e-6;
  add("fig09", SM::mixed_basis, sd, "mixed-collapse basis at x1i=+42um, diffraction plane")
      .basis_at = 42e-6;
  add("fig10", SM::idler_prob, sg, "idler detection probability across the slit");
  add("fig11", SM::mixed, sg, "mixed-state collapse CR, slit idler, ghost plane");
  add("fig12", SM::mixed, sd, "mixed-state collapse CR, slit idler, diffraction plane");
  add("fig13", SM::heisenberg, fg, "non-collapse CCR, focus idler, ghost plane");
  add("fig14", SM::heisenberg, fd, "non-collapse CCR, focus idler, diffraction plane");
  add("fig15", SM::mixed_basis, fg, "mixed-collapse basis at xD1=0, ghost plane");
  add("fig16", SM::mixed_basis, fd, "mixed-collapse basis at xD1=0, diffraction plane");
  add("fig17", SM::mixed_basis, fg, "mixed-collapse basis at xD1=0.25mm, ghost plane").basis_at =
      0.25e-3;
  add("fig18", SM::mixed_basis, fd, "mixed-collapse basis at xD1=0.25mm, diffraction plane")
      .basis_at = 0.25e-3;
  add("fig19", SM::idler_prob, fg, "idler detection probability, collector focal plane");
  {
    auto& s = add("fig20", SM::mixed_basis, fd,
                  "probability-weighted basis at xD1=0.25mm, diffraction plane");
    s.basis_at = 0.25e-3;
    s.weighted = true;
    s.normalization = Normalization::raw;
  }
  add("fig21", SM::mixed, fd, "mixed-state collapse CR, focus idler, diffraction plane");
  add("figA2", SM::psf_mismatch, sg, "ghost-plane point spread with phase mismatch");
  return v;
}

inline std::optional<Scenario> find_scenario(const std::string& name) {
  for (auto& s : scenario_registry())
    if (s.name == name) return s;
  return std::nullopt;
}

namespace detail {

inline double psf_fwhm_estimate(const KernelContext& ctx) {
  return 2.0 * std::sqrt(std::log(2.0)) * ctx.psf_sigma();
}

/// Expected width and center of the scenario's curve; drives the auto grid.
inline void expected_shape(const Scenario& s, const KernelContext& ctx, double& fwhm_est,
                           double& center_est) {
  const auto& g = ctx.geometry;
  center_est = 0.0;
  const bool ghost = s.sel.signal_plane == SignalPlane::ghost;
  switch (s.model) {
    case ScenarioModel::heisenberg:
    case ScenarioModel::mixed:
    case ScenarioModel::pure:
      if (ghost) {
        fwhm_est = ctx.M * g.w;
      } else {
        fwhm_est = (s.model == ScenarioModel::pure) ? ctx.M * g.w * g.d3 / g.d2
                                                    : diffraction_fwhm_estimate(ctx);
      }
      return;
    case ScenarioModel::mixed_basis:
      if (s.sel.idler_detector == IdlerDetector::slit_plane) {
        fwhm_est = ghost ? psf_fwhm_estimate(ctx) : diffraction_fwhm_estimate(ctx);
        if (ghost) center_est = -ctx.M * s.basis_at;
      } else {
        // each focus basis images the slit; in the diffraction plane it is a
        // slit-spread packet steered by the collector tilt
        fwhm_est = ghost ? ctx.M * g.w : ctx.M * g.w * g.d3 / g.d2;
        if (!ghost) center_est = s.basis_at * (g.d3 - g.d2) / (g.fc * ctx.M);
      }
      return;
    case ScenarioModel::idler_prob:
      fwhm_est = (s.sel.idler_detector == IdlerDetector::slit_plane)
                     ? g.w
                     : 2.3548 * g.lambda * g.fc * ctx.M /
                           (2.0 * std::numbers::pi * std::numbers::sqrt2 * ctx.psf_sigma());
      return;
    case ScenarioModel::psf_mismatch: {
      const double L = s.L >= 0.0 ? s.L : g.L;
      fwhm_est = psf_fwhm_estimate(ctx) * (2.0 + 700.0 * L);
      return;
    }
  }
  throw std::logic_error("expected_shape: bad model");
}

inline Grid1D scenario_grid(const Scenario& s, const KernelContext& ctx) {
  double fwhm_est = 0.0, center_est = 0.0;
  expected_shape(s, ctx, fwhm_est, center_est);
  double hw = s.grid_halfwidth > 0.0 ? s.grid_halfwidth : 3.0 * fwhm_est + std::abs(center_est);
  std::size_t count = s.grid_points > 0 ? s.grid_points : 641;
  if (count < 3) throw std::invalid_argument("scenario: need at least 3 grid points");
  if (count % 2 == 0) ++count;
  return Grid1D::centered(hw, count);
}

inline std::string format_si(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

struct RunResult {
  std::string csv_path;
  std::size_t points = 0;
  double peak_position = 0.0;
  double fwhm = std::numeric_limits<double>::quiet_NaN();
  std::string summary;
};

/// Computes the scenario's distribution on its grid.
inline Distribution evaluate_scenario(const Scenario& s, const KernelContext& ctx) {
  const Grid1D grid = detail::scenario_grid(s, ctx);
  Distribution dist;
  switch (s.model) {
    case ScenarioModel::heisenberg:
      dist = heisenberg_ccr(s.sel, grid, ctx);
      break;
    case ScenarioModel::pure:
      dist = counting_rate(pure_collapse_state(s.sel.signal_plane, grid, ctx));
      break;
    case ScenarioModel::mixed:
      dist = mixed_collapse_cr(build_ensemble(s.sel.idler_detector, s.sel.signal_plane, grid, ctx));
      break;
    case ScenarioModel::mixed_basis: {
      const auto e = build_ensemble(s.sel.idler_detector, s.sel.signal_plane, grid, ctx);
      const std::size_t i = nearest_basis_index(e, s.basis_at);
      std::vector<double> v(grid.count);
      const double scale = s.weighted ? e.P[i] * e.weights[i] : 1.0;
      for (std::size_t j = 0; j < grid.count; ++j)
        v[j] = scale * std::norm(e.basis_fields[i].values[j]);
      dist = Distribution(grid, std::move(v), Normalization::raw);
      break;
    }
    case ScenarioModel::idler_prob: {
      const Grid1D sg = default_signal_grid(SignalPlane::ghost, ctx);
      dist = idler_probability(build_ensemble(s.sel.idler_detector, SignalPlane::ghost, sg, ctx));
      break;
    }
    case ScenarioModel::psf_mismatch: {
      const double L = s.L >= 0.0 ? s.L : ctx.geometry.L;
      const MismatchPsf psf(ctx, L);
      std::vector<double> v(grid.count);
      parallel_for(grid.count, [&](std::size_t j) { v[j] = psf(grid.position(j)); });
      dist = Distribution(grid, std::move(v), Normalization::raw);
      break;
    }
  }
  return normalize(dist, s.normalization);
}

namespace detail {

inline void write_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output path " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

/// Minimal standalone SVG polyline plot; cosmetic output only.
inline std::string render_svg(const Distribution& d, const std::string& title) {
  const int width = 720, height = 440, ml = 60, mr = 20, mt = 30, mb = 40;
  double ymax = 0.0;
  for (double v : d.values) ymax = std::max(ymax, v);
  if (ymax <= 0.0) ymax = 1.0;
  const double x0 = d.grid.start, x1 = d.grid.last();
  std::ostringstream os;
  os.precision(8);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
     << title << "</text>\n";
  os << "<polyline fill=\"none\" stroke=\"black\" points=\"" << ml << "," << mt << " " << ml << ","
     << (height - mb) << " " << (width - mr) << "," << (height - mb) << "\"/>\n";
  os << "<polyline fill=\"none\" stroke=\"crimson\" stroke-width=\"1.2\" points=\"";
  for (std::size_t i = 0; i < d.grid.count; ++i) {
    const double fx = (d.grid.position(i) - x0) / (x1 - x0);
    const double fy = d.values[i] / ymax;
    os << ml + fx * (width - ml - mr) << "," << (height - mb) - fy * (height - mt - mb) << " ";
  }
  os << "\"/>\n";
  os << "<text x=\"" << ml << "\" y=\"" << height - 12 << "\" font-size=\"11\">" << x0
     << " m</text>\n";
  os << "<text x=\"" << width - mr << "\" y=\"" << height - 12
     << "\" text-anchor=\"end\" font-size=\"11\">" << x1 << " m</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace detail

/// Runs a scenario and writes the CSV (and optional SVG). CSV layout:
/// '#'-prefixed metadata lines, then `x_m,value` rows in SI meters.
inline RunResult run_scenario(const Scenario& s, const KernelContext& ctx,
                              const std::string& out_path, const std::string& preset_label,
                              const std::string& plot_path = "") {
  const Distribution dist = evaluate_scenario(s, ctx);

  std::ostringstream csv;
  csv << "# scenario: " << (s.name.empty() ? "custom" : s.name) << "\n";
  csv << "# preset: " << preset_label << "\n";
  csv << "# model: " << to_string(s.model) << "\n";
  csv << "# idler: "
      << (s.sel.idler_detector == IdlerDetector::slit_plane ? "slit" : "focus") << "\n";
  csv << "# plane: "
      << (s.sel.signal_plane == SignalPlane::ghost ? "ghost" : "diffraction") << "\n";
  if (s.model == ScenarioModel::mixed_basis)
    csv << "# basis_at: " << detail::format_si(s.basis_at)
        << (s.weighted ? " (probability weighted)" : "") << "\n";
  if (s.model == ScenarioModel::psf_mismatch)
    csv << "# L: " << detail::format_si(s.L >= 0.0 ? s.L : ctx.geometry.L) << "\n";
  csv << "# grid: start=" << detail::format_si(dist.grid.start)
      << " step=" << detail::format_si(dist.grid.step) << " count=" << dist.grid.count << "\n";
  csv << "# normalization: " << to_string(dist.normalization) << "\n";
  csv << "x_m,value\n";
  for (std::size_t i = 0; i < dist.grid.count; ++i)
    csv << detail::format_si(dist.grid.position(i)) << "," << detail::format_si(dist.values[i])
        << "\n";
  detail::write_atomically(out_path, csv.str());
  if (!plot_path.empty())
    detail::write_atomically(plot_path,
                             detail::render_svg(dist, s.name + " " + s.description));

  RunResult r;
  r.csv_path = out_path;
  r.points = dist.grid.count;
  std::size_t ipk = 0;
  for (std::size_t i = 1; i < dist.values.size(); ++i)
    if (dist.values[i] > dist.values[ipk]) ipk = i;
  r.peak_position = dist.grid.position(ipk);
  try {
    r.fwhm = fwhm(dist);
  } catch (const std::exception&) {
    r.fwhm = std::numeric_limits<double>::quiet_NaN();
  }
  std::ostringstream sum;
  sum.precision(6);
  sum << (s.name.empty() ? "custom" : s.name) << ": " << out_path << " (" << r.points
      << " points), peak at " << r.peak_position << " m, fwhm ";
  if (std::isnan(r.fwhm))
    sum << "n/a";
  else
    sum << r.fwhm << " m";
  r.summary = sum.str();
  return r;
}

// ---------------------------------------------------------------------------
// Model-comparison report
// ---------------------------------------------------------------------------

struct ModelComparisonSummary {
  std::vector<EquivalenceReport> mixed_checks;
  double pure_fwhm = 0.0;
  double heisenberg_fwhm = 0.0;
  double fwhm_ratio = std::numeric_limits<double>::quiet_NaN();
  double ghost_rel_l2 = std::numeric_limits<double>::quiet_NaN();
  bool contrast_detected = false;
  bool degenerate = false;  ///< slit below the resolution scale: one basis state
  bool all_pass = false;
  std::string text;
};

/// Runs the four mixed-vs-Heisenberg checks plus the pure-state diffraction
/// contrast. Failing physics checks produce a report, never an exception.
inline ModelComparisonSummary report_equivalence(const KernelContext& ctx, double tolerance) {
  ModelComparisonSummary s;
  std::ostringstream os;
  os.precision(6);
  const char* names[4] = {"slit/ghost", "slit/diffraction", "focus/ghost", "focus/diffraction"};
  const PlaneSelector sels[4] = {{SignalPlane::ghost, IdlerDetector::slit_plane},
                                 {SignalPlane::diffraction, IdlerDetector::slit_plane},
                                 {SignalPlane::ghost, IdlerDetector::collector_focus},
                                 {SignalPlane::diffraction, IdlerDetector::collector_focus}};
  bool mixed_ok = true;
  for (int i = 0; i < 4; ++i) {
    auto rep = equivalence_check(ctx, sels[i], tolerance);
    os << "mixed vs heisenberg " << names[i] << ": max_abs_diff=" << rep.comparison.max_abs_diff
       << " rel_l2=" << rep.comparison.rel_l2 << " -> " << (rep.pass ? "pass" : "FAIL") << "\n";
    mixed_ok = mixed_ok && rep.pass;
    s.mixed_checks.push_back(std::move(rep));
  }

  // pure-state contrast in the diffraction plane
  const Grid1D dgrid = default_signal_grid(SignalPlane::diffraction, ctx);
  const PlaneSelector slit_diff{SignalPlane::diffraction, IdlerDetector::slit_plane};
  const Distribution heis_d = heisenberg_ccr(slit_diff, dgrid, ctx);
  const Distribution pure_d = counting_rate(pure_collapse_state(SignalPlane::diffraction, dgrid, ctx));
  s.degenerate = ctx.M * ctx.geometry.w < detail::psf_fwhm_estimate(ctx);
  if (s.degenerate) {
    os << "pure-state contrast: degenerate (slit image below the point-spread width; "
          "pure and mixed collapse coincide)\n";
    s.contrast_detected = false;
  } else {
    s.heisenberg_fwhm = fwhm(heis_d);
    s.pure_fwhm = fwhm(pure_d);
    s.fwhm_ratio = s.pure_fwhm / s.heisenberg_fwhm;
    s.contrast_detected = s.fwhm_ratio < 0.5;
    os << "pure vs heisenberg diffraction fwhm: " << s.pure_fwhm << " / " << s.heisenberg_fwhm
       << " = " << s.fwhm_ratio << " -> " << (s.contrast_detected ? "contrast detected" : "FAIL")
       << "\n";
  }

  // ghost-plane similarity of the pure collapse (informational)
  const Grid1D ggrid = default_signal_grid(SignalPlane::ghost, ctx);
  const PlaneSelector slit_ghost{SignalPlane::ghost, IdlerDetector::slit_plane};
  const auto ghost_cmp = compare(counting_rate(pure_collapse_state(SignalPlane::ghost, ggrid, ctx)),
                                 heisenberg_ccr(slit_ghost, ggrid, ctx), 1.0);
  s.ghost_rel_l2 = ghost_cmp.rel_l2;
  os << "pure vs heisenberg ghost rel_l2: " << s.ghost_rel_l2 << "\n";

  s.all_pass = mixed_ok && (s.contrast_detected || s.degenerate);
  os << (s.all_pass ? "ALL CHECKS PASS" : "CHECKS FAILED") << "\n";
  s.text = os.str();
  return s;
}

}  // namespace ghostsim
