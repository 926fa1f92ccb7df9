// Command-line runner: reproduces the reference scenarios as CSV files and
// runs the collapse-model comparison suite.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ghostsim/geometry.hpp"
#include "ghostsim/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPhysics = 2;

struct GeometryArgs {
  std::string preset = "reference";
  std::string geometry_file;

  ghostsim::GhostGeometry resolve() const {
    if (!geometry_file.empty()) return ghostsim::load_geometry(geometry_file);
    if (preset == "reference") return ghostsim::reference_geometry();
    throw CLI::ValidationError("--preset", "unknown preset '" + preset + "'");
  }
  std::string label() const { return geometry_file.empty() ? preset : geometry_file; }
};

void add_geometry_flags(CLI::App* cmd, GeometryArgs& args) {
  cmd->add_option("--preset", args.preset, "named geometry preset")->capture_default_str();
  cmd->add_option("--geometry", args.geometry_file,
                  "geometry key-value file (overrides --preset)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ghostsim: entangled ghost-imaging counting-rate simulator"};
  app.require_subcommand(1);

  // ---- run ----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "compute one scenario and write a CSV");
  GeometryArgs run_geom;
  add_geometry_flags(run, run_geom);
  std::string scenario_name, model_name = "heisenberg", idler = "slit", plane = "ghost";
  std::string normalize_mode = "peak1", out_path = "out.csv", plot_path;
  std::size_t grid_points = 0;
  double grid_halfwidth = 0.0, basis_at = 0.0, L = -1.0;
  bool weighted = false;
  run->add_option("--scenario", scenario_name, "named scenario (see `list`)");
  run->add_option("--model", model_name,
                  "heisenberg|pure|mixed|mixed_basis|idler_prob|psf_mismatch")
      ->capture_default_str();
  run->add_option("--idler", idler, "slit|focus")->capture_default_str();
  run->add_option("--plane", plane, "ghost|diffraction")->capture_default_str();
  run->add_option("--grid-points", grid_points, "signal grid sample count (0 = auto)");
  run->add_option("--grid-halfwidth", grid_halfwidth, "signal grid halfwidth in m (0 = auto)");
  run->add_option("--normalize", normalize_mode, "peak1|area1|raw")->capture_default_str();
  run->add_option("--L", L, "crystal length in m for psf_mismatch (default: geometry L)");
  run->add_option("--basis-at", basis_at, "idler position in m for mixed_basis");
  run->add_flag("--weighted", weighted, "weight the basis state by its detection probability");
  run->add_option("--out", out_path, "output CSV path")->capture_default_str();
  run->add_option("--plot", plot_path, "optional SVG plot path");

  // ---- report -------------------------------------------------------------
  auto* report = app.add_subcommand("report", "mixed-vs-Heisenberg equivalence suite");
  GeometryArgs rep_geom;
  add_geometry_flags(report, rep_geom);
  double tolerance = 1e-3;
  std::string report_out;
  report->add_option("--tolerance", tolerance, "comparison tolerance")->capture_default_str();
  report->add_option("--out", report_out, "also write the report to this path");

  // ---- list / validate ----------------------------------------------------
  auto* list = app.add_subcommand("list", "list the named scenarios");
  auto* val = app.add_subcommand("validate", "check a geometry against the imaging condition");
  GeometryArgs val_geom;
  add_geometry_flags(val, val_geom);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*list) {
      for (const auto& s : ghostsim::scenario_registry())
        std::printf("%-6s %-12s %s\n", s.name.c_str(), ghostsim::to_string(s.model).c_str(),
                    s.description.c_str());
      return kExitOk;
    }

    if (*val) {
      const auto g = val_geom.resolve();
      const auto rep = ghostsim::validate(g);
      std::printf("imaging residual: %.3e\n%s\n", rep.imaging_residual,
                  rep.pass ? "pass" : rep.message.c_str());
      return rep.pass ? kExitOk : kExitPhysics;
    }

    if (*run) {
      const auto g = run_geom.resolve();
      const auto vrep = ghostsim::validate(g);
      if (!vrep.pass) {
        std::fprintf(stderr, "geometry check failed: %s\n", vrep.message.c_str());
        return kExitPhysics;
      }
      const auto ctx = ghostsim::KernelContext::create(g);

      ghostsim::Scenario sc;
      if (!scenario_name.empty()) {
        auto found = ghostsim::find_scenario(scenario_name);
        if (!found) {
          std::fprintf(stderr, "unknown scenario '%s' (try `ghostsim list`)\n",
                       scenario_name.c_str());
          return kExitUsage;
        }
        sc = *found;
      } else {
        sc.model = ghostsim::scenario_model_from(model_name);
        if (idler == "slit")
          sc.sel.idler_detector = ghostsim::IdlerDetector::slit_plane;
        else if (idler == "focus")
          sc.sel.idler_detector = ghostsim::IdlerDetector::collector_focus;
        else
          throw CLI::ValidationError("--idler", "expected slit|focus");
        if (plane == "ghost")
          sc.sel.signal_plane = ghostsim::SignalPlane::ghost;
        else if (plane == "diffraction")
          sc.sel.signal_plane = ghostsim::SignalPlane::diffraction;
        else
          throw CLI::ValidationError("--plane", "expected ghost|diffraction");
      }
      // flag overrides apply to named scenarios too
      if (run->count("--basis-at")) sc.basis_at = basis_at;
      if (run->count("--weighted")) sc.weighted = weighted;
      if (run->count("--L")) sc.L = L;
      if (run->count("--grid-points")) sc.grid_points = grid_points;
      if (run->count("--grid-halfwidth")) sc.grid_halfwidth = grid_halfwidth;
      if (run->count("--normalize")) {
        if (normalize_mode == "peak1")
          sc.normalization = ghostsim::Normalization::peak1;
        else if (normalize_mode == "area1")
          sc.normalization = ghostsim::Normalization::area1;
        else if (normalize_mode == "raw")
          sc.normalization = ghostsim::Normalization::raw;
        else
          throw CLI::ValidationError("--normalize", "expected peak1|area1|raw");
      }

      const auto result = ghostsim::run_scenario(sc, ctx, out_path, run_geom.label(), plot_path);
      std::printf("%s\n", result.summary.c_str());
      return kExitOk;
    }

    if (*report) {
      const auto g = rep_geom.resolve();
      const auto vrep = ghostsim::validate(g);
      if (!vrep.pass) {
        std::fprintf(stderr, "geometry check failed: %s\n", vrep.message.c_str());
        return kExitPhysics;
      }
      const auto ctx = ghostsim::KernelContext::create(g);
      const auto summary = ghostsim::report_equivalence(ctx, tolerance);
      std::printf("%s", summary.text.c_str());
      if (!report_out.empty()) {
        std::string text = summary.text;
        for (const auto& chk : summary.mixed_checks) text += ghostsim::to_text(chk.comparison);
        ghostsim::detail::write_atomically(report_out, text);
      }
      return summary.all_pass ? kExitOk : kExitPhysics;
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitPhysics;
  }
  return kExitUsage;
}
