#include <catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "ghostsim/scenario.hpp"

using namespace ghostsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const KernelContext& ref_ctx() {
  static const KernelContext ctx = KernelContext::create(reference_geometry());
  return ctx;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("every reference figure has exactly one named scenario") {
  const auto reg = scenario_registry();
  std::set<std::string> names;
  for (const auto& s : reg) names.insert(s.name);
  CHECK(names.size() == reg.size());  // unique
  for (int i = 2; i <= 21; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "fig%02d", i);
    CHECK(names.count(buf) == 1);
  }
  CHECK(names.count("figA2") == 1);
  CHECK(reg.size() == 21);

  CHECK(find_scenario("fig02").has_value());
  CHECK_FALSE(find_scenario("fig99").has_value());
}

TEST_CASE("ghost-image scenario writes a well-formed CSV with the expected width") {
  const auto& ctx = ref_ctx();
  const auto sc = *find_scenario("fig02");
  const std::string path = "scenario_fig02.csv";
  const auto res = run_scenario(sc, ctx, path, "reference");
  CHECK(res.points >= 3);
  CHECK_THAT(res.fwhm, WithinRel(320e-6, 0.06));
  CHECK(std::abs(res.peak_position) < 1e-4);

  const std::string text = slurp(path);
  CHECK(text.find("# scenario: fig02") != std::string::npos);
  CHECK(text.find("# model: heisenberg") != std::string::npos);
  CHECK(text.find("# idler: slit") != std::string::npos);
  CHECK(text.find("# plane: ghost") != std::string::npos);
  CHECK(text.find("# normalization: peak1") != std::string::npos);
  CHECK(text.find("x_m,value") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("mixed-basis scenario reproduces the narrow point spread") {
  const auto& ctx = ref_ctx();
  const auto sc = *find_scenario("fig06");
  const std::string path = "scenario_fig06.csv";
  const auto res = run_scenario(sc, ctx, path, "reference");
  CHECK_THAT(res.fwhm, WithinRel(18.5e-6, 0.05));
  std::remove(path.c_str());
}

TEST_CASE("matched-limit point-spread scenario equals the matched kernel") {
  const auto& ctx = ref_ctx();
  Scenario sc = *find_scenario("figA2");
  sc.L = 0.0;
  const Distribution d = evaluate_scenario(sc, ctx);
  const double peak_ref = std::norm(kernel_f(0.0, SignalPlane::ghost, 0.0, ctx));
  for (std::size_t i = 0; i < d.grid.count; i += 12) {
    const double expect =
        std::norm(kernel_f(0.0, SignalPlane::ghost, d.grid.position(i), ctx)) / peak_ref;
    CHECK_THAT(d.values[i], WithinAbs(expect, 1e-4));
  }
}

TEST_CASE("repeated runs produce byte-identical CSVs") {
  const auto& ctx = ref_ctx();
  const auto sc = *find_scenario("fig04");
  const std::string p1 = "det_a.csv", p2 = "det_b.csv", p3 = "det_c.csv";
  run_scenario(sc, ctx, p1, "reference");
  run_scenario(sc, ctx, p2, "reference");
  CHECK(slurp(p1) == slurp(p2));

  // thread count must not matter: every slot is computed independently
  setenv("GHOSTSIM_THREADS", "1", 1);
  run_scenario(sc, ctx, p3, "reference");
  unsetenv("GHOSTSIM_THREADS");
  CHECK(slurp(p1) == slurp(p3));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
  std::remove(p3.c_str());
}

TEST_CASE("custom scenarios: normalization flag and plot output") {
  const auto& ctx = ref_ctx();
  Scenario sc;
  sc.name = "custom";
  sc.model = ScenarioModel::pure;
  sc.sel = {SignalPlane::ghost, IdlerDetector::slit_plane};
  sc.normalization = Normalization::area1;
  sc.grid_points = 301;
  sc.grid_halfwidth = 0.5e-3;
  const std::string csv = "custom.csv", svg = "custom.svg";
  const auto res = run_scenario(sc, ctx, csv, "reference", svg);
  CHECK(res.points == 301);
  const std::string plot = slurp(svg);
  CHECK(plot.find("<svg") != std::string::npos);
  CHECK(plot.find("polyline") != std::string::npos);
  const Distribution d = evaluate_scenario(sc, ctx);
  std::vector<double> copy = d.values;
  CHECK_THAT(integrate_sampled(d.grid, std::span<const double>(copy)), WithinAbs(1.0, 1e-9));
  std::remove(csv.c_str());
  std::remove(svg.c_str());
}

TEST_CASE("unwritable output paths are reported") {
  const auto& ctx = ref_ctx();
  const auto sc = *find_scenario("fig04");
  CHECK_THROWS_AS(run_scenario(sc, ctx, "/nonexistent-dir-ghostsim/out.csv", "reference"),
                  std::exception);
}

TEST_CASE("equivalence report: reference layout passes, point slit degenerates") {
  GridPolicy quick;
  quick.focus_capture_halfwidth = 12.0 * focus_lobe(ref_ctx());
  quick.focus_samples_per_lobe = 8.0;
  const auto ctx = KernelContext::create(reference_geometry(), quick);
  const auto summary = report_equivalence(ctx, 1e-3);
  CHECK(summary.mixed_checks.size() == 4);
  for (const auto& chk : summary.mixed_checks) CHECK(chk.pass);
  CHECK(summary.contrast_detected);
  CHECK_FALSE(summary.degenerate);
  CHECK(summary.all_pass);
  CHECK(summary.text.find("mixed vs heisenberg slit/ghost") != std::string::npos);
  CHECK(summary.text.find("ALL CHECKS PASS") != std::string::npos);

  // sub-resolution slit: pure and mixed coincide, contrast is undefined
  GhostGeometry tiny = reference_geometry();
  tiny.w = 1e-8;
  GridPolicy tiny_policy;
  tiny_policy.focus_capture_halfwidth = 6.0 * tiny.lambda * tiny.fc / tiny.w;
  tiny_policy.focus_samples_per_lobe = 8.0;
  const auto tctx = KernelContext::create(tiny, tiny_policy);
  const auto tiny_summary = report_equivalence(tctx, 1e-3);
  CHECK(tiny_summary.degenerate);
  CHECK(tiny_summary.text.find("degenerate") != std::string::npos);
  for (const auto& chk : tiny_summary.mixed_checks) CHECK(chk.pass);
}
