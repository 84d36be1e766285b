// Acceptance runner. Each criterion prints one PASS/FAIL line followed by
// indented detail lines; the exit status is nonzero if any selected one fails.
//
// Training runs are cached under --output: a run is reused when its saved
// report echoes the same resolved config and finished without diverging.

#include "monge/harness/checkpoint.hpp"
#include "monge/harness/experiment.hpp"
#include "monge/harness/stats.hpp"
#include "monge/oracles.hpp"

#include "support.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

namespace {

using namespace monge;
using namespace monge::harness;
namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void info(const std::string& what) { lines.push_back("info " + what); }
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

fs::path g_out;

struct Run {
  ExperimentConfig config;
  json report;
  fs::path dir;
  bool reused = false;

  const json& metrics() const { return report.at("metrics"); }
  double metric(const std::string& key) const { return metrics().at(key).get<double>(); }
  double wall_time() const { return report.at("timing").at("wall_time_s").get<double>(); }
  Checkpoint checkpoint() const { return load_checkpoint((dir / "checkpoint.bin").string()); }
};

ExperimentConfig shipped(const std::string& name) {
  return load_experiment_config((fs::path(MONGE_SOURCE_DIR) / "configs" / (name + ".cfg")).string());
}

Run run_cached(ExperimentConfig c, const std::string& tag) {
  Run r;
  r.dir = g_out / tag;
  c.output_dir = r.dir.string();
  r.config = c;
  const fs::path report = r.dir / "report.json";
  if (fs::exists(report) && fs::exists(r.dir / "checkpoint.bin")) {
    std::ifstream in(report);
    const json saved = json::parse(in, nullptr, false);
    if (!saved.is_discarded() && saved.value("status", "") == "ok" && saved.at("config") == to_json(c)) {
      r.report = saved;
      r.reused = true;
      return r;
    }
  }
  const ExperimentReport fresh = run_experiment(c);
  r.report = fresh.full();
  require(fresh.exit_code == kExitOk, ErrorCode::kDiverged, tag + " training diverged");
  return r;
}

void note_run(Outcome& o, const Run& r, double budget_s) {
  o.check(r.wall_time() <= budget_s, r.config.output_dir + " wall time " + fmt(r.wall_time()) + " s <= " +
                                         fmt(budget_s) + " s" + (r.reused ? " (cached run)" : ""));
}

// Criterion 2 and 6 share one run: the gap trace is recorded at log-spaced steps.
Run gaussian_run() {
  ExperimentConfig c = shipped("gaussian2d");
  c.eval.track_gaps = true;
  c.train.extra_records = {25, 50, 100, 200, 400, 800, 1600};
  return run_cached(c, "gaussian2d");
}

Run line_run() { return run_cached(shipped("line1d"), "line1d"); }

// ---- criteria ----

Outcome delta_to_gaussian() {
  Outcome o;
  const Run r = run_cached(shipped("delta_to_gaussian"), "delta_to_gaussian");
  const double l = r.metric("lagrangian_time_average");
  o.check(l >= 0.9 && l <= 1.1, "time-averaged Lagrangian " + fmt(l) + " in [0.9, 1.1] (exact value 1)");
  o.info("final-batch Lagrangian " + fmt(r.report.at("final_history").at("lagrangian").get<double>()) +
         ", held-out Lagrangian " + fmt(r.metric("lagrangian_test")));
  note_run(o, r, 120.0);
  return o;
}

Outcome gaussian_oracle() {
  Outcome o;
  const Run r = gaussian_run();
  const auto map = r.checkpoint().map;
  const ExperimentSetup s = build_setup(r.config);
  const Tensor x = run_detail::draw(s.problem.source, 2000, 2).points;
  // Independent reference for N(0, I) -> N(m, diag(4, 1)): T*(x) = m + diag(2, 1) x.
  Tensor ref(x.rows(), 2);
  ref.col(0) = (2.0 * x.col(0).array() + 2.0).matrix();
  ref.col(1) = (x.col(1).array() - 1.0).matrix();
  const Tensor t = map.apply(x);
  const double w2 = std::sqrt(6.0);
  const double err = (t - ref).rowwise().norm().mean();
  const double cost = (t - x).rowwise().squaredNorm().mean();
  o.check(err <= 0.05 * w2, "mean map error " + fmt(err) + " <= 0.05 * w2 = " + fmt(0.05 * w2));
  o.check(std::abs(cost - 6.0) <= 0.05 * 6.0, "transport cost " + fmt(cost) + " within 5% of w2^2 = 6");
  note_run(o, r, 600.0);
  return o;
}

Outcome line_oracle() {
  Outcome o;
  const Run r = line_run();
  const auto map = r.checkpoint().map;
  Tensor grid(1000, 1);
  for (int i = 0; i < 1000; ++i) grid(i, 0) = (i + 0.5) / 1000.0;
  const Tensor t = map.apply(grid);
  const double max_err = (t.array() - grid.array() - 1.0).abs().maxCoeff();
  const double cost = (t - grid).array().square().mean();
  o.check(max_err <= 0.05, "max |T(x) - (x + 1)| on 1000-point grid " + fmt(max_err) + " <= 0.05");
  o.check(cost >= 0.95 && cost <= 1.05, "learned cost " + fmt(cost) + " in [0.95, 1.05]");
  note_run(o, r, 120.0);
  return o;
}

Outcome sphere_cap() {
  Outcome o;
  const Run r = run_cached(shipped("sphere_cap"), "sphere_cap");
  const double r8 = r.metric("ring_pi8_mean_phi"), r4 = r.metric("ring_pi4_mean_phi");
  o.check(std::abs(r8 - 7 * kPi / 8) <= 0.1, "ring pi/8 mean output phi " + fmt(r8) + " within 0.1 of 7pi/8 = " +
                                                  fmt(7 * kPi / 8));
  o.check(std::abs(r4 - kPi) <= 0.15, "ring pi/4 mean output phi " + fmt(r4) + " within 0.15 of pi");
  const auto band = [&](const char* k) {
    return r.metrics().at(k).is_null() ? std::string("n/a") : fmt(r.metric(k));
  };
  o.info("exact assignment under the same cost: band pi/8 -> " + band("oracle_band_pi8_mean_phi") +
         ", band near pi/4 -> " + band("oracle_band_pi4_mean_phi"));
  note_run(o, r, 900.0);
  return o;
}

Outcome consistency() {
  Outcome o;
  for (const Run& r : {gaussian_run(), line_run()}) {
    const double l = r.metric("lagrangian_test"), exact = r.metric("oracle_cost");
    o.check(std::abs(l - exact) <= 0.05 * exact, r.config.output_dir + ": |L - exact OT| = " + fmt(std::abs(l - exact)) +
                                                     " <= 5% of " + fmt(exact) + " on 512 held-out pairs");
    // The discrete oracle is biased upward at n = 512, so this is reported, not gated.
    o.info(r.config.output_dir + ": learned cost " + fmt(r.metric("learned_cost")) + ", oracle - 3 std = " +
           fmt(exact - 3.0 * r.metric("oracle_cost_std")));
  }
  return o;
}

Outcome gap_diagnostic() {
  Outcome o;
  const Run r = gaussian_run();
  std::vector<double> bound, error;
  double min_e1 = 1e300, min_e2 = 1e300;
  for (const auto& g : r.report.at("gap_trace")) {
    min_e1 = std::min(min_e1, g.at("e1").get<double>());
    min_e2 = std::min(min_e2, g.at("e2").get<double>());
    if (g.at("bound").is_null() || g.at("map_l2_error").is_null()) continue;
    bound.push_back(g.at("bound").get<double>());
    error.push_back(g.at("map_l2_error").get<double>());
  }
  o.check(bound.size() >= 5, fmt(static_cast<double>(bound.size())) + " checkpoints with a bound (>= 5)");
  const double rho = bound.size() >= 2 ? spearman(bound, error) : 0.0;
  o.check(rho >= 0.8, "Spearman(bound, L2 map error) " + fmt(rho) + " >= 0.8");
  o.check(min_e1 >= -1e-6 && min_e2 >= -1e-6, "min E1 " + fmt(min_e1) + ", min E2 " + fmt(min_e2) + " >= -1e-6");
  return o;
}

Outcome oracle_consistency() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 eng(2024);
  int exact_ok = 0;
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 6;
    const Tensor x = testing::random_points(eng, n, 2), y = testing::random_points(eng, n, 2);
    const auto c = CostSpec::quadratic(2);
    const Eigen::MatrixXd m = cost_matrix(c, x, y);
    exact_ok += std::abs(oracles::discrete_ot_exact(m).cost - testing::brute_force_assignment(m)) <= 1e-12;
  }
  o.check(exact_ok == 50, fmt(exact_ok) + "/50 assignment instances (n <= 7) equal the permutation minimum");
  int sink_ok = 0;
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Tensor x = testing::random_points(eng, 64, 2, -1.0, 1.0);
    const Tensor y = (testing::random_points(eng, 64, 2, -1.0, 1.0).array() + 1.0).matrix();
    const auto c = CostSpec::quadratic(2);
    const double exact = oracles::discrete_ot_exact(x, y, c).cost;
    const double rel = std::abs(oracles::sinkhorn(x, y, c, 0.01).cost - exact) / exact;
    worst = std::max(worst, rel);
    sink_ok += rel <= 0.05;
  }
  o.check(sink_ok == 50, fmt(sink_ok) + "/50 Sinkhorn(eps = 0.01) instances (n = 64) within 5%, worst " + fmt(worst));
  double worst_w2 = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int d = 2 + t % 4;
    const Eigen::MatrixXd ca = testing::random_spd(eng, d), cb = testing::random_spd(eng, d);
    const auto sol = oracles::gaussian_w2(Eigen::VectorXd::Zero(d), ca, Eigen::VectorXd::Ones(d), cb);
    worst_w2 = std::max(worst_w2, (sol.A * ca * sol.A - cb).norm() / cb.norm());
  }
  o.check(worst_w2 <= 1e-8, "gaussian_w2: max ||A ca A - cb||_F / ||cb||_F = " + fmt(worst_w2) + " <= 1e-8");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.check(secs <= 60.0, "runtime " + fmt(secs) + " s <= 60 s");
  return o;
}

Outcome ellipse() {
  Outcome o;
  const Run r = run_cached(shipped("unequal_dim_ellipse"), "unequal_dim_ellipse");
  const double rel = r.metric("mean_curve_distance_relative");
  o.check(rel <= 0.05, "mean distance to the curve / semi-major axis " + fmt(rel) + " <= 0.05");
  const double a = r.metric("gap_start_side_fraction"), b = r.metric("gap_end_side_fraction");
  o.check(a > 0.0 && b > 0.0, "mass next to both gap ends: " + fmt(a) + " and " + fmt(b) + " (> 0)");
  o.info("fraction of 36 arc bins hit " + fmt(r.metric("arc_coverage")));
  note_run(o, r, 300.0);
  return o;
}

Outcome class_preservation() {
  Outcome o;
  const Run r = run_cached(shipped("class_mixture"), "class_mixture");
  const double acc = r.metric("class_accuracy");
  o.check(acc >= 0.95, "class accuracy " + fmt(acc) + " >= 0.95");
  o.info("label-blind quadratic assignment keeps " + fmt(r.metric("quadratic_oracle_class_accuracy")));
  note_run(o, r, 300.0);
  return o;
}

Outcome population() {
  Outcome o;
  const Run r = run_cached(shipped("population"), "population");
  const double frac = r.metric("tau_land_fraction");
  o.check(frac == 1.0, "land fraction after tau " + fmt(frac) + " == 1");
  const double learned = r.metric("learned_geodesic_cost"), base = r.metric("random_anchor_geodesic_cost");
  o.check(learned <= base, "learned geodesic cost " + fmt(learned) + " <= random-anchor baseline " + fmt(base));
  o.info("land fraction before tau " + fmt(r.metric("raw_land_fraction")));
  note_run(o, r, 1800.0);
  return o;
}

Outcome invariants() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::pair<std::string, std::string>> suites = {
      {"nn_test", "NnBackward.*"},
      {"costs_test", "*FiniteDifference*:CostGradients.*:CostProperties.*"},
      {"duality_test", "CTransform.DominatesEveryCandidate:Gaps.WeakDualityOnRandomPotentials:Gaps.E1NonNegative*"},
      {"geo_test", "Tau.*"},
  };
  for (const auto& [bin, filter] : suites) {
    const fs::path exe = fs::path(MONGE_TEST_BIN_DIR) / bin;
    const std::string cmd = "\"" + exe.string() + "\" --gtest_brief=1 \"--gtest_filter=" + filter + "\" > \"" +
                            (g_out / (bin + ".log")).string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    o.check(rc == 0, bin + " [" + filter + "]");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.check(secs <= 180.0, "runtime " + fmt(secs) + " s <= 180 s");
  return o;
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

const std::map<int, Criterion>& criteria() {
  static const std::map<int, Criterion> all = {
      {1, {"delta to N(0,1) Lagrangian", delta_to_gaussian}},
      {2, {"Gaussian 2D closed-form map", gaussian_oracle}},
      {3, {"1D monotone map", line_oracle}},
      {4, {"sphere cap rings", sphere_cap}},
      {5, {"Lagrangian vs exact OT", consistency}},
      {6, {"duality-gap bound tracks map error", gap_diagnostic}},
      {7, {"oracle self-consistency", oracle_consistency}},
      {8, {"unequal dimensions ellipse", ellipse}},
      {9, {"class preservation", class_preservation}},
      {10, {"population transport", population}},
      {11, {"invariant suites", invariants}},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria runner"};
  std::vector<int> selected;
  std::string out = "acceptance_out";
  app.add_option("--criterion", selected, "criterion number(s), default all")->check(CLI::Range(1, 11));
  app.add_option("--output", out, "directory for cached training runs");
  CLI11_PARSE(app, argc, argv);
  if (selected.empty())
    for (const auto& [n, c] : criteria()) selected.push_back(n);

  g_out = out;
  fs::create_directories(g_out);
  int failed = 0;
  for (int n : selected) {
    const Criterion& c = criteria().at(n);
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("error: ") + e.what());
    }
    failed += !o.pass;
    std::cout << "criterion " << std::setw(2) << n << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << c.name << '\n';
    for (const auto& line : o.lines) std::cout << "    " << line << '\n';
    std::cout.flush();
  }
  return failed == 0 ? 0 : 1;
}
