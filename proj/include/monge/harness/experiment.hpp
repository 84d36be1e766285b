#pragma once

// Runs one experiment end to end: train, evaluate against oracles, write the
// report, history, sample dumps and checkpoint.

#include "monge/duality.hpp"
#include "monge/geo.hpp"
#include "monge/harness/checkpoint.hpp"
#include "monge/harness/csv.hpp"
#include "monge/harness/experiment_config.hpp"
#include "monge/harness/stats.hpp"
#include "monge/oracles.hpp"
#include "monge/solver.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace monge::harness {

inline constexpr int kReportSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitDiverged = 2, kExitIo = 3 };

struct ExperimentReport {
  nlohmann::json body;  // reproducible section: identical config => identical body
  double wall_time_s = 0.0;
  int exit_code = kExitOk;

  nlohmann::json full() const {
    nlohmann::json j = body;
    j["timing"] = {{"wall_time_s", wall_time_s}};
    return j;
  }
};

/// Row of the per-record gap trace.
struct GapRecord {
  int step = 0;
  double e1 = 0.0;
  double e2 = 0.0;
  double bound = std::numeric_limits<double>::quiet_NaN();
  double map_l2_error = std::numeric_limits<double>::quiet_NaN();
};

namespace run_detail {

// Test draws live far from the training stream (draws count up from 0) and the
// solver's monitoring batch (1 << 62).
inline constexpr std::uint64_t kTestDraw = 1ull << 61;

inline LabeledBatch draw(const Sampler& s, int n, std::uint64_t tag) {
  return s(static_cast<std::size_t>(n), kTestDraw + tag);
}

/// Where the potential and the metrics see the map: G(x) in composite mode.
inline Tensor pushforward(const TrainedMap& map, const LabeledBatch& x) {
  return map.composite(x.points, x.labels);
}

inline Tensor canonical_angles(const Tensor& t) {
  Tensor out(t.rows(), 2);
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    const auto p = geo::SpherePoint::canonical(t(i, 0), t(i, 1));
    out(i, 0) = p.theta();
    out(i, 1) = p.phi();
  }
  return out;
}

inline double mean_cost(const Problem& p, const TrainedMap& map, const LabeledBatch& x) {
  const Tensor t = map.apply(x.points, x.labels);
  const auto labels = make_cost_labels(p.cost, x.labels, t, p.classifier);
  const BatchLabels view = labels ? labels->view() : BatchLabels{};
  return eval_cost_rows(p.cost, map.cost_source(x.points), t, labels ? &view : nullptr).mean();
}

inline double quadratic_ot(const Tensor& a, const Tensor& b) {
  return oracles::discrete_ot_exact(a, b, CostSpec::quadratic(static_cast<int>(a.cols()))).cost;
}

inline bool label_free(const CostSpec& c) { return c.kind != CostKind::kClassContrastive; }

struct ClosedForm {
  std::function<Tensor(const Tensor&)> map;
};

/// Closed-form or oracle-derived reference map T*, when the experiment has one.
inline std::optional<ClosedForm> reference_map(const ExperimentConfig& c, const ExperimentSetup& s) {
  if (c.eval.oracle == OracleKind::kGaussian) {
    require(c.source_sampler == "gaussian" && c.target_sampler == "gaussian", ErrorCode::kInvalidArgument,
            "gaussian oracle needs gaussian source and target");
    auto moments = [](const SamplerParams& p) {
      const auto mean = p.at("mean");
      std::vector<double> var;
      if (p.count("std")) {
        for (double v : p.at("std")) var.push_back(v * v);
      } else if (p.count("cov_diag")) {
        var = p.at("cov_diag");
      } else {
        var.assign(mean.size(), 1.0);
      }
      if (var.size() == 1 && mean.size() > 1) var.assign(mean.size(), var.front());
      Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
      Eigen::MatrixXd cov = Eigen::VectorXd::Map(var.data(), static_cast<Eigen::Index>(var.size())).asDiagonal();
      return std::pair{m, cov};
    };
    const auto [ma, ca] = moments(c.source);
    const auto [mb, cb] = moments(c.target);
    const auto sol = oracles::gaussian_w2(ma, ca, mb, cb);
    require(c.cost.kind == CostKind::kQuadratic, ErrorCode::kInvalidArgument, "gaussian oracle needs a quadratic cost");
    return ClosedForm{[sol](const Tensor& x) { return sol.apply(x); }};
  }
  if (c.eval.oracle == OracleKind::kMonotone) {
    require(c.cost.n == 1 && c.cost.m == 1 && !c.train.pad_source, ErrorCode::kInvalidArgument,
            "monotone oracle needs a 1D problem");
    const auto x = draw(s.problem.source, 20000, 901).points;
    const auto y = draw(s.problem.target, 20000, 902).points;
    auto mono = std::make_shared<oracles::MonotoneMap>(oracles::monotone_map_1d(
        oracles::sorted_copy({x.data(), static_cast<std::size_t>(x.size())}),
        oracles::sorted_copy({y.data(), static_cast<std::size_t>(y.size())}), [](double d) { return d * d; }));
    return ClosedForm{[mono](const Tensor& in) {
      Tensor out(in.rows(), 1);
      for (Eigen::Index i = 0; i < in.rows(); ++i) out(i, 0) = (*mono)(in(i, 0));
      return out;
    }};
  }
  return std::nullopt;
}

inline double rms_error(const Tensor& a, const Tensor& b) {
  return std::sqrt((a - b).rowwise().squaredNorm().mean());
}

inline nlohmann::json history_json(const HistoryRecord& h) {
  return {{"step", h.step},
          {"lagrangian", h.lagrangian},
          {"transport_cost", h.transport_cost},
          {"f_target_mean", h.f_target_mean},
          {"f_pushforward_mean", h.f_pushforward_mean}};
}

inline void write_history(const std::string& path, const TrainHistory& h) {
  Tensor t(static_cast<Eigen::Index>(h.size()), 5);
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    t(r, 0) = h[i].step;
    t(r, 1) = h[i].lagrangian;
    t(r, 2) = h[i].transport_cost;
    t(r, 3) = h[i].f_target_mean;
    t(r, 4) = h[i].f_pushforward_mean;
  }
  write_csv(path, {"step", "lagrangian", "transport_cost", "f_target_mean", "f_pushforward_mean"}, t);
}

inline std::vector<std::string> point_header(const CostSpec& c, const std::string& prefix, Eigen::Index cols) {
  if (c.is_sphere() && cols == 2) return {"theta", "phi"};
  return numbered_header(prefix, cols);
}

inline Tensor with_labels(const Tensor& pts, const std::vector<int>& labels) {
  if (labels.empty()) return pts;
  Tensor l(pts.rows(), 1);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) l(i, 0) = labels[static_cast<std::size_t>(i)];
  return hconcat(pts, l);
}

inline double ring_mean_phi(const TrainedMap& map, double phi, int n = 360) {
  SampleBatch x(n, 2);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 2.0 * std::numbers::pi * i / n;
    x(i, 1) = phi;
  }
  const Tensor t = canonical_angles(map.apply(x));
  return t.col(1).mean();
}

}  // namespace run_detail

/// Duality report for a trained pair on fresh held-out samples.
inline duality::DualityReport evaluate_gaps(const ExperimentConfig& c, const ExperimentSetup& s, const TrainedMap& map,
                                            const nn::Model& f, std::uint64_t tag = 0) {
  require(!map.conditional && f.spec.condition_dim == 0, ErrorCode::kInvalidArgument,
          "duality diagnostics need unconditioned networks");
  const int n = std::min<int>(c.eval.n_test, static_cast<int>(oracles::kMaxExactSize));
  const auto x = run_detail::draw(s.problem.source, n, 10 + 2 * tag);
  const auto y = run_detail::draw(s.problem.target, n, 11 + 2 * tag);
  const double oracle = oracles::discrete_ot_exact(map.cost_source(x.points), y.points, s.problem.cost).cost;
  duality::CTransformConfig ct;
  ct.ascent_steps = c.eval.ascent_steps;
  ct.ascent_lr = c.eval.ascent_lr;
  return duality::evaluate_duality(map, f, s.problem.cost, x.points, y.points, oracle, ct);
}

/// Trains and evaluates; writes artifacts under `c.output_dir`. Divergence yields
/// a partial report with exit code 2; I/O failures throw Error(kIo).
inline ExperimentReport run_experiment(const ExperimentConfig& c) {
  using nlohmann::json;
  namespace fs = std::filesystem;
  using namespace run_detail;
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentSetup setup = build_setup(c);
  const Problem& p = setup.problem;
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  require(!ec, ErrorCode::kIo, "cannot create output directory " + c.output_dir + ": " + ec.message());
  const fs::path out(c.output_dir);

  ExperimentReport report;
  json& body = report.body;
  body["schema_version"] = kReportSchemaVersion;
  body["config"] = to_json(c);
  json artifacts = json::object();

  const auto reference = reference_map(c, setup);
  const int n_exact = std::min<int>(c.eval.n_test, static_cast<int>(oracles::kMaxExactSize));
  const LabeledBatch x_test = draw(p.source, n_exact, 0);
  const LabeledBatch y_test = draw(p.target, n_exact, 1);
  const LabeledBatch x_map = draw(p.source, c.eval.n_map_test, 2);

  // Gap trace on a fixed held-out pair set.
  std::vector<GapRecord> gaps;
  std::optional<double> gap_oracle;
  TrainObserver observer;
  if (c.eval.track_gaps) {
    observer = [&](int step, const TrainedMap& map, const nn::Model& f) {
      const auto r = evaluate_gaps(c, setup, map, f);
      GapRecord g{step, r.e1, r.e2, r.bound.value_or(std::numeric_limits<double>::quiet_NaN())};
      if (reference) g.map_l2_error = rms_error(map.apply(x_map.points), reference->map(x_map.points));
      gaps.push_back(g);
    };
  }

  TrainResult result;
  try {
    result = train(p, c.train, observer);
  } catch (const DivergenceError& e) {
    body["status"] = "diverged";
    body["error"] = e.what();
    body["final_history"] = e.history().empty() ? json(nullptr) : history_json(e.history().back());
    write_history((out / "history.csv").string(), e.history());
    artifacts["history"] = "history.csv";
    body["artifacts"] = artifacts;
    report.exit_code = kExitDiverged;
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream(out / "report.json") << report.full().dump(2) << '\n';
    return report;
  }
  const TrainedMap& map = result.map;
  const nn::Model& f = result.potential;
  body["status"] = "ok";
  body["gradient_steps"] = result.gradient_steps;
  body["final_history"] = history_json(result.history.back());

  json m;
  m["learned_cost"] = mean_cost(p, map, x_test);
  const auto lt = lagrangian_batch(map, f, p.cost, x_test, y_test, p.classifier);
  m["lagrangian_test"] = lt.value;
  {
    std::vector<double> tail;
    for (const auto& h : result.history)
      if (2 * h.step > c.train.outer_steps) tail.push_back(h.lagrangian);
    if (tail.empty()) tail.push_back(result.history.back().lagrangian);
    m["lagrangian_time_average"] = mean(tail);
  }

  // Oracle cost on the test pairs, with spread over resamples for the sandwich check.
  std::optional<double> oracle_cost;
  if (label_free(p.cost) && c.eval.oracle != OracleKind::kNone) {
    oracle_cost = oracles::discrete_ot_exact(map.cost_source(x_test.points), y_test.points, p.cost).cost;
    std::vector<double> resampled;
    for (std::uint64_t k = 0; k < 5; ++k) {
      const auto xa = draw(p.source, n_exact, 100 + 2 * k), ya = draw(p.target, n_exact, 101 + 2 * k);
      resampled.push_back(oracles::discrete_ot_exact(map.cost_source(xa.points), ya.points, p.cost).cost);
    }
    m["oracle_cost"] = *oracle_cost;
    m["oracle_cost_std"] = stddev(resampled);
  } else {
    m["oracle_cost"] = nullptr;
  }

  // Pushforward fidelity: exact quadratic OT between pushed test points and target test points.
  Tensor pushed = pushforward(map, x_test);
  Tensor target_pts = y_test.points;
  Tensor source_pts = map.cost_source(x_test.points);
  if (p.cost.is_sphere()) {
    pushed = canonical_angles(pushed);
  }
  const double push_ot = quadratic_ot(pushed, target_pts);
  const double base_ot = quadratic_ot(source_pts, target_pts);
  m["pushforward_ot_cost"] = push_ot;
  m["pushforward_w2"] = std::sqrt(push_ot);
  m["source_target_w2"] = std::sqrt(base_ot);

  if (reference) {
    const Tensor tx = map.apply(x_map.points);
    const Tensor ref = reference->map(x_map.points);
    m["map_l2_error"] = rms_error(tx, ref);
    m["map_max_error"] = (tx - ref).rowwise().norm().maxCoeff();
    m["reference_cost"] = (ref - x_map.points).rowwise().squaredNorm().mean() * p.cost.scale;
  } else {
    m["map_l2_error"] = nullptr;
  }

  if (c.eval.duality) {
    m["duality"] = duality::to_json(evaluate_gaps(c, setup, map, f, 1));
  } else {
    m["duality"] = nullptr;
  }

  // Experiment-specific metrics.
  constexpr double pi = std::numbers::pi;
  switch (c.experiment) {
    case Experiment::kSphereCap: {
      const double r8 = ring_mean_phi(map, pi / 8.0), r4 = ring_mean_phi(map, pi / 4.0);
      m["ring_pi8_mean_phi"] = r8;
      m["ring_pi4_mean_phi"] = r4;
      m["ring_error"] = std::abs(r8 - 7.0 * pi / 8.0);
      // Same band statistics from the exact assignment on the test pairs.
      const auto sol = oracles::discrete_ot_exact(x_test.points, y_test.points, p.cost);
      double s8 = 0.0, s4 = 0.0;
      int n8 = 0, n4 = 0;
      for (Eigen::Index i = 0; i < x_test.points.rows(); ++i) {
        const double phi1 = x_test.points(i, 1);
        const double phi2 = y_test.points(sol.assignment[static_cast<std::size_t>(i)], 1);
        if (std::abs(phi1 - pi / 8.0) < 0.05) {
          s8 += phi2;
          ++n8;
        }
        if (phi1 > pi / 4.0 - 0.05) {
          s4 += phi2;
          ++n4;
        }
      }
      m["oracle_band_pi8_mean_phi"] = n8 ? json(s8 / n8) : json(nullptr);
      m["oracle_band_pi4_mean_phi"] = n4 ? json(s4 / n4) : json(nullptr);
      break;
    }
    case Experiment::kUnequalDimEllipse: {
      const EllipseArc& arc = *setup.ellipse;
      const Tensor t = map.apply(x_map.points);
      constexpr int kBins = 36;
      std::vector<int> bins(kBins, 0);
      double dist = 0.0;
      int start_side = 0, end_side = 0;
      for (Eigen::Index i = 0; i < t.rows(); ++i) {
        double param = 0.0;
        dist += arc.distance(t(i, 0), t(i, 1), &param);
        const double u = (param - arc.param_from_unit(0.0)) / (2.0 * pi - arc.gap_width);
        ++bins[static_cast<std::size_t>(std::clamp(static_cast<int>(u * kBins), 0, kBins - 1))];
        if (u < 0.1) ++start_side;
        if (u > 0.9) ++end_side;
      }
      m["mean_curve_distance"] = dist / static_cast<double>(t.rows());
      m["mean_curve_distance_relative"] = dist / static_cast<double>(t.rows()) / std::max(arc.a, arc.b);
      m["arc_coverage"] = static_cast<double>(std::count_if(bins.begin(), bins.end(), [](int b) { return b > 0; })) / kBins;
      m["gap_start_side_fraction"] = static_cast<double>(start_side) / static_cast<double>(t.rows());
      m["gap_end_side_fraction"] = static_cast<double>(end_side) / static_cast<double>(t.rows());
      break;
    }
    case Experiment::kClassMixture: {
      const Mixture2& mix = *setup.target_mixture;
      const Tensor t = map.apply(x_map.points, x_map.labels);
      int ok = 0;
      for (Eigen::Index i = 0; i < t.rows(); ++i) ok += mix.nearest(t(i, 0), t(i, 1)) == x_map.labels[static_cast<std::size_t>(i)];
      m["class_accuracy"] = static_cast<double>(ok) / static_cast<double>(t.rows());
      // Control: plain quadratic OT ignores labels.
      const auto sol = oracles::discrete_ot_exact(x_test.points, y_test.points, CostSpec::quadratic(2));
      int kept = 0;
      for (std::size_t i = 0; i < sol.assignment.size(); ++i)
        kept += x_test.labels[i] == y_test.labels[static_cast<std::size_t>(sol.assignment[i])];
      m["quadratic_oracle_class_accuracy"] = static_cast<double>(kept) / static_cast<double>(sol.assignment.size());
      break;
    }
    case Experiment::kToyInpaint: {
      const Tensor g = map.composite(x_map.points);
      double change = 0.0;
      for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j)
          if (p.cost.mask[static_cast<std::size_t>(j)] == 1.0) change = std::max(change, std::abs(g(i, j) - x_map.points(i, j)));
      m["observed_pixel_max_change"] = change;
      break;
    }
    case Experiment::kPopulation: {
      const geo::LandSet& land = *setup.land;
      const Tensor raw = canonical_angles(map.apply(x_map.points));
      const auto on_land = [&land](const geo::SpherePoint& q) { return land.contains(q); };
      const CostSpec geodesic = CostSpec::sphere_geodesic();
      Tensor mapped(raw.rows(), 3);
      int raw_land = 0, tau_land = 0, moved = 0;
      double learned = 0.0, baseline = 0.0;
      std::mt19937_64 eng(hash_keys({c.seed, 0xBA5Eull}));
      std::uniform_int_distribution<std::size_t> pick(0, land.anchors.size() - 1);
      for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        const geo::SpherePoint q(raw(i, 0), raw(i, 1));
        const bool was_land = on_land(q);
        const geo::SpherePoint r = geo::tau(q, land, on_land);
        raw_land += was_land;
        moved += !was_land;
        tau_land += on_land(r);
        mapped(i, 0) = r.theta();
        mapped(i, 1) = r.phi();
        mapped(i, 2) = was_land ? 0.0 : 1.0;
        const std::array<double, 2> a{x_map.points(i, 0), x_map.points(i, 1)};
        const std::array<double, 2> b{r.theta(), r.phi()};
        learned += eval_cost(geodesic, a, b);
        const geo::SpherePoint anchor = land.anchor(pick(eng));
        const std::array<double, 2> z{anchor.theta(), anchor.phi()};
        baseline += eval_cost(geodesic, a, z);
      }
      const double n = static_cast<double>(raw.rows());
      m["raw_land_fraction"] = raw_land / n;
      m["tau_land_fraction"] = tau_land / n;
      m["tau_moved_fraction"] = moved / n;
      m["learned_geodesic_cost"] = learned / n;
      m["random_anchor_geodesic_cost"] = baseline / n;
      const Eigen::Index k = std::min<Eigen::Index>(n_exact, mapped.rows());
      m["tau_pushforward_w2"] = std::sqrt(quadratic_ot(mapped.topLeftCorner(k, 2), target_pts.topRows(k)));
      write_csv((out / "tau.csv").string(), {"theta", "phi", "moved"}, mapped);
      artifacts["tau"] = "tau.csv";
      break;
    }
    default:
      break;
  }
  body["metrics"] = m;

  if (!gaps.empty()) {
    Tensor g(static_cast<Eigen::Index>(gaps.size()), 5);
    json trace = json::array();
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      g.row(r) << gaps[i].step, gaps[i].e1, gaps[i].e2, gaps[i].bound, gaps[i].map_l2_error;
      trace.push_back({{"step", gaps[i].step}, {"e1", gaps[i].e1}, {"e2", gaps[i].e2},
                       {"bound", std::isnan(gaps[i].bound) ? json(nullptr) : json(gaps[i].bound)},
                       {"map_l2_error", std::isnan(gaps[i].map_l2_error) ? json(nullptr) : json(gaps[i].map_l2_error)}});
    }
    write_csv((out / "gaps.csv").string(), {"step", "e1", "e2", "bound", "map_l2_error"}, g);
    artifacts["gaps"] = "gaps.csv";
    body["gap_trace"] = trace;
  }

  write_history((out / "history.csv").string(), result.history);
  artifacts["history"] = "history.csv";
  const Tensor src_dump = with_labels(x_test.points, x_test.labels);
  const Tensor tgt_dump = with_labels(y_test.points, y_test.labels);
  auto header = [&](const Tensor& t, const std::string& prefix, bool labelled) {
    auto h = point_header(p.cost, prefix, t.cols() - (labelled ? 1 : 0));
    if (labelled) h.push_back("label");
    return h;
  };
  write_csv((out / "source.csv").string(), header(src_dump, "x", !x_test.labels.empty()), src_dump);
  write_csv((out / "target.csv").string(), header(tgt_dump, "y", !y_test.labels.empty()), tgt_dump);
  write_csv((out / "pushforward.csv").string(), point_header(p.cost, "y", pushed.cols()), pushed);
  save_checkpoint((out / "checkpoint.bin").string(), map, f);
  artifacts["source"] = "source.csv";
  artifacts["target"] = "target.csv";
  artifacts["pushforward"] = "pushforward.csv";
  artifacts["checkpoint"] = "checkpoint.bin";
  artifacts["report"] = "report.json";
  body["artifacts"] = artifacts;

  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream rep(out / "report.json");
  require(static_cast<bool>(rep), ErrorCode::kIo, "cannot write report in " + c.output_dir);
  rep << report.full().dump(2) << '\n';
  require(static_cast<bool>(rep), ErrorCode::kIo, "report write failed in " + c.output_dir);
  return report;
}

/// Residual network with all-zero parameters: exactly the identity map.
inline TrainedMap identity_map(int dim) {
  TrainedMap m;
  m.spec = {dim, dim, {1}, nn::Activation::kPReLU, true, 0.0, 0};
  m.params = nn::ParamVector::Zero(static_cast<Eigen::Index>(nn::param_count(m.spec)));
  return m;
}

struct MapComparisonRow {
  std::string name;
  double transport_cost = 0.0;
  double pushforward_ot_cost = 0.0;  // exact quadratic OT between T#X and Y
};

/// Per-map transport cost and pushforward fidelity on shared test samples.
inline std::vector<MapComparisonRow> compare_maps(const std::vector<std::pair<std::string, TrainedMap>>& maps,
                                                  const LabeledBatch& x_test, const SampleBatch& y_test,
                                                  const Problem& problem) {
  require(x_test.points.rows() >= 1, ErrorCode::kEmpty, "compare_maps needs test samples");
  require(x_test.points.rows() == y_test.rows(), ErrorCode::kDimensionMismatch, "compare_maps needs |X| == |Y|");
  std::vector<MapComparisonRow> rows;
  for (const auto& [name, map] : maps) {
    require(map.spec.input_dim == x_test.points.cols() && map.spec.output_dim == y_test.cols(),
            ErrorCode::kDimensionMismatch, "map '" + name + "' does not match the test sample dimensions");
    MapComparisonRow r;
    r.name = name;
    r.transport_cost = run_detail::mean_cost(problem, map, x_test);
    Tensor pushed = run_detail::pushforward(map, x_test);
    if (problem.cost.is_sphere()) pushed = run_detail::canonical_angles(pushed);
    r.pushforward_ot_cost = run_detail::quadratic_ot(pushed, y_test);
    rows.push_back(r);
  }
  return rows;
}

inline void write_comparison_csv(std::ostream& out, const std::vector<MapComparisonRow>& rows) {
  out << "map,transport_cost,pushforward_ot_cost\n" << std::setprecision(17);
  for (const auto& r : rows) out << r.name << ',' << r.transport_cost << ',' << r.pushforward_ot_cost << '\n';
}

}  // namespace monge::harness
