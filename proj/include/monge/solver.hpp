#pragma once

// Alternating stochastic max-min optimisation of the mini-batch Lagrangian
//   L(T, f) = 1/B sum_k [ c(X_k, T(X_k)) - f(T(X_k)) + f(Y_k) ],
// decreasing it in the map parameters and increasing it in the potential's.

#include "monge/costs.hpp"
#include "monge/error.hpp"
#include "monge/nn/network.hpp"
#include "monge/nn/optim.hpp"
#include "monge/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace monge {

/// A batch of samples with (possibly empty) integer class labels.
struct LabeledBatch {
  SampleBatch points;
  std::vector<int> labels;
};

/// Deterministic sample source: the same (n, draw) always returns the same batch.
using Sampler = std::function<LabeledBatch(std::size_t n, std::uint64_t draw)>;

/// Per-row label vectors for pushforward points (probabilities or one-hot).
using Classifier = std::function<Tensor(const Tensor&)>;

struct TrainConfig {
  int outer_steps = 1000;    // K
  int map_steps = 8;         // K1, steps decreasing L in the map
  int potential_steps = 6;   // K2, steps increasing L in the potential
  int batch_size = 256;      // B
  double lr_map = 1e-3;
  double lr_potential = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;
  std::optional<double> ema_decay;
  std::uint64_t seed = 0;
  int eval_every = 100;
  std::vector<int> extra_records;  // additional outer steps to record at
  int eval_batch = 1024;
  bool pad_source = false;
  std::optional<std::vector<double>> composite_mask;
  bool conditional = false;
  int num_classes = 0;
  bool resample_inner = true;
  double divergence_ceiling = 1e6;

  void validate(const CostSpec& cost) const {
    require(outer_steps >= 1 && map_steps >= 1 && potential_steps >= 1 && batch_size >= 1,
            ErrorCode::kInvalidArgument, "K, K1, K2 and batch size must all be >= 1");
    require(lr_map > 0.0 && lr_potential > 0.0, ErrorCode::kInvalidArgument, "learning rates must be > 0");
    require(eval_every >= 1 && eval_batch >= 1, ErrorCode::kInvalidArgument, "eval settings must be >= 1");
    for (int s : extra_records)
      require(s >= 1 && s <= outer_steps, ErrorCode::kInvalidArgument, "record steps must lie in [1, K]");
    require(!ema_decay || (*ema_decay > 0.0 && *ema_decay < 1.0), ErrorCode::kInvalidArgument,
            "ema_decay must be in (0, 1)");
    require(divergence_ceiling > 0.0, ErrorCode::kInvalidArgument, "divergence ceiling must be > 0");
    if (composite_mask) {
      require(cost.kind == CostKind::kMaskedMse && cost.mask == *composite_mask, ErrorCode::kInvalidArgument,
              "composite output requires a masked_mse cost with the same mask");
    }
    require(!conditional || num_classes >= 2, ErrorCode::kInvalidArgument, "conditional mode needs num_classes >= 2");
    require(cost.kind != CostKind::kClassContrastive || conditional, ErrorCode::kInvalidArgument,
            "class_contrastive cost requires conditional mode");
  }
};

/// Appends zero columns so an n-dim batch lives in R^m.
inline SampleBatch pad_source(const SampleBatch& x, int m) {
  require(m >= x.cols(), ErrorCode::kInvalidArgument,
          "cannot pad " + std::to_string(x.cols()) + "-dim samples down to " + std::to_string(m));
  SampleBatch out = SampleBatch::Zero(x.rows(), m);
  out.leftCols(x.cols()) = x;
  return out;
}

/// The trained transport map; evaluation uses the EMA parameters when present.
struct TrainedMap {
  nn::NetworkSpec spec;
  nn::ParamVector params;
  std::optional<nn::ParamVector> ema_params;
  std::optional<int> pad_to;
  std::optional<std::vector<double>> composite_mask;
  bool conditional = false;

  const nn::ParamVector& eval_params() const { return ema_params ? *ema_params : params; }

  Tensor network_input(const SampleBatch& x, std::span<const int> labels) const {
    if (!conditional) return x;
    require(labels.size() == static_cast<std::size_t>(x.rows()), ErrorCode::kMissingLabels,
            "conditional map needs one label per sample");
    return hconcat(x, one_hot(labels, spec.condition_dim));
  }

  /// T(x).
  Tensor apply(const SampleBatch& x, std::span<const int> labels = {}) const {
    return nn::forward(spec, eval_params(), network_input(x, labels));
  }

  /// G(x) = T(x) * (1 - M) + x * M when a composite mask is set, else T(x).
  Tensor composite(const SampleBatch& x, std::span<const int> labels = {}) const {
    Tensor t = apply(x, labels);
    if (!composite_mask) return t;
    return compose(t, x, *composite_mask);
  }

  /// Source points as seen by the cost (zero-padded when the map changes dimension).
  SampleBatch cost_source(const SampleBatch& x) const { return pad_to ? pad_source(x, *pad_to) : x; }

  static Tensor compose(const Tensor& t, const SampleBatch& x, const std::vector<double>& mask) {
    const Eigen::Map<const Eigen::RowVectorXd> m(mask.data(), static_cast<Eigen::Index>(mask.size()));
    Tensor g = t;
    for (Eigen::Index r = 0; r < g.rows(); ++r)
      g.row(r) = t.row(r).cwiseProduct((1.0 - m.array()).matrix()) + x.row(r).cwiseProduct(m);
    return g;
  }
};

struct HistoryRecord {
  int step = 0;
  double lagrangian = 0.0;
  double transport_cost = 0.0;
  double f_target_mean = 0.0;
  double f_pushforward_mean = 0.0;
};

using TrainHistory = std::vector<HistoryRecord>;

struct LagrangianTerms {
  double value = 0.0;
  double transport_cost = 0.0;      // mean c(X, T(X))
  double f_target_mean = 0.0;       // mean f(Y)
  double f_pushforward_mean = 0.0;  // mean f(T(X)), or f(G(X)) in composite mode
};

/// Labels for the cost's indicator term: source labels against the classifier's
/// view of the pushforward (or the source label itself when no classifier is set).
struct CostLabels {
  std::vector<int> source;
  Tensor target;

  BatchLabels view() const { return {source, &target}; }
};

inline std::optional<CostLabels> make_cost_labels(const CostSpec& cost, const std::vector<int>& source_labels,
                                                  const Tensor& pushforward, const Classifier& classifier) {
  if (cost.kind != CostKind::kClassContrastive) return std::nullopt;
  require(source_labels.size() == static_cast<std::size_t>(pushforward.rows()), ErrorCode::kMissingLabels,
          "class_contrastive cost needs source labels");
  CostLabels l;
  l.source = source_labels;
  if (classifier) {
    l.target = classifier(pushforward);
  } else {
    l.target.resize(pushforward.rows(), 1);
    for (Eigen::Index r = 0; r < pushforward.rows(); ++r) l.target(r, 0) = source_labels[static_cast<std::size_t>(r)];
  }
  return l;
}

namespace solver_detail {

inline Tensor potential_input(const nn::NetworkSpec& f_spec, const Tensor& y, const std::vector<int>& labels) {
  if (f_spec.condition_dim == 0) return y;
  require(labels.size() == static_cast<std::size_t>(y.rows()), ErrorCode::kMissingLabels,
          "conditional potential needs one label per sample");
  return hconcat(y, one_hot(labels, f_spec.condition_dim));
}

}  // namespace solver_detail

/// Exact mini-batch value of the Lagrangian and its parts. In composite mode the
/// potential sees G(x) while the cost still uses T(x). In conditional mode the
/// potential receives the source label with each pushforward point.
inline LagrangianTerms lagrangian_batch(const TrainedMap& map, const nn::Model& potential, const CostSpec& cost,
                                        const LabeledBatch& x, const LabeledBatch& y,
                                        const Classifier& classifier = {}) {
  require(x.points.rows() == y.points.rows(), ErrorCode::kDimensionMismatch, "lagrangian needs |X| == |Y|");
  require(x.points.rows() >= 1, ErrorCode::kEmpty, "lagrangian needs samples");
  const Tensor t = map.apply(x.points, x.labels);
  const Tensor pushed = map.composite_mask ? TrainedMap::compose(t, x.points, *map.composite_mask) : t;
  const auto labels = make_cost_labels(cost, x.labels, t, classifier);
  const BatchLabels view = labels ? labels->view() : BatchLabels{};
  const Vector c = eval_cost_rows(cost, map.cost_source(x.points), t, labels ? &view : nullptr);
  const Tensor f_push = potential(solver_detail::potential_input(potential.spec, pushed, x.labels));
  const Tensor f_tgt = potential(solver_detail::potential_input(potential.spec, y.points, y.labels));
  LagrangianTerms out;
  out.transport_cost = c.mean();
  out.f_pushforward_mean = f_push.mean();
  out.f_target_mean = f_tgt.mean();
  out.value = out.transport_cost - out.f_pushforward_mean + out.f_target_mean;
  require(std::isfinite(out.value), ErrorCode::kNonFinite, "lagrangian is not finite");
  return out;
}

struct Problem {
  Sampler source;
  Sampler target;
  CostSpec cost;
  nn::NetworkSpec map_spec;
  nn::NetworkSpec potential_spec;
  Classifier classifier;  // conditional mode: labels the pushforward for the cost
};

struct TrainResult {
  TrainedMap map;
  nn::Model potential;
  TrainHistory history;
  long gradient_steps = 0;
};

/// Thrown when the Lagrangian leaves the configured ceiling or turns non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, TrainHistory history)
      : Error(ErrorCode::kDiverged, what), history_(std::move(history)) {}
  const TrainHistory& history() const { return history_; }

 private:
  TrainHistory history_;
};

/// Called at every history record with the current map and potential.
using TrainObserver = std::function<void(int step, const TrainedMap& map, const nn::Model& potential)>;

/// Runs K outer iterations, each with K1 map steps and then K2 potential steps.
inline TrainResult train(const Problem& problem, const TrainConfig& cfg, const TrainObserver& observer = {}) {
  const CostSpec& cost = problem.cost;
  cost.validate();
  cfg.validate(cost);
  problem.map_spec.validate();
  problem.potential_spec.validate();
  const int classes = cfg.conditional ? cfg.num_classes : 0;
  require(problem.map_spec.condition_dim == classes && problem.potential_spec.condition_dim == classes,
          ErrorCode::kInvalidArgument, "network condition_dim must equal the class count in conditional mode");
  require(problem.map_spec.output_dim == cost.m && problem.potential_spec.input_dim == cost.m &&
              problem.potential_spec.output_dim == 1,
          ErrorCode::kDimensionMismatch, "map output / potential input must match the cost's target dimension");
  require(cfg.pad_source ? problem.map_spec.input_dim <= cost.n : problem.map_spec.input_dim == cost.n,
          ErrorCode::kDimensionMismatch, "map input dimension inconsistent with the cost's source dimension");
  if (cfg.composite_mask)
    require(problem.map_spec.input_dim == cost.m, ErrorCode::kDimensionMismatch, "composite mode needs n == m");

  TrainResult result;
  TrainedMap& map = result.map;
  map.spec = problem.map_spec;
  map.params = nn::init_params(problem.map_spec, hash_keys({cfg.seed, 0x7ull}));
  if (cfg.pad_source) map.pad_to = cost.n;
  map.composite_mask = cfg.composite_mask;
  map.conditional = cfg.conditional;
  nn::Model& f = result.potential;
  f.spec = problem.potential_spec;
  f.params = nn::init_params(problem.potential_spec, hash_keys({cfg.seed, 0xFull}));

  auto adam_map = nn::AdamState::for_params(map.params, cfg.lr_map, cfg.beta1, cfg.beta2, cfg.adam_eps,
                                            cfg.weight_decay);
  auto adam_f = nn::AdamState::for_params(f.params, cfg.lr_potential, cfg.beta1, cfg.beta2, cfg.adam_eps,
                                          cfg.weight_decay);
  std::optional<nn::EmaState> ema;
  if (cfg.ema_decay) ema = nn::EmaState{map.params, *cfg.ema_decay};

  const std::uint64_t map_rng = hash_keys({cfg.seed, 0x11ull});
  const std::uint64_t f_rng = hash_keys({cfg.seed, 0x22ull});
  const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  std::uint64_t draw = 0;
  std::uint64_t step = 0;

  // Fixed held-out batch for monitoring.
  constexpr std::uint64_t kEvalDraw = 1ull << 62;
  const LabeledBatch eval_x = problem.source(static_cast<std::size_t>(cfg.eval_batch), kEvalDraw);
  const LabeledBatch eval_y = problem.target(static_cast<std::size_t>(cfg.eval_batch), kEvalDraw);

  auto check_ceiling = [&](double value, int outer) {
    if (!std::isfinite(value) || std::abs(value) > cfg.divergence_ceiling) {
      throw DivergenceError("lagrangian " + std::to_string(value) + " at outer step " + std::to_string(outer) +
                                " exceeds ceiling " + std::to_string(cfg.divergence_ceiling),
                            result.history);
    }
  };

  auto record = [&](int outer) {
    TrainedMap snapshot = map;
    if (ema) snapshot.ema_params = ema->shadow;
    const auto terms = lagrangian_batch(snapshot, f, cost, eval_x, eval_y, problem.classifier);
    check_ceiling(terms.value, outer);
    result.history.push_back({outer, terms.value, terms.transport_cost, terms.f_target_mean, terms.f_pushforward_mean});
    if (observer) observer(outer, snapshot, f);
  };

  LabeledBatch xb, yb;
  auto draw_batches = [&]() {
    xb = problem.source(batch, draw);
    yb = problem.target(batch, draw);
    ++draw;
    require(xb.points.rows() == cfg.batch_size && yb.points.rows() == cfg.batch_size, ErrorCode::kDimensionMismatch,
            "sampler returned the wrong batch size");
  };

  for (int outer = 1; outer <= cfg.outer_steps; ++outer) {
    draw_batches();
    for (int k = 0; k < cfg.map_steps; ++k) {
      if (cfg.resample_inner && k > 0) draw_batches();
      const nn::ForwardMode map_mode{true, map_rng, step};
      const nn::ForwardMode f_mode{true, f_rng, step};
      ++step;
      nn::Tape map_tape, f_tape;
      const Tensor t = nn::forward(map.spec, map.params, map.network_input(xb.points, xb.labels), map_mode, &map_tape);
      const Tensor pushed = cfg.composite_mask ? TrainedMap::compose(t, xb.points, *cfg.composite_mask) : t;
      nn::forward(f.spec, f.params, solver_detail::potential_input(f.spec, pushed, xb.labels), f_mode, &f_tape);
      const auto labels = make_cost_labels(cost, xb.labels, t, problem.classifier);
      const BatchLabels view = labels ? labels->view() : BatchLabels{};
      Tensor upstream = grad_y_rows(cost, map.cost_source(xb.points), t, labels ? &view : nullptr) * inv_b;
      const auto f_grads = nn::backward(f.spec, f.params, f_tape, Tensor::Constant(t.rows(), 1, -inv_b));
      Tensor df = f_grads.input.leftCols(cost.m);
      if (cfg.composite_mask) {
        for (Eigen::Index j = 0; j < df.cols(); ++j) df.col(j) *= 1.0 - (*cfg.composite_mask)[static_cast<std::size_t>(j)];
      }
      upstream += df;
      const auto map_grads = nn::backward(map.spec, map.params, map_tape, upstream);
      if (!map_grads.params.allFinite())
        throw DivergenceError("non-finite map gradient at outer step " + std::to_string(outer), result.history);
      nn::adam_step(map.params, map_grads.params, adam_map);
      if (ema) nn::ema_update(*ema, map.params);
    }
    for (int k = 0; k < cfg.potential_steps; ++k) {
      if (cfg.resample_inner) draw_batches();
      const nn::ForwardMode map_mode{true, map_rng, step};
      const nn::ForwardMode f_mode{true, f_rng, step};
      ++step;
      const Tensor t = nn::forward(map.spec, map.params, map.network_input(xb.points, xb.labels), map_mode);
      const Tensor pushed = cfg.composite_mask ? TrainedMap::compose(t, xb.points, *cfg.composite_mask) : t;
      const Tensor f_in = vconcat(solver_detail::potential_input(f.spec, pushed, xb.labels),
                                  solver_detail::potential_input(f.spec, yb.points, yb.labels));
      nn::Tape f_tape;
      const Tensor f_out = nn::forward(f.spec, f.params, f_in, f_mode, &f_tape);
      const Eigen::Index b = t.rows();
      // Minimise -L: d(-L)/d f(push) = +1/B, d(-L)/d f(Y) = -1/B.
      Tensor upstream(2 * b, 1);
      upstream.topRows(b).setConstant(inv_b);
      upstream.bottomRows(b).setConstant(-inv_b);
      const auto g = nn::backward(f.spec, f.params, f_tape, upstream);
      const auto labels = make_cost_labels(cost, xb.labels, t, problem.classifier);
      const BatchLabels view = labels ? labels->view() : BatchLabels{};
      const double value = eval_cost_rows(cost, map.cost_source(xb.points), t, labels ? &view : nullptr).mean() -
                           f_out.topRows(b).mean() + f_out.bottomRows(b).mean();
      check_ceiling(value, outer);
      if (!g.params.allFinite())
        throw DivergenceError("non-finite potential gradient at outer step " + std::to_string(outer), result.history);
      nn::adam_step(f.params, g.params, adam_f);
    }
    if (outer % cfg.eval_every == 0 || outer == cfg.outer_steps ||
        std::find(cfg.extra_records.begin(), cfg.extra_records.end(), outer) != cfg.extra_records.end())
      record(outer);
  }
  if (ema) map.ema_params = ema->shadow;
  result.gradient_steps = static_cast<long>(step);
  return result;
}

}  // namespace monge
