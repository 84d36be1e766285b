#pragma once

// c-transform evaluation and the duality gaps that certify a trained map:
//   f^{c,-}(x) = sup_y f(y) - c(x, y)
//   E1(T, f)   = mean_x [ f^{c,-}(x) - (f(T(x)) - c(x, T(x))) ]
//   E2(f)      = OT(X, Y) - [ mean_Y f - mean_X f^{c,-} ]
//   bound      = sqrt(2 (E1 + E2))   (unweighted)

#include "monge/costs.hpp"
#include "monge/error.hpp"
#include "monge/nn/network.hpp"
#include "monge/solver.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

namespace monge::duality {

enum class AscentInit { kFromPushforward, kFromTargetSamples };

struct CTransformConfig {
  int ascent_steps = 60;
  double ascent_lr = 0.05;
  int restarts = 2;
  AscentInit init = AscentInit::kFromPushforward;

  void validate() const {
    require(ascent_steps >= 0 && ascent_lr > 0.0 && restarts >= 1, ErrorCode::kInvalidArgument,
            "c-transform config needs ascent_steps >= 0, ascent_lr > 0, restarts >= 1");
  }
};

/// Negative E1 beyond this is reported as an error in the gap evaluation.
inline constexpr double kGapTolerance = 1e-9;

struct CTransformResult {
  Vector values;     // lower bound of f^{c,-}(x_i): best value found
  Tensor argmax;     // maximiser per row
  std::vector<char> multimodal;  // distinct well-separated maxima found by different starts
};

namespace detail {

struct PsiEval {
  Vector value;
  Tensor grad;
};

// Psi_x(y) = f(y) - c(x, y) and its gradient in y, row-wise.
inline PsiEval psi(const nn::Model& f, const CostSpec& cost, const Tensor& x, const Tensor& y, bool with_grad) {
  PsiEval out;
  nn::Tape tape;
  const Tensor fy = nn::forward(f.spec, f.params, y, {}, with_grad ? &tape : nullptr);
  out.value = fy.col(0) - eval_cost_rows(cost, x, y);
  if (with_grad) {
    const auto g = nn::backward(f.spec, f.params, tape, Tensor::Ones(y.rows(), 1));
    out.grad = g.input - grad_y_rows(cost, x, y);
  }
  return out;
}

// Monotone gradient ascent: a row only moves when Psi strictly increases, so the
// returned value never falls below the starting value.
inline PsiEval ascend(const nn::Model& f, const CostSpec& cost, const Tensor& x, Tensor& y,
                      const CTransformConfig& cfg) {
  PsiEval cur = psi(f, cost, x, y, cfg.ascent_steps > 0);
  Vector lr = Vector::Constant(x.rows(), cfg.ascent_lr);
  for (int s = 0; s < cfg.ascent_steps; ++s) {
    Tensor trial = y;
    for (Eigen::Index r = 0; r < y.rows(); ++r) trial.row(r) += lr[r] * cur.grad.row(r);
    PsiEval next = psi(f, cost, x, trial, true);
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      if (std::isfinite(next.value[r]) && next.value[r] > cur.value[r]) {
        y.row(r) = trial.row(r);
        cur.value[r] = next.value[r];
        cur.grad.row(r) = next.grad.row(r);
        lr[r] = std::min(lr[r] * 1.5, 20.0 * cfg.ascent_lr);
      } else {
        lr[r] *= 0.5;
      }
    }
  }
  return cur;
}

}  // namespace detail

/// Batched lower bound of f^{c,-} at each row of `x` (cost-side coordinates).
/// Every candidate is scanned exactly; gradient ascent then runs from `starts`
/// (usually T(x)) and/or the best candidates. The result dominates
/// f(y) - c(x, y) for every candidate y and every start.
inline CTransformResult c_transform_minus_batch(const nn::Model& f, const CostSpec& cost, const Tensor& x,
                                                const Tensor& candidates, const CTransformConfig& cfg,
                                                const Tensor* starts = nullptr) {
  cfg.validate();
  require(f.spec.condition_dim == 0 && f.spec.output_dim == 1, ErrorCode::kInvalidArgument,
          "c-transform needs an unconditioned scalar potential");
  require(candidates.rows() >= 1, ErrorCode::kEmpty, "c-transform needs at least one candidate");
  require(candidates.cols() == cost.m && x.cols() == cost.n, ErrorCode::kDimensionMismatch,
          "c-transform inputs do not match the cost dimensions");
  const Eigen::Index n = x.rows();
  const Eigen::Index k = candidates.rows();
  const Tensor fc = f(candidates);

  // Exact scan over candidates; keep the top few indices per row as ascent starts.
  const bool use_starts = starts != nullptr && cfg.init == AscentInit::kFromPushforward;
  const int from_candidates = std::max(1, cfg.restarts - (use_starts ? 1 : 0));
  const int top = static_cast<int>(std::min<Eigen::Index>(from_candidates, k));
  std::vector<std::vector<Eigen::Index>> best_idx(static_cast<std::size_t>(n));
  CTransformResult out;
  out.values.resize(n);
  out.argmax.resize(n, cost.m);
  out.multimodal.assign(static_cast<std::size_t>(n), 0);
  std::vector<std::pair<double, Eigen::Index>> scored(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j)
      scored[static_cast<std::size_t>(j)] = {fc(j, 0) - eval_cost(cost, row_span(x, i), row_span(candidates, j)), j};
    std::partial_sort(scored.begin(), scored.begin() + top, scored.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    for (int t = 0; t < top; ++t) best_idx[static_cast<std::size_t>(i)].push_back(scored[static_cast<std::size_t>(t)].second);
    out.values[i] = scored.front().first;
    out.argmax.row(i) = candidates.row(scored.front().second);
  }

  std::vector<Tensor> finals;
  std::vector<Vector> final_values;
  auto run_from = [&](Tensor y) {
    require(y.rows() == n && y.cols() == cost.m, ErrorCode::kDimensionMismatch, "ascent start has wrong shape");
    auto res = detail::ascend(f, cost, x, y, cfg);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (res.value[i] > out.values[i]) {
        out.values[i] = res.value[i];
        out.argmax.row(i) = y.row(i);
      }
    }
    finals.push_back(std::move(y));
    final_values.push_back(std::move(res.value));
  };
  if (use_starts) run_from(*starts);
  for (int t = 0; t < top; ++t) {
    Tensor y(n, cost.m);
    for (Eigen::Index i = 0; i < n; ++i) y.row(i) = candidates.row(best_idx[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)]);
    run_from(std::move(y));
  }

  // Heuristic multi-modality check: two starts ending far apart at nearly equal height.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < finals.size(); ++a) {
      for (std::size_t b = a + 1; b < finals.size(); ++b) {
        const double dist = (finals[a].row(i) - finals[b].row(i)).norm();
        const double scale = 1.0 + std::max(finals[a].row(i).norm(), finals[b].row(i).norm());
        const double dv = std::abs(final_values[a][i] - final_values[b][i]);
        if (dist > 0.1 * scale && dv <= 1e-3 * (1.0 + std::abs(final_values[a][i]))) out.multimodal[static_cast<std::size_t>(i)] = 1;
      }
    }
  }
  return out;
}

/// Single-point form: (lower bound of f^{c,-}(x), maximiser).
inline std::pair<double, std::vector<double>> c_transform_minus(const nn::Model& f, const CostSpec& cost,
                                                                std::span<const double> x,
                                                                const CTransformConfig& cfg,
                                                                const Tensor& candidates,
                                                                const std::vector<double>* start = nullptr) {
  Tensor xr(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) xr(0, static_cast<Eigen::Index>(j)) = x[j];
  Tensor s;
  if (start) {
    s.resize(1, static_cast<Eigen::Index>(start->size()));
    for (std::size_t j = 0; j < start->size(); ++j) s(0, static_cast<Eigen::Index>(j)) = (*start)[j];
  }
  const auto r = c_transform_minus_batch(f, cost, xr, candidates, cfg, start ? &s : nullptr);
  return {r.values[0], std::vector<double>(r.argmax.data(), r.argmax.data() + r.argmax.cols())};
}

namespace detail {

inline CostSpec ascent_cost(CostSpec cost) {
  cost.unwrapped_angles = true;
  return cost;
}

inline double mean_e1(const nn::Model& f, const CostSpec& cost, const Tensor& x_cost, const Tensor& t,
                      const CTransformResult& ct) {
  const Vector psi_t = f(t).col(0) - eval_cost_rows(cost, x_cost, t);
  return (ct.values - psi_t).mean();
}

}  // namespace detail

/// E1 = mean over X of f^{c,-}(x) - Psi_x(T(x)). With T(x) among the ascent starts
/// the estimate is nonnegative by construction.
inline double gap_e1(const TrainedMap& map, const nn::Model& f, const CostSpec& cost, const SampleBatch& x,
                     const Tensor& candidates, const CTransformConfig& cfg) {
  const CostSpec c = detail::ascent_cost(cost);
  const Tensor t = map.apply(x);
  const Tensor xc = map.cost_source(x);
  const auto ct = c_transform_minus_batch(f, c, xc, candidates, cfg, &t);
  return detail::mean_e1(f, c, xc, t, ct);
}

/// E2 = oracle_cost - (mean_Y f - mean_X f^{c,-}); Y doubles as the candidate set,
/// which makes the dual value a true lower bound of the empirical OT cost.
inline double gap_e2(const nn::Model& f, const CostSpec& cost, const SampleBatch& x_cost, const SampleBatch& y,
                     double oracle_cost, const CTransformConfig& cfg, const Tensor* starts = nullptr) {
  const CostSpec c = detail::ascent_cost(cost);
  const auto ct = c_transform_minus_batch(f, c, x_cost, y, cfg, starts);
  return oracle_cost - (f(y).mean() - ct.values.mean());
}

/// Unweighted bound sqrt(2 (e1 + e2)).
inline double error_bound(double e1, double e2) {
  if (e1 + e2 < 0.0) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "gap sum is negative (e1 = " << e1 << ", e2 = " << e2 << ")";
    throw Error(ErrorCode::kNegativeGapSum, msg.str());
  }
  return std::sqrt(2.0 * (e1 + e2));
}

/// True when d^2c/dy^2 does not depend on x (needed for the bound to be rigorous).
inline bool hessian_independent_of_x(const CostSpec& cost) {
  switch (cost.kind) {
    case CostKind::kQuadratic:
    case CostKind::kMaskedMse:
    case CostKind::kClassContrastive:
      return cost.n == cost.m;
    default:
      return false;
  }
}

struct DualityReport {
  double e1 = 0.0;
  double e2 = 0.0;
  std::optional<double> bound;
  double oracle_cost = 0.0;
  double dual_value = 0.0;
  int n_samples = 0;
  bool assumption_unmet = false;
  double multimodal_fraction = 0.0;
  double tolerance = kGapTolerance;
};

inline nlohmann::json to_json(const DualityReport& r) {
  nlohmann::json j;
  j["e1"] = r.e1;
  j["e2"] = r.e2;
  j["bound"] = r.bound ? nlohmann::json(*r.bound) : nlohmann::json(nullptr);
  j["oracle_cost"] = r.oracle_cost;
  j["dual_value"] = r.dual_value;
  j["n_samples"] = r.n_samples;
  j["assumption_unmet"] = r.assumption_unmet;
  j["multimodal_fraction"] = r.multimodal_fraction;
  j["tolerance"] = r.tolerance;
  return j;
}

inline DualityReport duality_report_from_json(const nlohmann::json& j) {
  DualityReport r;
  r.e1 = j.at("e1").get<double>();
  r.e2 = j.at("e2").get<double>();
  if (!j.at("bound").is_null()) r.bound = j.at("bound").get<double>();
  r.oracle_cost = j.at("oracle_cost").get<double>();
  r.dual_value = j.at("dual_value").get<double>();
  r.n_samples = j.at("n_samples").get<int>();
  r.assumption_unmet = j.at("assumption_unmet").get<bool>();
  r.multimodal_fraction = j.at("multimodal_fraction").get<double>();
  r.tolerance = j.at("tolerance").get<double>();
  return r;
}

/// Both gaps from one shared c-transform pass over X, with Y as candidates and
/// T(X) as an ascent start. `oracle_cost` must be the exact OT cost of (X, Y).
inline DualityReport evaluate_duality(const TrainedMap& map, const nn::Model& f, const CostSpec& cost,
                                      const SampleBatch& x, const SampleBatch& y, double oracle_cost,
                                      const CTransformConfig& cfg = {}) {
  require(x.rows() == y.rows() && x.rows() >= 1, ErrorCode::kDimensionMismatch, "duality needs |X| == |Y| >= 1");
  const CostSpec c = detail::ascent_cost(cost);
  const Tensor t = map.apply(x);
  const Tensor xc = map.cost_source(x);
  const auto ct = c_transform_minus_batch(f, c, xc, y, cfg, &t);
  DualityReport r;
  r.n_samples = static_cast<int>(x.rows());
  r.oracle_cost = oracle_cost;
  r.dual_value = f(y).mean() - ct.values.mean();
  r.e1 = detail::mean_e1(f, c, xc, t, ct);
  r.e2 = oracle_cost - r.dual_value;
  if (r.e1 + r.e2 >= 0.0) r.bound = error_bound(r.e1, r.e2);
  r.assumption_unmet = !hessian_independent_of_x(cost);
  r.multimodal_fraction = static_cast<double>(std::accumulate(ct.multimodal.begin(), ct.multimodal.end(), 0)) /
                          static_cast<double>(ct.multimodal.size());
  return r;
}

}  // namespace monge::duality
