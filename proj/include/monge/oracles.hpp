#pragma once

// Exact and closed-form optimal transport solvers used as ground truth.

#include "monge/costs.hpp"
#include "monge/error.hpp"
#include "monge/nn/tensor.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <vector>

namespace monge::oracles {

inline constexpr std::size_t kMaxExactSize = 512;

/// Coupling between two equal-size empirical measures with uniform weights 1/n.
struct DiscreteCoupling {
  std::size_t n = 0;
  Eigen::MatrixXd plan;            // n x n, rows and columns sum to 1/n
  double cost = 0.0;               // sum_ij plan_ij c(x_i, y_j)
  std::vector<int> assignment;     // exact solver only: row i -> column assignment[i]
  double entropic_lower_bound = std::numeric_limits<double>::quiet_NaN();  // sinkhorn only
  int iterations = 0;
  double marginal_violation = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix (shortest augmenting
/// path with dual potentials, O(n^3)). Returns column index per row.
inline std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  require(cost.rows() == cost.cols(), ErrorCode::kDimensionMismatch, "assignment needs a square cost matrix");
  require(cost.allFinite(), ErrorCode::kNonFinite, "assignment cost matrix has non-finite entries");
  const int n = static_cast<int>(cost.rows());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based arrays; p[j] is the row matched to column j, column 0 is a sentinel.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n);
  for (int j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

/// Exact OT between two uniform empirical measures of equal size: the optimal
/// coupling is 1/n times a permutation matrix.
inline DiscreteCoupling discrete_ot_exact(const Eigen::MatrixXd& cost) {
  require(cost.rows() == cost.cols(), ErrorCode::kDimensionMismatch, "exact OT needs equal sample counts");
  require(cost.rows() >= 1, ErrorCode::kEmpty, "exact OT needs at least one sample");
  require(static_cast<std::size_t>(cost.rows()) <= kMaxExactSize, ErrorCode::kInvalidArgument,
          "exact OT is capped at n = 512");
  DiscreteCoupling out;
  out.n = static_cast<std::size_t>(cost.rows());
  out.assignment = solve_assignment(cost);
  const double w = 1.0 / static_cast<double>(out.n);
  out.plan = Eigen::MatrixXd::Zero(cost.rows(), cost.cols());
  for (std::size_t i = 0; i < out.n; ++i) {
    out.plan(static_cast<Eigen::Index>(i), out.assignment[i]) = w;
    out.cost += w * cost(static_cast<Eigen::Index>(i), out.assignment[i]);
  }
  return out;
}

inline DiscreteCoupling discrete_ot_exact(const SampleBatch& x, const SampleBatch& y, const CostSpec& cost) {
  require(x.rows() == y.rows(), ErrorCode::kDimensionMismatch, "exact OT needs |X| == |Y|");
  require(static_cast<std::size_t>(x.rows()) <= kMaxExactSize, ErrorCode::kInvalidArgument,
          "exact OT is capped at n = 512");
  return discrete_ot_exact(cost_matrix(cost, x, y));
}

namespace detail {

inline double log_sum_exp(const double* v, Eigen::Index n, Eigen::Index stride) {
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) mx = std::max(mx, v[k * stride]);
  double s = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) s += std::exp(v[k * stride] - mx);
  return mx + std::log(s);
}

}  // namespace detail

/// Entropic OT by log-domain Sinkhorn iterations on uniform marginals.
/// Stops when the column-marginal violation is <= `tol` or after `max_iters`.
inline DiscreteCoupling sinkhorn(const Eigen::MatrixXd& cost, double epsilon, int max_iters = 20000,
                                 double tol = 1e-7) {
  require(epsilon > 0.0, ErrorCode::kInvalidArgument, "sinkhorn epsilon must be > 0");
  require(cost.rows() == cost.cols() && cost.rows() >= 1, ErrorCode::kDimensionMismatch,
          "sinkhorn expects a non-empty square cost matrix");
  require(cost.allFinite(), ErrorCode::kNonFinite, "sinkhorn cost matrix has non-finite entries");
  const Eigen::Index n = cost.rows();
  const double log_w = -std::log(static_cast<double>(n));
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n), g = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd scratch(n, n);
  DiscreteCoupling out;
  out.n = static_cast<std::size_t>(n);
  auto column_violation = [&]() {
    // Row marginals are exact after the f-update; measure the columns.
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) s += std::exp((f[i] + g[j] - cost(i, j)) / epsilon);
      worst = std::max(worst, std::abs(s - std::exp(log_w)));
    }
    return worst;
  };
  int it = 0;
  for (; it < max_iters; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) scratch(i, j) = (g[j] - cost(i, j)) / epsilon;
      f[i] = epsilon * (log_w - detail::log_sum_exp(scratch.data() + i, n, n));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) scratch(i, j) = (f[i] - cost(i, j)) / epsilon;
      g[j] = epsilon * (log_w - detail::log_sum_exp(scratch.data() + j * n, n, 1));
    }
    // scratch is column-major: column j is contiguous, row i is strided by n.
    if (it % 10 == 9) {
      // Re-run the f half-step so row marginals are exact, then test columns.
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) scratch(i, j) = (g[j] - cost(i, j)) / epsilon;
        f[i] = epsilon * (log_w - detail::log_sum_exp(scratch.data() + i, n, n));
      }
      if (column_violation() <= tol) {
        ++it;
        break;
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) scratch(i, j) = (g[j] - cost(i, j)) / epsilon;
    f[i] = epsilon * (log_w - detail::log_sum_exp(scratch.data() + i, n, n));
  }
  out.plan.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out.plan(i, j) = std::exp((f[i] + g[j] - cost(i, j)) / epsilon);
  out.cost = (out.plan.array() * cost.array()).sum();
  out.iterations = it;
  const double w = std::exp(log_w);
  out.marginal_violation = std::max((out.plan.rowwise().sum().array() - w).abs().maxCoeff(),
                                    (out.plan.colwise().sum().array() - w).abs().maxCoeff());
  out.entropic_lower_bound = out.cost - static_cast<double>(n) * epsilon * std::log(static_cast<double>(n));
  return out;
}

inline DiscreteCoupling sinkhorn(const SampleBatch& x, const SampleBatch& y, const CostSpec& cost, double epsilon,
                                 int max_iters = 20000) {
  require(x.rows() == y.rows(), ErrorCode::kDimensionMismatch, "sinkhorn needs |X| == |Y|");
  return sinkhorn(cost_matrix(cost, x, y), epsilon, max_iters);
}

/// Writes the nonzero entries of a coupling as CSV triples `i,j,mass`.
inline void write_coupling_csv(std::ostream& out, const DiscreteCoupling& c) {
  out << "i,j,mass\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < c.plan.rows(); ++i)
    for (Eigen::Index j = 0; j < c.plan.cols(); ++j)
      if (c.plan(i, j) != 0.0) out << i << ',' << j << ',' << c.plan(i, j) << '\n';
}

/// Monotone (order-statistic) rearrangement between two sorted 1D samples.
struct MonotoneMap {
  std::vector<double> source;  // sorted ascending
  std::vector<double> target;  // sorted ascending
  double cost = 0.0;           // mean h(|x_(i) - y_(i)|)

  /// Piecewise-linear interpolation between matched order statistics,
  /// constant extrapolation outside the sample range.
  double operator()(double x) const {
    if (source.size() == 1 || x <= source.front()) return target.front();
    if (x >= source.back()) return target.back();
    const auto it = std::upper_bound(source.begin(), source.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - source.begin());
    const double x0 = source[k - 1], x1 = source[k];
    const double t = x1 > x0 ? (x - x0) / (x1 - x0) : 0.0;
    return target[k - 1] + t * (target[k] - target[k - 1]);
  }
};

/// `h` must be convex; the caller declares this. The map sends the i-th order
/// statistic of X to the i-th order statistic of Y.
inline MonotoneMap monotone_map_1d(std::vector<double> x_sorted, std::vector<double> y_sorted,
                                   const std::function<double(double)>& h) {
  require(x_sorted.size() == y_sorted.size(), ErrorCode::kDimensionMismatch, "monotone map needs equal sizes");
  require(!x_sorted.empty(), ErrorCode::kEmpty, "monotone map needs samples");
  require(std::is_sorted(x_sorted.begin(), x_sorted.end()) && std::is_sorted(y_sorted.begin(), y_sorted.end()),
          ErrorCode::kNotSorted, "monotone map inputs must be sorted ascending");
  MonotoneMap m;
  double total = 0.0;
  for (std::size_t i = 0; i < x_sorted.size(); ++i) total += h(std::abs(x_sorted[i] - y_sorted[i]));
  m.cost = total / static_cast<double>(x_sorted.size());
  m.source = std::move(x_sorted);
  m.target = std::move(y_sorted);
  return m;
}

/// Sorts a 1D sample; ties keep their original order.
inline std::vector<double> sorted_copy(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  std::stable_sort(out.begin(), out.end());
  return out;
}

/// Closed-form quadratic-cost Monge map between Gaussians: x -> b + A (x - mean_a).
struct GaussianOtSolution {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd mean_a;
  double w2_squared = 0.0;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return b + A * (x - mean_a); }

  Tensor apply(const Tensor& x) const {
    Tensor out = (x.rowwise() - mean_a.transpose()) * A.transpose();
    out.rowwise() += b.transpose();
    return out;
  }
};

namespace detail {

inline constexpr double kEigenFloor = 1e-12;

inline void check_spd(const Eigen::MatrixXd& m, const char* name) {
  require(m.rows() == m.cols(), ErrorCode::kDimensionMismatch, std::string(name) + " must be square");
  require(m.allFinite(), ErrorCode::kNonFinite, std::string(name) + " has non-finite entries");
  require((m - m.transpose()).norm() <= 1e-10 * (1.0 + m.norm()), ErrorCode::kNotPositiveDefinite,
          std::string(name) + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  require(es.eigenvalues().minCoeff() > 0.0, ErrorCode::kNotPositiveDefinite,
          std::string(name) + " is not positive definite");
}

// Symmetric matrix power via eigendecomposition with eigenvalue floor.
inline Eigen::MatrixXd sym_pow(const Eigen::MatrixXd& m, double power) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(kEigenFloor).array().pow(power);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

inline GaussianOtSolution gaussian_w2(const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& cov_a,
                                      const Eigen::VectorXd& mean_b, const Eigen::MatrixXd& cov_b) {
  require(mean_a.size() == mean_b.size() && cov_a.rows() == mean_a.size() && cov_b.rows() == mean_b.size(),
          ErrorCode::kDimensionMismatch, "gaussian_w2: inconsistent dimensions");
  detail::check_spd(cov_a, "cov_a");
  detail::check_spd(cov_b, "cov_b");
  const Eigen::MatrixXd a_half = detail::sym_pow(cov_a, 0.5);
  const Eigen::MatrixXd a_inv_half = detail::sym_pow(cov_a, -0.5);
  const Eigen::MatrixXd middle = detail::sym_pow(a_half * cov_b * a_half, 0.5);
  GaussianOtSolution s;
  s.A = a_inv_half * middle * a_inv_half;
  s.A = 0.5 * (s.A + s.A.transpose());
  s.b = mean_b;
  s.mean_a = mean_a;
  s.w2_squared = (mean_a - mean_b).squaredNorm() + (cov_a + cov_b - 2.0 * middle).trace();
  s.w2_squared = std::max(0.0, s.w2_squared);
  return s;
}

}  // namespace monge::oracles
