#pragma once

// Independent reference computations shared by the unit suites and the
// acceptance binary.

#include "monge/nn/network.hpp"
#include "monge/nn/tensor.hpp"
#include "monge/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace monge::testing {

/// Minimum of mean C(i, p(i)) over all permutations p (n <= 8 or so).
inline double brute_force_assignment(const Eigen::MatrixXd& c) {
  std::vector<int> p(static_cast<std::size_t>(c.rows()));
  std::iota(p.begin(), p.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += c(static_cast<Eigen::Index>(i), p[i]);
    best = std::min(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best / static_cast<double>(c.rows());
}

inline Tensor random_points(std::mt19937_64& eng, Eigen::Index n, Eigen::Index d, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) t(i, j) = u(eng);
  return t;
}

/// Random symmetric positive definite matrix with eigenvalues in [lo, hi].
inline Eigen::MatrixXd random_spd(std::mt19937_64& eng, int d, double lo = 0.2, double hi = 4.0) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = g(eng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::MatrixXd q = qr.householderQ();
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd lam(d);
  for (int i = 0; i < d; ++i) lam[i] = u(eng);
  return q * lam.asDiagonal() * q.transpose();
}


/// f(y) = <a, y> + b as a single linear layer.
inline nn::Model linear_potential(const std::vector<double>& a, double b = 0.0) {
  nn::Model f;
  f.spec = {static_cast<int>(a.size()), 1, {}, nn::Activation::kPReLU, false, 0.0, 0};
  f.params.resize(static_cast<Eigen::Index>(a.size() + 1));
  for (std::size_t i = 0; i < a.size(); ++i) f.params[static_cast<Eigen::Index>(i)] = a[i];
  f.params[static_cast<Eigen::Index>(a.size())] = b;
  return f;
}

/// T(x) = x + v as a residual linear layer with zero weights.
inline TrainedMap shift_map(const std::vector<double>& v) {
  TrainedMap m;
  const int d = static_cast<int>(v.size());
  m.spec = {d, d, {}, nn::Activation::kPReLU, true, 0.0, 0};
  m.params = nn::ParamVector::Zero(static_cast<Eigen::Index>(nn::param_count(m.spec)));
  for (int i = 0; i < d; ++i) m.params[d * d + i] = v[static_cast<std::size_t>(i)];
  return m;
}

/// Deterministic sampler from a generator of one row per (engine) call.
template <class RowFn>
Sampler make_sampler(int dim, std::uint64_t seed, RowFn row) {
  return [=](std::size_t n, std::uint64_t draw) {
    std::mt19937_64 eng(seed * 1000003ull + draw);
    LabeledBatch b;
    b.points.resize(static_cast<Eigen::Index>(n), dim);
    for (Eigen::Index i = 0; i < b.points.rows(); ++i) row(eng, b.points.row(i));
    return b;
  };
}

}  // namespace monge::testing
