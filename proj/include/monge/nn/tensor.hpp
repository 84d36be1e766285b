#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace monge {

/// Row-major B x d batch of real values; one sample per row.
using Tensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// i.i.d. draws from a marginal, one per row.
using SampleBatch = Tensor;

using Vector = Eigen::VectorXd;

inline std::span<const double> row_span(const Tensor& t, Eigen::Index r) {
  return {t.data() + r * t.cols(), static_cast<std::size_t>(t.cols())};
}

inline std::span<double> row_span(Tensor& t, Eigen::Index r) {
  return {t.data() + r * t.cols(), static_cast<std::size_t>(t.cols())};
}

inline bool all_finite(const Tensor& t) { return t.allFinite(); }

inline Tensor from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Tensor(0, 0);
  Tensor t(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return t;
}

/// One-hot encoding of integer labels into `classes` columns.
inline Tensor one_hot(std::span<const int> labels, int classes) {
  Tensor t = Tensor::Zero(static_cast<Eigen::Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) t(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return t;
}

inline Tensor hconcat(const Tensor& a, const Tensor& b) {
  Tensor out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

inline Tensor vconcat(const Tensor& a, const Tensor& b) {
  Tensor out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

}  // namespace monge
