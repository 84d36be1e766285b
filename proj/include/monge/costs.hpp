#pragma once

// Transport costs c(x, y) with their gradient in y.

#include "monge/error.hpp"
#include "monge/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace monge {

enum class CostKind {
  kQuadratic,
  kInverseSquare,
  kNegCosine,
  kSphereGeodesic,
  kSphereLinearized,
  kMaskedMse,
  kClassContrastive,
};

inline std::string_view to_string(CostKind k) {
  switch (k) {
    case CostKind::kQuadratic: return "quadratic";
    case CostKind::kInverseSquare: return "inverse_square";
    case CostKind::kNegCosine: return "neg_cosine";
    case CostKind::kSphereGeodesic: return "sphere_geodesic";
    case CostKind::kSphereLinearized: return "sphere_linearized";
    case CostKind::kMaskedMse: return "masked_mse";
    case CostKind::kClassContrastive: return "class_contrastive";
  }
  return "?";
}

inline CostKind parse_cost_kind(std::string_view name) {
  for (CostKind k : {CostKind::kQuadratic, CostKind::kInverseSquare, CostKind::kNegCosine, CostKind::kSphereGeodesic,
                     CostKind::kSphereLinearized, CostKind::kMaskedMse, CostKind::kClassContrastive})
    if (to_string(k) == name) return k;
  throw Error(ErrorCode::kParse, "unknown cost '" + std::string(name) + "'");
}

struct CostSpec {
  CostKind kind = CostKind::kQuadratic;
  int n = 1;  // source dimension
  int m = 1;  // target dimension
  double scale = 1.0;   // Quadratic, and the quadratic base of ClassContrastive
  double radius = 1.0;  // SphereGeodesic
  double alpha = 1.0;   // MaskedMse
  double lambda = 0.0;  // ClassContrastive
  std::vector<double> mask;  // MaskedMse, 1 = observed
  // Sphere costs are periodic in both angles; training evaluates them on raw
  // network outputs, which may leave the canonical chart.
  bool unwrapped_angles = false;
  // SphereGeodesic only: near |u| = 1 use the arccos slope at the refusal
  // threshold instead of throwing. Training needs this at identity-like maps.
  bool clamp_gradient = false;

  static CostSpec quadratic(int dim, double scale = 1.0) {
    CostSpec c;
    c.kind = CostKind::kQuadratic;
    c.n = c.m = dim;
    c.scale = scale;
    return c;
  }
  static CostSpec inverse_square(int dim) {
    CostSpec c;
    c.kind = CostKind::kInverseSquare;
    c.n = c.m = dim;
    return c;
  }
  static CostSpec neg_cosine(int dim) {
    CostSpec c;
    c.kind = CostKind::kNegCosine;
    c.n = c.m = dim;
    return c;
  }
  static CostSpec sphere_geodesic(double radius = 1.0) {
    CostSpec c;
    c.kind = CostKind::kSphereGeodesic;
    c.n = c.m = 2;
    c.radius = radius;
    return c;
  }
  static CostSpec sphere_linearized() {
    CostSpec c;
    c.kind = CostKind::kSphereLinearized;
    c.n = c.m = 2;
    return c;
  }
  static CostSpec masked_mse(std::vector<double> mask, double alpha) {
    CostSpec c;
    c.kind = CostKind::kMaskedMse;
    c.n = c.m = static_cast<int>(mask.size());
    c.mask = std::move(mask);
    c.alpha = alpha;
    return c;
  }
  static CostSpec class_contrastive(int dim, double lambda, double scale = 1.0) {
    CostSpec c;
    c.kind = CostKind::kClassContrastive;
    c.n = c.m = dim;
    c.lambda = lambda;
    c.scale = scale;
    return c;
  }

  bool is_sphere() const { return kind == CostKind::kSphereGeodesic || kind == CostKind::kSphereLinearized; }

  void validate() const {
    require(n >= 1 && m >= 1, ErrorCode::kInvalidArgument, "cost dims must be positive");
    switch (kind) {
      case CostKind::kSphereGeodesic:
        require(radius > 0.0, ErrorCode::kInvalidArgument, "sphere radius must be > 0");
        [[fallthrough]];
      case CostKind::kSphereLinearized:
        require(n == 2 && m == 2, ErrorCode::kInvalidArgument, "sphere costs take (theta, phi) pairs");
        break;
      case CostKind::kMaskedMse:
        require(static_cast<int>(mask.size()) == m, ErrorCode::kInvalidArgument, "mask length must equal m");
        for (double v : mask)
          require(v == 0.0 || v == 1.0, ErrorCode::kInvalidArgument, "mask entries must be 0 or 1");
        require(alpha >= 0.0, ErrorCode::kInvalidArgument, "alpha must be >= 0");
        [[fallthrough]];
      case CostKind::kQuadratic:
      case CostKind::kInverseSquare:
      case CostKind::kNegCosine:
        require(n == m, ErrorCode::kInvalidArgument, std::string(to_string(kind)) + " cost requires n == m");
        break;
      case CostKind::kClassContrastive:
        require(n == m, ErrorCode::kInvalidArgument, "class_contrastive cost requires n == m");
        require(lambda >= 0.0, ErrorCode::kInvalidArgument, "lambda must be >= 0");
        break;
    }
  }
};

/// Class labels attached to x and to y. A one-element span is an integer label;
/// longer spans are probability vectors compared through their argmax.
struct LabelPair {
  std::span<const double> source;
  std::span<const double> target;
};

namespace cost_detail {

inline constexpr double kAcosClamp = 1e-9;
inline constexpr double kGradientRefusal = 1e-6;

inline void check_dims(const CostSpec& c, std::span<const double> x, std::span<const double> y) {
  require(static_cast<int>(x.size()) == c.n && static_cast<int>(y.size()) == c.m, ErrorCode::kDimensionMismatch,
          std::string(to_string(c.kind)) + " cost expects dims (" + std::to_string(c.n) + "," + std::to_string(c.m) +
              "), got (" + std::to_string(x.size()) + "," + std::to_string(y.size()) + ")");
}

inline double squared_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return s;
}

inline void check_sphere_point(const CostSpec& c, std::span<const double> p) {
  if (c.unwrapped_angles) {
    require(std::isfinite(p[0]) && std::isfinite(p[1]), ErrorCode::kNonFinite, "non-finite sphere coordinate");
    return;
  }
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  require(p[0] >= -1e-9 && p[0] < kTwoPi + 1e-9 && p[1] >= -1e-9 && p[1] <= std::numbers::pi + 1e-9,
          ErrorCode::kOutOfDomain, "sphere point outside [0,2pi) x [0,pi]");
}

// sin(phi1) sin(phi2) cos(theta2 - theta1) + cos(phi1) cos(phi2)
inline double sphere_inner(std::span<const double> x, std::span<const double> y) {
  return std::sin(x[1]) * std::sin(y[1]) * std::cos(y[0] - x[0]) + std::cos(x[1]) * std::cos(y[1]);
}

inline void sphere_inner_grad_y(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  const double dtheta = y[0] - x[0];
  out[0] = -std::sin(x[1]) * std::sin(y[1]) * std::sin(dtheta);
  out[1] = std::sin(x[1]) * std::cos(y[1]) * std::cos(dtheta) - std::cos(x[1]) * std::sin(y[1]);
}

inline int label_class(std::span<const double> label) {
  if (label.size() == 1) return static_cast<int>(std::lround(label[0]));
  return static_cast<int>(std::max_element(label.begin(), label.end()) - label.begin());
}

inline bool labels_differ(const LabelPair& labels) {
  if (labels.source.size() == 1 && labels.target.size() == 1) return labels.source[0] != labels.target[0];
  return label_class(labels.source) != label_class(labels.target);
}

}  // namespace cost_detail

inline double eval_cost(const CostSpec& cost, std::span<const double> x, std::span<const double> y,
                        const LabelPair* labels = nullptr) {
  using namespace cost_detail;
  check_dims(cost, x, y);
  switch (cost.kind) {
    case CostKind::kQuadratic:
      return cost.scale * squared_distance(x, y);
    case CostKind::kInverseSquare: {
      const double d2 = squared_distance(x, y);
      require(d2 > 0.0, ErrorCode::kCoincidentPoints, "inverse_square cost is undefined at x == y");
      return 1.0 / d2;
    }
    case CostKind::kNegCosine: {
      double xy = 0.0, xx = 0.0, yy = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        xy += x[i] * y[i];
        xx += x[i] * x[i];
        yy += y[i] * y[i];
      }
      require(xx > 0.0 && yy > 0.0, ErrorCode::kZeroNorm, "neg_cosine cost needs nonzero vectors");
      return std::clamp(-xy / std::sqrt(xx * yy), -1.0, 1.0);
    }
    case CostKind::kSphereGeodesic: {
      check_sphere_point(cost, x);
      check_sphere_point(cost, y);
      const double u = std::clamp(sphere_inner(x, y), -1.0 + kAcosClamp, 1.0 - kAcosClamp);
      return cost.radius * std::acos(u);
    }
    case CostKind::kSphereLinearized:
      check_sphere_point(cost, x);
      check_sphere_point(cost, y);
      return std::numbers::pi / 2.0 - sphere_inner(x, y);
    case CostKind::kMaskedMse: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += cost.mask[i] * (x[i] - y[i]) * (x[i] - y[i]);
      return cost.alpha * s / static_cast<double>(cost.m);
    }
    case CostKind::kClassContrastive: {
      require(labels != nullptr, ErrorCode::kMissingLabels, "class_contrastive cost requires labels");
      return cost.scale * squared_distance(x, y) + (labels_differ(*labels) ? cost.lambda : 0.0);
    }
  }
  return 0.0;
}

/// Writes dc/dy into `out` (length m).
inline void grad_y(const CostSpec& cost, std::span<const double> x, std::span<const double> y, std::span<double> out,
                   const LabelPair* labels = nullptr) {
  using namespace cost_detail;
  check_dims(cost, x, y);
  require(static_cast<int>(out.size()) == cost.m, ErrorCode::kDimensionMismatch, "gradient buffer has wrong length");
  switch (cost.kind) {
    case CostKind::kQuadratic:
      for (std::size_t i = 0; i < y.size(); ++i) out[i] = 2.0 * cost.scale * (y[i] - x[i]);
      return;
    case CostKind::kInverseSquare: {
      const double d2 = squared_distance(x, y);
      require(d2 > 0.0, ErrorCode::kCoincidentPoints, "inverse_square cost is undefined at x == y");
      for (std::size_t i = 0; i < y.size(); ++i) out[i] = -2.0 * (y[i] - x[i]) / (d2 * d2);
      return;
    }
    case CostKind::kNegCosine: {
      double xy = 0.0, xx = 0.0, yy = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        xy += x[i] * y[i];
        xx += x[i] * x[i];
        yy += y[i] * y[i];
      }
      require(xx > 0.0 && yy > 0.0, ErrorCode::kZeroNorm, "neg_cosine cost needs nonzero vectors");
      const double nx = std::sqrt(xx), ny = std::sqrt(yy);
      for (std::size_t i = 0; i < y.size(); ++i) out[i] = -(x[i] / (nx * ny) - xy * y[i] / (nx * ny * yy));
      return;
    }
    case CostKind::kSphereGeodesic: {
      check_sphere_point(cost, x);
      check_sphere_point(cost, y);
      double u = sphere_inner(x, y);
      if (cost.clamp_gradient) {
        u = std::clamp(u, -1.0 + kGradientRefusal, 1.0 - kGradientRefusal);
      } else {
        require(std::abs(u) <= 1.0 - kGradientRefusal, ErrorCode::kSingularGradient,
                "geodesic gradient refused near coincident or antipodal points");
      }
      sphere_inner_grad_y(x, y, out);
      const double factor = -cost.radius / std::sqrt(1.0 - u * u);
      out[0] *= factor;
      out[1] *= factor;
      return;
    }
    case CostKind::kSphereLinearized:
      check_sphere_point(cost, x);
      check_sphere_point(cost, y);
      sphere_inner_grad_y(x, y, out);
      out[0] = -out[0];
      out[1] = -out[1];
      return;
    case CostKind::kMaskedMse:
      for (std::size_t i = 0; i < y.size(); ++i)
        out[i] = 2.0 * cost.alpha * cost.mask[i] * (y[i] - x[i]) / static_cast<double>(cost.m);
      return;
    case CostKind::kClassContrastive:
      require(labels != nullptr, ErrorCode::kMissingLabels, "class_contrastive cost requires labels");
      // The indicator term is piecewise constant in y.
      for (std::size_t i = 0; i < y.size(); ++i) out[i] = 2.0 * cost.scale * (y[i] - x[i]);
      return;
  }
}

inline std::vector<double> grad_y(const CostSpec& cost, std::span<const double> x, std::span<const double> y,
                                  const LabelPair* labels = nullptr) {
  std::vector<double> out(static_cast<std::size_t>(cost.m));
  grad_y(cost, x, y, out, labels);
  return out;
}

/// Row labels for batch evaluation: integer source labels and per-row target
/// label vectors (one column = integer label, more = probabilities).
struct BatchLabels {
  std::span<const int> source;
  const Tensor* target = nullptr;
};

namespace cost_detail {

inline std::optional<LabelPair> row_labels(const BatchLabels* labels, Eigen::Index r, double& source_storage) {
  if (labels == nullptr) return std::nullopt;
  source_storage = static_cast<double>(labels->source[static_cast<std::size_t>(r)]);
  return LabelPair{std::span<const double>(&source_storage, 1), row_span(*labels->target, r)};
}

}  // namespace cost_detail

/// Row-wise costs c(X_i, Y_i).
inline Vector eval_cost_rows(const CostSpec& cost, const Tensor& x, const Tensor& y,
                             const BatchLabels* labels = nullptr) {
  require(x.rows() == y.rows(), ErrorCode::kDimensionMismatch, "cost batches differ in row count");
  Vector out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    auto lp = cost_detail::row_labels(labels, r, s);
    out[r] = eval_cost(cost, row_span(x, r), row_span(y, r), lp ? &*lp : nullptr);
  }
  return out;
}

/// Row-wise gradients dc(X_i, Y_i)/dY_i.
inline Tensor grad_y_rows(const CostSpec& cost, const Tensor& x, const Tensor& y, const BatchLabels* labels = nullptr) {
  require(x.rows() == y.rows(), ErrorCode::kDimensionMismatch, "cost batches differ in row count");
  Tensor out(y.rows(), cost.m);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    auto lp = cost_detail::row_labels(labels, r, s);
    grad_y(cost, row_span(x, r), row_span(y, r), row_span(out, r), lp ? &*lp : nullptr);
  }
  return out;
}

/// Dense n x k matrix of c(X_i, Y_j).
inline Eigen::MatrixXd cost_matrix(const CostSpec& cost, const Tensor& x, const Tensor& y) {
  Eigen::MatrixXd c(x.rows(), y.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < y.rows(); ++j) c(i, j) = eval_cost(cost, row_span(x, i), row_span(y, j));
  return c;
}

}  // namespace monge
