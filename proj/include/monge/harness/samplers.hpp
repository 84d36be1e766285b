#pragma once

// Registered source/target distributions. Every sampler is a pure function of
// (seed, n, draw index).

#include "monge/error.hpp"
#include "monge/geo.hpp"
#include "monge/nn/tensor.hpp"
#include "monge/rng.hpp"
#include "monge/solver.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace monge::harness {

/// Named numeric parameters for a builtin sampler.
using SamplerParams = std::map<std::string, std::vector<double>>;

namespace sampler_detail {

inline const std::vector<double>& param(const SamplerParams& p, const std::string& key) {
  const auto it = p.find(key);
  require(it != p.end() && !it->second.empty(), ErrorCode::kInvalidArgument, "sampler parameter '" + key + "' missing");
  return it->second;
}

inline double scalar(const SamplerParams& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() || it->second.empty() ? fallback : it->second.front();
}

inline std::vector<double> vec(const SamplerParams& p, const std::string& key, std::vector<double> fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

}  // namespace sampler_detail

/// Gapped ellipse (a cos t, b sin t), t uniform on [0, 2pi) minus an arc of width
/// `gap_width` centred at `gap_center`.
struct EllipseArc {
  double a = 2.0;
  double b = 1.0;
  double gap_center = std::numbers::pi / 2.0;
  double gap_width = std::numbers::pi / 3.0;

  double param_from_unit(double u) const {
    const double start = gap_center + gap_width / 2.0;
    return start + u * (2.0 * std::numbers::pi - gap_width);
  }

  /// Distance from (x, y) to the arc by dense parameter search plus Newton polish.
  double distance(double x, double y, double* t_out = nullptr) const {
    constexpr int kGrid = 720;
    double best = std::numeric_limits<double>::infinity(), best_t = 0.0;
    for (int k = 0; k <= kGrid; ++k) {
      const double t = param_from_unit(static_cast<double>(k) / kGrid);
      const double d = std::hypot(x - a * std::cos(t), y - b * std::sin(t));
      if (d < best) {
        best = d;
        best_t = t;
      }
    }
    const double lo = param_from_unit(0.0), hi = param_from_unit(1.0);
    double t = best_t;
    for (int it = 0; it < 20; ++it) {
      const double ex = a * std::cos(t) - x, ey = b * std::sin(t) - y;
      const double dx = -a * std::sin(t), dy = b * std::cos(t);
      const double g = ex * dx + ey * dy;
      const double h = dx * dx + dy * dy + ex * (-a * std::cos(t)) + ey * (-b * std::sin(t));
      if (h <= 0.0) break;
      t = std::clamp(t - g / h, lo, hi);
    }
    const double d = std::hypot(x - a * std::cos(t), y - b * std::sin(t));
    if (d < best) {
      best = d;
      best_t = t;
    }
    if (t_out) *t_out = best_t;
    return best;
  }
};

/// Two labelled Gaussian components in the plane.
struct Mixture2 {
  std::vector<double> means;  // 2 x 2, row per component
  double stddev = 0.5;

  Eigen::Vector2d mean(int k) const { return {means[2 * static_cast<std::size_t>(k)], means[2 * static_cast<std::size_t>(k) + 1]}; }

  int nearest(double x, double y) const {
    const Eigen::Vector2d p(x, y);
    return (p - mean(0)).squaredNorm() <= (p - mean(1)).squaredNorm() ? 0 : 1;
  }
};

/// Builds a sampler by name. Names and parameters:
///   delta0{dim}; normal{mean, std}; gaussian{mean, cov_diag}; uniform_box{lo, hi};
///   annulus{r_in, r_out}; sphere_cap{phi_lo, phi_hi}; ellipse{a, b, gap_center, gap_width};
///   mixture2{means (4 values), std}; structured_image{side, drop_lo, drop_hi}.
inline Sampler builtin_sampler(const std::string& name, const SamplerParams& params, std::uint64_t seed) {
  using namespace sampler_detail;
  if (name == "delta0") {
    const int dim = static_cast<int>(scalar(params, "dim", 1));
    require(dim >= 1, ErrorCode::kInvalidArgument, "delta0 dim must be >= 1");
    return [dim](std::size_t n, std::uint64_t) {
      return LabeledBatch{SampleBatch::Zero(static_cast<Eigen::Index>(n), dim), {}};
    };
  }
  if (name == "normal" || name == "gaussian") {
    const auto mean = vec(params, "mean", {0.0});
    auto sd = vec(params, "std", {});
    if (sd.empty()) {
      for (double v : vec(params, "cov_diag", std::vector<double>(mean.size(), 1.0))) {
        require(v > 0.0, ErrorCode::kInvalidArgument, "gaussian variances must be > 0");
        sd.push_back(std::sqrt(v));
      }
    }
    if (sd.size() == 1 && mean.size() > 1) sd.assign(mean.size(), sd.front());
    require(sd.size() == mean.size(), ErrorCode::kInvalidArgument, "gaussian mean/std lengths differ");
    for (double s : sd) require(s > 0.0, ErrorCode::kInvalidArgument, "gaussian std must be > 0");
    return [mean, sd, seed](std::size_t n, std::uint64_t draw) {
      auto eng = stream_engine(seed, draw);
      std::normal_distribution<double> z(0.0, 1.0);
      SampleBatch out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(mean.size()));
      for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < mean.size(); ++j) out(i, static_cast<Eigen::Index>(j)) = mean[j] + sd[j] * z(eng);
      return LabeledBatch{std::move(out), {}};
    };
  }
  if (name == "uniform_box") {
    const auto lo = param(params, "lo");
    const auto hi = param(params, "hi");
    require(lo.size() == hi.size(), ErrorCode::kInvalidArgument, "uniform_box lo/hi lengths differ");
    for (std::size_t j = 0; j < lo.size(); ++j)
      require(lo[j] < hi[j], ErrorCode::kInvalidArgument, "uniform_box needs lo < hi");
    return [lo, hi, seed](std::size_t n, std::uint64_t draw) {
      auto eng = stream_engine(seed, draw);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      SampleBatch out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(lo.size()));
      for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < lo.size(); ++j) out(i, static_cast<Eigen::Index>(j)) = lo[j] + (hi[j] - lo[j]) * u(eng);
      return LabeledBatch{std::move(out), {}};
    };
  }
  if (name == "annulus") {
    const double r_in = param(params, "r_in").front(), r_out = param(params, "r_out").front();
    require(r_in >= 0.0 && r_in < r_out, ErrorCode::kInvalidArgument, "annulus needs 0 <= r_in < r_out");
    return [r_in, r_out, seed](std::size_t n, std::uint64_t draw) {
      auto eng = stream_engine(seed, draw);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      SampleBatch out(static_cast<Eigen::Index>(n), 2);
      for (Eigen::Index i = 0; i < out.rows(); ++i) {
        // Area-uniform: r^2 uniform on [r_in^2, r_out^2].
        const double r = std::sqrt(r_in * r_in + u(eng) * (r_out * r_out - r_in * r_in));
        const double t = 2.0 * std::numbers::pi * u(eng);
        out(i, 0) = r * std::cos(t);
        out(i, 1) = r * std::sin(t);
      }
      return LabeledBatch{std::move(out), {}};
    };
  }
  if (name == "sphere_cap") {
    const double lo = param(params, "phi_lo").front(), hi = param(params, "phi_hi").front();
    require(lo >= 0.0 && lo < hi && hi <= std::numbers::pi, ErrorCode::kInvalidArgument,
            "sphere_cap needs 0 <= phi_lo < phi_hi <= pi");
    return [lo, hi, seed](std::size_t n, std::uint64_t draw) {
      auto eng = stream_engine(seed, draw);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      SampleBatch out(static_cast<Eigen::Index>(n), 2);
      for (Eigen::Index i = 0; i < out.rows(); ++i) {
        out(i, 0) = 2.0 * std::numbers::pi * u(eng);
        out(i, 1) = lo + (hi - lo) * u(eng);
      }
      return LabeledBatch{std::move(out), {}};
    };
  }
  if (name == "ellipse") {
    EllipseArc arc;
    arc.a = scalar(params, "a", arc.a);
    arc.b = scalar(params, "b", arc.b);
    arc.gap_center = scalar(params, "gap_center", arc.gap_center);
    arc.gap_width = scalar(params, "gap_width", arc.gap_width);
    require(arc.a > 0.0 && arc.b > 0.0 && arc.gap_width >= 0.0 && arc.gap_width < 2.0 * std::numbers::pi,
            ErrorCode::kInvalidArgument, "ellipse needs a, b > 0 and gap_width in [0, 2pi)");
    return [arc, seed](std::size_t n, std::uint64_t draw) {
      auto eng = stream_engine(seed, draw);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      SampleBatch out(static_cast<Eigen::Index>(n), 2);
      for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double t = arc.param_from_unit(u(eng));
        out(i, 0) = arc.a * std::cos(t);
        out(i, 1) = arc.b * std::sin(t);
      }
      return LabeledBatch{std::move(out), {}};
    };
  }
  if (name == "mixture2") {
    Mixture2 mix{param(params, "means"), scalar(params, "std", 0.5)};
    require(mix.means.size() == 4, ErrorCode::kInvalidArgument, "mixture2 needs 4 mean values");
    require(mix.stddev > 0.0, ErrorCode::kInvalidArgument, "mixture2 std must be > 0");
    return [mix, seed](std::size_t n, std::uint64_t draw) {
      auto eng = stream_engine(seed, draw);
      std::normal_distribution<double> z(0.0, 1.0);
      std::bernoulli_distribution coin(0.5);
      LabeledBatch b{SampleBatch(static_cast<Eigen::Index>(n), 2), std::vector<int>(n)};
      for (Eigen::Index i = 0; i < b.points.rows(); ++i) {
        const int k = coin(eng) ? 1 : 0;
        b.labels[static_cast<std::size_t>(i)] = k;
        b.points(i, 0) = mix.means[2 * static_cast<std::size_t>(k)] + mix.stddev * z(eng);
        b.points(i, 1) = mix.means[2 * static_cast<std::size_t>(k) + 1] + mix.stddev * z(eng);
      }
      return b;
    };
  }
  if (name == "structured_image") {
    // side x side "images": smooth random field (low-rank Gaussian), optionally with an
    // occluded block [drop_lo, drop_hi) of rows zeroed out.
    const int side = static_cast<int>(scalar(params, "side", 4));
    const int drop_lo = static_cast<int>(scalar(params, "drop_lo", 0));
    const int drop_hi = static_cast<int>(scalar(params, "drop_hi", 0));
    require(side >= 2 && drop_lo >= 0 && drop_hi <= side && drop_lo <= drop_hi, ErrorCode::kInvalidArgument,
            "structured_image needs side >= 2 and 0 <= drop_lo <= drop_hi <= side");
    return [side, drop_lo, drop_hi, seed](std::size_t n, std::uint64_t draw) {
      auto eng = stream_engine(seed, draw);
      std::normal_distribution<double> z(0.0, 1.0);
      const int d = side * side;
      SampleBatch out(static_cast<Eigen::Index>(n), d);
      for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double level = 0.5 * z(eng), gx = 0.3 * z(eng), gy = 0.3 * z(eng);
        for (int r = 0; r < side; ++r)
          for (int c = 0; c < side; ++c) {
            const double v = level + gx * (c - 0.5 * (side - 1)) + gy * (r - 0.5 * (side - 1)) + 0.05 * z(eng);
            out(i, r * side + c) = (r >= drop_lo && r < drop_hi) ? 0.0 : v;
          }
      }
      return LabeledBatch{std::move(out), {}};
    };
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown sampler '" + name + "'");
}

/// Uniform-on-land sampler over a shared land set.
inline Sampler land_sampler(std::shared_ptr<const geo::LandSet> land, std::uint64_t seed, double jitter = -1.0) {
  require(land && !land->points.empty(), ErrorCode::kEmpty, "land sampler needs land cells");
  return [land, seed, jitter](std::size_t n, std::uint64_t draw) {
    return LabeledBatch{geo::sample_uniform_land(*land, n, hash_keys({seed, draw}), jitter), {}};
  };
}

/// Weight-proportional sampler over a point cloud (e.g. population counts).
inline Sampler weighted_sampler(std::shared_ptr<const geo::WeightedPoints> pts, std::uint64_t seed, double jitter) {
  require(pts && !pts->points.empty(), ErrorCode::kEmpty, "weighted sampler needs points");
  return [pts, seed, jitter](std::size_t n, std::uint64_t draw) {
    return LabeledBatch{geo::sample_weighted(*pts, n, hash_keys({seed, draw}), jitter), {}};
  };
}

}  // namespace monge::harness
