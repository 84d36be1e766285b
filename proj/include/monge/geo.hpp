#pragma once

// Spherical coordinates (theta azimuth in [0, 2pi), phi polar angle in [0, pi]),
// land point clouds and the map-to-land snap used for population transport.

#include "monge/error.hpp"
#include "monge/nn/tensor.hpp"
#include "monge/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace monge::geo {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double wrap_theta(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

class SpherePoint {
 public:
  SpherePoint() = default;

  /// Wraps theta modulo 2pi; phi outside [-1e-9, pi + 1e-9] is an error, else clamped.
  SpherePoint(double theta, double phi) : theta_(wrap_theta(theta)) {
    require(std::isfinite(theta) && std::isfinite(phi), ErrorCode::kNonFinite, "non-finite sphere coordinate");
    require(phi >= -1e-9 && phi <= kPi + 1e-9, ErrorCode::kOutOfDomain,
            "polar angle " + std::to_string(phi) + " outside [0, pi]");
    phi_ = std::clamp(phi, 0.0, kPi);
  }

  /// Maps any (theta, phi) in R^2 to the canonical chart of the same sphere point.
  static SpherePoint canonical(double theta, double phi) {
    double p = std::fmod(phi, kTwoPi);
    if (p < 0.0) p += kTwoPi;
    if (p > kPi) {
      p = kTwoPi - p;
      theta += kPi;
    }
    return SpherePoint(theta, p);
  }

  double theta() const { return theta_; }
  double phi() const { return phi_; }

  friend bool operator==(const SpherePoint&, const SpherePoint&) = default;

 private:
  double theta_ = 0.0;
  double phi_ = 0.0;
};

inline std::array<double, 3> to_cartesian(const SpherePoint& p, double radius = 1.0) {
  require(radius > 0.0, ErrorCode::kInvalidArgument, "radius must be > 0");
  const double s = std::sin(p.phi());
  return {radius * std::cos(p.theta()) * s, radius * std::sin(p.theta()) * s, radius * std::cos(p.phi())};
}

inline SpherePoint from_cartesian(const std::array<double, 3>& v) {
  const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  require(r > 0.0, ErrorCode::kZeroNorm, "cannot place the origin on a sphere");
  return SpherePoint(std::atan2(v[1], v[0]), std::acos(std::clamp(v[2] / r, -1.0, 1.0)));
}

/// Great-circle angle between two points (radians).
inline double angle_between(const SpherePoint& a, const SpherePoint& b) {
  const double u = std::sin(a.phi()) * std::sin(b.phi()) * std::cos(b.theta() - a.theta()) +
                   std::cos(a.phi()) * std::cos(b.phi());
  return std::acos(std::clamp(u, -1.0, 1.0));
}

struct LandSet {
  std::vector<SpherePoint> points;
  std::vector<std::size_t> anchors;  // indices into points
  double cell_spacing = 0.0;         // typical angular spacing of the land grid (radians)

  /// Land membership: nearest land cell within `threshold` radians (default: cell spacing).
  bool contains(const SpherePoint& p, double threshold = -1.0) const {
    const double t = threshold > 0.0 ? threshold : cell_spacing;
    for (const auto& q : points)
      if (angle_between(p, q) <= t) return true;
    return false;
  }

  SpherePoint anchor(std::size_t k) const { return points[anchors[k]]; }
};

/// Median nearest-neighbour angle over a seeded subsample of at most `probe` points.
inline double estimate_cell_spacing(const std::vector<SpherePoint>& points, std::size_t probe = 200,
                                    std::uint64_t seed = 7) {
  if (points.size() < 2) return 0.0;
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 engine(hash_keys({seed, 0x5ACEull}));
  std::shuffle(idx.begin(), idx.end(), engine);
  idx.resize(std::min(probe, idx.size()));
  std::vector<double> nearest;
  for (std::size_t i : idx) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < points.size(); ++j)
      if (j != i) best = std::min(best, angle_between(points[i], points[j]));
    nearest.push_back(best);
  }
  std::nth_element(nearest.begin(), nearest.begin() + static_cast<std::ptrdiff_t>(nearest.size() / 2), nearest.end());
  return nearest[nearest.size() / 2];
}

/// Seeded uniform choice of `count` anchors without replacement (all points when fewer).
inline std::vector<std::size_t> choose_anchors(std::size_t n_points, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(n_points);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 engine(hash_keys({seed, 0xA2C4ull}));
  std::shuffle(idx.begin(), idx.end(), engine);
  idx.resize(std::min(count, n_points));
  return idx;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

inline double parse_number(const std::string& s, const std::string& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kParse, path + ":" + std::to_string(line) + ": malformed number '" + s + "'");
}

}  // namespace detail

/// A sphere point cloud with optional per-point weights.
struct WeightedPoints {
  std::vector<SpherePoint> points;
  std::vector<double> weights;
};

/// Reads `lat,lon[,weight]` (degrees) or `theta,phi[,weight]` (radians) CSV;
/// the header decides the convention.
inline WeightedPoints load_points(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path + "'");
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kEmpty, path + ": empty file");
  const auto header = detail::split_csv(line);
  require(header.size() >= 2, ErrorCode::kParse, path + ":1: expected header 'lat,lon' or 'theta,phi'");
  bool degrees = false;
  if (header[0] == "lat" && header[1] == "lon") {
    degrees = true;
  } else {
    require(header[0] == "theta" && header[1] == "phi", ErrorCode::kParse,
            path + ":1: expected header 'lat,lon' or 'theta,phi'");
  }
  const bool weighted = header.size() >= 3 && header[2] == "weight";
  WeightedPoints out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv(line);
    require(cells.size() >= (weighted ? 3u : 2u), ErrorCode::kParse,
            path + ":" + std::to_string(line_no) + ": too few columns");
    const double a = detail::parse_number(cells[0], path, line_no);
    const double b = detail::parse_number(cells[1], path, line_no);
    try {
      if (degrees) {
        require(a >= -90.0 && a <= 90.0, ErrorCode::kOutOfDomain, "latitude out of range");
        out.points.emplace_back(b * kPi / 180.0, (90.0 - a) * kPi / 180.0);
      } else {
        out.points.emplace_back(a, b);
      }
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.weights.push_back(weighted ? detail::parse_number(cells[2], path, line_no) : 1.0);
    require(out.weights.back() >= 0.0, ErrorCode::kParse, path + ":" + std::to_string(line_no) + ": negative weight");
  }
  require(!out.points.empty(), ErrorCode::kEmpty, path + ": no data rows");
  return out;
}

inline LandSet make_land(std::vector<SpherePoint> points, std::size_t anchor_count, std::uint64_t seed,
                         double cell_spacing = 0.0) {
  require(!points.empty(), ErrorCode::kEmpty, "land set is empty");
  // Exact duplicates removed, first occurrence kept.
  std::set<std::pair<double, double>> seen;
  LandSet land;
  for (const auto& p : points)
    if (seen.emplace(p.theta(), p.phi()).second) land.points.push_back(p);
  land.anchors = choose_anchors(land.points.size(), anchor_count, seed);
  land.cell_spacing = cell_spacing > 0.0 ? cell_spacing : estimate_cell_spacing(land.points);
  return land;
}

inline LandSet load_land(const std::string& path, std::size_t anchor_count = 2000, std::uint64_t seed = 0,
                         double cell_spacing = 0.0) {
  return make_land(load_points(path).points, anchor_count, seed, cell_spacing);
}

using LandTest = std::function<bool(const SpherePoint&)>;

/// Identity on land; otherwise the nearest anchor under plain Euclidean distance
/// in (theta, phi), without theta wraparound. Ties go to the lowest anchor index.
inline SpherePoint tau(const SpherePoint& p, const LandSet& land, const LandTest& on_land) {
  require(!land.anchors.empty(), ErrorCode::kEmpty, "tau needs anchors");
  if (on_land(p)) return p;
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < land.anchors.size(); ++k) {
    const SpherePoint a = land.anchor(k);
    const double dt = a.theta() - p.theta(), dp = a.phi() - p.phi();
    const double d = dt * dt + dp * dp;
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return land.anchor(best);
}

/// Uniform-with-replacement draw over land cells, jittered uniformly by up to
/// `jitter` radians in each angle (default: half the cell spacing).
inline SampleBatch sample_uniform_land(const LandSet& land, std::size_t n, std::uint64_t seed, double jitter = -1.0) {
  require(!land.points.empty(), ErrorCode::kEmpty, "cannot sample from an empty land set");
  require(n >= 1, ErrorCode::kInvalidArgument, "sample count must be >= 1");
  const double j = jitter >= 0.0 ? jitter : 0.5 * land.cell_spacing;
  std::mt19937_64 engine(hash_keys({seed, 0x1A4Dull}));
  std::uniform_int_distribution<std::size_t> pick(0, land.points.size() - 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SampleBatch out(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const SpherePoint& c = land.points[pick(engine)];
    const double theta = c.theta() + j * u(engine);
    const double phi = std::clamp(c.phi() + j * u(engine), 0.0, kPi);
    out(static_cast<Eigen::Index>(i), 0) = wrap_theta(theta);
    out(static_cast<Eigen::Index>(i), 1) = phi;
  }
  return out;
}

/// Weighted draw over a point cloud with the same jitter rule.
inline SampleBatch sample_weighted(const WeightedPoints& pts, std::size_t n, std::uint64_t seed, double jitter) {
  require(!pts.points.empty(), ErrorCode::kEmpty, "cannot sample from an empty point set");
  std::mt19937_64 engine(hash_keys({seed, 0xBEEFull}));
  std::discrete_distribution<std::size_t> pick(pts.weights.begin(), pts.weights.end());
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SampleBatch out(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const SpherePoint& c = pts.points[pick(engine)];
    out(static_cast<Eigen::Index>(i), 0) = wrap_theta(c.theta() + jitter * u(engine));
    out(static_cast<Eigen::Index>(i), 1) = std::clamp(c.phi() + jitter * u(engine), 0.0, kPi);
  }
  return out;
}

}  // namespace monge::geo
