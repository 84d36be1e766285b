#pragma once

// A reproducible stand-in for a land/population dataset: land cells are points
// of a Fibonacci lattice that fall inside a few smooth "continents", and
// population weights concentrate around seeded "cities" on land.

#include "monge/geo.hpp"
#include "monge/rng.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <string>
#include <vector>

namespace monge::harness {

struct SyntheticEarthSpec {
  int lattice_points = 6000;
  int continents = 6;
  int cities = 12;
  std::uint64_t seed = 2024;
};

struct SyntheticEarth {
  std::vector<geo::SpherePoint> land;
  std::vector<double> population;  // one weight per land point
};

inline SyntheticEarth make_synthetic_earth(const SyntheticEarthSpec& spec = {}) {
  require(spec.lattice_points >= 100 && spec.continents >= 1 && spec.cities >= 1, ErrorCode::kInvalidArgument,
          "synthetic earth needs >= 100 lattice points, >= 1 continent and >= 1 city");
  std::mt19937_64 eng(hash_keys({spec.seed, 0xEA27ull}));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  struct Cap {
    geo::SpherePoint centre;
    double radius;
  };
  std::vector<Cap> caps;
  for (int k = 0; k < spec.continents; ++k) {
    const double z = 2.0 * u(eng) - 1.0;
    caps.push_back({geo::SpherePoint(geo::kTwoPi * u(eng), std::acos(z)), 0.35 + 0.4 * u(eng)});
  }
  SyntheticEarth earth;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < spec.lattice_points; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / spec.lattice_points;
    const geo::SpherePoint p(golden * i, std::acos(z));
    double score = -1.0;
    for (const auto& c : caps) score = std::max(score, c.radius - geo::angle_between(p, c.centre));
    // Ragged coastlines.
    score += 0.08 * std::sin(3.0 * p.theta()) * std::cos(2.0 * p.phi());
    if (score > 0.0) earth.land.push_back(p);
  }
  require(!earth.land.empty(), ErrorCode::kEmpty, "synthetic earth produced no land");
  std::vector<geo::SpherePoint> cities;
  std::uniform_int_distribution<std::size_t> pick(0, earth.land.size() - 1);
  for (int k = 0; k < spec.cities; ++k) cities.push_back(earth.land[pick(eng)]);
  for (const auto& p : earth.land) {
    double w = 1.0;
    for (const auto& c : cities) {
      const double a = geo::angle_between(p, c);
      w += 200.0 * std::exp(-a * a / (2.0 * 0.08 * 0.08));
    }
    earth.population.push_back(std::round(w));
  }
  return earth;
}

/// Writes `land.csv` (lat,lon) and `population.csv` (lat,lon,weight) in degrees.
inline void write_synthetic_earth(const SyntheticEarth& earth, const std::string& land_path,
                                  const std::string& population_path) {
  std::ofstream land(land_path), pop(population_path);
  require(static_cast<bool>(land), ErrorCode::kIo, "cannot write " + land_path);
  require(static_cast<bool>(pop), ErrorCode::kIo, "cannot write " + population_path);
  land << "lat,lon\n" << std::setprecision(17);
  pop << "lat,lon,weight\n" << std::setprecision(17);
  for (std::size_t i = 0; i < earth.land.size(); ++i) {
    const double lat = 90.0 - earth.land[i].phi() * 180.0 / geo::kPi;
    const double lon = earth.land[i].theta() * 180.0 / geo::kPi;
    land << lat << ',' << lon << '\n';
    pop << lat << ',' << lon << ',' << earth.population[i] << '\n';
  }
  require(static_cast<bool>(land) && static_cast<bool>(pop), ErrorCode::kIo, "synthetic earth write failed");
}

}  // namespace monge::harness
