#pragma once

// Experiment definitions: per-experiment defaults, config-file overrides and
// construction of the training problem.

#include "monge/costs.hpp"
#include "monge/error.hpp"
#include "monge/geo.hpp"
#include "monge/harness/config.hpp"
#include "monge/harness/samplers.hpp"
#include "monge/nn/network.hpp"
#include "monge/solver.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace monge::harness {

enum class Experiment {
  kGaussian2d,
  kLine1d,
  kDeltaToGaussian,
  kAnnulusDecreasing,
  kAnnulusQuadratic,
  kSphereCap,
  kPopulation,
  kUnequalDimEllipse,
  kClassMixture,
  kToyInpaint,
};

inline constexpr Experiment kAllExperiments[] = {
    Experiment::kGaussian2d,        Experiment::kLine1d,           Experiment::kDeltaToGaussian,
    Experiment::kAnnulusDecreasing, Experiment::kAnnulusQuadratic, Experiment::kSphereCap,
    Experiment::kPopulation,        Experiment::kUnequalDimEllipse, Experiment::kClassMixture,
    Experiment::kToyInpaint,
};

inline std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::kGaussian2d: return "gaussian2d";
    case Experiment::kLine1d: return "line1d";
    case Experiment::kDeltaToGaussian: return "delta_to_gaussian";
    case Experiment::kAnnulusDecreasing: return "annulus_decreasing";
    case Experiment::kAnnulusQuadratic: return "annulus_quadratic";
    case Experiment::kSphereCap: return "sphere_cap";
    case Experiment::kPopulation: return "population";
    case Experiment::kUnequalDimEllipse: return "unequal_dim_ellipse";
    case Experiment::kClassMixture: return "class_mixture";
    case Experiment::kToyInpaint: return "toy_inpaint";
  }
  return "?";
}

inline Experiment parse_experiment(std::string_view name) {
  for (Experiment e : kAllExperiments)
    if (to_string(e) == name) return e;
  throw Error(ErrorCode::kParse, "unknown experiment '" + std::string(name) + "'");
}

enum class OracleKind { kNone, kExact, kGaussian, kMonotone };

inline std::string_view to_string(OracleKind o) {
  switch (o) {
    case OracleKind::kNone: return "none";
    case OracleKind::kExact: return "exact";
    case OracleKind::kGaussian: return "gaussian";
    case OracleKind::kMonotone: return "monotone";
  }
  return "?";
}

inline OracleKind parse_oracle(std::string_view name) {
  for (OracleKind o : {OracleKind::kNone, OracleKind::kExact, OracleKind::kGaussian, OracleKind::kMonotone})
    if (to_string(o) == name) return o;
  throw Error(ErrorCode::kParse, "unknown oracle '" + std::string(name) + "'");
}

struct NetSettings {
  std::vector<int> hidden = {32, 32, 32};
  nn::Activation activation = nn::Activation::kPReLU;
  bool residual = false;
  double dropout = 0.0;
};

struct EvalSettings {
  int n_test = 512;       // pairs for exact-OT metrics (capped at the oracle limit)
  int n_map_test = 2000;  // points for map-error and geometric metrics
  OracleKind oracle = OracleKind::kExact;  // none skips the discrete OT cost too
  bool duality = false;
  bool track_gaps = false;  // duality gaps at every history record
  int ascent_steps = 60;
  double ascent_lr = 0.05;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::kGaussian2d;
  std::uint64_t seed = 0;
  TrainConfig train;
  NetSettings map_net;
  NetSettings potential_net;
  CostSpec cost;
  std::string source_sampler;
  std::string target_sampler;
  SamplerParams source;
  SamplerParams target;
  EvalSettings eval;
  std::string output_dir = "out";
  // population
  std::string land_path;
  std::string population_path;
  int anchors = 2000;
  double jitter = -1.0;  // radians; negative means half the land cell spacing
};

namespace config_detail {

inline NetSettings net(std::vector<int> hidden, nn::Activation act, bool residual, double dropout = 0.0) {
  return {std::move(hidden), act, residual, dropout};
}

inline CostSpec cost_of_kind(CostKind kind, int n, int m, const CostSpec& params) {
  CostSpec c = params;
  c.kind = kind;
  c.n = n;
  c.m = m;
  return c;
}

}  // namespace config_detail

/// Desk-scale defaults for each experiment.
inline ExperimentConfig default_config(Experiment e) {
  using nn::Activation;
  using config_detail::net;
  constexpr double pi = std::numbers::pi;
  ExperimentConfig c;
  c.experiment = e;
  c.train.beta1 = 0.5;
  switch (e) {
    case Experiment::kGaussian2d:
      c.source_sampler = c.target_sampler = "gaussian";
      c.source = {{"mean", {0.0, 0.0}}, {"std", {1.0, 1.0}}};
      c.target = {{"mean", {2.0, -1.0}}, {"cov_diag", {4.0, 1.0}}};
      c.cost = CostSpec::quadratic(2);
      c.map_net = net({32, 32, 32}, Activation::kPReLU, true);
      c.potential_net = net({32, 32, 32}, Activation::kPReLU, false);
      c.train.outer_steps = 2000;
      c.train.lr_map = c.train.lr_potential = 3e-4;
      c.train.ema_decay = 0.99;
      c.eval.oracle = OracleKind::kGaussian;
      c.eval.duality = true;
      break;
    case Experiment::kLine1d:
      c.source_sampler = c.target_sampler = "uniform_box";
      c.source = {{"lo", {0.0}}, {"hi", {1.0}}};
      c.target = {{"lo", {1.0}}, {"hi", {2.0}}};
      c.cost = CostSpec::quadratic(1);
      c.map_net = net({32, 32, 32}, Activation::kPReLU, true);
      c.potential_net = net({32, 32, 32}, Activation::kPReLU, false);
      c.train.outer_steps = 3000;
      c.train.lr_map = c.train.lr_potential = 3e-4;
      c.train.ema_decay = 0.995;
      c.eval.oracle = OracleKind::kMonotone;
      c.eval.duality = true;
      break;
    case Experiment::kDeltaToGaussian:
      c.source_sampler = "delta0";
      c.target_sampler = "normal";
      c.source = {{"dim", {1.0}}};
      c.target = {{"mean", {0.0}}, {"std", {1.0}}};
      c.cost = CostSpec::quadratic(1);
      c.map_net = net({32, 32, 32}, Activation::kPReLU, true);
      c.potential_net = net({32, 32, 32}, Activation::kPReLU, false);
      c.train.outer_steps = 3000;
      c.train.lr_map = 1e-3;
      c.train.lr_potential = 2e-4;
      c.train.eval_every = 20;
      c.eval.duality = true;
      break;
    case Experiment::kAnnulusDecreasing:
    case Experiment::kAnnulusQuadratic:
      c.source_sampler = c.target_sampler = "annulus";
      c.source = {{"r_in", {4.0}}, {"r_out", {6.0}}};
      c.target = {{"r_in", {1.0}}, {"r_out", {2.0}}};
      c.cost = e == Experiment::kAnnulusDecreasing ? CostSpec::inverse_square(2) : CostSpec::quadratic(2);
      c.map_net = net({36, 36, 36, 36, 36}, Activation::kPReLU, true);
      // A saturated tanh potential is flat over the outer ring under |x-y|^2 and the
      // map never leaves the identity, so the quadratic run uses PReLU.
      c.potential_net = net({36, 36, 36, 36, 36},
                            e == Experiment::kAnnulusDecreasing ? Activation::kTanh : Activation::kPReLU, false);
      c.train.outer_steps = 1000;
      c.train.lr_map = c.train.lr_potential = 1e-3;
      c.train.ema_decay = 0.99;
      c.eval.duality = e == Experiment::kAnnulusQuadratic;
      break;
    case Experiment::kSphereCap:
      c.source_sampler = c.target_sampler = "sphere_cap";
      c.source = {{"phi_lo", {0.0}}, {"phi_hi", {pi / 4.0}}};
      c.target = {{"phi_lo", {3.0 * pi / 4.0}}, {"phi_hi", {pi}}};
      c.cost = CostSpec::sphere_linearized();
      c.map_net = net({32, 32, 32}, Activation::kPReLU, true);
      c.potential_net = net({32, 32, 32}, Activation::kPReLU, false);
      c.train.outer_steps = 2000;
      c.train.lr_map = c.train.lr_potential = 1e-3;
      c.train.ema_decay = 0.99;
      break;
    case Experiment::kPopulation:
      c.source_sampler = "population";
      c.target_sampler = "land";
      c.cost = CostSpec::sphere_linearized();
      c.map_net = net({32, 32, 32, 32}, Activation::kPReLU, true, 0.24);
      c.potential_net = net({32, 32, 32, 32}, Activation::kPReLU, false, 0.24);
      c.train.outer_steps = 20000;
      c.train.lr_map = c.train.lr_potential = 5e-5;
      c.train.eval_every = 500;
      c.land_path = "data/land.csv";
      c.population_path = "data/population.csv";
      break;
    case Experiment::kUnequalDimEllipse:
      c.source_sampler = "normal";
      c.target_sampler = "ellipse";
      c.source = {{"mean", {0.0}}, {"std", {1.0}}};
      c.target = {{"a", {2.0}}, {"b", {1.0}}, {"gap_center", {pi / 2.0}}, {"gap_width", {pi / 3.0}}};
      c.cost = CostSpec::quadratic(2);
      c.map_net = net({10, 10, 10, 10}, Activation::kPReLU, false);
      c.potential_net = net({10, 10, 10, 10}, Activation::kPReLU, false);
      c.train.outer_steps = 12000;
      c.train.map_steps = 6;
      c.train.potential_steps = 1;
      c.train.batch_size = 100;
      c.train.lr_map = c.train.lr_potential = 1e-3;
      c.train.eval_every = 1000;
      c.train.pad_source = true;
      c.train.ema_decay = 0.99;
      break;
    case Experiment::kClassMixture:
      c.source_sampler = c.target_sampler = "mixture2";
      c.source = {{"means", {-2.0, 0.0, 2.0, 0.0}}, {"std", {0.5}}};
      c.target = {{"means", {2.0, 2.0, -2.0, 2.0}}, {"std", {0.5}}};
      c.cost = CostSpec::class_contrastive(2, 0.5);
      c.map_net = net({32, 32, 32}, Activation::kPReLU, true);
      c.potential_net = net({32, 32, 32}, Activation::kPReLU, false);
      c.train.outer_steps = 2000;
      c.train.lr_map = c.train.lr_potential = 1e-3;
      c.train.ema_decay = 0.99;
      c.train.conditional = true;
      c.train.num_classes = 2;
      c.eval.oracle = OracleKind::kNone;
      break;
    case Experiment::kToyInpaint: {
      c.source_sampler = c.target_sampler = "structured_image";
      c.source = {{"side", {4.0}}, {"drop_lo", {2.0}}, {"drop_hi", {4.0}}};
      c.target = {{"side", {4.0}}, {"drop_lo", {0.0}}, {"drop_hi", {0.0}}};
      std::vector<double> mask(16, 0.0);
      for (int k = 0; k < 8; ++k) mask[static_cast<std::size_t>(k)] = 1.0;
      c.cost = CostSpec::masked_mse(mask, 10.0);
      c.map_net = net({64, 64, 64}, Activation::kPReLU, true);
      c.potential_net = net({64, 64, 64}, Activation::kPReLU, false);
      c.train.outer_steps = 2000;
      c.train.map_steps = 5;
      c.train.potential_steps = 1;
      c.train.batch_size = 64;
      c.train.lr_map = c.train.lr_potential = 1e-3;
      c.train.beta1 = 0.9;
      c.train.ema_decay = 0.99;
      c.train.composite_mask = mask;
      // Observed blocks share one law, so the population cost is 0 while the
      // discrete estimate in 8 dims is biased well above it.
      c.eval.oracle = OracleKind::kNone;
      break;
    }
  }
  if (c.train.eval_every == 100) c.train.eval_every = std::max(1, c.train.outer_steps / 20);
  return c;
}

namespace config_detail {

inline NetSettings read_net(const KeyValueConfig& kv, const std::string& prefix, NetSettings n) {
  n.hidden = kv.get_int_list(prefix + ".hidden", n.hidden);
  if (kv.has(prefix + ".activation")) n.activation = nn::parse_activation(kv.get_string(prefix + ".activation", ""));
  n.residual = kv.get_bool(prefix + ".residual", n.residual);
  n.dropout = kv.get_double(prefix + ".dropout", n.dropout);
  return n;
}

// Any parameter key replaces the whole default set, so defaults of one
// distribution never leak into another (e.g. `std` next to `cov_diag`).
inline SamplerParams read_sampler_params(const KeyValueConfig& kv, const std::string& prefix, SamplerParams p) {
  const auto keys = kv.keys_with_prefix(prefix);
  if (std::any_of(keys.begin(), keys.end(), [](const std::string& k) { return k != "sampler"; })) p.clear();
  for (const auto& key : keys) {
    if (key == "sampler") continue;
    p[key] = kv.get_list(prefix + "." + key, {});
  }
  return p;
}

}  // namespace config_detail

/// Defaults for `experiment`, then every override present in the file.
inline ExperimentConfig config_from_kv(const KeyValueConfig& kv) {
  require(kv.has("experiment"), ErrorCode::kInvalidArgument, "config must set 'experiment'");
  ExperimentConfig c = default_config(parse_experiment(kv.get_string("experiment", "")));
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<int>(c.seed)));
  c.output_dir = kv.get_string("output_dir", c.output_dir);

  TrainConfig& t = c.train;
  t.outer_steps = kv.get_int("train.outer_steps", t.outer_steps);
  t.map_steps = kv.get_int("train.map_steps", t.map_steps);
  t.potential_steps = kv.get_int("train.potential_steps", t.potential_steps);
  t.batch_size = kv.get_int("train.batch_size", t.batch_size);
  t.lr_map = kv.get_double("train.lr_map", t.lr_map);
  t.lr_potential = kv.get_double("train.lr_potential", t.lr_potential);
  t.beta1 = kv.get_double("train.beta1", t.beta1);
  t.beta2 = kv.get_double("train.beta2", t.beta2);
  t.adam_eps = kv.get_double("train.adam_eps", t.adam_eps);
  t.weight_decay = kv.get_double("train.weight_decay", t.weight_decay);
  if (kv.has("train.ema_decay")) {
    const double d = kv.get_double("train.ema_decay", 0.0);
    t.ema_decay = d > 0.0 ? std::optional<double>(d) : std::nullopt;
  }
  t.eval_every = kv.get_int("train.eval_every", t.eval_every);
  t.eval_batch = kv.get_int("train.eval_batch", t.eval_batch);
  t.extra_records = kv.get_int_list("train.record_steps", t.extra_records);
  t.resample_inner = kv.get_bool("train.resample_inner", t.resample_inner);
  t.divergence_ceiling = kv.get_double("train.divergence_ceiling", t.divergence_ceiling);

  c.map_net = config_detail::read_net(kv, "map", c.map_net);
  c.potential_net = config_detail::read_net(kv, "potential", c.potential_net);

  if (kv.has("cost.kind")) {
    c.cost = config_detail::cost_of_kind(parse_cost_kind(kv.get_string("cost.kind", "")), c.cost.n, c.cost.m, c.cost);
  }
  c.cost.scale = kv.get_double("cost.scale", c.cost.scale);
  c.cost.radius = kv.get_double("cost.radius", c.cost.radius);
  c.cost.alpha = kv.get_double("cost.alpha", c.cost.alpha);
  c.cost.lambda = kv.get_double("cost.lambda", c.cost.lambda);

  if (const auto name = kv.get_string("source.sampler", c.source_sampler); name != c.source_sampler) {
    c.source_sampler = name;
    c.source.clear();
  }
  if (const auto name = kv.get_string("target.sampler", c.target_sampler); name != c.target_sampler) {
    c.target_sampler = name;
    c.target.clear();
  }
  c.source = config_detail::read_sampler_params(kv, "source", c.source);
  c.target = config_detail::read_sampler_params(kv, "target", c.target);

  c.eval.n_test = kv.get_int("eval.n_test", c.eval.n_test);
  c.eval.n_map_test = kv.get_int("eval.n_map_test", c.eval.n_map_test);
  if (kv.has("eval.oracle")) c.eval.oracle = parse_oracle(kv.get_string("eval.oracle", ""));
  c.eval.duality = kv.get_bool("eval.duality", c.eval.duality);
  c.eval.track_gaps = kv.get_bool("eval.track_gaps", c.eval.track_gaps);
  c.eval.ascent_steps = kv.get_int("eval.ascent_steps", c.eval.ascent_steps);
  c.eval.ascent_lr = kv.get_double("eval.ascent_lr", c.eval.ascent_lr);

  c.land_path = kv.get_string("data.land", c.land_path);
  c.population_path = kv.get_string("data.population", c.population_path);
  c.anchors = kv.get_int("data.anchors", c.anchors);
  c.jitter = kv.get_double("data.jitter", c.jitter);
  kv.require_all_used();
  return c;
}

/// Loads a config file. Relative data paths are taken from the file's directory.
inline ExperimentConfig load_experiment_config(const std::string& path) {
  ExperimentConfig c = config_from_kv(KeyValueConfig::load(path));
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  for (std::string* p : {&c.land_path, &c.population_path})
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  return c;
}

inline void validate(const ExperimentConfig& c) {
  c.cost.validate();
  c.train.validate(c.cost);
  require(c.eval.n_test >= 2 && c.eval.n_map_test >= 1, ErrorCode::kInvalidArgument,
          "eval.n_test must be >= 2 and eval.n_map_test >= 1");
  require(!(c.eval.duality || c.eval.track_gaps) || !c.train.conditional, ErrorCode::kInvalidArgument,
          "duality diagnostics need an unconditioned potential");
  if (c.experiment == Experiment::kPopulation)
    require(!c.land_path.empty() && !c.population_path.empty(), ErrorCode::kInvalidArgument,
            "population experiment requires data.land and data.population");
  require(c.anchors >= 1, ErrorCode::kInvalidArgument, "data.anchors must be >= 1");
}

/// Echo of the resolved configuration for the report.
inline nlohmann::json to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  auto net_json = [](const NetSettings& n) {
    return json{{"hidden", n.hidden}, {"activation", nn::to_string(n.activation)}, {"residual", n.residual},
                {"dropout", n.dropout}};
  };
  const TrainConfig& t = c.train;
  json j;
  j["experiment"] = to_string(c.experiment);
  j["seed"] = c.seed;
  j["train"] = {{"outer_steps", t.outer_steps},   {"map_steps", t.map_steps},
                {"potential_steps", t.potential_steps}, {"batch_size", t.batch_size},
                {"lr_map", t.lr_map},             {"lr_potential", t.lr_potential},
                {"beta1", t.beta1},               {"beta2", t.beta2},
                {"adam_eps", t.adam_eps},         {"weight_decay", t.weight_decay},
                {"ema_decay", t.ema_decay ? json(*t.ema_decay) : json(nullptr)},
                {"eval_every", t.eval_every},     {"eval_batch", t.eval_batch},
                {"record_steps", t.extra_records}, {"resample_inner", t.resample_inner},
                {"divergence_ceiling", t.divergence_ceiling}, {"pad_source", t.pad_source},
                {"conditional", t.conditional},  {"num_classes", t.num_classes}};
  j["map"] = net_json(c.map_net);
  j["potential"] = net_json(c.potential_net);
  j["cost"] = {{"kind", to_string(c.cost.kind)}, {"n", c.cost.n},          {"m", c.cost.m},
               {"scale", c.cost.scale},         {"radius", c.cost.radius}, {"alpha", c.cost.alpha},
               {"lambda", c.cost.lambda},       {"mask", c.cost.mask}};
  j["source"] = {{"sampler", c.source_sampler}, {"params", c.source}};
  j["target"] = {{"sampler", c.target_sampler}, {"params", c.target}};
  j["eval"] = {{"n_test", c.eval.n_test},   {"n_map_test", c.eval.n_map_test}, {"oracle", to_string(c.eval.oracle)},
               {"duality", c.eval.duality}, {"track_gaps", c.eval.track_gaps}, {"ascent_steps", c.eval.ascent_steps},
               {"ascent_lr", c.eval.ascent_lr}};
  if (c.experiment == Experiment::kPopulation)
    j["data"] = {{"land", c.land_path}, {"population", c.population_path}, {"anchors", c.anchors}, {"jitter", c.jitter}};
  return j;
}

/// Everything needed to train and evaluate one experiment.
struct ExperimentSetup {
  Problem problem;
  std::shared_ptr<const geo::LandSet> land;
  std::optional<Mixture2> target_mixture;
  std::optional<EllipseArc> ellipse;
};

inline ExperimentSetup build_setup(const ExperimentConfig& c) {
  validate(c);
  ExperimentSetup s;
  Problem& p = s.problem;
  const std::uint64_t src_seed = hash_keys({c.seed, 0x5C0ull});
  const std::uint64_t tgt_seed = hash_keys({c.seed, 0x7A6ull});
  if (c.experiment == Experiment::kPopulation) {
    auto land = std::make_shared<geo::LandSet>(geo::load_land(c.land_path, static_cast<std::size_t>(c.anchors), c.seed));
    auto pop = std::make_shared<geo::WeightedPoints>(geo::load_points(c.population_path));
    const double jitter = c.jitter >= 0.0 ? c.jitter : 0.5 * land->cell_spacing;
    p.source = weighted_sampler(pop, src_seed, jitter);
    p.target = land_sampler(land, tgt_seed, jitter);
    s.land = land;
  } else {
    p.source = builtin_sampler(c.source_sampler, c.source, src_seed);
    p.target = builtin_sampler(c.target_sampler, c.target, tgt_seed);
  }
  p.cost = c.cost;
  if (p.cost.is_sphere()) {
    p.cost.unwrapped_angles = true;
    p.cost.clamp_gradient = true;
  }
  // With padding the map input width follows the source sampler's dimension.
  const int source_dim = c.train.pad_source ? static_cast<int>(p.source(1, 0).points.cols()) : c.cost.n;
  const int cond = c.train.conditional ? c.train.num_classes : 0;
  p.map_spec = {source_dim, c.cost.m, c.map_net.hidden, c.map_net.activation, c.map_net.residual, c.map_net.dropout, cond};
  p.potential_spec = {c.cost.m, 1, c.potential_net.hidden, c.potential_net.activation, c.potential_net.residual,
                      c.potential_net.dropout, cond};
  if (c.target_sampler == "mixture2") {
    const auto it = c.target.find("means");
    const auto sd = c.target.find("std");
    s.target_mixture = Mixture2{it->second, sd == c.target.end() ? 0.5 : sd->second.front()};
    if (c.cost.kind == CostKind::kClassContrastive) {
      const Mixture2 mix = *s.target_mixture;
      p.classifier = [mix](const Tensor& t) {
        Tensor out(t.rows(), 1);
        for (Eigen::Index i = 0; i < t.rows(); ++i) out(i, 0) = mix.nearest(t(i, 0), t(i, 1));
        return out;
      };
    }
  }
  if (c.target_sampler == "ellipse") {
    EllipseArc arc;
    auto get = [&](const char* k, double d) {
      const auto it = c.target.find(k);
      return it == c.target.end() || it->second.empty() ? d : it->second.front();
    };
    arc.a = get("a", arc.a);
    arc.b = get("b", arc.b);
    arc.gap_center = get("gap_center", arc.gap_center);
    arc.gap_width = get("gap_width", arc.gap_width);
    s.ellipse = arc;
  }
  return s;
}

}  // namespace monge::harness
