// monge_forge: train, diagnose and compare neural Monge maps.

#include "monge/harness/checkpoint.hpp"
#include "monge/harness/csv.hpp"
#include "monge/harness/experiment.hpp"
#include "monge/harness/parallel.hpp"
#include "monge/harness/synthetic_earth.hpp"
#include "monge/oracles.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <vector>

namespace {

using namespace monge;
using namespace monge::harness;
using nlohmann::json;

int exit_code_for(const Error& e) { return e.code() == ErrorCode::kIo ? kExitIo : kExitFailure; }

struct SolveArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  int jobs = 1;
};

int cmd_solve(const SolveArgs& a) {
  ExperimentConfig base = load_experiment_config(a.config);
  if (a.seed) base.seed = *a.seed;
  if (a.output) base.output_dir = *a.output;
  if (a.jobs <= 1) {
    const ExperimentReport r = run_experiment(base);
    std::cout << json{{"status", r.body["status"]}, {"output", base.output_dir},
                      {"metrics", r.body.value("metrics", json(nullptr))}, {"wall_time_s", r.wall_time_s}}
                     .dump(2)
              << '\n';
    return r.exit_code;
  }
  // Independent seeds base.seed .. base.seed + jobs - 1, one subdirectory each.
  std::vector<int> codes(static_cast<std::size_t>(a.jobs), kExitOk);
  std::vector<json> summaries(static_cast<std::size_t>(a.jobs));
  std::mutex log_mu;
  run_parallel(a.jobs, worker_count(a.jobs), [&](int i) {
    ExperimentConfig c = base;
    c.seed = base.seed + static_cast<std::uint64_t>(i);
    c.output_dir = (std::filesystem::path(base.output_dir) / ("seed_" + std::to_string(c.seed))).string();
    const auto idx = static_cast<std::size_t>(i);
    try {
      const ExperimentReport r = run_experiment(c);
      codes[idx] = r.exit_code;
      summaries[idx] = {{"seed", c.seed}, {"output", c.output_dir}, {"status", r.body["status"]}};
    } catch (const Error& e) {
      codes[idx] = exit_code_for(e);
      summaries[idx] = {{"seed", c.seed}, {"output", c.output_dir}, {"status", "error"}, {"error", e.what()}};
      std::lock_guard lock(log_mu);
      std::cerr << "seed " << c.seed << ": " << e.what() << '\n';
    }
  });
  std::cout << json(summaries).dump(2) << '\n';
  int worst = kExitOk;
  for (int c : codes) worst = std::max(worst, c);
  return worst;
}

int cmd_gaps(const std::string& checkpoint, const std::string& config) {
  const ExperimentConfig c = load_experiment_config(config);
  const ExperimentSetup setup = build_setup(c);
  const Checkpoint ck = load_checkpoint(checkpoint);
  const auto r = evaluate_gaps(c, setup, ck.map, ck.potential);
  std::cout << duality::to_json(r).dump(2) << '\n';
  return kExitOk;
}

struct OracleArgs {
  std::string x, y, cost;
  double scale = 1.0;
  double radius = 1.0;
  std::optional<double> epsilon;
  std::optional<std::string> plan;
};

int cmd_oracle(const OracleArgs& a) {
  const CsvTable x = read_csv(a.x), y = read_csv(a.y);
  CostSpec cost;
  cost.kind = parse_cost_kind(a.cost);
  require(cost.kind != CostKind::kMaskedMse && cost.kind != CostKind::kClassContrastive,
          ErrorCode::kInvalidArgument, "oracle supports label- and mask-free costs only");
  cost.n = static_cast<int>(x.values.cols());
  cost.m = static_cast<int>(y.values.cols());
  cost.scale = a.scale;
  cost.radius = a.radius;
  cost.validate();
  const bool exact = !a.epsilon;
  const auto sol = exact ? oracles::discrete_ot_exact(x.values, y.values, cost)
                         : oracles::sinkhorn(x.values, y.values, cost, *a.epsilon);
  json out{{"method", exact ? "exact" : "sinkhorn"}, {"n", sol.n}, {"cost", sol.cost}};
  if (!exact) out["epsilon"] = *a.epsilon;
  if (a.plan) {
    std::ofstream f(*a.plan);
    require(static_cast<bool>(f), ErrorCode::kIo, "cannot write " + *a.plan);
    oracles::write_coupling_csv(f, sol);
    require(static_cast<bool>(f), ErrorCode::kIo, "write failed: " + *a.plan);
    out["plan"] = *a.plan;
  }
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

TrainedMap load_map(const std::string& spec, const ExperimentSetup& setup) {
  if (spec == "identity") {
    require(setup.problem.cost.n == setup.problem.cost.m, ErrorCode::kDimensionMismatch,
            "identity map needs equal source and target dimensions");
    return identity_map(setup.problem.cost.n);
  }
  return load_checkpoint(spec).map;
}

int cmd_compare(const std::string& map_a, const std::string& map_b, const std::string& config,
                const std::optional<std::string>& output) {
  const ExperimentConfig c = load_experiment_config(config);
  const ExperimentSetup setup = build_setup(c);
  const int n = std::min<int>(c.eval.n_test, static_cast<int>(oracles::kMaxExactSize));
  const LabeledBatch x = run_detail::draw(setup.problem.source, n, 0);
  const LabeledBatch y = run_detail::draw(setup.problem.target, n, 1);
  const auto rows = compare_maps({{"a", load_map(map_a, setup)}, {"b", load_map(map_b, setup)}}, x, y.points,
                                 setup.problem);
  if (output) {
    std::ofstream f(*output);
    require(static_cast<bool>(f), ErrorCode::kIo, "cannot write " + *output);
    write_comparison_csv(f, rows);
    require(static_cast<bool>(f), ErrorCode::kIo, "write failed: " + *output);
  } else {
    write_comparison_csv(std::cout, rows);
  }
  return kExitOk;
}

int cmd_synth_earth(const std::string& dir, const SyntheticEarthSpec& spec) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
  const auto earth = make_synthetic_earth(spec);
  const auto base = std::filesystem::path(dir);
  write_synthetic_earth(earth, (base / "land.csv").string(), (base / "population.csv").string());
  std::cout << json{{"land_points", earth.land.size()}, {"land", (base / "land.csv").string()},
                    {"population", (base / "population.csv").string()}}
                   .dump(2)
            << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural Monge map solver"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "train and evaluate one experiment");
  s->add_option("--config", solve.config, "experiment config file")->required()->check(CLI::ExistingFile);
  s->add_option("--seed", solve.seed, "override the config seed");
  s->add_option("--output", solve.output, "override the output directory");
  s->add_option("--jobs", solve.jobs, "run this many consecutive seeds concurrently")->check(CLI::PositiveNumber);

  std::string gaps_ckpt, gaps_cfg;
  auto* g = app.add_subcommand("gaps", "duality gaps of a trained checkpoint");
  g->add_option("--checkpoint", gaps_ckpt)->required()->check(CLI::ExistingFile);
  g->add_option("--config", gaps_cfg)->required()->check(CLI::ExistingFile);

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle", "discrete OT between two point clouds");
  o->add_option("--x", oracle.x, "source CSV (header row, one point per line)")->required()->check(CLI::ExistingFile);
  o->add_option("--y", oracle.y, "target CSV")->required()->check(CLI::ExistingFile);
  o->add_option("--cost", oracle.cost, "quadratic | inverse_square | neg_cosine | sphere_geodesic | sphere_linearized")
      ->required();
  o->add_option("--scale", oracle.scale, "quadratic cost scale");
  o->add_option("--radius", oracle.radius, "sphere radius for sphere_geodesic");
  o->add_option("--epsilon", oracle.epsilon, "use Sinkhorn with this regularisation instead of the exact solver");
  o->add_option("--plan", oracle.plan, "write the coupling as i,j,mass CSV");

  std::string cmp_a, cmp_b, cmp_cfg;
  std::optional<std::string> cmp_out;
  auto* c = app.add_subcommand("compare", "side-by-side transport cost and pushforward fidelity");
  c->add_option("--map-a", cmp_a, "checkpoint, or 'identity'")->required();
  c->add_option("--map-b", cmp_b, "checkpoint, or 'identity'")->required();
  c->add_option("--config", cmp_cfg)->required()->check(CLI::ExistingFile);
  c->add_option("--output", cmp_out, "CSV path (default stdout)");

  std::string earth_dir = "data";
  SyntheticEarthSpec earth;
  auto* e = app.add_subcommand("synth-earth", "write a synthetic land/population dataset");
  e->add_option("--output", earth_dir, "directory for land.csv and population.csv");
  e->add_option("--points", earth.lattice_points, "lattice size");
  e->add_option("--seed", earth.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  try {
    if (*s) return cmd_solve(solve);
    if (*g) return cmd_gaps(gaps_ckpt, gaps_cfg);
    if (*o) return cmd_oracle(oracle);
    if (*c) return cmd_compare(cmp_a, cmp_b, cmp_cfg, cmp_out);
    if (*e) return cmd_synth_earth(earth_dir, earth);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return exit_code_for(err);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
