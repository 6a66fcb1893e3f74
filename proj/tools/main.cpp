// Command-line front end: dataset generation, k-median and facility
// pipelines, brute-force oracles, and the experiment harness.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairclust/csv.hpp"
#include "fairclust/experiment.hpp"
#include "fairclust/local_search.hpp"

using namespace fairclust;
using ordered_json = nlohmann::ordered_json;

namespace {

struct DatasetOpts {
  std::string input;
  std::string group_col;
  std::vector<std::string> features;
  bool synthetic = false;
  std::uint64_t synth_seed = 0;
  int majority_size = 250;
  int minority_size = 50;
  double majority_mean = 0.0;
  double minority_mean = 3.0;
  double stddev = 0.5;

  void attach(CLI::App* cmd) {
    cmd->add_option("--input", input, "CSV file with a header row");
    cmd->add_option("--group-col", group_col, "name of the group label column");
    cmd->add_option("--features", features,
                    "feature columns; coordinates (latitude/longitude included) are treated as "
                    "planar")
        ->delimiter(',');
    cmd->add_flag("--synthetic", synthetic, "use the built-in two-group Gaussian generator");
    cmd->add_option("--synthetic-seed", synth_seed, "generator seed");
    cmd->add_option("--majority-size", majority_size, "synthetic majority group size");
    cmd->add_option("--minority-size", minority_size, "synthetic minority group size");
    cmd->add_option("--majority-mean", majority_mean, "synthetic majority mean per coordinate");
    cmd->add_option("--minority-mean", minority_mean, "synthetic minority mean per coordinate");
    cmd->add_option("--stddev", stddev, "synthetic per-coordinate standard deviation");
  }

  Dataset load() const {
    if (synthetic)
      return gen_synthetic(synth_seed, majority_size, minority_size, majority_mean, minority_mean,
                           stddev);
    if (input.empty())
      throw ValidationError("give --input with --group-col/--features, or --synthetic");
    if (group_col.empty() || features.empty())
      throw ValidationError("--input needs --group-col and --features");
    return load_csv(input, group_col, features);
  }
};

void write_output(const std::string& text, const std::string& path, bool force) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (!force && std::ifstream(path).good())
    throw ValidationError(path + " exists; pass --force to overwrite");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

ordered_json group_report_json(const GroupReport& rep) {
  ordered_json groups = ordered_json::array();
  for (const GroupCost& g : rep.groups) {
    ordered_json jg;
    jg["name"] = g.name;
    jg["size"] = g.size;
    jg["total"] = g.total;
    jg["average"] = g.average;
    if (rep.kind == CostKind::Rel) jg["relative"] = g.relative;
    groups.push_back(std::move(jg));
  }
  return groups;
}

ordered_json trace_json(const RoundingTrace& trace) {
  ordered_json j;
  j["promoted"] = trace.promoted;
  j["initial_c_delta"] = trace.initial_c_delta;
  j["iterations"] = ordered_json::array();
  for (const FflIteration& it : trace.iterations) {
    ordered_json ji;
    ji["client"] = it.client;
    ji["ball"] = it.ball;
    ji["opened_count"] = it.opened_count;
    ji["opened"] = it.opened;
    j["iterations"].push_back(std::move(ji));
  }
  j["c_delta_history"] = trace.c_delta_history;
  j["beta"] = trace.beta;
  j["final_loads"] = trace.final_loads;
  j["opened"] = trace.opened;
  return j;
}

int run_gen_synthetic(const DatasetOpts& data, const std::string& out, bool force) {
  Dataset ds = gen_synthetic(data.synth_seed, data.majority_size, data.minority_size,
                             data.majority_mean, data.minority_mean, data.stddev);
  std::string text = "f1,f2,group\n";
  char buf[128];
  for (int i = 0; i < ds.n(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s\n", ds.points[i][0], ds.points[i][1],
                  ds.labels[i].c_str());
    text += buf;
  }
  write_output(text, out, force);
  return 0;
}

int run_kmedian(const DatasetOpts& data, const std::string& method, int k,
                const std::string& objective, double epsilon, std::uint64_t seed,
                const std::string& out, bool force, const std::string& dump_lp) {
  Dataset ds = data.load();
  MetricCache metric = build_metric(ds, MetricMode::Euclidean);
  CostKind kind = objective == "rel" ? CostKind::Rel : CostKind::Abs;

  std::optional<RelErrorCertificate> cert;
  if (kind == CostKind::Rel) cert = compute_certificate(ds, metric, k, derive_seed(seed, "cert"));

  if (!dump_lp.empty()) {
    KMedianVariant variant = method == "standard"   ? KMedianVariant::Standard
                             : method == "weighted" ? KMedianVariant::Weighted
                             : kind == CostKind::Rel ? KMedianVariant::FairRel
                                                     : KMedianVariant::FairAbs;
    if (method == "ls-fair") {
      std::cerr << "ls-fair solves no LP; dumping the fair LP for reference\n";
      variant = kind == CostKind::Rel ? KMedianVariant::FairRel : KMedianVariant::FairAbs;
    }
    AssignmentModel model =
        build_kmedian_lp(variant, ds, metric, k, cert ? &*cert : nullptr);
    std::ofstream lpout(dump_lp);
    if (!lpout) throw ValidationError("cannot write " + dump_lp);
    write_mps(model.lp, lpout, "KMEDIAN");
  }

  IntegralSolution sol =
      run_kmedian_method(method, ds, metric, k, kind, cert ? &*cert : nullptr, epsilon, seed);
  GroupReport rep = group_costs(ds, metric, sol, kind, cert ? &*cert : nullptr);

  ordered_json j;
  j["method"] = method;
  j["k"] = k;
  j["objective"] = objective;
  j["num_centers"] = sol.centers.size();
  j["centers"] = sol.centers;
  j["fair_objective"] = fair_objective(rep);
  j["groups"] = group_report_json(rep);
  if (cert) j["certificate"] = cert->values;
  write_output(j.dump(2) + "\n", out, force);
  return 0;
}

int run_facility(const DatasetOpts& data, int num_locations, double opening_cost,
                 std::optional<int> capacity, double theta, double delta,
                 const std::string& fairness, std::uint64_t seed, const std::string& out,
                 bool force, const std::string& dump_lp, const std::string& trace_path) {
  Dataset ds = data.load();
  int t = std::min(num_locations, ds.n());
  std::vector<Vector> locs = propose_locations(ds, t, seed);
  FacilityInstance inst =
      make_facility_instance(ds, locs, std::vector<double>(locs.size(), opening_cost), capacity);
  FacilityFairness mode =
      fairness == "aggregate" ? FacilityFairness::Aggregate : FacilityFairness::PerGroup;
  bool capacitated = capacity.has_value();

  if (!dump_lp.empty()) {
    AssignmentModel model = build_facility_lp(inst, mode, capacitated);
    std::ofstream lpout(dump_lp);
    if (!lpout) throw ValidationError("cannot write " + dump_lp);
    write_mps(model.lp, lpout, "FACILITY");
  }

  FacilitySolve fs = solve_facility(inst, mode, capacitated);
  IntegralSolution sol;
  if (capacitated) {
    auto [s, trace] = ffl_round(fs.frac, inst, theta, delta);
    sol = std::move(s);
    if (!trace_path.empty()) write_output(trace_json(trace).dump(2) + "\n", trace_path, force);
  } else {
    sol = round_facility_faithful(fs.frac, inst);
    if (!trace_path.empty())
      std::cerr << "--trace applies to capacitated runs only; ignored\n";
  }
  FacilityReport rep = facility_report(inst, sol);

  ordered_json j;
  j["fairness"] = fairness;
  j["capacitated"] = capacitated;
  j["num_locations"] = inst.num_locations();
  j["lp_objective"] = fs.lp_objective;
  j["objective"] = facility_objective(inst, sol);
  j["opened"] = sol.centers;
  j["opening_cost"] = rep.opening_cost;
  j["groups"] = group_report_json(rep.connection);
  write_output(j.dump(2) + "\n", out, force);
  return 0;
}

int run_oracle(const DatasetOpts& data, const std::string& problem, int k,
               const std::string& objective, int num_locations, double opening_cost,
               std::optional<int> capacity, std::uint64_t seed, const std::string& out,
               bool force) {
  Dataset ds = data.load();
  ordered_json j;
  if (problem == "kmedian") {
    MetricCache metric = build_metric(ds, MetricMode::Euclidean);
    CostKind kind = objective == "rel" ? CostKind::Rel : CostKind::Abs;
    std::optional<RelErrorCertificate> cert;
    if (kind == CostKind::Rel)
      cert = compute_certificate(ds, metric, k, derive_seed(seed, "cert"));
    FairOptResult r = brute_force_fair_opt(ds, metric, k, kind, cert ? &*cert : nullptr);
    j["problem"] = "kmedian";
    j["k"] = k;
    j["objective"] = objective;
    j["value"] = r.value;
    j["centers"] = r.centers;
  } else if (problem == "facility") {
    int t = std::min(num_locations, ds.n());
    std::vector<Vector> locs = propose_locations(ds, t, seed);
    FacilityInstance inst = make_facility_instance(
        ds, locs, std::vector<double>(locs.size(), opening_cost), capacity);
    FacilityOptResult r = brute_force_facility_opt(inst);
    j["problem"] = "facility";
    j["value"] = r.value;
    j["open"] = r.open;
  } else {
    throw ValidationError("oracle problem must be 'kmedian' or 'facility'");
  }
  write_output(j.dump(2) + "\n", out, force);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Group-representative clustering and facility location: LP relaxations, rounding "
      "schemes, local search, exhaustive oracles and an experiment harness."};
  app.require_subcommand(1);

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "write the two-group Gaussian dataset as CSV");
  DatasetOpts gen_data;
  std::string gen_out;
  bool gen_force = false;
  std::uint64_t gen_seed = 0;
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--majority-size", gen_data.majority_size, "majority group size");
  gen->add_option("--minority-size", gen_data.minority_size, "minority group size");
  gen->add_option("--majority-mean", gen_data.majority_mean, "majority mean per coordinate");
  gen->add_option("--minority-mean", gen_data.minority_mean, "minority mean per coordinate");
  gen->add_option("--stddev", gen_data.stddev, "per-coordinate standard deviation");
  gen->add_option("--out", gen_out, "output path ('-' for stdout)");
  gen->add_flag("--force", gen_force, "overwrite an existing output file");

  // kmedian
  auto* km = app.add_subcommand("kmedian", "run one k-median method and report group costs");
  DatasetOpts km_data;
  km_data.attach(km);
  std::string km_method = "lp-fair-dependent", km_objective = "abs", km_out, km_dump;
  int km_k = 3;
  double km_eps = 0.5;
  std::uint64_t km_seed = 0;
  bool km_force = false;
  km->add_option("--method", km_method, "standard|weighted|ls-fair|lp-fair-bicriteria|lp-fair-dependent")
      ->check(CLI::IsMember(kKMedianMethods));
  km->add_option("--k", km_k, "number of centers");
  km->add_option("--objective", km_objective, "abs|rel")->check(CLI::IsMember({"abs", "rel"}));
  km->add_option("--epsilon", km_eps, "bicriteria parameter in (0,1)");
  km->add_option("--seed", km_seed, "seed for sampling and rounding");
  km->add_option("--out", km_out, "output path ('-' for stdout)");
  km->add_option("--dump-lp", km_dump, "write the solved LP in MPS format");
  km->add_flag("--force", km_force, "overwrite an existing output file");

  // facility
  auto* fac = app.add_subcommand("facility", "fair facility location with LP rounding");
  DatasetOpts fac_data;
  fac_data.attach(fac);
  std::string fac_fairness = "per-group", fac_out, fac_dump, fac_trace;
  int fac_locations = 20;
  double fac_cost = 1.0, fac_theta = 0.1, fac_delta = 0.1;
  int fac_capacity = 0;
  std::uint64_t fac_seed = 0;
  bool fac_force = false;
  fac->add_option("--num-locations", fac_locations,
                  "candidate locations chosen by farthest-first traversal");
  fac->add_option("--opening-cost", fac_cost, "uniform opening cost");
  fac->add_option("--capacity", fac_capacity, "per-facility capacity (0 = uncapacitated)");
  fac->add_option("--theta", fac_theta, "filtering parameter in (0, 1/2]");
  fac->add_option("--delta", fac_delta, "coverage parameter in (0, 1/2]");
  fac->add_option("--fairness", fac_fairness, "per-group|aggregate")
      ->check(CLI::IsMember({"per-group", "aggregate"}));
  fac->add_option("--seed", fac_seed, "seed for location proposal");
  fac->add_option("--out", fac_out, "output path ('-' for stdout)");
  fac->add_option("--dump-lp", fac_dump, "write the solved LP in MPS format");
  fac->add_option("--trace", fac_trace, "write the capacitated rounding trace as JSON");
  fac->add_flag("--force", fac_force, "overwrite an existing output file");

  // oracle
  auto* orc = app.add_subcommand("oracle", "exhaustive optima for small instances");
  DatasetOpts orc_data;
  orc_data.attach(orc);
  std::string orc_problem = "kmedian", orc_objective = "abs", orc_out;
  int orc_k = 2, orc_locations = 8;
  double orc_cost = 1.0;
  int orc_capacity = 0;
  std::uint64_t orc_seed = 0;
  bool orc_force = false;
  orc->add_option("--problem", orc_problem, "kmedian|facility")
      ->check(CLI::IsMember({"kmedian", "facility"}));
  orc->add_option("--k", orc_k, "number of centers (kmedian)");
  orc->add_option("--objective", orc_objective, "abs|rel")->check(CLI::IsMember({"abs", "rel"}));
  orc->add_option("--num-locations", orc_locations, "candidate locations (facility)");
  orc->add_option("--opening-cost", orc_cost, "uniform opening cost (facility)");
  orc->add_option("--capacity", orc_capacity, "capacity (facility; 0 = uncapacitated)");
  orc->add_option("--seed", orc_seed, "seed for location proposal");
  orc->add_option("--out", orc_out, "output path ('-' for stdout)");
  orc->add_flag("--force", orc_force, "overwrite an existing output file");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a JSON-configured experiment");
  std::string exp_config, exp_out, exp_format = "json";
  bool exp_force = false;
  std::uint64_t exp_seed = 0;
  bool exp_seed_set = false;
  exp->add_option("--config", exp_config, "experiment configuration JSON")->required();
  exp->add_option("--out", exp_out, "output path ('-' for stdout)");
  exp->add_option("--format", exp_format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  exp->add_option("--seed", exp_seed, "override the config's base seed")
      ->each([&](const std::string&) { exp_seed_set = true; });
  exp->add_flag("--force", exp_force, "overwrite an existing output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      gen_data.synth_seed = gen_seed;
      return run_gen_synthetic(gen_data, gen_out, gen_force);
    }
    if (km->parsed())
      return run_kmedian(km_data, km_method, km_k, km_objective, km_eps, km_seed, km_out,
                         km_force, km_dump);
    if (fac->parsed())
      return run_facility(fac_data, fac_locations, fac_cost,
                          fac_capacity > 0 ? std::optional<int>(fac_capacity) : std::nullopt,
                          fac_theta, fac_delta, fac_fairness, fac_seed, fac_out, fac_force,
                          fac_dump, fac_trace);
    if (orc->parsed())
      return run_oracle(orc_data, orc_problem, orc_k, orc_objective, orc_locations, orc_cost,
                        orc_capacity > 0 ? std::optional<int>(orc_capacity) : std::nullopt,
                        orc_seed, orc_out, orc_force);
    if (exp->parsed()) {
      ExperimentConfig cfg = load_config(exp_config);
      if (exp_seed_set) cfg.base_seed = exp_seed;
      ExperimentReport rep = run_experiment(cfg);
      std::string text =
          exp_format == "csv" ? report_to_csv(rep) : report_to_json(rep);
      write_output(text, exp_out, exp_force);
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "internal invariant violated: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
