#include "fairclust/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fairclust/csv.hpp"

namespace fairclust {

using ordered_json = nlohmann::ordered_json;

ExperimentConfig parse_config(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  if (!j.contains("dataset")) throw ValidationError("config: missing 'dataset'");
  const auto& ds = j["dataset"];
  if (ds.contains("csv")) {
    cfg.csv_path = ds["csv"].get<std::string>();
    if (!ds.contains("group_column") || !ds.contains("feature_columns"))
      throw ValidationError("config: csv dataset needs group_column and feature_columns");
    cfg.group_column = ds["group_column"].get<std::string>();
    for (const auto& f : ds["feature_columns"]) cfg.feature_columns.push_back(f.get<std::string>());
  } else if (ds.contains("synthetic")) {
    const auto& s = ds["synthetic"];
    SyntheticSpec spec;
    if (s.contains("seed")) spec.seed = s["seed"].get<std::uint64_t>();
    if (s.contains("majority_size")) spec.majority_size = s["majority_size"].get<int>();
    if (s.contains("minority_size")) spec.minority_size = s["minority_size"].get<int>();
    if (s.contains("majority_mean")) spec.majority_mean = s["majority_mean"].get<double>();
    if (s.contains("minority_mean")) spec.minority_mean = s["minority_mean"].get<double>();
    if (s.contains("stddev")) spec.stddev = s["stddev"].get<double>();
    cfg.synthetic = spec;
  } else {
    throw ValidationError("config: dataset must give 'csv' or 'synthetic'");
  }
  if (j.contains("k")) cfg.k = j["k"].get<int>();
  if (j.contains("cost_mode")) {
    std::string m = j["cost_mode"].get<std::string>();
    if (m == "abs")
      cfg.cost_kind = CostKind::Abs;
    else if (m == "rel")
      cfg.cost_kind = CostKind::Rel;
    else
      throw ValidationError("config: cost_mode must be 'abs' or 'rel'");
  }
  if (j.contains("methods"))
    for (const auto& m : j["methods"]) {
      std::string name = m.get<std::string>();
      if (std::find(kKMedianMethods.begin(), kKMedianMethods.end(), name) ==
          kKMedianMethods.end())
        throw ValidationError("config: unknown method '" + name + "'");
      cfg.methods.push_back(name);
    }
  if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
  if (j.contains("theta")) cfg.theta = j["theta"].get<double>();
  if (j.contains("delta")) cfg.delta = j["delta"].get<double>();
  if (j.contains("sample")) {
    const auto& s = j["sample"];
    if (s.contains("per_group"))
      for (auto it = s["per_group"].begin(); it != s["per_group"].end(); ++it)
        cfg.subsample[it.key()] = it.value().get<int>();
    if (s.contains("repetitions")) cfg.repetitions = s["repetitions"].get<int>();
  }
  if (cfg.repetitions < 1) throw ValidationError("config: repetitions must be >= 1");
  if (j.contains("base_seed")) cfg.base_seed = j["base_seed"].get<std::uint64_t>();
  if (j.contains("facility_sweep")) {
    const auto& s = j["facility_sweep"];
    if (s.contains("opening_costs"))
      for (const auto& f : s["opening_costs"]) cfg.opening_cost_grid.push_back(f.get<double>());
    if (s.contains("capacity") && !s["capacity"].is_null())
      cfg.capacity = s["capacity"].get<int>();
    if (s.contains("locations")) cfg.sweep_locations = s["locations"].get<int>();
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

double score_solution(const std::string& method, const Dataset& ds, const MetricCache& metric,
                      const IntegralSolution& sol, CostKind kind,
                      const RelErrorCertificate* cert) {
  GroupReport rep = group_costs(ds, metric, sol, kind, cert);
  if (method == "standard") {
    double total = 0.0;
    for (const auto& g : rep.groups) total += g.total;
    return total;
  }
  if (method == "weighted") {
    double s = 0.0;
    for (const auto& g : rep.groups) s += g.average;
    return s;
  }
  return fair_objective(rep);
}

IntegralSolution best_of_dependent(const std::string& method, const FractionalClustering& frac,
                                   const Dataset& ds, const MetricCache& metric, int k,
                                   CostKind kind, const RelErrorCertificate* cert,
                                   std::uint64_t seed) {
  IntegralSolution best;
  double best_score = kInfinity;
  for (int d = 0; d < 5; ++d) {
    IntegralSolution sol =
        round_dependent(frac, metric, k, derive_seed(seed, "draw" + std::to_string(d)));
    double s = score_solution(method, ds, metric, sol, kind, cert);
    if (s < best_score) {
      best_score = s;
      best = std::move(sol);
    }
  }
  return best;
}

}  // namespace

IntegralSolution run_kmedian_method(const std::string& method, const Dataset& dataset,
                                    const MetricCache& metric, int k, CostKind cost_kind,
                                    const RelErrorCertificate* certificate, double epsilon,
                                    std::uint64_t seed) {
  if (method == "ls-fair")
    return ls_fair(dataset, metric, k, cost_kind, certificate, seed);
  if (method == "standard") {
    FractionalClustering frac = solve_kmedian(KMedianVariant::Standard, dataset, metric, k);
    return best_of_dependent(method, frac, dataset, metric, k, CostKind::Abs, nullptr, seed);
  }
  if (method == "weighted") {
    FractionalClustering frac = solve_kmedian(KMedianVariant::Weighted, dataset, metric, k);
    return best_of_dependent(method, frac, dataset, metric, k, CostKind::Abs, nullptr, seed);
  }
  KMedianVariant variant =
      cost_kind == CostKind::Abs ? KMedianVariant::FairAbs : KMedianVariant::FairRel;
  FractionalClustering frac = solve_kmedian(variant, dataset, metric, k, certificate);
  if (method == "lp-fair-bicriteria") {
    IntegralSolution sol = round_bicriteria(frac, metric, epsilon);
    return sol;
  }
  if (method == "lp-fair-dependent")
    return best_of_dependent(method, frac, dataset, metric, k, cost_kind, certificate, seed);
  throw ValidationError("unknown k-median method '" + method + "'");
}

namespace {

Dataset subsample_dataset(const Dataset& full, const std::map<std::string, int>& sizes,
                          std::uint64_t seed) {
  if (sizes.empty()) return full;
  std::vector<int> keep;
  for (const auto& [label, want] : sizes) {
    int g = -1;
    for (int i = 0; i < full.num_groups(); ++i)
      if (full.group_names[i] == label) g = i;
    if (g < 0) throw ValidationError("subsample: group '" + label + "' not in dataset");
    if (want > full.group_size(g))
      throw ValidationError("subsample: requested " + std::to_string(want) + " points of group '" +
                            label + "' but it has " + std::to_string(full.group_size(g)));
    std::vector<int> members = full.group_index[g];
    Rng rng(derive_seed(seed, "sub-" + label));
    for (int i = 0; i < want; ++i)
      std::swap(members[i], members[i + rng.uniform_int(static_cast<int>(members.size()) - i)]);
    keep.insert(keep.end(), members.begin(), members.begin() + want);
  }
  std::sort(keep.begin(), keep.end());
  std::vector<Vector> pts;
  std::vector<std::string> labels;
  for (int i : keep) {
    pts.push_back(full.points[i]);
    labels.push_back(full.labels[i]);
  }
  return build_dataset(std::move(pts), std::move(labels));
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  Dataset full = cfg.synthetic
                     ? gen_synthetic(cfg.synthetic->seed, cfg.synthetic->majority_size,
                                     cfg.synthetic->minority_size, cfg.synthetic->majority_mean,
                                     cfg.synthetic->minority_mean, cfg.synthetic->stddev)
                     : load_csv(cfg.csv_path, cfg.group_column, cfg.feature_columns);

  ExperimentReport report;
  report.groups = full.group_names;
  const int m = full.num_groups();
  const auto t0 = std::chrono::steady_clock::now();
  (void)t0;

  // Mean per-group average cost per method, plus the two baseline rows.
  std::vector<std::string> rows = cfg.methods;
  std::vector<std::vector<double>> sums(rows.size() + 2, std::vector<double>(m, 0.0));
  const int std_row = static_cast<int>(rows.size());
  const int opt_row = std_row + 1;

  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    std::uint64_t rep_seed = derive_seed(cfg.base_seed, "rep" + std::to_string(rep));
    report.seeds_used.push_back(rep_seed);
    Dataset ds = subsample_dataset(full, cfg.subsample, rep_seed);
    MetricCache metric = build_metric(ds, MetricMode::Euclidean);

    RelErrorCertificate cert = compute_certificate(ds, metric, cfg.k, derive_seed(rep_seed, "cert"));
    const RelErrorCertificate* certp = &cert;

    auto add_averages = [&](int row, const IntegralSolution& sol) {
      GroupReport gr = group_costs(ds, metric, sol, CostKind::Abs, nullptr);
      for (int g = 0; g < m; ++g) sums[row][g] += gr.groups[g].average;
    };

    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      auto cell_start = std::chrono::steady_clock::now();
      IntegralSolution sol =
          run_kmedian_method(cfg.methods[mi], ds, metric, cfg.k, cfg.cost_kind, certp, cfg.epsilon,
                             derive_seed(rep_seed, "m-" + cfg.methods[mi]));
      add_averages(static_cast<int>(mi), sol);
      report.cell_wall_ms.push_back(
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - cell_start)
              .count());
    }
    {
      IntegralSolution sol = run_kmedian_method("standard", ds, metric, cfg.k, CostKind::Abs,
                                                nullptr, cfg.epsilon,
                                                derive_seed(rep_seed, "m-standard"));
      add_averages(std_row, sol);
    }
    for (int g = 0; g < m; ++g) sums[opt_row][g] += cert.values[g] / ds.group_size(g);
  }

  auto mean = [&](int row, int g) { return sums[row][g] / cfg.repetitions; };
  auto push_cells = [&](const std::string& name, int row) {
    for (int g = 0; g < m; ++g) {
      MethodCell cell;
      cell.method = name;
      cell.group = report.groups[g];
      cell.avg_cost = mean(row, g);
      double std_base = mean(std_row, g);
      double opt_base = mean(opt_row, g);
      cell.pct_vs_standard = std_base > 0 ? 100.0 * cell.avg_cost / std_base : 0.0;
      cell.pct_vs_group_opt = opt_base > 0 ? 100.0 * cell.avg_cost / opt_base : 0.0;
      cell.seed_count = cfg.repetitions;
      report.cells.push_back(std::move(cell));
    }
  };
  push_cells("group-optimal", opt_row);
  push_cells("standard", std_row);
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi)
    push_cells(cfg.methods[mi], static_cast<int>(mi));

  // Facility sweep over the opening-cost grid, fair vs aggregate.
  if (!cfg.opening_cost_grid.empty()) {
    int t = std::min(cfg.sweep_locations, full.n());
    std::vector<Vector> locs = propose_locations(full, t, derive_seed(cfg.base_seed, "sweep-loc"));
    for (double f : cfg.opening_cost_grid) {
      FacilityInstance inst = make_facility_instance(
          full, locs, std::vector<double>(locs.size(), f), cfg.capacity);
      for (FacilityFairness mode : {FacilityFairness::PerGroup, FacilityFairness::Aggregate}) {
        FacilitySolve fs = solve_facility(inst, mode, cfg.capacity.has_value());
        IntegralSolution sol = cfg.capacity
                                   ? ffl_round(fs.frac, inst, cfg.theta, cfg.delta).first
                                   : round_facility_faithful(fs.frac, inst);
        FacilityReport fr = facility_report(inst, sol);
        for (int g = 0; g < m; ++g) {
          SweepCell c;
          c.opening_cost = f;
          c.fairness = mode == FacilityFairness::PerGroup ? "per-group" : "aggregate";
          c.group = fr.connection.groups[g].name;
          c.avg_distance = fr.connection.groups[g].average;
          c.max_group_average = fr.connection.max_average;
          c.objective = facility_objective(inst, sol);
          report.sweep.push_back(std::move(c));
        }
      }
    }
  }
  return report;
}

std::string report_to_json(const ExperimentReport& report) {
  ordered_json j;
  j["groups"] = report.groups;
  j["cells"] = ordered_json::array();
  for (const MethodCell& c : report.cells) {
    ordered_json jc;
    jc["method"] = c.method;
    jc["group"] = c.group;
    jc["avg_cost"] = c.avg_cost;
    jc["pct_vs_standard"] = c.pct_vs_standard;
    jc["pct_vs_group_opt"] = c.pct_vs_group_opt;
    jc["seed_count"] = c.seed_count;
    j["cells"].push_back(std::move(jc));
  }
  j["facility_sweep"] = ordered_json::array();
  for (const SweepCell& c : report.sweep) {
    ordered_json jc;
    jc["opening_cost"] = c.opening_cost;
    jc["fairness"] = c.fairness;
    jc["group"] = c.group;
    jc["avg_distance"] = c.avg_distance;
    jc["max_group_average"] = c.max_group_average;
    jc["objective"] = c.objective;
    j["facility_sweep"].push_back(std::move(jc));
  }
  j["seeds"] = report.seeds_used;
  return j.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("report: invalid JSON: ") + e.what());
  }
  ExperimentReport r;
  for (const auto& g : j.at("groups")) r.groups.push_back(g.get<std::string>());
  for (const auto& jc : j.at("cells")) {
    MethodCell c;
    c.method = jc.at("method").get<std::string>();
    c.group = jc.at("group").get<std::string>();
    c.avg_cost = jc.at("avg_cost").get<double>();
    c.pct_vs_standard = jc.at("pct_vs_standard").get<double>();
    c.pct_vs_group_opt = jc.at("pct_vs_group_opt").get<double>();
    c.seed_count = jc.at("seed_count").get<int>();
    r.cells.push_back(std::move(c));
  }
  for (const auto& jc : j.at("facility_sweep")) {
    SweepCell c;
    c.opening_cost = jc.at("opening_cost").get<double>();
    c.fairness = jc.at("fairness").get<std::string>();
    c.group = jc.at("group").get<std::string>();
    c.avg_distance = jc.at("avg_distance").get<double>();
    c.max_group_average = jc.at("max_group_average").get<double>();
    c.objective = jc.at("objective").get<double>();
    r.sweep.push_back(std::move(c));
  }
  for (const auto& s : j.at("seeds")) r.seeds_used.push_back(s.get<std::uint64_t>());
  return r;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::string out = "method,group,avg_cost,pct_vs_standard,pct_vs_group_opt,seed_count\n";
  char buf[256];
  for (const MethodCell& c : report.cells) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g,%d\n", c.method.c_str(),
                  c.group.c_str(), c.avg_cost, c.pct_vs_standard, c.pct_vs_group_opt,
                  c.seed_count);
    out += buf;
  }
  return out;
}

void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path,
                 bool force) {
  if (!force && std::filesystem::exists(path))
    throw ValidationError("emit_report: " + path + " exists; pass --force to overwrite");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("emit_report: cannot write " + path);
  out << (format == ReportFormat::Json ? report_to_json(report) : report_to_csv(report));
  if (!out) throw ValidationError("emit_report: write to " + path + " failed");
}

}  // namespace fairclust
