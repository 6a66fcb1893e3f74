#ifndef FAIRCLUST_EXPERIMENT_HPP
#define FAIRCLUST_EXPERIMENT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairclust/evaluation.hpp"
#include "fairclust/local_search.hpp"

namespace fairclust {

inline const std::vector<std::string> kKMedianMethods = {
    "standard", "weighted", "ls-fair", "lp-fair-bicriteria", "lp-fair-dependent"};

struct SyntheticSpec {
  std::uint64_t seed = 0;
  int majority_size = 250;
  int minority_size = 50;
  double majority_mean = 0.0;
  double minority_mean = 3.0;
  double stddev = 0.5;
};

struct ExperimentConfig {
  // Dataset source: a CSV path with column selections, or a synthetic spec.
  std::string csv_path;
  std::string group_column;
  std::vector<std::string> feature_columns;
  std::optional<SyntheticSpec> synthetic;

  int k = 3;
  CostKind cost_kind = CostKind::Abs;
  std::vector<std::string> methods;
  double epsilon = 0.5;
  double theta = 0.1;
  double delta = 0.1;

  std::map<std::string, int> subsample;  // group label -> size; empty keeps all
  int repetitions = 1;
  std::uint64_t base_seed = 0;

  std::vector<double> opening_cost_grid;  // non-empty enables the facility sweep
  std::optional<int> capacity;
  int sweep_locations = 20;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

struct MethodCell {
  std::string method;
  std::string group;
  double avg_cost = 0.0;
  double pct_vs_standard = 0.0;
  double pct_vs_group_opt = 0.0;
  int seed_count = 0;
};

struct SweepCell {
  double opening_cost = 0.0;
  std::string fairness;  // "per-group" or "aggregate"
  std::string group;
  double avg_distance = 0.0;
  double max_group_average = 0.0;
  double objective = 0.0;
};

struct ExperimentReport {
  std::vector<std::string> groups;
  std::vector<MethodCell> cells;  // includes group-optimal and standard baselines
  std::vector<SweepCell> sweep;
  std::vector<std::uint64_t> seeds_used;
  std::vector<double> cell_wall_ms;  // diagnostics only, never emitted
};

/// Runs the sampled-repetition protocol: per repetition, subsample each
/// group without replacement, run every configured method, and average the
/// per-group costs; percentages are recomputed from the stored averages.
/// Fully deterministic from (inputs, base seed).
ExperimentReport run_experiment(const ExperimentConfig& config);

/// One k-median pipeline by name: standard / weighted (LP + dependent
/// rounding, best of 5 seeded draws), lp-fair-bicriteria, lp-fair-dependent,
/// ls-fair.
IntegralSolution run_kmedian_method(const std::string& method, const Dataset& dataset,
                                    const MetricCache& metric, int k, CostKind cost_kind,
                                    const RelErrorCertificate* certificate, double epsilon,
                                    std::uint64_t seed);

std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& json_text);
std::string report_to_csv(const ExperimentReport& report);

enum class ReportFormat { Json, Csv };

/// Writes the report; refuses to overwrite an existing file unless `force`.
void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path,
                 bool force);

}  // namespace fairclust

#endif  // FAIRCLUST_EXPERIMENT_HPP
