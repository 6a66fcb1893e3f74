#ifndef FAIRCLUST_EVALUATION_HPP
#define FAIRCLUST_EVALUATION_HPP

#include <functional>
#include <string>
#include <vector>

#include "fairclust/instance.hpp"
#include "fairclust/models.hpp"
#include "fairclust/rounding.hpp"

namespace fairclust {

enum class CostKind { Abs, Rel };

struct GroupCost {
  std::string name;
  int size = 0;
  double total = 0.0;
  double average = 0.0;
  double relative = 0.0;  // total / certificate value; only set in rel mode
};

struct GroupReport {
  CostKind kind = CostKind::Abs;
  std::vector<GroupCost> groups;
  double max_average = 0.0;
};

/// Per-group connection costs of a solution, priced through its assignment.
GroupReport group_costs(const Dataset& dataset, const MetricCache& metric,
                        const IntegralSolution& solution, CostKind kind,
                        const RelErrorCertificate* certificate = nullptr);

/// Largest per-group average (abs) or cost ratio (rel).
double fair_objective(const GroupReport& report);

/// Connection part of a facility report plus the opening cost share every
/// client pays.
struct FacilityReport {
  GroupReport connection;
  double opening_cost = 0.0;
  double opening_share = 0.0;  // opening_cost / |clients|
};

FacilityReport facility_report(const FacilityInstance& instance,
                               const IntegralSolution& solution);

/// max over groups of (average connection) plus the shared opening term.
double facility_objective(const FacilityInstance& instance, const IntegralSolution& solution);

struct FairOptResult {
  double value = 0.0;
  std::vector<int> centers;
};

/// Exhaustive min-max optimum over all k-subsets of candidate centers.
/// Guarded at C(n, k) <= 1e6 and never approximate; ties resolved to the
/// lexicographically smallest witness.
FairOptResult brute_force_fair_opt(const Dataset& dataset, const MetricCache& metric, int k,
                                   CostKind kind,
                                   const RelErrorCertificate* certificate = nullptr,
                                   const std::vector<int>* candidates = nullptr);

struct FacilityOptResult {
  double value = 0.0;
  std::vector<int> open;
};

/// Exhaustive optimum over all non-empty open sets (guarded at 2^|L| <= 1e5).
/// Uncapacitated assignments are nearest-open; capacitated ones use
/// transportation_assign at cap U.
FacilityOptResult brute_force_facility_opt(const FacilityInstance& instance);

using Rounder = std::function<IntegralSolution(std::uint64_t seed)>;

struct ProbeReport {
  std::vector<double> point_mean;   // mean d(u, centers) over draws
  std::vector<double> point_se;
  std::vector<double> group_mean;   // mean per-group average cost
  std::vector<double> group_se;
  double center_count_mean = 0.0;
  double center_count_se = 0.0;
  int draws = 0;
};

/// Runs a randomized rounder under `draws` derived seeds and reports
/// per-point and per-group mean connection costs with standard errors.
ProbeReport faithfulness_probe(const Dataset& dataset, const MetricCache& metric,
                               const Rounder& rounder, int draws, std::uint64_t seed);

}  // namespace fairclust

#endif  // FAIRCLUST_EVALUATION_HPP
