#ifndef FAIRCLUST_ROUNDING_HPP
#define FAIRCLUST_ROUNDING_HPP

#include <utility>
#include <vector>

#include "fairclust/instance.hpp"
#include "fairclust/models.hpp"

namespace fairclust {

/// Chosen centers plus an explicit point -> center assignment. For k-median
/// style solutions `centers` holds dataset point indices and the assignment
/// is nearest-open; for facility solutions they are location indices and
/// capacitated assignments need not be nearest.
struct IntegralSolution {
  std::vector<int> centers;
  std::vector<int> assignment;
  double opening_cost = 0.0;
};

/// Well-separated subset chosen by scanning points in increasing fractional
/// connection cost R_u and removing everything within removal_factor * R_v
/// of each pick. Surviving members satisfy
/// d(u, v) >= removal_factor * max(R_u, R_v).
struct FilteredSet {
  std::vector<int> members;      // in selection order
  std::vector<double> radii;     // R_u for every point
  std::vector<int> removal_map;  // point -> member that removed it
};

/// Fractional connection cost per point, sum_c d(u, candidate_c) * z_uc.
std::vector<double> compute_radii(const FractionalClustering& frac, const MetricCache& metric);
std::vector<double> compute_radii(const FractionalClustering& frac,
                                  const FacilityInstance& instance);

FilteredSet filter_points(const std::vector<double>& radii, const MetricCache& point_metric,
                          double removal_factor);
FilteredSet filter_points(const FractionalClustering& frac, const MetricCache& metric,
                          double removal_factor);

/// Opens every filtered point (factor 2/epsilon) and assigns nearest-open.
/// Opens at most ceil(k/(1-epsilon)) centers and every point lands within
/// (2/epsilon) * R_u of one.
IntegralSolution round_bicriteria(const FractionalClustering& frac, const MetricCache& metric,
                                  double epsilon);

/// Fractionally open facilities attributed exclusively to one filtered
/// anchor; raw_mass is the uncapped y sum, volume caps it at 1.
struct Bundle {
  int anchor = -1;                // filtered point (dataset index)
  std::vector<int> facilities;    // candidate positions
  std::vector<double> mass;       // y per facility
  double raw_mass = 0.0;
  double volume = 0.0;
};

/// Deterministic part of dependent rounding: filter with factor 4, bundle,
/// then greedily match the two closest unmatched filtered points.
struct DependentPlan {
  FilteredSet filtered;
  std::vector<Bundle> bundles;            // parallel to filtered.members
  std::vector<std::pair<int, int>> pairs; // indices into bundles
  int leftover = -1;                      // unmatched bundle, -1 if none
};

DependentPlan make_dependent_plan(const FractionalClustering& frac, const MetricCache& metric);

/// One randomized draw over a plan. For a matched pair with volumes
/// (g1, g2): both open with probability g1+g2-1, only the first with 1-g2,
/// only the second with 1-g1, so each pair opens at least one bundle and
/// marginals equal the volumes. Within a bundle facility c is picked with
/// probability y_c / raw_mass. Returns opened candidate positions.
std::vector<int> sample_dependent(const DependentPlan& plan, Rng& rng);

/// Full dependent rounding. Without repair the draw opens k centers only in
/// expectation; with repair it tops up with the highest-y unopened
/// facilities or closes the opened ones whose removal costs least until
/// exactly k remain.
IntegralSolution round_dependent(const FractionalClustering& frac, const MetricCache& metric,
                                 int k, std::uint64_t seed, bool repair = false);

/// Deterministic facility rounding: scan surviving clients by increasing
/// R_u, each opens the cheapest location with positive assignment inside
/// B(u, R_u/theta). With theta = 3/4 every client ends within 4 R_u of an
/// open location and the opening cost is at most 4x the fractional one.
IntegralSolution round_facility_faithful(const FractionalClustering& frac,
                                         const FacilityInstance& instance, double theta = 0.75);

struct FflIteration {
  int client = -1;
  std::vector<int> ball;    // fractionally open facilities considered
  int opened_count = 0;     // r
  std::vector<int> opened;  // O
};

/// Step-by-step observability for ffl_round; replays to the same output.
struct RoundingTrace {
  std::vector<int> promoted;                      // facilities promoted to open
  std::vector<int> initial_c_delta;
  std::vector<FflIteration> iterations;
  std::vector<std::vector<int>> c_delta_history;  // after each iteration
  std::vector<double> beta;                       // per-client rescale mass
  std::vector<double> final_loads;                // fractional load per location
  std::vector<int> opened;                        // final open set
};

/// Capacitated facility rounding: filtering with theta, promote y' >= 1/2,
/// open batches of cheapest facilities around under-covered clients until
/// every client has (1-delta) of its mass on open facilities, rescale, then
/// integral assignment by transportation with per-facility cap
/// ceil((1+3*theta) * U).
std::pair<IntegralSolution, RoundingTrace> ffl_round(const FractionalClustering& frac,
                                                     const FacilityInstance& instance,
                                                     double theta, double delta);

/// Minimum-total-distance integral assignment with at most `cap` clients
/// per opened location, by successive shortest paths with potentials.
std::vector<int> transportation_assign(const std::vector<int>& opened, int cap,
                                       const FacilityInstance& instance);

}  // namespace fairclust

#endif  // FAIRCLUST_ROUNDING_HPP
