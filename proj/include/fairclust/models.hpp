#ifndef FAIRCLUST_MODELS_HPP
#define FAIRCLUST_MODELS_HPP

#include <optional>
#include <string>
#include <vector>

#include "fairclust/instance.hpp"
#include "fairclust/lp.hpp"

namespace fairclust {

/// Per-group clustering costs used as RelError denominators. Construction
/// rejects non-positive values: a zero group optimum makes the ratio
/// objective undefined, and substituting an epsilon silently would corrupt
/// its meaning.
struct RelErrorCertificate {
  std::vector<double> values;        // one per group, > 0
  std::vector<std::string> methods;  // how each value was computed
};

RelErrorCertificate make_certificate(std::vector<double> values, std::vector<std::string> methods);

enum class KMedianVariant { Standard, Weighted, FairAbs, FairRel };

/// Variable layout of an assignment LP, needed to reshape a flat solution
/// vector back into (z, y, lambda).
struct ModelShape {
  int n = 0;
  std::vector<int> candidate_ids;
  int z_offset = 0;
  int y_offset = 0;
  int lambda_index = -1;  // -1 when the variant has no lambda variable

  int num_candidates() const { return static_cast<int>(candidate_ids.size()); }
};

struct AssignmentModel {
  LinearProgram lp;
  ModelShape shape;
};

/// Shared constraint block: sum_c z_uc = 1, z_uc <= y_c, sum_c y_c <= k,
/// all variables in [0,1]. The variant decides objective and group rows:
///   Standard  minimize total connection cost,
///   Weighted  minimize sum_i cost(X_i)/|X_i|,
///   FairAbs   minimize lambda with per-group average cost <= lambda,
///   FairRel   minimize lambda with per-group total cost <= lambda * cert_i.
/// Candidates default to every dataset point.
AssignmentModel build_kmedian_lp(KMedianVariant variant, const Dataset& dataset,
                                 const MetricCache& metric, int k,
                                 const RelErrorCertificate* certificate = nullptr,
                                 const std::vector<int>* candidates = nullptr);

enum class FacilityFairness { PerGroup, Aggregate };

/// Facility LP: minimize lambda + (1/|X|) sum_v f_v y_v with per-group
/// average connection cost <= lambda (one row total in aggregate mode) and
/// no cap on the number of open facilities. The capacitated variant adds
/// sum_u z_uv <= U y_v per location.
AssignmentModel build_facility_lp(const FacilityInstance& instance, FacilityFairness fairness,
                                  bool capacitated);

/// LP solution reshaped over (z, y, lambda) with sub-1e-12 negative noise
/// clipped to zero.
struct FractionalClustering {
  int n = 0;
  std::vector<int> candidate_ids;
  std::vector<double> z;  // row-major n x num_candidates
  std::vector<double> y;
  double lambda = 0.0;
  bool integral = false;

  int num_candidates() const { return static_cast<int>(candidate_ids.size()); }
  double z_at(int u, int c) const {
    return z[static_cast<std::size_t>(u) * candidate_ids.size() + c];
  }
};

FractionalClustering extract_fractional(const LpSolution& solution, const ModelShape& shape);

/// Cost of an integral k-median solution for one group clustered alone:
/// standard LP on the group followed by dependent rounding, best of 5
/// seeded draws. Always at least the group's LP optimum. Zero when the
/// group has at most k points.
double group_kmedian_approx(const Dataset& dataset, const MetricCache& metric, int group, int k,
                            std::uint64_t seed);

/// group_kmedian_approx for every group, packaged as a certificate.
RelErrorCertificate compute_certificate(const Dataset& dataset, const MetricCache& metric, int k,
                                        std::uint64_t seed);

/// Convenience: build, solve and extract in one step.
FractionalClustering solve_kmedian(KMedianVariant variant, const Dataset& dataset,
                                   const MetricCache& metric, int k,
                                   const RelErrorCertificate* certificate = nullptr,
                                   const std::vector<int>* candidates = nullptr);

struct FacilitySolve {
  FractionalClustering frac;
  double lp_objective = 0.0;
  double fractional_opening = 0.0;  // sum_v f_v y_v
};

FacilitySolve solve_facility(const FacilityInstance& instance, FacilityFairness fairness,
                             bool capacitated);

}  // namespace fairclust

#endif  // FAIRCLUST_MODELS_HPP
