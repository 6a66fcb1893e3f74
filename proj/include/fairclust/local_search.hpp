#ifndef FAIRCLUST_LOCAL_SEARCH_HPP
#define FAIRCLUST_LOCAL_SEARCH_HPP

#include "fairclust/evaluation.hpp"

namespace fairclust {

/// Single-swap local search on the min-max group objective: abs mode uses
/// per-group average connection cost, rel mode the ratio to the certificate.
/// Starts from a seeded random k-subset unless `start` is given, applies the
/// first improving swap found (centers scanned by index, replacements by
/// index) and stops at a 1-swap local optimum. Improvements below 1e-9 are
/// ignored to avoid float cycling; a hard cap of 1e5 swaps guards runaway
/// instances.
IntegralSolution ls_fair(const Dataset& dataset, const MetricCache& metric, int k,
                         CostKind cost_kind, const RelErrorCertificate* certificate,
                         std::uint64_t seed, const std::vector<int>* start = nullptr);

/// The objective ls_fair minimizes, for external certification of local
/// optimality.
double ls_objective(const Dataset& dataset, const MetricCache& metric,
                    const std::vector<int>& centers, CostKind cost_kind,
                    const RelErrorCertificate* certificate);

}  // namespace fairclust

#endif  // FAIRCLUST_LOCAL_SEARCH_HPP
