#ifndef FAIRCLUST_INSTANCE_HPP
#define FAIRCLUST_INSTANCE_HPP

#include <optional>
#include <string>
#include <vector>

#include "fairclust/common.hpp"

namespace fairclust {

using Vector = std::vector<double>;

/// A set of points with one group label per point. Immutable after
/// construction; group ids are assigned in first-appearance order of the
/// labels so reports are deterministic.
struct Dataset {
  std::vector<Vector> points;
  std::vector<std::string> labels;
  std::vector<std::string> group_names;         // group id -> label
  std::vector<int> group_of;                    // point -> group id
  std::vector<std::vector<int>> group_index;    // group id -> point indices

  int n() const { return static_cast<int>(points.size()); }
  int dim() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }
  int num_groups() const { return static_cast<int>(group_names.size()); }
  int group_size(int g) const { return static_cast<int>(group_index[g].size()); }
};

/// Validates and indexes a dataset. Errors name the offending point index.
Dataset build_dataset(std::vector<Vector> points, std::vector<std::string> labels);

enum class MetricMode { Euclidean, SquaredEuclidean };

/// Dense pairwise distance matrix. In squared mode the triangle inequality
/// does not hold and is never asserted.
struct MetricCache {
  MetricMode mode = MetricMode::Euclidean;
  int n = 0;
  std::vector<double> data;  // row-major n*n

  double operator()(int a, int b) const { return data[static_cast<std::size_t>(a) * n + b]; }
};

MetricCache build_metric(const Dataset& dataset, MetricMode mode);

/// Builds a MetricCache from an explicit matrix; used for hand-crafted
/// metrics that are awkward to embed. Validates symmetry, zero diagonal and
/// non-negativity, and (in euclidean mode) the triangle inequality with
/// 1e-9 slack.
MetricCache metric_from_matrix(std::vector<double> matrix, int n, MetricMode mode);

double point_distance(const Vector& a, const Vector& b, MetricMode mode);

/// Clients plus candidate facility locations. Distances are cached at
/// construction: client-to-client (for filtering) and client-to-location.
struct FacilityInstance {
  Dataset clients;
  std::vector<Vector> locations;
  std::vector<double> opening_costs;
  std::optional<int> capacity;

  MetricCache client_metric;
  std::vector<double> cross;  // row-major n x |locations|

  int num_locations() const { return static_cast<int>(locations.size()); }
  double dist(int client, int location) const {
    return cross[static_cast<std::size_t>(client) * locations.size() + location];
  }
};

FacilityInstance make_facility_instance(Dataset clients, std::vector<Vector> locations,
                                        std::vector<double> opening_costs,
                                        std::optional<int> capacity = std::nullopt,
                                        MetricMode mode = MetricMode::Euclidean);

/// Two-feature dataset with a large group drawn around `majority_mean` and a
/// small one around `minority_mean`, both with the same per-coordinate
/// stddev. Defaults: 250/50 points, means 0/3, stddev 0.5. Pure function of
/// its arguments.
Dataset gen_synthetic(std::uint64_t seed, int majority_size = 250, int minority_size = 50,
                      double majority_mean = 0.0, double minority_mean = 3.0,
                      double stddev = 0.5);

/// Picks t candidate locations by greedy farthest-first traversal, starting
/// from point (seed mod n). Ties broken by lowest index.
std::vector<Vector> propose_locations(const Dataset& dataset, int t, std::uint64_t seed);

struct MetricInstance {
  Dataset dataset;
  MetricCache metric;
};

/// m singleton groups, every pairwise distance equal to D. The fractional
/// optimum of the min-max assignment LP on this instance is D/m with
/// k = m-1, while any integral solution pays D.
MetricInstance uniform_metric_instance(int m, double distance);

/// Two blocks separated by a huge distance M. Each block holds one isolated
/// point at distance d from a cluster of t points; within-cluster distances
/// are t*eps/(t-1) so a cluster's best 1-median cost is exactly t*eps. The
/// two groups each take the isolated point of one block and the cluster of
/// the other, which makes {a1, b1} (the isolated points) a single-swap local
/// optimum of cost t*d per group while the global optimum costs t*eps + d.
MetricInstance crossed_blocks_instance(int t = 10, double d = 1.0, double eps = 0.01,
                                       double far = 1e6);

}  // namespace fairclust

#endif  // FAIRCLUST_INSTANCE_HPP
