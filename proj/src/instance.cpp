#include "fairclust/instance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace fairclust {

Dataset build_dataset(std::vector<Vector> points, std::vector<std::string> labels) {
  if (points.empty()) throw ValidationError("build_dataset: empty point list");
  if (labels.empty()) throw ValidationError("build_dataset: empty label list");
  if (points.size() != labels.size())
    throw ValidationError("build_dataset: " + std::to_string(points.size()) + " points but " +
                          std::to_string(labels.size()) + " labels");
  const std::size_t d = points[0].size();
  if (d == 0) throw ValidationError("build_dataset: point 0 has dimension 0");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d)
      throw ValidationError("build_dataset: point " + std::to_string(i) + " has dimension " +
                            std::to_string(points[i].size()) + ", expected " + std::to_string(d));
    for (std::size_t c = 0; c < d; ++c)
      if (!std::isfinite(points[i][c]))
        throw ValidationError("build_dataset: point " + std::to_string(i) + " coordinate " +
                              std::to_string(c) + " is not finite");
  }

  Dataset ds;
  ds.points = std::move(points);
  ds.labels = std::move(labels);
  ds.group_of.resize(ds.points.size());
  std::unordered_map<std::string, int> ids;
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    auto it = ids.find(ds.labels[i]);
    int g;
    if (it == ids.end()) {
      g = static_cast<int>(ds.group_names.size());
      ids.emplace(ds.labels[i], g);
      ds.group_names.push_back(ds.labels[i]);
      ds.group_index.emplace_back();
    } else {
      g = it->second;
    }
    ds.group_of[i] = g;
    ds.group_index[g].push_back(static_cast<int>(i));
  }
  return ds;
}

double point_distance(const Vector& a, const Vector& b, MetricMode mode) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    double t = a[c] - b[c];
    s += t * t;
  }
  return mode == MetricMode::Euclidean ? std::sqrt(s) : s;
}

MetricCache build_metric(const Dataset& dataset, MetricMode mode) {
  MetricCache m;
  m.mode = mode;
  m.n = dataset.n();
  m.data.assign(static_cast<std::size_t>(m.n) * m.n, 0.0);
  for (int i = 0; i < m.n; ++i)
    for (int j = i + 1; j < m.n; ++j) {
      double d = point_distance(dataset.points[i], dataset.points[j], mode);
      m.data[static_cast<std::size_t>(i) * m.n + j] = d;
      m.data[static_cast<std::size_t>(j) * m.n + i] = d;
    }
  return m;
}

MetricCache metric_from_matrix(std::vector<double> matrix, int n, MetricMode mode) {
  if (n < 1 || matrix.size() != static_cast<std::size_t>(n) * n)
    throw ValidationError("metric_from_matrix: matrix size does not match n");
  for (int i = 0; i < n; ++i) {
    if (matrix[static_cast<std::size_t>(i) * n + i] != 0.0)
      throw ValidationError("metric_from_matrix: nonzero diagonal at " + std::to_string(i));
    for (int j = 0; j < n; ++j) {
      double v = matrix[static_cast<std::size_t>(i) * n + j];
      if (!std::isfinite(v) || v < 0.0)
        throw ValidationError("metric_from_matrix: bad entry at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
      if (std::abs(v - matrix[static_cast<std::size_t>(j) * n + i]) > 1e-12)
        throw ValidationError("metric_from_matrix: asymmetric at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
    }
  }
  if (mode == MetricMode::Euclidean) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          double lhs = matrix[static_cast<std::size_t>(i) * n + l];
          double rhs = matrix[static_cast<std::size_t>(i) * n + j] +
                       matrix[static_cast<std::size_t>(j) * n + l];
          if (lhs > rhs + 1e-9)
            throw ValidationError("metric_from_matrix: triangle inequality violated on (" +
                                  std::to_string(i) + "," + std::to_string(j) + "," +
                                  std::to_string(l) + ")");
        }
  }
  MetricCache m;
  m.mode = mode;
  m.n = n;
  m.data = std::move(matrix);
  return m;
}

FacilityInstance make_facility_instance(Dataset clients, std::vector<Vector> locations,
                                        std::vector<double> opening_costs,
                                        std::optional<int> capacity, MetricMode mode) {
  if (locations.empty()) throw ValidationError("facility instance: no locations");
  if (opening_costs.size() != locations.size())
    throw ValidationError("facility instance: " + std::to_string(opening_costs.size()) +
                          " opening costs for " + std::to_string(locations.size()) + " locations");
  for (std::size_t i = 0; i < opening_costs.size(); ++i)
    if (!std::isfinite(opening_costs[i]) || opening_costs[i] < 0.0)
      throw ValidationError("facility instance: bad opening cost at location " + std::to_string(i));
  for (std::size_t i = 0; i < locations.size(); ++i)
    if (locations[i].size() != static_cast<std::size_t>(clients.dim()))
      throw ValidationError("facility instance: location " + std::to_string(i) +
                            " dimension mismatch");
  if (capacity) {
    if (*capacity < 1) throw ValidationError("facility instance: capacity must be positive");
    if (static_cast<long long>(*capacity) * static_cast<long long>(locations.size()) <
        clients.n())
      throw ValidationError("facility instance: capacity * |locations| < |clients|, no feasible assignment");
  }

  FacilityInstance fi;
  fi.client_metric = build_metric(clients, mode);
  fi.cross.resize(static_cast<std::size_t>(clients.n()) * locations.size());
  for (int u = 0; u < clients.n(); ++u)
    for (std::size_t l = 0; l < locations.size(); ++l)
      fi.cross[static_cast<std::size_t>(u) * locations.size() + l] =
          point_distance(clients.points[u], locations[l], mode);
  fi.clients = std::move(clients);
  fi.locations = std::move(locations);
  fi.opening_costs = std::move(opening_costs);
  fi.capacity = capacity;
  return fi;
}

Dataset gen_synthetic(std::uint64_t seed, int majority_size, int minority_size,
                      double majority_mean, double minority_mean, double stddev) {
  if (majority_size < 1 || minority_size < 1)
    throw ValidationError("gen_synthetic: group sizes must be positive");
  if (stddev <= 0.0) throw ValidationError("gen_synthetic: stddev must be positive");
  Rng rng(seed);
  std::vector<Vector> points;
  std::vector<std::string> labels;
  points.reserve(majority_size + minority_size);
  labels.reserve(majority_size + minority_size);
  for (int i = 0; i < majority_size; ++i) {
    points.push_back({rng.normal(majority_mean, stddev), rng.normal(majority_mean, stddev)});
    labels.emplace_back("majority");
  }
  for (int i = 0; i < minority_size; ++i) {
    points.push_back({rng.normal(minority_mean, stddev), rng.normal(minority_mean, stddev)});
    labels.emplace_back("minority");
  }
  return build_dataset(std::move(points), std::move(labels));
}

std::vector<Vector> propose_locations(const Dataset& dataset, int t, std::uint64_t seed) {
  const int n = dataset.n();
  if (t < 1 || t > n)
    throw ValidationError("propose_locations: t = " + std::to_string(t) + " out of range 1.." +
                          std::to_string(n));
  std::vector<int> chosen;
  std::vector<bool> taken(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  int start = static_cast<int>(seed % static_cast<std::uint64_t>(n));
  chosen.push_back(start);
  taken[start] = true;
  while (static_cast<int>(chosen.size()) < t) {
    int last = chosen.back();
    int best = -1;
    double best_d = -1.0;
    for (int i = 0; i < n; ++i) {
      double d = point_distance(dataset.points[i], dataset.points[last], MetricMode::Euclidean);
      if (d < nearest[i]) nearest[i] = d;
      if (!taken[i] && nearest[i] > best_d) {
        best_d = nearest[i];
        best = i;
      }
    }
    chosen.push_back(best);
    taken[best] = true;
  }
  std::vector<Vector> out;
  out.reserve(chosen.size());
  for (int i : chosen) out.push_back(dataset.points[i]);
  return out;
}

MetricInstance uniform_metric_instance(int m, double distance) {
  if (m < 2) throw ValidationError("uniform_metric_instance: need at least 2 points");
  std::vector<Vector> pts;
  std::vector<std::string> labels;
  for (int i = 0; i < m; ++i) {
    pts.push_back({static_cast<double>(i)});
    labels.push_back("g" + std::to_string(i));
  }
  std::vector<double> mat(static_cast<std::size_t>(m) * m, distance);
  for (int i = 0; i < m; ++i) mat[static_cast<std::size_t>(i) * m + i] = 0.0;
  MetricInstance mi;
  mi.dataset = build_dataset(std::move(pts), std::move(labels));
  mi.metric = metric_from_matrix(std::move(mat), m, MetricMode::Euclidean);
  return mi;
}

MetricInstance crossed_blocks_instance(int t, double d, double eps, double far) {
  if (t < 2) throw ValidationError("crossed_blocks_instance: t must be >= 2");
  // Index layout: 0 = a1, 1..t = A cluster, t+1 = b1, t+2..2t+1 = B cluster.
  const int n = 2 * t + 2;
  const double within = t * eps / (t - 1);
  std::vector<double> mat(static_cast<std::size_t>(n) * n, far);
  auto at = [&](int i, int j) -> double& { return mat[static_cast<std::size_t>(i) * n + j]; };
  for (int i = 0; i < n; ++i) at(i, i) = 0.0;
  auto fill_block = [&](int iso, int first, int last) {
    for (int i = first; i <= last; ++i) {
      at(iso, i) = at(i, iso) = d;
      for (int j = i + 1; j <= last; ++j) at(i, j) = at(j, i) = within;
    }
  };
  fill_block(0, 1, t);
  fill_block(t + 1, t + 2, 2 * t + 1);

  std::vector<Vector> pts;
  std::vector<std::string> labels(n);
  for (int i = 0; i < n; ++i) pts.push_back({static_cast<double>(i)});
  labels[0] = "one";
  for (int i = t + 2; i <= 2 * t + 1; ++i) labels[i] = "one";
  labels[t + 1] = "two";
  for (int i = 1; i <= t; ++i) labels[i] = "two";

  MetricInstance mi;
  mi.dataset = build_dataset(std::move(pts), std::move(labels));
  mi.metric = metric_from_matrix(std::move(mat), n, MetricMode::Euclidean);
  return mi;
}

}  // namespace fairclust
