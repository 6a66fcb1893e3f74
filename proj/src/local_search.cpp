#include "fairclust/local_search.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace fairclust {

namespace {

double objective_of(const Dataset& ds, const MetricCache& metric, const std::vector<int>& centers,
                    CostKind kind, const RelErrorCertificate* cert, std::vector<double>& gtot) {
  std::fill(gtot.begin(), gtot.end(), 0.0);
  for (int u = 0; u < ds.n(); ++u) {
    double best = kInfinity;
    for (int c : centers) best = std::min(best, metric(u, c));
    gtot[ds.group_of[u]] += best;
  }
  double v = 0.0;
  for (int g = 0; g < ds.num_groups(); ++g) {
    double c = kind == CostKind::Abs ? gtot[g] / ds.group_size(g) : gtot[g] / cert->values[g];
    v = std::max(v, c);
  }
  return v;
}

}  // namespace

double ls_objective(const Dataset& dataset, const MetricCache& metric,
                    const std::vector<int>& centers, CostKind cost_kind,
                    const RelErrorCertificate* certificate) {
  if (cost_kind == CostKind::Rel && !certificate)
    throw ValidationError("ls_objective: rel mode requires a certificate");
  std::vector<double> gtot(dataset.num_groups());
  return objective_of(dataset, metric, centers, cost_kind, certificate, gtot);
}

IntegralSolution ls_fair(const Dataset& dataset, const MetricCache& metric, int k,
                         CostKind cost_kind, const RelErrorCertificate* certificate,
                         std::uint64_t seed, const std::vector<int>* start) {
  const int n = dataset.n();
  if (k < 1 || k > n) throw ValidationError("ls_fair: k out of range");
  if (cost_kind == CostKind::Rel && !certificate)
    throw ValidationError("ls_fair: rel mode requires a certificate");

  std::vector<int> centers;
  if (start) {
    centers = *start;
    if (static_cast<int>(centers.size()) != k)
      throw ValidationError("ls_fair: start set size differs from k");
    for (int c : centers)
      if (c < 0 || c >= n) throw ValidationError("ls_fair: start center out of range");
  } else {
    // Seeded k-subset via partial Fisher-Yates.
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    Rng rng(seed);
    for (int i = 0; i < k; ++i) std::swap(perm[i], perm[i + rng.uniform_int(n - i)]);
    centers.assign(perm.begin(), perm.begin() + k);
  }
  std::sort(centers.begin(), centers.end());

  std::vector<bool> is_center(n, false);
  for (int c : centers) is_center[c] = true;
  std::vector<double> gtot(dataset.num_groups());
  double current = objective_of(dataset, metric, centers, cost_kind, certificate, gtot);

  constexpr long kSwapCap = 100000;
  long swaps = 0;
  bool improved = true;
  while (improved && swaps < kSwapCap) {
    improved = false;
    for (std::size_t out = 0; out < centers.size() && !improved; ++out) {
      int removed = centers[out];
      for (int in = 0; in < n && !improved; ++in) {
        if (is_center[in]) continue;
        centers[out] = in;
        double cand = objective_of(dataset, metric, centers, cost_kind, certificate, gtot);
        if (cand < current - 1e-9) {
          current = cand;
          is_center[removed] = false;
          is_center[in] = true;
          ++swaps;
          improved = true;
        } else {
          centers[out] = removed;
        }
      }
    }
  }
  if (swaps >= kSwapCap)
    std::cerr << "ls_fair: swap cap of " << kSwapCap << " reached before local optimality\n";

  std::sort(centers.begin(), centers.end());
  IntegralSolution sol;
  sol.centers = centers;
  sol.assignment.resize(n);
  for (int u = 0; u < n; ++u) {
    double best = kInfinity;
    int arg = -1;
    for (int c : centers)
      if (metric(u, c) < best) {
        best = metric(u, c);
        arg = c;
      }
    sol.assignment[u] = arg;
  }
  return sol;
}

}  // namespace fairclust
