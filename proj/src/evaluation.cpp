#include "fairclust/evaluation.hpp"

#include <algorithm>
#include <cmath>

namespace fairclust {

namespace {

// C(n, k) with saturation, for the enumeration guards.
double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > 1e15) return 1e15;
  }
  return r;
}

GroupReport report_from_totals(const Dataset& dataset, const std::vector<double>& totals,
                               CostKind kind, const RelErrorCertificate* certificate) {
  GroupReport rep;
  rep.kind = kind;
  rep.max_average = 0.0;
  for (int g = 0; g < dataset.num_groups(); ++g) {
    GroupCost gc;
    gc.name = dataset.group_names[g];
    gc.size = dataset.group_size(g);
    gc.total = totals[g];
    gc.average = totals[g] / gc.size;
    if (kind == CostKind::Rel) gc.relative = totals[g] / certificate->values[g];
    rep.max_average = std::max(rep.max_average, gc.average);
    rep.groups.push_back(std::move(gc));
  }
  return rep;
}

}  // namespace

GroupReport group_costs(const Dataset& dataset, const MetricCache& metric,
                        const IntegralSolution& solution, CostKind kind,
                        const RelErrorCertificate* certificate) {
  if (kind == CostKind::Rel && !certificate)
    throw ValidationError("group_costs: rel mode requires a certificate");
  if (solution.assignment.size() != static_cast<std::size_t>(dataset.n()))
    throw ValidationError("group_costs: assignment does not cover all points");
  std::vector<double> totals(dataset.num_groups(), 0.0);
  for (int u = 0; u < dataset.n(); ++u)
    totals[dataset.group_of[u]] += metric(u, solution.assignment[u]);
  return report_from_totals(dataset, totals, kind, certificate);
}

double fair_objective(const GroupReport& report) {
  if (report.groups.empty()) throw ValidationError("fair_objective: empty report");
  double v = 0.0;
  for (const GroupCost& g : report.groups)
    v = std::max(v, report.kind == CostKind::Abs ? g.average : g.relative);
  return v;
}

FacilityReport facility_report(const FacilityInstance& instance,
                               const IntegralSolution& solution) {
  const Dataset& ds = instance.clients;
  if (solution.assignment.size() != static_cast<std::size_t>(ds.n()))
    throw ValidationError("facility_report: assignment does not cover all clients");
  std::vector<double> totals(ds.num_groups(), 0.0);
  for (int u = 0; u < ds.n(); ++u)
    totals[ds.group_of[u]] += instance.dist(u, solution.assignment[u]);
  FacilityReport rep;
  rep.connection = report_from_totals(ds, totals, CostKind::Abs, nullptr);
  for (int l : solution.centers) rep.opening_cost += instance.opening_costs[l];
  rep.opening_share = rep.opening_cost / ds.n();
  return rep;
}

double facility_objective(const FacilityInstance& instance, const IntegralSolution& solution) {
  FacilityReport rep = facility_report(instance, solution);
  return rep.connection.max_average + rep.opening_share;
}

FairOptResult brute_force_fair_opt(const Dataset& dataset, const MetricCache& metric, int k,
                                   CostKind kind, const RelErrorCertificate* certificate,
                                   const std::vector<int>* candidates) {
  const int n = dataset.n();
  std::vector<int> cand;
  if (candidates)
    cand = *candidates;
  else {
    cand.resize(n);
    for (int i = 0; i < n; ++i) cand[i] = i;
  }
  const int nc = static_cast<int>(cand.size());
  if (k < 1 || k > nc) throw ValidationError("brute_force_fair_opt: k out of range");
  if (kind == CostKind::Rel && !certificate)
    throw ValidationError("brute_force_fair_opt: rel mode requires a certificate");
  if (binomial(nc, k) > 1e6)
    throw ValidationError("brute_force_fair_opt: C(n,k) exceeds the enumeration guard");

  const int m = dataset.num_groups();
  std::vector<double> totals(m);
  std::vector<int> comb(k);
  for (int i = 0; i < k; ++i) comb[i] = i;
  FairOptResult best;
  best.value = kInfinity;

  auto eval = [&]() {
    std::fill(totals.begin(), totals.end(), 0.0);
    for (int u = 0; u < n; ++u) {
      double d = kInfinity;
      for (int ci : comb) d = std::min(d, metric(u, cand[ci]));
      totals[dataset.group_of[u]] += d;
    }
    double v = 0.0;
    for (int g = 0; g < m; ++g) {
      double c = kind == CostKind::Abs ? totals[g] / dataset.group_size(g)
                                       : totals[g] / certificate->values[g];
      v = std::max(v, c);
    }
    if (v < best.value - 1e-15) {
      best.value = v;
      best.centers.clear();
      for (int ci : comb) best.centers.push_back(cand[ci]);
    }
  };

  // Lexicographic combination scan; the first strict improvement wins, so
  // the witness is the lexicographically smallest optimizer.
  eval();
  while (true) {
    int i = k - 1;
    while (i >= 0 && comb[i] == nc - k + i) --i;
    if (i < 0) break;
    ++comb[i];
    for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
    eval();
  }
  return best;
}

FacilityOptResult brute_force_facility_opt(const FacilityInstance& instance) {
  const int nl = instance.num_locations();
  if (nl > 17 || (1 << nl) > 100000)
    throw ValidationError("brute_force_facility_opt: 2^|L| exceeds the enumeration guard");
  const Dataset& ds = instance.clients;
  const int n = ds.n();
  const int m = ds.num_groups();

  FacilityOptResult best;
  best.value = kInfinity;
  bool any_feasible = false;
  std::vector<double> totals(m);
  for (int mask = 1; mask < (1 << nl); ++mask) {
    std::vector<int> open;
    double opening = 0.0;
    for (int l = 0; l < nl; ++l)
      if (mask & (1 << l)) {
        open.push_back(l);
        opening += instance.opening_costs[l];
      }
    std::fill(totals.begin(), totals.end(), 0.0);
    if (instance.capacity) {
      if (static_cast<long long>(*instance.capacity) * static_cast<long long>(open.size()) < n)
        continue;
      std::vector<int> assign;
      try {
        assign = transportation_assign(open, *instance.capacity, instance);
      } catch (const ValidationError&) {
        continue;
      }
      for (int u = 0; u < n; ++u) totals[ds.group_of[u]] += instance.dist(u, assign[u]);
    } else {
      for (int u = 0; u < n; ++u) {
        double d = kInfinity;
        for (int l : open) d = std::min(d, instance.dist(u, l));
        totals[ds.group_of[u]] += d;
      }
    }
    any_feasible = true;
    double v = 0.0;
    for (int g = 0; g < m; ++g) v = std::max(v, totals[g] / ds.group_size(g));
    v += opening / n;
    if (v < best.value - 1e-15) {
      best.value = v;
      best.open = open;
    }
  }
  if (!any_feasible)
    throw ValidationError("brute_force_facility_opt: no capacity-feasible open set");
  return best;
}

ProbeReport faithfulness_probe(const Dataset& dataset, const MetricCache& metric,
                               const Rounder& rounder, int draws, std::uint64_t seed) {
  if (draws < 100) throw ValidationError("faithfulness_probe: need at least 100 draws");
  const int n = dataset.n();
  const int m = dataset.num_groups();
  std::vector<double> p_sum(n, 0.0), p_sq(n, 0.0);
  std::vector<double> g_sum(m, 0.0), g_sq(m, 0.0);
  double c_sum = 0.0, c_sq = 0.0;
  std::vector<double> gtot(m);

  for (int d = 0; d < draws; ++d) {
    IntegralSolution sol = rounder(derive_seed(seed, "draw" + std::to_string(d)));
    std::fill(gtot.begin(), gtot.end(), 0.0);
    for (int u = 0; u < n; ++u) {
      double du = metric(u, sol.assignment[u]);
      p_sum[u] += du;
      p_sq[u] += du * du;
      gtot[dataset.group_of[u]] += du;
    }
    for (int g = 0; g < m; ++g) {
      double avg = gtot[g] / dataset.group_size(g);
      g_sum[g] += avg;
      g_sq[g] += avg * avg;
    }
    double k = static_cast<double>(sol.centers.size());
    c_sum += k;
    c_sq += k * k;
  }

  auto finish = [&](double sum, double sq) {
    double mean = sum / draws;
    double var = std::max(0.0, sq / draws - mean * mean);
    return std::pair<double, double>(mean, std::sqrt(var / draws));
  };
  ProbeReport rep;
  rep.draws = draws;
  rep.point_mean.resize(n);
  rep.point_se.resize(n);
  for (int u = 0; u < n; ++u)
    std::tie(rep.point_mean[u], rep.point_se[u]) = finish(p_sum[u], p_sq[u]);
  rep.group_mean.resize(m);
  rep.group_se.resize(m);
  for (int g = 0; g < m; ++g)
    std::tie(rep.group_mean[g], rep.group_se[g]) = finish(g_sum[g], g_sq[g]);
  std::tie(rep.center_count_mean, rep.center_count_se) = finish(c_sum, c_sq);
  return rep;
}

}  // namespace fairclust
