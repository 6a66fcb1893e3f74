#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fairclust/evaluation.hpp"
#include "fairclust/models.hpp"
#include "fairclust/rounding.hpp"

using namespace fairclust;

namespace {

// Hand-built integral solution as a FractionalClustering: y one-hot on
// `centers`, z assigns each point to its nearest center.
FractionalClustering integral_frac(const Dataset& ds, const MetricCache& m,
                                   const std::vector<int>& centers) {
  FractionalClustering f;
  f.n = ds.n();
  f.candidate_ids.resize(ds.n());
  for (int i = 0; i < ds.n(); ++i) f.candidate_ids[i] = i;
  f.z.assign(static_cast<std::size_t>(ds.n()) * ds.n(), 0.0);
  f.y.assign(ds.n(), 0.0);
  for (int c : centers) f.y[c] = 1.0;
  for (int u = 0; u < ds.n(); ++u) {
    int best = centers[0];
    for (int c : centers)
      if (m(u, c) < m(u, best)) best = c;
    f.z[static_cast<std::size_t>(u) * ds.n() + best] = 1.0;
  }
  f.integral = true;
  return f;
}

// Exhaustive minimum-cost capacitated assignment, the oracle for
// transportation_assign.
double enumerate_transport_cost(const FacilityInstance& inst, const std::vector<int>& open,
                                int cap) {
  const int n = inst.clients.n();
  std::vector<int> load(open.size(), 0);
  double best = kInfinity;
  auto rec = [&](auto&& self, int u, double acc) -> void {
    if (acc >= best) return;
    if (u == n) {
      best = acc;
      return;
    }
    for (std::size_t f = 0; f < open.size(); ++f) {
      if (load[f] == cap) continue;
      ++load[f];
      self(self, u + 1, acc + inst.dist(u, open[f]));
      --load[f];
    }
  };
  rec(rec, 0, 0.0);
  return best;
}

double assignment_cost(const FacilityInstance& inst, const std::vector<int>& assignment) {
  double s = 0.0;
  for (int u = 0; u < inst.clients.n(); ++u) s += inst.dist(u, assignment[u]);
  return s;
}

FacilityInstance random_facility_instance(std::uint64_t seed, int na, int nb, int nl,
                                          std::optional<int> capacity) {
  Dataset clients = gen_synthetic(seed, na, nb, 0.0, 3.0, 0.8);
  std::vector<Vector> locs = propose_locations(clients, nl, seed);
  Rng rng(derive_seed(seed, "costs"));
  std::vector<double> costs;
  for (int i = 0; i < nl; ++i) costs.push_back(rng.uniform(0.2, 2.5));
  return make_facility_instance(clients, locs, costs, capacity);
}

}  // namespace

TEST_CASE("filtering collapses coincident points to one member") {
  Dataset ds = build_dataset({{1.0}, {1.0}, {1.0}}, {"a", "a", "a"});
  MetricCache m = build_metric(ds, MetricMode::Euclidean);
  FilteredSet fs = filter_points({0.0, 0.0, 0.0}, m, 4.0);
  REQUIRE(fs.members.size() == 1);
  CHECK(fs.members[0] == 0);
  CHECK(fs.removal_map == std::vector<int>{0, 0, 0});
}

TEST_CASE("filtering the uniform singleton instance with factor 4") {
  MetricInstance mi = uniform_metric_instance(3, 1.0);
  FractionalClustering frac =
      solve_kmedian(KMedianVariant::FairAbs, mi.dataset, mi.metric, 2);
  FilteredSet fs = filter_points(frac, mi.metric, 4.0);
  for (double r : fs.radii) CHECK(r == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  // Removal radius 4/3 exceeds every pairwise distance of 1.
  REQUIRE(fs.members.size() == 1);
}

TEST_CASE("filtering keeps everything when separations dwarf the radii") {
  Dataset ds = build_dataset({{0.0}, {100.0}, {200.0}}, {"a", "b", "c"});
  MetricCache m = build_metric(ds, MetricMode::Euclidean);
  FilteredSet fs = filter_points(integral_frac(ds, m, {0, 1, 2}), m, 4.0);
  CHECK(fs.members == std::vector<int>{0, 1, 2});
}

TEST_CASE("filtered members are pairwise separated and removals covered") {
  Dataset ds = gen_synthetic(17, 20, 8);
  MetricCache m = build_metric(ds, MetricMode::Euclidean);
  FractionalClustering frac = solve_kmedian(KMedianVariant::FairAbs, ds, m, 3);
  for (double factor : {4.0, 2.0 / 0.3}) {
    FilteredSet fs = filter_points(frac, m, factor);
    for (int a : fs.members)
      for (int b : fs.members)
        if (a != b) CHECK(m(a, b) >= factor * std::max(fs.radii[a], fs.radii[b]) - 1e-9);
    for (int v = 0; v < ds.n(); ++v) {
      int rem = fs.removal_map[v];
      REQUIRE(rem >= 0);
      CHECK(std::find(fs.members.begin(), fs.members.end(), rem) != fs.members.end());
      CHECK(m(rem, v) <= factor * fs.radii[v] + 1e-12);
    }
  }
}

TEST_CASE("bicriteria rounding is a fixed point on integral input") {
  Dataset ds = build_dataset({{0.0}, {1.0}, {10.0}, {11.0}}, {"a", "b", "a", "b"});
  MetricCache m = build_metric(ds, MetricMode::Euclidean);
  IntegralSolution sol = round_bicriteria(integral_frac(ds, m, {0, 2}), m, 0.5);
  CHECK(sol.centers == std::vector<int>{0, 2});
  CHECK(sol.assignment == std::vector<int>{0, 0, 2, 2});
}

TEST_CASE("bicriteria rounding on the uniform singleton instance") {
  MetricInstance mi = uniform_metric_instance(3, 1.0);
  FractionalClustering frac =
      solve_kmedian(KMedianVariant::FairAbs, mi.dataset, mi.metric, 2);
  IntegralSolution sol = round_bicriteria(frac, mi.metric, 0.5);
  REQUIRE(sol.centers.size() == 1);
  GroupReport rep = group_costs(mi.dataset, mi.metric, sol, CostKind::Abs);
  CHECK(fair_objective(rep) == doctest::Approx(1.0));
  CHECK(fair_objective(rep) <= 2.0 * frac.lambda / 0.5 + 1e-9);
}

TEST_CASE("bicriteria guarantees hold on random instances") {
  for (int trial = 0; trial < 4; ++trial) {
    Dataset ds = gen_synthetic(300 + trial, 13, 7);
    MetricCache m = build_metric(ds, MetricMode::Euclidean);
    int k = 3;
    FractionalClustering frac = solve_kmedian(KMedianVariant::FairAbs, ds, m, k);
    std::vector<double> radii = compute_radii(frac, m);
    for (double eps : {0.3, 0.5}) {
      IntegralSolution sol = round_bicriteria(frac, m, eps);
      CHECK(static_cast<double>(sol.centers.size()) <= std::ceil(k / (1.0 - eps)));
      for (int u = 0; u < ds.n(); ++u)
        CHECK(m(u, sol.assignment[u]) <= (2.0 / eps) * radii[u] + 1e-9);
      GroupReport rep = group_costs(ds, m, sol, CostKind::Abs);
      CHECK(fair_objective(rep) <= (2.0 / eps) * frac.lambda + 1e-6);
    }
  }
}

TEST_CASE("dependent rounding is a fixed point on integral input") {
  Dataset ds = build_dataset({{0.0}, {1.0}, {10.0}, {11.0}}, {"a", "b", "a", "b"});
  MetricCache m = build_metric(ds, MetricMode::Euclidean);
  FractionalClustering frac = integral_frac(ds, m, {0, 2});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    IntegralSolution sol = round_dependent(frac, m, 2, seed);
    CHECK(sol.centers == std::vector<int>{0, 2});
  }
}

TEST_CASE("pair sampling matches the dependent-rounding distribution") {
  DependentPlan plan;
  plan.bundles.resize(2);
  plan.bundles[0] = {0, {0}, {0.6}, 0.6, 0.6};
  plan.bundles[1] = {1, {1}, {0.7}, 0.7, 0.7};
  plan.pairs = {{0, 1}};
  Rng rng(2024);
  int both = 0, first = 0, second = 0;
  const int draws = 100000;
  for (int d = 0; d < draws; ++d) {
    std::vector<int> opened = sample_dependent(plan, rng);
    REQUIRE(!opened.empty());  // a matched pair always opens at least one
    if (opened.size() == 2)
      ++both;
    else if (opened[0] == 0)
      ++first;
    else
      ++second;
  }
  CHECK(both / double(draws) == doctest::Approx(0.3).epsilon(0.03));
  CHECK(first / double(draws) == doctest::Approx(0.3).epsilon(0.03));
  CHECK(second / double(draws) == doctest::Approx(0.4).epsilon(0.03));
}

TEST_CASE("invalid pair volumes are rejected") {
  DependentPlan plan;
  plan.bundles.resize(2);
  plan.bundles[0] = {0, {0}, {0.3}, 0.3, 0.3};
  plan.bundles[1] = {1, {1}, {0.4}, 0.4, 0.4};
  plan.pairs = {{0, 1}};
  Rng rng(1);
  CHECK_THROWS_AS(sample_dependent(plan, rng), InvariantError);
}

TEST_CASE("bundle marginals and expected center count") {
  Dataset ds = gen_synthetic(911, 17, 8);
  MetricCache m = build_metric(ds, MetricMode::Euclidean);
  const int k = 3;
  FractionalClustering frac = solve_kmedian(KMedianVariant::FairAbs, ds, m, k);
  DependentPlan plan = make_dependent_plan(frac, m);

  double volume_sum = 0.0;
  for (const Bundle& b : plan.bundles) {
    CHECK(b.volume >= 0.5 - 1e-9);
    CHECK(b.volume <= 1.0 + 1e-12);
    volume_sum += b.volume;
  }
  // Bundles are pairwise disjoint over facilities.
  std::set<int> seen;
  for (const Bundle& b : plan.bundles)
    for (int c : b.facilities) CHECK(seen.insert(c).second);

  const int draws = 2000;
  Rng rng(5);
  std::vector<int> open_count(plan.bundles.size(), 0);
  double centers_total = 0.0;
  for (int d = 0; d < draws; ++d) {
    std::vector<int> opened = sample_dependent(plan, rng);
    centers_total += static_cast<double>(opened.size());
    for (std::size_t b = 0; b < plan.bundles.size(); ++b)
      for (int c : plan.bundles[b].facilities)
        if (std::binary_search(opened.begin(), opened.end(), c)) {
          ++open_count[b];
          break;
        }
  }
  for (std::size_t b = 0; b < plan.bundles.size(); ++b)
    CHECK(open_count[b] / double(draws) ==
          doctest::Approx(plan.bundles[b].volume).epsilon(0.08));
  // Mean opened count equals the volume sum; on this instance that sum sits
  // within 0.2 of k, which the acceptance suite relies on.
  CHECK(centers_total / draws == doctest::Approx(volume_sum).epsilon(0.05));
  CHECK(std::abs(centers_total / draws - k) < 0.2);
}

TEST_CASE("repair mode yields exactly k centers") {
  Dataset ds = gen_synthetic(912, 15, 6);
  MetricCache m = build_metric(ds, MetricMode::Euclidean);
  const int k = 4;
  FractionalClustering frac = solve_kmedian(KMedianVariant::FairAbs, ds, m, k);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    IntegralSolution sol = round_dependent(frac, m, k, seed, /*repair=*/true);
    CHECK(static_cast<int>(sol.centers.size()) == k);
  }
}

TEST_CASE("faithful facility rounding on a forced instance") {
  Dataset clients = build_dataset({{0.0}}, {"a"});
  FacilityInstance inst = make_facility_instance(clients, {{0.0}}, {3.0});
  FacilitySolve fs = solve_facility(inst, FacilityFairness::PerGroup, false);
  IntegralSolution sol = round_facility_faithful(fs.frac, inst);
  CHECK(sol.centers == std::vector<int>{0});
  CHECK(sol.assignment == std::vector<int>{0});
  CHECK(sol.opening_cost == doctest::Approx(3.0));
}

TEST_CASE("faithful rounding opens the cheapest location in the ball") {
  Dataset clients = build_dataset({{0.0}}, {"a"});
  FacilityInstance inst = make_facility_instance(clients, {{0.0}, {0.0}}, {9.0, 1.0});
  FractionalClustering frac;
  frac.n = 1;
  frac.candidate_ids = {0, 1};
  frac.z = {0.5, 0.5};
  frac.y = {0.5, 0.5};
  IntegralSolution sol = round_facility_faithful(frac, inst);
  CHECK(sol.centers == std::vector<int>{1});
  CHECK(sol.opening_cost == doctest::Approx(1.0));
}

TEST_CASE("faithful rounding keeps the 4x connection and opening bounds") {
  for (int trial = 0; trial < 5; ++trial) {
    FacilityInstance inst = random_facility_instance(500 + trial, 14, 6, 6, std::nullopt);
    FacilitySolve fs = solve_facility(inst, FacilityFairness::PerGroup, false);
    std::vector<double> radii = compute_radii(fs.frac, inst);
    IntegralSolution sol = round_facility_faithful(fs.frac, inst);
    for (int u = 0; u < inst.clients.n(); ++u) {
      double d = inst.dist(u, sol.assignment[u]);
      CHECK(d <= 4.0 * radii[u] + 1e-9);
    }
    CHECK(sol.opening_cost <= 4.0 * fs.fractional_opening + 1e-9);
  }
}

TEST_CASE("ffl hand trace: promote the heavy facility, open the light one") {
  Dataset clients = build_dataset({{0.0}}, {"a"});
  FacilityInstance inst = make_facility_instance(clients, {{0.0}, {0.0}}, {1.0, 1.0}, 1);
  FractionalClustering frac;
  frac.n = 1;
  frac.candidate_ids = {0, 1};
  frac.z = {0.3, 0.7};
  frac.y = {0.3, 0.7};
  frac.lambda = 0.0;
  auto [sol, trace] = ffl_round(frac, inst, 0.1, 0.1);
  CHECK(trace.promoted == std::vector<int>{1});
  CHECK(trace.initial_c_delta == std::vector<int>{0});
  REQUIRE(trace.iterations.size() == 1);
  CHECK(trace.iterations[0].client == 0);
  CHECK(trace.iterations[0].opened_count == 1);
  CHECK(trace.iterations[0].opened == std::vector<int>{0});
  CHECK(sol.centers == std::vector<int>{0, 1});
  CHECK((sol.assignment[0] == 0 || sol.assignment[0] == 1));
}

TEST_CASE("ffl is quiet on integral input that respects the capacity") {
  Dataset clients = build_dataset({{0.0}, {10.0}}, {"a", "b"});
  FacilityInstance inst = make_facility_instance(clients, {{0.0}, {10.0}}, {1.0, 1.0}, 1);
  FractionalClustering frac;
  frac.n = 2;
  frac.candidate_ids = {0, 1};
  frac.z = {1.0, 0.0, 0.0, 1.0};
  frac.y = {1.0, 1.0};
  auto [sol, trace] = ffl_round(frac, inst, 0.1, 0.1);
  CHECK(sol.centers == std::vector<int>{0, 1});
  CHECK(sol.assignment == std::vector<int>{0, 1});
  CHECK(trace.iterations.empty());
  // Loads stay within the original capacity here.
  CHECK(trace.final_loads[0] == doctest::Approx(1.0));
}

TEST_CASE("ffl bounds hold on random capacitated instances") {
  const double theta = 0.1, delta = 0.1;
  for (int trial = 0; trial < 4; ++trial) {
    int na = 10 + trial, nb = 5;
    int nl = 6;
    int cap = (na + nb + nl - 1) / nl + 1;
    FacilityInstance inst = random_facility_instance(700 + trial, na, nb, nl, cap);
    FacilitySolve fs = solve_facility(inst, FacilityFairness::PerGroup, true);
    auto [sol, trace] = ffl_round(fs.frac, inst, theta, delta);

    int load_cap = static_cast<int>(std::ceil((1.0 + 3.0 * theta) * cap - 1e-9));
    std::vector<int> loads(inst.num_locations(), 0);
    for (int u = 0; u < inst.clients.n(); ++u) ++loads[sol.assignment[u]];
    for (int l = 0; l < inst.num_locations(); ++l) CHECK(loads[l] <= load_cap);

    GroupReport rep;
    {
      FacilityReport fr = facility_report(inst, sol);
      rep = fr.connection;
      CHECK(fr.opening_cost <=
            2.0 / ((1.0 - theta) * delta) * fs.fractional_opening + 1e-9);
    }
    for (const GroupCost& g : rep.groups)
      CHECK(g.average <= 3.0 / (theta * (1.0 - delta)) * fs.frac.lambda + 1e-7);

    // Deterministic replay.
    auto [sol2, trace2] = ffl_round(fs.frac, inst, theta, delta);
    CHECK(sol2.centers == sol.centers);
    CHECK(sol2.assignment == sol.assignment);
  }
}

TEST_CASE("transportation: forced and matched cases") {
  Dataset two = build_dataset({{0.0}, {1.0}}, {"a", "a"});
  FacilityInstance inst1 = make_facility_instance(two, {{0.5}}, {0.0}, 2);
  CHECK(transportation_assign({0}, 2, inst1) == std::vector<int>{0, 0});

  FacilityInstance inst2 = make_facility_instance(two, {{0.0}, {1.0}}, {0.0, 0.0}, 1);
  auto a = transportation_assign({0, 1}, 1, inst2);
  CHECK(a == std::vector<int>{0, 1});
  CHECK(assignment_cost(inst2, a) == doctest::Approx(0.0));
}

TEST_CASE("transportation matches the enumeration oracle on a line") {
  Dataset clients = build_dataset({{0.0}, {1.0}, {2.0}}, {"a", "a", "a"});
  FacilityInstance inst = make_facility_instance(clients, {{0.0}, {2.0}}, {0.0, 0.0}, 2);
  auto a = transportation_assign({0, 1}, 2, inst);
  CHECK(assignment_cost(inst, a) ==
        doctest::Approx(enumerate_transport_cost(inst, {0, 1}, 2)));
}

TEST_CASE("transportation matches the enumeration oracle on random instances") {
  for (int trial = 0; trial < 6; ++trial) {
    Rng rng(40 + trial);
    int n = 5 + rng.uniform_int(4);  // <= 8 clients
    int nl = 2 + rng.uniform_int(2);
    std::vector<Vector> pts, locs;
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) {
      pts.push_back({rng.uniform(0.0, 10.0)});
      labels.push_back("a");
    }
    for (int l = 0; l < nl; ++l) locs.push_back({rng.uniform(0.0, 10.0)});
    int cap = (n + nl - 1) / nl + rng.uniform_int(2);
    FacilityInstance inst = make_facility_instance(build_dataset(pts, labels), locs,
                                                   std::vector<double>(nl, 0.0), cap);
    std::vector<int> open(nl);
    for (int l = 0; l < nl; ++l) open[l] = l;
    auto a = transportation_assign(open, cap, inst);
    std::vector<int> loads(nl, 0);
    for (int u = 0; u < n; ++u) ++loads[a[u] ];
    for (int l = 0; l < nl; ++l) CHECK(loads[l] <= cap);
    CHECK(assignment_cost(inst, a) ==
          doctest::Approx(enumerate_transport_cost(inst, open, cap)).epsilon(1e-9));
  }
}

TEST_CASE("transportation reports the capacity deficit") {
  Dataset clients = build_dataset({{0.0}, {1.0}, {2.0}}, {"a", "a", "a"});
  FacilityInstance inst = make_facility_instance(clients, {{0.0}, {1.0}}, {0.0, 0.0}, 2);
  CHECK_THROWS_WITH_AS(transportation_assign({0}, 2, inst), doctest::Contains("short by 1"),
                       ValidationError);
}
