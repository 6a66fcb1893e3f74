#include "fairclust/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

namespace fairclust {

namespace {

int nearest_center(int u, const std::vector<int>& centers,
                   const std::function<double(int, int)>& dist) {
  int best = -1;
  double best_d = kInfinity;
  for (int c : centers) {
    double d = dist(u, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<int> nearest_assignment(int n, const std::vector<int>& centers,
                                    const std::function<double(int, int)>& dist) {
  if (centers.empty()) throw InvariantError("assignment requested with no open centers");
  std::vector<int> a(n);
  for (int u = 0; u < n; ++u) a[u] = nearest_center(u, centers, dist);
  return a;
}

}  // namespace

std::vector<double> compute_radii(const FractionalClustering& frac, const MetricCache& metric) {
  std::vector<double> r(frac.n, 0.0);
  const int nc = frac.num_candidates();
  for (int u = 0; u < frac.n; ++u) {
    double s = 0.0;
    for (int c = 0; c < nc; ++c) {
      double z = frac.z_at(u, c);
      if (z > 0.0) s += metric(u, frac.candidate_ids[c]) * z;
    }
    r[u] = s;
  }
  return r;
}

std::vector<double> compute_radii(const FractionalClustering& frac,
                                  const FacilityInstance& instance) {
  std::vector<double> r(frac.n, 0.0);
  const int nc = frac.num_candidates();
  for (int u = 0; u < frac.n; ++u) {
    double s = 0.0;
    for (int c = 0; c < nc; ++c) {
      double z = frac.z_at(u, c);
      if (z > 0.0) s += instance.dist(u, frac.candidate_ids[c]) * z;
    }
    r[u] = s;
  }
  return r;
}

FilteredSet filter_points(const std::vector<double>& radii, const MetricCache& point_metric,
                          double removal_factor) {
  if (removal_factor <= 0.0) throw ValidationError("filter_points: removal factor must be > 0");
  const int n = static_cast<int>(radii.size());
  FilteredSet fs;
  fs.radii = radii;
  fs.removal_map.assign(n, -1);
  std::vector<bool> alive(n, true);
  int remaining = n;
  while (remaining > 0) {
    int u = -1;
    double best = kInfinity;
    for (int i = 0; i < n; ++i)
      if (alive[i] && radii[i] < best) {
        best = radii[i];
        u = i;
      }
    fs.members.push_back(u);
    for (int v = 0; v < n; ++v) {
      if (!alive[v]) continue;
      if (point_metric(u, v) <= removal_factor * radii[v]) {
        alive[v] = false;
        fs.removal_map[v] = u;
        --remaining;
      }
    }
  }
  return fs;
}

FilteredSet filter_points(const FractionalClustering& frac, const MetricCache& metric,
                          double removal_factor) {
  return filter_points(compute_radii(frac, metric), metric, removal_factor);
}

IntegralSolution round_bicriteria(const FractionalClustering& frac, const MetricCache& metric,
                                  double epsilon) {
  if (epsilon <= 0.0 || epsilon >= 1.0)
    throw ValidationError("round_bicriteria: epsilon must lie in (0,1)");
  FilteredSet fs = filter_points(frac, metric, 2.0 / epsilon);
  IntegralSolution sol;
  sol.centers = fs.members;
  std::sort(sol.centers.begin(), sol.centers.end());
  sol.assignment = nearest_assignment(
      frac.n, sol.centers, [&](int u, int c) { return metric(u, c); });
  return sol;
}

DependentPlan make_dependent_plan(const FractionalClustering& frac, const MetricCache& metric) {
  DependentPlan plan;
  plan.filtered = filter_points(frac, metric, 4.0);
  const auto& members = plan.filtered.members;
  const int ns = static_cast<int>(members.size());
  const int nc = frac.num_candidates();

  // Half the distance from each member to the nearest other member.
  std::vector<double> half(ns, kInfinity);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j)
      if (i != j) half[i] = std::min(half[i], 0.5 * metric(members[i], members[j]));

  plan.bundles.resize(ns);
  for (int i = 0; i < ns; ++i) plan.bundles[i].anchor = members[i];
  for (int c = 0; c < nc; ++c) {
    if (frac.y[c] <= 0.0) continue;
    int owner = -1;
    double owner_d = kInfinity;
    for (int i = 0; i < ns; ++i) {
      double d = metric(members[i], frac.candidate_ids[c]);
      if (d < owner_d) {
        owner_d = d;
        owner = i;
      }
    }
    if (owner_d <= half[owner]) {
      plan.bundles[owner].facilities.push_back(c);
      plan.bundles[owner].mass.push_back(frac.y[c]);
    }
  }
  for (Bundle& b : plan.bundles) {
    b.raw_mass = 0.0;
    for (double m : b.mass) b.raw_mass += m;
    b.volume = std::min(1.0, b.raw_mass);
    if (b.raw_mass < 0.5 - 1e-9)
      throw InvariantError("dependent rounding: bundle volume below 1/2");
  }

  // Repeatedly match the two closest unmatched filtered points.
  std::vector<bool> matched(ns, false);
  int unmatched = ns;
  while (unmatched >= 2) {
    int bi = -1, bj = -1;
    double best = kInfinity;
    for (int i = 0; i < ns; ++i) {
      if (matched[i]) continue;
      for (int j = i + 1; j < ns; ++j) {
        if (matched[j]) continue;
        double d = metric(members[i], members[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    matched[bi] = matched[bj] = true;
    plan.pairs.emplace_back(bi, bj);
    unmatched -= 2;
  }
  for (int i = 0; i < ns; ++i)
    if (!matched[i]) plan.leftover = i;
  return plan;
}

namespace {

int pick_from_bundle(const Bundle& b, Rng& rng) {
  if (b.facilities.empty() || b.raw_mass <= 0.0)
    throw InvariantError("dependent rounding: empty bundle opened");
  double r = rng.uniform() * b.raw_mass;
  double acc = 0.0;
  for (std::size_t t = 0; t < b.facilities.size(); ++t) {
    acc += b.mass[t];
    if (r < acc) return b.facilities[t];
  }
  return b.facilities.back();
}

}  // namespace

std::vector<int> sample_dependent(const DependentPlan& plan, Rng& rng) {
  std::vector<int> opened;
  for (const auto& [i, j] : plan.pairs) {
    double g1 = plan.bundles[i].volume;
    double g2 = plan.bundles[j].volume;
    double p_both = g1 + g2 - 1.0;
    double p_first = 1.0 - g2;
    double p_second = 1.0 - g1;
    for (double p : {p_both, p_first, p_second})
      if (p < -1e-9 || p > 1.0 + 1e-9)
        throw InvariantError("dependent rounding: pair probability outside [0,1]");
    double u = rng.uniform();
    bool open_i = false, open_j = false;
    if (u < p_both) {
      open_i = open_j = true;
    } else if (u < p_both + p_first) {
      open_i = true;
    } else {
      open_j = true;
    }
    if (open_i) opened.push_back(pick_from_bundle(plan.bundles[i], rng));
    if (open_j) opened.push_back(pick_from_bundle(plan.bundles[j], rng));
  }
  if (plan.leftover >= 0) {
    const Bundle& b = plan.bundles[plan.leftover];
    if (rng.uniform() < b.volume) opened.push_back(pick_from_bundle(b, rng));
  }
  std::sort(opened.begin(), opened.end());
  opened.erase(std::unique(opened.begin(), opened.end()), opened.end());
  return opened;
}

IntegralSolution round_dependent(const FractionalClustering& frac, const MetricCache& metric,
                                 int k, std::uint64_t seed, bool repair) {
  DependentPlan plan = make_dependent_plan(frac, metric);
  Rng rng(seed);
  std::vector<int> opened = sample_dependent(plan, rng);
  if (opened.empty()) {
    // Possible only when a lone unmatched bundle failed its draw; fall back
    // to its heaviest facility so the solution stays well-formed.
    if (plan.leftover < 0) throw InvariantError("dependent rounding: empty draw without leftover");
    const Bundle& b = plan.bundles[plan.leftover];
    int best = b.facilities[0];
    double best_m = b.mass[0];
    for (std::size_t t = 1; t < b.facilities.size(); ++t)
      if (b.mass[t] > best_m) {
        best_m = b.mass[t];
        best = b.facilities[t];
      }
    opened.push_back(best);
  }

  auto cand_dist = [&](int u, int cpos) { return metric(u, frac.candidate_ids[cpos]); };
  if (repair) {
    if (static_cast<int>(opened.size()) < k) {
      std::vector<int> rest;
      for (int c = 0; c < frac.num_candidates(); ++c)
        if (!std::binary_search(opened.begin(), opened.end(), c)) rest.push_back(c);
      std::stable_sort(rest.begin(), rest.end(),
                       [&](int a, int b) { return frac.y[a] > frac.y[b]; });
      for (int c : rest) {
        if (static_cast<int>(opened.size()) >= k) break;
        opened.push_back(c);
      }
      std::sort(opened.begin(), opened.end());
    }
    while (static_cast<int>(opened.size()) > k) {
      // Close the center whose removal increases total connection cost least.
      int drop = -1;
      double drop_cost = kInfinity;
      for (std::size_t t = 0; t < opened.size(); ++t) {
        std::vector<int> rest;
        for (std::size_t s = 0; s < opened.size(); ++s)
          if (s != t) rest.push_back(opened[s]);
        double total = 0.0;
        for (int u = 0; u < frac.n; ++u) {
          double best = kInfinity;
          for (int c : rest) best = std::min(best, cand_dist(u, c));
          total += best;
        }
        if (total < drop_cost) {
          drop_cost = total;
          drop = static_cast<int>(t);
        }
      }
      opened.erase(opened.begin() + drop);
    }
  }

  IntegralSolution sol;
  for (int c : opened) sol.centers.push_back(frac.candidate_ids[c]);
  std::sort(sol.centers.begin(), sol.centers.end());
  sol.assignment = nearest_assignment(
      frac.n, sol.centers, [&](int u, int c) { return metric(u, c); });
  return sol;
}

IntegralSolution round_facility_faithful(const FractionalClustering& frac,
                                         const FacilityInstance& instance, double theta) {
  if (theta <= 0.0 || theta >= 1.0)
    throw ValidationError("round_facility_faithful: theta must lie in (0,1)");
  std::vector<double> radii = compute_radii(frac, instance);
  FilteredSet fs = filter_points(radii, instance.client_metric, 2.0 / theta);

  std::vector<int> opened;
  for (int u : fs.members) {
    double radius = radii[u] / theta;
    int best = -1;
    double best_cost = kInfinity;
    for (int c = 0; c < frac.num_candidates(); ++c) {
      if (frac.z_at(u, c) <= 0.0) continue;
      int loc = frac.candidate_ids[c];
      if (instance.dist(u, loc) <= radius + 1e-12 &&
          instance.opening_costs[loc] < best_cost) {
        best_cost = instance.opening_costs[loc];
        best = loc;
      }
    }
    if (best < 0)
      throw InvariantError("faithful rounding: no positive-assignment location in ball");
    opened.push_back(best);
  }
  std::sort(opened.begin(), opened.end());
  opened.erase(std::unique(opened.begin(), opened.end()), opened.end());

  IntegralSolution sol;
  sol.centers = opened;
  sol.assignment = nearest_assignment(
      instance.clients.n(), sol.centers, [&](int u, int l) { return instance.dist(u, l); });
  for (int l : opened) sol.opening_cost += instance.opening_costs[l];
  return sol;
}

std::pair<IntegralSolution, RoundingTrace> ffl_round(const FractionalClustering& frac,
                                                     const FacilityInstance& instance,
                                                     double theta, double delta) {
  if (!instance.capacity)
    throw ValidationError("ffl_round: instance has no capacity");
  if (theta <= 0.0 || theta > 0.5 || delta <= 0.0 || delta > 0.5)
    throw ValidationError("ffl_round: theta and delta must lie in (0, 1/2]");
  const int n = instance.clients.n();
  const int nl = instance.num_locations();
  if (frac.num_candidates() != nl)
    throw ValidationError("ffl_round: fractional solution does not match the instance");

  RoundingTrace trace;
  std::vector<double> radii = compute_radii(frac, instance);

  // Filtering: reroute each client's mass into B(u, R_u/theta) and lift y.
  std::vector<double> z(static_cast<std::size_t>(n) * nl, 0.0);
  std::vector<double> y(nl);
  for (int u = 0; u < n; ++u) {
    double ball = radii[u] / theta + 1e-12;
    double beta = 0.0;
    for (int l = 0; l < nl; ++l)
      if (instance.dist(u, l) <= ball) beta += frac.z_at(u, l);
    if (beta <= 0.0) throw InvariantError("ffl_round: empty filtering ball");
    for (int l = 0; l < nl; ++l)
      if (instance.dist(u, l) <= ball)
        z[static_cast<std::size_t>(u) * nl + l] = frac.z_at(u, l) / beta;
  }
  for (int l = 0; l < nl; ++l) y[l] = std::min(1.0, frac.y[l] / (1.0 - theta));

  auto zat = [&](int u, int l) -> double& { return z[static_cast<std::size_t>(u) * nl + l]; };

  std::vector<bool> open(nl, false);
  for (int l = 0; l < nl; ++l)
    if (y[l] >= 0.5) {
      y[l] = 1.0;
      open[l] = true;
      trace.promoted.push_back(l);
    }
  auto fractional = [&](int l) { return !open[l] && y[l] > 1e-12; };

  auto covered_mass = [&](int u) {
    double s = 0.0;
    for (int l = 0; l < nl; ++l)
      if (open[l]) s += zat(u, l);
    return s;
  };
  auto in_c_delta = [&](int u) { return covered_mass(u) < 1.0 - delta; };
  for (int u = 0; u < n; ++u)
    if (in_c_delta(u)) trace.initial_c_delta.push_back(u);

  while (true) {
    int u = -1;
    double best_r = kInfinity;
    for (int v = 0; v < n; ++v)
      if (in_c_delta(v) && radii[v] < best_r) {
        best_r = radii[v];
        u = v;
      }
    if (u < 0) break;

    double ball = radii[u] / theta + 1e-12;
    std::vector<int> in_ball;
    double mass = 0.0;
    for (int l = 0; l < nl; ++l)
      if (fractional(l) && instance.dist(u, l) <= ball) {
        in_ball.push_back(l);
        mass += y[l];
      }
    if (in_ball.empty())
      throw InvariantError("ffl_round: under-covered client has no fractional facility in ball");
    int r = static_cast<int>(std::ceil(mass - 1e-9));
    r = std::clamp(r, 1, static_cast<int>(in_ball.size()));
    std::vector<int> order = in_ball;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return instance.opening_costs[a] < instance.opening_costs[b];
    });
    std::vector<int> opened_now(order.begin(), order.begin() + r);
    std::sort(opened_now.begin(), opened_now.end());
    for (int l : opened_now) {
      y[l] = 1.0;
      open[l] = true;
    }
    std::vector<int> closed;
    for (int l : in_ball)
      if (!open[l]) {
        y[l] = 0.0;
        closed.push_back(l);
      }
    // Move every client's mass from the closed facilities to its nearest
    // newly opened one.
    for (int v = 0; v < n; ++v) {
      double moved = 0.0;
      for (int l : closed) {
        moved += zat(v, l);
        zat(v, l) = 0.0;
      }
      if (moved <= 0.0) continue;
      int tgt = opened_now[0];
      double td = instance.dist(v, tgt);
      for (int l : opened_now)
        if (instance.dist(v, l) < td) {
          td = instance.dist(v, l);
          tgt = l;
        }
      zat(v, tgt) += moved;
    }
    FflIteration it;
    it.client = u;
    it.ball = in_ball;
    it.opened_count = r;
    it.opened = opened_now;
    trace.iterations.push_back(std::move(it));
    std::vector<int> snapshot;
    for (int v = 0; v < n; ++v)
      if (in_c_delta(v)) snapshot.push_back(v);
    trace.c_delta_history.push_back(std::move(snapshot));
  }

  // Close the remaining fractional facilities and rescale each client onto
  // the open set.
  for (int l = 0; l < nl; ++l)
    if (!open[l]) y[l] = 0.0;
  trace.beta.assign(n, 1.0);
  for (int u = 0; u < n; ++u) {
    double beta = 0.0;
    for (int l = 0; l < nl; ++l) {
      if (!open[l])
        zat(u, l) = 0.0;
      else
        beta += zat(u, l);
    }
    if (beta < 1.0 - delta - 1e-7)
      throw InvariantError("ffl_round: client retains less than (1-delta) covered mass");
    trace.beta[u] = beta;
    if (beta < 1.0)
      for (int l = 0; l < nl; ++l)
        if (open[l]) zat(u, l) /= beta;
  }
  trace.final_loads.assign(nl, 0.0);
  for (int l = 0; l < nl; ++l)
    for (int u = 0; u < n; ++u) trace.final_loads[l] += zat(u, l);

  std::vector<int> opened_list;
  for (int l = 0; l < nl; ++l)
    if (open[l]) opened_list.push_back(l);
  trace.opened = opened_list;

  const double eps = 3.0 * theta;
  const int cap = static_cast<int>(std::ceil((1.0 + eps) * *instance.capacity - 1e-9));
  std::vector<int> assignment;
  try {
    assignment = transportation_assign(opened_list, cap, instance);
  } catch (const ValidationError& e) {
    throw InvariantError(std::string("ffl_round: transportation infeasible at relaxed caps: ") +
                         e.what());
  }

  IntegralSolution sol;
  sol.centers = opened_list;
  sol.assignment = std::move(assignment);
  for (int l : opened_list) sol.opening_cost += instance.opening_costs[l];
  return {std::move(sol), std::move(trace)};
}

std::vector<int> transportation_assign(const std::vector<int>& opened, int cap,
                                       const FacilityInstance& instance) {
  const int n = instance.clients.n();
  const int nf = static_cast<int>(opened.size());
  if (nf == 0) throw ValidationError("transportation_assign: no open facilities");
  if (cap < 1) throw ValidationError("transportation_assign: cap must be positive");
  long long supply = static_cast<long long>(cap) * nf;
  if (supply < n)
    throw ValidationError("transportation_assign: infeasible, capacity short by " +
                          std::to_string(n - supply) + " clients");

  // Node ids: 0 source, 1..n clients, n+1..n+nf facilities, n+nf+1 sink.
  const int source = 0, sink = n + nf + 1, nodes = n + nf + 2;
  struct Arc {
    int to;
    int cap;
    double cost;
  };
  std::vector<Arc> arcs;
  std::vector<std::vector<int>> adj(nodes);
  auto add_arc = [&](int from, int to, int capacity, double cost) {
    adj[from].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({to, capacity, cost});
    adj[to].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({from, 0, -cost});
  };
  for (int u = 0; u < n; ++u) add_arc(source, 1 + u, 1, 0.0);
  for (int u = 0; u < n; ++u)
    for (int f = 0; f < nf; ++f) add_arc(1 + u, n + 1 + f, 1, instance.dist(u, opened[f]));
  for (int f = 0; f < nf; ++f) add_arc(n + 1 + f, sink, cap, 0.0);

  std::vector<double> pot(nodes, 0.0), dist(nodes);
  std::vector<int> prev_arc(nodes);
  const double inf = kInfinity;
  for (int pushes = 0; pushes < n; ++pushes) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(prev_arc.begin(), prev_arc.end(), -1);
    dist[source] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.emplace(0.0, source);
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (d > dist[v] + 1e-12) continue;
      for (int ai : adj[v]) {
        const Arc& a = arcs[ai];
        if (a.cap <= 0) continue;
        double nd = dist[v] + std::max(0.0, a.cost + pot[v] - pot[a.to]);
        if (nd < dist[a.to] - 1e-15) {
          dist[a.to] = nd;
          prev_arc[a.to] = ai;
          pq.emplace(nd, a.to);
        }
      }
    }
    if (prev_arc[sink] < 0)
      throw ValidationError("transportation_assign: no augmenting path, capacity short by " +
                            std::to_string(n - pushes) + " clients");
    for (int v = 0; v < nodes; ++v)
      if (dist[v] < inf) pot[v] += dist[v];
    for (int v = sink; v != source;) {
      int ai = prev_arc[v];
      arcs[ai].cap -= 1;
      arcs[ai ^ 1].cap += 1;
      v = arcs[ai ^ 1].to;
    }
  }

  std::vector<int> assignment(n, -1);
  for (int u = 0; u < n; ++u)
    for (int ai : adj[1 + u]) {
      const Arc& a = arcs[ai];
      if (a.to > n && a.to <= n + nf && (ai & 1) == 0 && a.cap == 0)
        assignment[u] = opened[a.to - n - 1];
    }
  for (int u = 0; u < n; ++u)
    if (assignment[u] < 0) throw InvariantError("transportation_assign: unassigned client");
  return assignment;
}

}  // namespace fairclust
