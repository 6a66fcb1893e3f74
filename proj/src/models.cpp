#include "fairclust/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairclust/rounding.hpp"

namespace fairclust {

RelErrorCertificate make_certificate(std::vector<double> values,
                                     std::vector<std::string> methods) {
  if (values.empty()) throw ValidationError("certificate: no groups");
  if (methods.size() != values.size())
    throw ValidationError("certificate: method tags do not match values");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      throw ValidationError("certificate: group " + std::to_string(i) +
                            " has non-positive optimum; the ratio objective divides by it");
  return {std::move(values), std::move(methods)};
}

namespace {

std::vector<int> default_candidates(int n) {
  std::vector<int> c(n);
  std::iota(c.begin(), c.end(), 0);
  return c;
}

}  // namespace

AssignmentModel build_kmedian_lp(KMedianVariant variant, const Dataset& dataset,
                                 const MetricCache& metric, int k,
                                 const RelErrorCertificate* certificate,
                                 const std::vector<int>* candidates) {
  const int n = dataset.n();
  std::vector<int> cand = candidates ? *candidates : default_candidates(n);
  const int nc = static_cast<int>(cand.size());
  if (nc == 0) throw ValidationError("build_kmedian_lp: empty candidate list");
  for (int c : cand)
    if (c < 0 || c >= n) throw ValidationError("build_kmedian_lp: candidate index out of range");
  if (k < 1 || k > nc)
    throw ValidationError("build_kmedian_lp: k = " + std::to_string(k) + " out of range 1.." +
                          std::to_string(nc));
  if (variant == KMedianVariant::FairRel) {
    if (!certificate) throw ValidationError("build_kmedian_lp: fair-rel requires a certificate");
    if (certificate->values.size() != static_cast<std::size_t>(dataset.num_groups()))
      throw ValidationError("build_kmedian_lp: certificate group count mismatch");
  }

  AssignmentModel model;
  LinearProgram& lp = model.lp;
  model.shape.n = n;
  model.shape.candidate_ids = cand;
  model.shape.z_offset = 0;

  const bool has_lambda =
      variant == KMedianVariant::FairAbs || variant == KMedianVariant::FairRel;

  for (int u = 0; u < n; ++u)
    for (int c = 0; c < nc; ++c) {
      double cost = 0.0;
      if (variant == KMedianVariant::Standard)
        cost = metric(u, cand[c]);
      else if (variant == KMedianVariant::Weighted)
        cost = metric(u, cand[c]) / dataset.group_size(dataset.group_of[u]);
      lp.add_variable("z_" + std::to_string(u) + "_" + std::to_string(c), 0.0, 1.0, cost);
    }
  model.shape.y_offset = lp.num_vars();
  for (int c = 0; c < nc; ++c)
    lp.add_variable("y_" + std::to_string(c), 0.0, 1.0, 0.0);
  if (has_lambda)
    model.shape.lambda_index = lp.add_variable("lambda", 0.0, kInfinity, 1.0);

  // Assignment rows, then one z <= y row per (point, candidate), then the
  // center budget, then group rows for the fair variants.
  for (int u = 0; u < n; ++u) {
    std::vector<int> idx(nc);
    std::iota(idx.begin(), idx.end(), u * nc);
    lp.add_row(std::move(idx), std::vector<double>(nc, 1.0), Relation::Equal, 1.0);
  }
  for (int u = 0; u < n; ++u)
    for (int c = 0; c < nc; ++c)
      lp.add_row({u * nc + c, model.shape.y_offset + c}, {1.0, -1.0}, Relation::LessEq, 0.0);
  {
    std::vector<int> idx(nc);
    std::iota(idx.begin(), idx.end(), model.shape.y_offset);
    lp.add_row(std::move(idx), std::vector<double>(nc, 1.0), Relation::LessEq,
               static_cast<double>(k));
  }
  if (has_lambda) {
    for (int g = 0; g < dataset.num_groups(); ++g) {
      std::vector<int> idx;
      std::vector<double> coef;
      idx.reserve(dataset.group_size(g) * nc + 1);
      double scale = variant == KMedianVariant::FairAbs
                         ? 1.0 / dataset.group_size(g)
                         : 1.0;
      for (int u : dataset.group_index[g])
        for (int c = 0; c < nc; ++c) {
          idx.push_back(u * nc + c);
          coef.push_back(scale * metric(u, cand[c]));
        }
      idx.push_back(model.shape.lambda_index);
      coef.push_back(variant == KMedianVariant::FairAbs ? -1.0 : -certificate->values[g]);
      lp.add_row(std::move(idx), std::move(coef), Relation::LessEq, 0.0);
    }
  }
  return model;
}

AssignmentModel build_facility_lp(const FacilityInstance& instance, FacilityFairness fairness,
                                  bool capacitated) {
  if (capacitated && !instance.capacity)
    throw ValidationError("build_facility_lp: capacitated model needs a capacity");
  const Dataset& ds = instance.clients;
  const int n = ds.n();
  const int nl = instance.num_locations();

  AssignmentModel model;
  LinearProgram& lp = model.lp;
  model.shape.n = n;
  model.shape.candidate_ids = default_candidates(nl);

  for (int u = 0; u < n; ++u)
    for (int l = 0; l < nl; ++l)
      lp.add_variable("z_" + std::to_string(u) + "_" + std::to_string(l), 0.0, 1.0, 0.0);
  model.shape.y_offset = lp.num_vars();
  for (int l = 0; l < nl; ++l)
    lp.add_variable("y_" + std::to_string(l), 0.0, 1.0, instance.opening_costs[l] / n);
  model.shape.lambda_index = lp.add_variable("lambda", 0.0, kInfinity, 1.0);

  for (int u = 0; u < n; ++u) {
    std::vector<int> idx(nl);
    std::iota(idx.begin(), idx.end(), u * nl);
    lp.add_row(std::move(idx), std::vector<double>(nl, 1.0), Relation::Equal, 1.0);
  }
  for (int u = 0; u < n; ++u)
    for (int l = 0; l < nl; ++l)
      lp.add_row({u * nl + l, model.shape.y_offset + l}, {1.0, -1.0}, Relation::LessEq, 0.0);

  auto add_group_row = [&](const std::vector<int>& members, double scale) {
    std::vector<int> idx;
    std::vector<double> coef;
    idx.reserve(members.size() * nl + 1);
    for (int u : members)
      for (int l = 0; l < nl; ++l) {
        idx.push_back(u * nl + l);
        coef.push_back(scale * instance.dist(u, l));
      }
    idx.push_back(model.shape.lambda_index);
    coef.push_back(-1.0);
    lp.add_row(std::move(idx), std::move(coef), Relation::LessEq, 0.0);
  };
  if (fairness == FacilityFairness::PerGroup) {
    for (int g = 0; g < ds.num_groups(); ++g)
      add_group_row(ds.group_index[g], 1.0 / ds.group_size(g));
  } else {
    add_group_row(default_candidates(n), 1.0 / n);
  }

  if (capacitated) {
    const double cap = static_cast<double>(*instance.capacity);
    for (int l = 0; l < nl; ++l) {
      std::vector<int> idx;
      std::vector<double> coef;
      idx.reserve(n + 1);
      for (int u = 0; u < n; ++u) {
        idx.push_back(u * nl + l);
        coef.push_back(1.0);
      }
      idx.push_back(model.shape.y_offset + l);
      coef.push_back(-cap);
      lp.add_row(std::move(idx), std::move(coef), Relation::LessEq, 0.0);
    }
  }
  return model;
}

FractionalClustering extract_fractional(const LpSolution& solution, const ModelShape& shape) {
  if (solution.status != LpStatus::Optimal)
    throw ValidationError("extract_fractional: solution is not optimal");
  const int nc = shape.num_candidates();
  FractionalClustering frac;
  frac.n = shape.n;
  frac.candidate_ids = shape.candidate_ids;
  frac.z.resize(static_cast<std::size_t>(shape.n) * nc);
  frac.y.resize(nc);

  auto clip = [](double v) { return (v < 0.0 && v > -1e-12) ? 0.0 : v; };
  for (int u = 0; u < shape.n; ++u)
    for (int c = 0; c < nc; ++c)
      frac.z[static_cast<std::size_t>(u) * nc + c] = clip(solution.values[shape.z_offset + u * nc + c]);
  for (int c = 0; c < nc; ++c) frac.y[c] = clip(solution.values[shape.y_offset + c]);
  frac.lambda = shape.lambda_index >= 0 ? solution.values[shape.lambda_index] : 0.0;

  auto near01 = [](double v) { return std::abs(v) <= 1e-9 || std::abs(v - 1.0) <= 1e-9; };
  frac.integral = std::all_of(frac.z.begin(), frac.z.end(), near01) &&
                  std::all_of(frac.y.begin(), frac.y.end(), near01);
  return frac;
}

FractionalClustering solve_kmedian(KMedianVariant variant, const Dataset& dataset,
                                   const MetricCache& metric, int k,
                                   const RelErrorCertificate* certificate,
                                   const std::vector<int>* candidates) {
  AssignmentModel model = build_kmedian_lp(variant, dataset, metric, k, certificate, candidates);
  LpSolution sol = solve_lp(model.lp);
  if (sol.status != LpStatus::Optimal)
    throw SolverError("k-median LP did not solve to optimality");
  return extract_fractional(sol, model.shape);
}

FacilitySolve solve_facility(const FacilityInstance& instance, FacilityFairness fairness,
                             bool capacitated) {
  AssignmentModel model = build_facility_lp(instance, fairness, capacitated);
  LpSolution sol = solve_lp(model.lp);
  if (sol.status != LpStatus::Optimal)
    throw SolverError("facility LP did not solve to optimality");
  FacilitySolve out;
  out.frac = extract_fractional(sol, model.shape);
  out.lp_objective = sol.objective_value;
  out.fractional_opening = 0.0;
  for (int l = 0; l < instance.num_locations(); ++l)
    out.fractional_opening += instance.opening_costs[l] * out.frac.y[l];
  return out;
}

double group_kmedian_approx(const Dataset& dataset, const MetricCache& metric, int group, int k,
                            std::uint64_t seed) {
  if (group < 0 || group >= dataset.num_groups())
    throw ValidationError("group_kmedian_approx: bad group id");
  const std::vector<int>& members = dataset.group_index[group];
  if (static_cast<int>(members.size()) <= k) return 0.0;

  // Restrict to the group: sub-dataset plus sub-metric.
  std::vector<Vector> pts;
  std::vector<std::string> labels(members.size(), "g");
  for (int u : members) pts.push_back(dataset.points[u]);
  Dataset sub = build_dataset(std::move(pts), std::move(labels));
  const int sn = sub.n();
  std::vector<double> mat(static_cast<std::size_t>(sn) * sn);
  for (int a = 0; a < sn; ++a)
    for (int b = 0; b < sn; ++b)
      mat[static_cast<std::size_t>(a) * sn + b] = metric(members[a], members[b]);
  MetricCache sub_metric;
  sub_metric.mode = metric.mode;
  sub_metric.n = sn;
  sub_metric.data = std::move(mat);

  FractionalClustering frac = solve_kmedian(KMedianVariant::Standard, sub, sub_metric, k);
  double best = kInfinity;
  for (int draw = 0; draw < 5; ++draw) {
    IntegralSolution sol = round_dependent(frac, sub_metric, k,
                                           derive_seed(seed, "kma" + std::to_string(draw)),
                                           /*repair=*/true);
    double total = 0.0;
    for (int u = 0; u < sn; ++u) total += sub_metric(u, sol.assignment[u]);
    best = std::min(best, total);
  }
  return best;
}

RelErrorCertificate compute_certificate(const Dataset& dataset, const MetricCache& metric, int k,
                                        std::uint64_t seed) {
  std::vector<double> values;
  std::vector<std::string> methods;
  for (int g = 0; g < dataset.num_groups(); ++g) {
    values.push_back(group_kmedian_approx(dataset, metric, g, k,
                                          derive_seed(seed, "cert" + std::to_string(g))));
    methods.emplace_back("lp+dependent-rounding");
  }
  return make_certificate(std::move(values), std::move(methods));
}

}  // namespace fairclust
