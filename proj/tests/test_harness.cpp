#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fairclust/csv.hpp"
#include "fairclust/experiment.hpp"

using namespace fairclust;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content = "") {
    path = (std::filesystem::temp_directory_path() / name).string();
    if (!content.empty()) {
      std::ofstream out(path);
      out << content;
    }
  }
  ~TempFile() { std::remove(path.c_str()); }
};

const char* kTinyCsv =
    "age,income,group\n"
    "30,1000,a\n"
    "40,2000,a\n"
    "50,1500,b\n";

}  // namespace

TEST_CASE("load_csv parses features and groups") {
  TempFile f("fairclust_test1.csv", kTinyCsv);
  Dataset ds = load_csv(f.path, "group", {"age", "income"});
  CHECK(ds.n() == 3);
  CHECK(ds.dim() == 2);
  CHECK(ds.group_size(0) == 2);
  CHECK(ds.group_size(1) == 1);
  CHECK(ds.points[2][1] == doctest::Approx(1500.0));
}

TEST_CASE("load_csv errors name the problem") {
  TempFile f("fairclust_test2.csv", kTinyCsv);
  CHECK_THROWS_WITH_AS(load_csv(f.path, "sex", {"age"}), doctest::Contains("'sex'"),
                       ValidationError);
  TempFile bad("fairclust_test3.csv", "x,group\nabc,a\n");
  CHECK_THROWS_WITH_AS(load_csv(bad.path, "group", {"x"}), doctest::Contains("row 2"),
                       ValidationError);
  TempFile empty("fairclust_test4.csv", "");
  CHECK_THROWS_AS(load_csv(empty.path, "group", {"x"}), ValidationError);
  CHECK_THROWS_AS(load_csv("/nonexistent/no.csv", "group", {"x"}), ValidationError);
}

TEST_CASE("config parsing and validation") {
  ExperimentConfig cfg = parse_config(R"({
    "dataset": {"synthetic": {"seed": 3, "majority_size": 12, "minority_size": 6}},
    "k": 2,
    "cost_mode": "abs",
    "methods": ["standard", "ls-fair"],
    "sample": {"per_group": {"majority": 8, "minority": 4}, "repetitions": 2},
    "base_seed": 11
  })");
  CHECK(cfg.k == 2);
  CHECK(cfg.methods.size() == 2);
  CHECK(cfg.subsample.at("majority") == 8);
  CHECK(cfg.repetitions == 2);

  CHECK_THROWS_AS(parse_config("{"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"dataset": {}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({
    "dataset": {"synthetic": {}}, "methods": ["nope"]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({
    "dataset": {"synthetic": {}}, "sample": {"repetitions": 0}})"),
                  ValidationError);
}

TEST_CASE("run_kmedian_method produces valid solutions for every method") {
  Dataset ds = gen_synthetic(404, 12, 6);
  MetricCache m = build_metric(ds, MetricMode::Euclidean);
  const int k = 2;
  RelErrorCertificate cert = compute_certificate(ds, m, k, 8);
  for (const std::string& method : kKMedianMethods) {
    IntegralSolution sol = run_kmedian_method(method, ds, m, k, CostKind::Abs, &cert, 0.5, 77);
    CHECK(!sol.centers.empty());
    REQUIRE(sol.assignment.size() == static_cast<std::size_t>(ds.n()));
    for (int u = 0; u < ds.n(); ++u)
      CHECK(std::find(sol.centers.begin(), sol.centers.end(), sol.assignment[u]) !=
            sol.centers.end());
    if (method != "lp-fair-bicriteria") CHECK(static_cast<int>(sol.centers.size()) <= k);
  }
  CHECK_THROWS_AS(run_kmedian_method("median-of-medians", ds, m, k, CostKind::Abs, nullptr, 0.5, 1),
                  ValidationError);
}

TEST_CASE("experiment runs are deterministic and percentages recompute") {
  ExperimentConfig cfg = parse_config(R"({
    "dataset": {"synthetic": {"seed": 5, "majority_size": 12, "minority_size": 6}},
    "k": 2,
    "methods": ["standard", "ls-fair"],
    "sample": {"per_group": {"majority": 9, "minority": 5}, "repetitions": 2},
    "base_seed": 123
  })");
  ExperimentReport a = run_experiment(cfg);
  ExperimentReport b = run_experiment(cfg);
  CHECK(report_to_json(a) == report_to_json(b));

  double std_avg[2] = {0.0, 0.0};
  double opt_avg[2] = {0.0, 0.0};
  for (const MethodCell& c : a.cells) {
    int g = c.group == a.groups[0] ? 0 : 1;
    if (c.method == "standard") std_avg[g] = c.avg_cost;
    if (c.method == "group-optimal") opt_avg[g] = c.avg_cost;
  }
  for (const MethodCell& c : a.cells) {
    int g = c.group == a.groups[0] ? 0 : 1;
    CHECK(c.pct_vs_standard == doctest::Approx(100.0 * c.avg_cost / std_avg[g]).epsilon(1e-9));
    CHECK(c.pct_vs_group_opt == doctest::Approx(100.0 * c.avg_cost / opt_avg[g]).epsilon(1e-9));
    CHECK(c.seed_count == 2);
  }

  ExperimentConfig too_big = cfg;
  too_big.subsample["majority"] = 100;
  CHECK_THROWS_AS(run_experiment(too_big), ValidationError);
}

TEST_CASE("facility sweep produces per-grid-point rows") {
  ExperimentConfig cfg = parse_config(R"({
    "dataset": {"synthetic": {"seed": 9, "majority_size": 10, "minority_size": 5}},
    "k": 2,
    "methods": [],
    "base_seed": 3,
    "facility_sweep": {"opening_costs": [0.1, 2.0], "locations": 5}
  })");
  ExperimentReport rep = run_experiment(cfg);
  // 2 grid points x 2 fairness modes x 2 groups.
  CHECK(rep.sweep.size() == 8);
  for (const SweepCell& c : rep.sweep) CHECK(c.avg_distance >= 0.0);
}

TEST_CASE("report json round-trips field for field") {
  ExperimentReport rep;
  rep.groups = {"a", "b"};
  rep.cells.push_back({"standard", "a", 1.25, 100.0, 104.5, 3});
  rep.cells.push_back({"ls-fair", "b", 0.75, 60.0, 99.0, 3});
  rep.sweep.push_back({0.5, "per-group", "a", 1.5, 2.0, 2.25});
  rep.seeds_used = {7, 8, 9};
  ExperimentReport back = report_from_json(report_to_json(rep));
  CHECK(report_to_json(back) == report_to_json(rep));
  CHECK(back.cells[1].avg_cost == rep.cells[1].avg_cost);
  CHECK(back.sweep[0].fairness == "per-group");
  CHECK(back.seeds_used == rep.seeds_used);
}

TEST_CASE("csv emission has the fixed header and emit refuses to clobber") {
  ExperimentReport rep;
  rep.groups = {"a"};
  rep.cells.push_back({"standard", "a", 2.0, 100.0, 110.0, 1});
  std::string csv = report_to_csv(rep);
  CHECK(csv.rfind("method,group,avg_cost,pct_vs_standard,pct_vs_group_opt,seed_count\n", 0) == 0);

  TempFile f("fairclust_report_out.csv", "occupied");
  CHECK_THROWS_AS(emit_report(rep, ReportFormat::Csv, f.path, false), ValidationError);
  emit_report(rep, ReportFormat::Csv, f.path, true);
  std::ifstream in(f.path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "method,group,avg_cost,pct_vs_standard,pct_vs_group_opt,seed_count");
}
