#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "grn/experiment.hpp"

using namespace grn;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(GRN_SOURCE_DIR) / "configs";

json smoke_doc() {
  return json::parse(R"({
    "name": "unit",
    "seed": 5,
    "problem": {"type": "quadratic", "dim": 3, "seed": 2},
    "x0": {"kind": "constant", "value": 1.0},
    "stop": {"grad_tol": 1e-10, "max_iters": 40},
    "methods": ["exact_func_search", "gradient_method"]
  })");
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("shipped configs parse") {
  for (const char* name : {"smoke.json", "logsumexp.json", "rosenbrock_failure_map.json", "pnorm_predict.json"}) {
    CAPTURE(name);
    const ExperimentConfig cfg = load_experiment_config(kConfigs / name);
    CHECK_FALSE(cfg.methods.empty());
    CHECK(cfg.problem.oracle != nullptr);
  }
}

TEST_CASE("config defaults and fields") {
  const ExperimentConfig cfg = parse_experiment_config(smoke_doc());
  CHECK(cfg.name == "unit");
  CHECK(cfg.seed == 5);
  CHECK(cfg.output_dir == fs::path("out/unit"));
  CHECK(cfg.threads == 1);
  CHECK(cfg.stop.max_iters == 40);
  REQUIRE(cfg.methods.size() == 2);
  CHECK(cfg.methods[1].name == "gradient_method");
  CHECK(cfg.methods[1].solver.strategy.kind() == StrategyKind::kZero);
  CHECK(cfg.problem.oracle->dim() == 3);
  const auto pts = cfg.x0.points(3);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0] == Vector::Ones(3));
}

TEST_CASE("method presets") {
  const ExperimentConfig lse = load_experiment_config(kConfigs / "logsumexp.json");
  const ProblemInstance& p = lse.problem;
  CHECK(method_preset("inexact_func_search", p).strategy.kind() == StrategyKind::kWeightedGaussNewton);
  CHECK(method_preset("gauss_newton", p).norm.has_value());
  CHECK(method_preset("gauss_newton", p).strategy.kind() == StrategyKind::kZero);
  CHECK(std::holds_alternative<AdaptiveGradSearch>(method_preset("grad_search_grad", p).gamma_rule));
  CHECK(std::get<AdaptiveGradSearch>(method_preset("grad_search_grad", p).gamma_rule).mode ==
        AdaptiveGradSearch::Gamma::kGradient);
  CHECK(method_preset("fisher_term", p).strategy.kind() == StrategyKind::kNonlinearPowerFisherRankOne);
  CHECK_THROWS_AS(method_preset("newton", p), ConfigError);

  const ExperimentConfig rb = load_experiment_config(kConfigs / "rosenbrock_failure_map.json");
  CHECK(method_preset("inexact_func_search", rb.problem).strategy.kind() == StrategyKind::kNonlinearPowerFull);
  CHECK_THROWS_AS(method_preset("gauss_newton", rb.problem), ConfigError);
}

TEST_CASE("custom methods") {
  json doc = smoke_doc();
  doc["methods"] = json::parse(R"([
    {"name": "fixed", "strategy": "exact", "gamma_rule": {"type": "fixed", "gamma": 0.5}},
    {"name": "theory", "strategy": "zero", "gamma_rule": {"type": "theoretical", "terms": [{"M": 1, "alpha": 0.5}]}},
    {"name": "grad", "preset": "grad_search_inv", "gamma_rule": {"type": "adaptive_grad", "mode": "gradient", "M0": 2}},
    {"name": "emp", "gamma_rule": {"type": "empirical", "n_dirs": 4}, "max_backtracks": 7}
  ])");
  const ExperimentConfig cfg = parse_experiment_config(doc);
  REQUIRE(cfg.methods.size() == 4);
  CHECK(std::get<FixedGamma>(cfg.methods[0].solver.gamma_rule).gamma == 0.5);
  CHECK(std::get<TheoreticalGamma>(cfg.methods[1].solver.gamma_rule).spec.size() == 1);
  CHECK(std::get<AdaptiveGradSearch>(cfg.methods[2].solver.gamma_rule).M0 == 2.0);
  CHECK(std::get<EmpiricalGamma>(cfg.methods[3].solver.gamma_rule).estimator.n_dirs == 4);
  CHECK(cfg.methods[3].solver.max_backtracks == 7);
}

TEST_CASE("x0 forms") {
  json doc = smoke_doc();
  doc["x0"] = json::parse(R"({"kind": "explicit", "values": [[1, 2, 3], [4, 5, 6]]})");
  auto pts = parse_experiment_config(doc).x0.points(3);
  REQUIRE(pts.size() == 2);
  CHECK(pts[1] == Vector{{4.0, 5.0, 6.0}});

  doc["x0"] = json::parse(R"({"kind": "explicit", "values": [1, 2]})");
  CHECK_THROWS_AS(parse_experiment_config(doc).x0.points(3), ConfigError);

  doc["problem"] = json::parse(R"({"type": "power_residual", "operator": "rosenbrock"})");
  doc["x0"] = json::parse(R"({"kind": "grid", "lo": [-1, 0], "hi": [1, 2], "steps": 3})");
  pts = parse_experiment_config(doc).x0.points(2);
  REQUIRE(pts.size() == 9);
  CHECK(pts[0] == Vector{{-1.0, 0.0}});
  CHECK(pts[1] == Vector{{0.0, 0.0}});
  CHECK(pts[3] == Vector{{-1.0, 1.0}});
  CHECK(pts[8] == Vector{{1.0, 2.0}});
}

TEST_CASE("configuration errors") {
  const auto expect_error = [](const char* patch) {
    json doc = smoke_doc();
    doc.merge_patch(json::parse(patch));
    CAPTURE(patch);
    CHECK_THROWS_AS(parse_experiment_config(doc), ConfigError);
  };
  expect_error(R"({"problem": null})");
  expect_error(R"({"problem": {"type": "banana"}})");
  expect_error(R"({"methods": []})");
  expect_error(R"({"methods": ["newton"]})");
  expect_error(R"({"methods": [{"name": "x", "strategy": "magic"}]})");
  expect_error(R"({"methods": [{"name": "x", "gamma_rule": {"type": "adaptive_grad", "mode": "sideways"}}]})");
  expect_error(R"({"methods": [{"name": "x", "gamma_rule": {"type": "theoretical", "terms": [{"M": 1, "alpha": 2}]}}]})");
  expect_error(R"({"methods": [{"name": "x", "norm": "gram"}]})");
  expect_error(R"({"threads": 0})");
  expect_error(R"({"x0": {"kind": "spiral"}})");
  expect_error(R"({"problem": {"type": "logistic", "dataset": {"libsvm": "does-not-exist.libsvm"}}})");
  expect_error(R"({"problem": {"type": "logsumexp", "mu": -1, "dataset": {"synthetic": {"rows": 3, "cols": 2}}}})");

  CHECK_THROWS_AS(load_experiment_config("/nonexistent/config.json"), ConfigError);
  const fs::path bad = fs::temp_directory_path() / "grn_bad_config.json";
  std::ofstream(bad) << "{ not json";
  CHECK_THROWS_AS(load_experiment_config(bad), ConfigError);
  fs::remove(bad);
}

TEST_CASE("libsvm datasets resolve relative to the config") {
  const fs::path dir = fresh_dir("grn_libsvm_cfg");
  fs::create_directories(dir / "data");
  std::ofstream(dir / "data" / "tiny.libsvm") << "+1 1:0.5 2:1\n-1 1:-1 2:0.25\n+1 2:-0.5\n";
  std::ofstream(dir / "cfg.json") << R"({"problem": {"type": "logistic", "dataset": {"libsvm": "data/tiny.libsvm", "n_features": 2}},
                                        "methods": ["exact_func_search"]})";
  const ExperimentConfig cfg = load_experiment_config(dir / "cfg.json");
  CHECK(cfg.problem.oracle->dim() == 2);
  REQUIRE(cfg.problem.design.has_value());
  CHECK(cfg.problem.design->rows() == 3);
  fs::remove_all(dir);
}

TEST_CASE("run seeds") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 100; ++i) seen.insert(run_seed(42, i));
  CHECK(seen.size() == 100);
  CHECK(run_seed(42, 3) == run_seed(42, 3));
  CHECK(run_seed(42, 3) != run_seed(43, 3));
}

TEST_CASE("smoke experiment writes traces and summaries") {
  ExperimentConfig cfg = parse_experiment_config(smoke_doc());
  cfg.output_dir = fresh_dir("grn_smoke_unit");
  const ExperimentOutput out = run_experiment(cfg);
  CHECK_FALSE(out.any_failed);
  REQUIRE(out.runs.size() == 2);
  CHECK(out.runs[0].result.status == SolverStatus::kConverged);
  CHECK(out.files.size() == 4);
  for (const auto& f : out.files) CHECK(fs::exists(f));
  const auto trace = load_trace_csv((cfg.output_dir / "exact_func_search_run0.csv").string());
  CHECK(static_cast<int>(trace.size()) == out.runs[0].result.iterations() + 1);
  std::ifstream js(cfg.output_dir / "exact_func_search_run0.json");
  const json summary = json::parse(js);
  CHECK(summary.at("status") == "converged");
  CHECK(summary.at("trace_file") == "exact_func_search_run0.csv");
  CHECK(summary.at("config").at("name") == "unit");
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("experiments are deterministic across thread counts") {
  json doc = json::parse(R"({
    "problem": {"type": "logistic", "dataset": {"synthetic": {"rows": 40, "cols": 5, "seed": 3}}},
    "x0": {"kind": "explicit", "values": [[0, 0, 0, 0, 0], [1, -1, 1, -1, 1], [0.5, 0.5, 0.5, 0.5, 0.5]]},
    "stop": {"max_iters": 50},
    "methods": ["exact_func_search", "inexact_func_search", "gauss_newton"]
  })");
  ExperimentConfig a = parse_experiment_config(doc);
  ExperimentConfig b = parse_experiment_config(doc);
  b.threads = 4;
  const ExperimentOutput ra = run_experiment(a, false), rb = run_experiment(b, false);
  REQUIRE(ra.runs.size() == 9);
  for (std::size_t i = 0; i < ra.runs.size(); ++i) {
    const auto& ta = ra.runs[i].result.trace;
    const auto& tb = rb.runs[i].result.trace;
    REQUIRE(ta.size() == tb.size());
    for (std::size_t k = 0; k < ta.size(); ++k) {
      CHECK(ta[k].f == tb[k].f);
      CHECK(ta[k].gamma == tb[k].gamma);
      CHECK(ta[k].oracle_calls_cum == tb[k].oracle_calls_cum);
    }
    CHECK(ra.runs[i].summary.seed == rb.runs[i].summary.seed);
  }
}

TEST_CASE("grid starts produce failure maps") {
  json doc = json::parse(R"({
    "problem": {"type": "power_residual", "operator": "rosenbrock", "p": 2},
    "x0": {"kind": "grid", "lo": [-2, -2], "hi": [2, 2], "steps": 5},
    "stop": {"max_iters": 200},
    "methods": ["exact_func_search", "inexact_func_search"]
  })");
  ExperimentConfig cfg = parse_experiment_config(doc);
  cfg.output_dir = fresh_dir("grn_grid_unit");
  const ExperimentOutput out = run_experiment(cfg);
  CHECK_FALSE(out.any_failed);
  REQUIRE(out.files.size() == 2);
  std::ifstream in(cfg.output_dir / "failure_map_inexact_func_search.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == kFailureMapHeader);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 25);
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("failed runs are flagged") {
  json doc = smoke_doc();
  doc["problem"] = json::parse(R"({"type": "power_residual", "operator": "rosenbrock", "p": 2})");
  doc["x0"] = json::parse(R"({"kind": "explicit", "values": [0, 1]})");
  doc["methods"] = json::parse(R"([{"name": "huge", "strategy": "exact", "gamma_rule": {"type": "fixed", "gamma": 1e8}}])");
  const ExperimentOutput out = run_experiment(parse_experiment_config(doc), false);
  CHECK(out.any_failed);
  CHECK(out.runs[0].summary.status == "failed_linalg");
}
