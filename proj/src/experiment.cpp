#include "grn/experiment.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include "grn/dataset.hpp"
#include "grn/format.hpp"

namespace grn {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty array of rows");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j.at(0).size());
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j.at(i);
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw ConfigError(where + ": ragged matrix");
    for (Index k = 0; k < cols; ++k) M(i, k) = row.at(k).get<double>();
  }
  return M;
}

Vector vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

Dataset load_dataset(const json& spec, const fs::path& base_dir, std::uint64_t seed) {
  if (!spec.is_object()) throw ConfigError("dataset: expected an object");
  if (spec.contains("synthetic")) {
    const json& s = spec.at("synthetic");
    const auto rows = require<Index>(s, "rows", "dataset.synthetic");
    const auto cols = require<Index>(s, "cols", "dataset.synthetic");
    if (rows < 1 || cols < 1) throw ConfigError("dataset.synthetic: rows and cols must be positive");
    return synthetic_dataset(rows, cols, get_or<std::uint64_t>(s, "seed", seed));
  }
  if (spec.contains("libsvm")) {
    fs::path path = spec.at("libsvm").get<std::string>();
    if (path.is_relative()) path = base_dir / path;
    if (!fs::exists(path)) throw ConfigError("dataset file not found: " + path.string());
    std::optional<Index> nf;
    if (spec.contains("n_features")) nf = spec.at("n_features").get<Index>();
    try {
      return load_libsvm(path, nf);
    } catch (const ParseError& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  throw ConfigError("dataset: expected 'synthetic' or 'libsvm'");
}

NormPair gram_norm(const ProblemInstance& problem) {
  if (!problem.design) throw ConfigError("norm 'gram' needs a dataset-based problem");
  try {
    return NormPair(problem.design->transpose() * *problem.design);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("A^T A is not positive definite: ") + e.what());
  }
}

GammaBoundSpec spec_from_json(const json& terms, const std::string& where) {
  GammaBoundSpec spec;
  if (!terms.is_array()) throw ConfigError(where + ": 'terms' must be an array");
  for (const json& t : terms) {
    spec.terms.push_back({require<double>(t, "M", where), require<double>(t, "alpha", where)});
  }
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return spec;
}

GammaRule gamma_rule_from_json(const json& j) {
  const auto type = require<std::string>(j, "type", "gamma_rule");
  if (type == "fixed") return FixedGamma{require<double>(j, "gamma", "gamma_rule")};
  if (type == "theoretical") return TheoreticalGamma{spec_from_json(j.value("terms", json()), "gamma_rule")};
  if (type == "empirical") {
    EstimatorConfig ec;
    ec.n_dirs = get_or(j, "n_dirs", ec.n_dirs);
    ec.n_radii = get_or(j, "n_radii", ec.n_radii);
    ec.grid_points = get_or(j, "grid_points", ec.grid_points);
    ec.tol = get_or(j, "tol", ec.tol);
    ec.symmetric_region = get_or(j, "symmetric_region", ec.symmetric_region);
    return EmpiricalGamma{ec};
  }
  if (type == "adaptive_func") return AdaptiveFuncSearch{get_or(j, "gamma0", 1.0)};
  if (type == "adaptive_grad") {
    AdaptiveGradSearch r;
    r.l = get_or(j, "l", r.l);
    r.M0 = get_or(j, "M0", r.M0);
    const auto mode = get_or<std::string>(j, "mode", "inverse");
    if (mode == "inverse") {
      r.mode = AdaptiveGradSearch::Gamma::kInverse;
    } else if (mode == "gradient") {
      r.mode = AdaptiveGradSearch::Gamma::kGradient;
    } else {
      throw ConfigError("gamma_rule.mode must be 'inverse' or 'gradient'");
    }
    return r;
  }
  throw ConfigError("unknown gamma_rule type '" + type + "'");
}

X0Spec x0_from_json(const json& j) {
  X0Spec x;
  if (j.is_null()) return x;
  const auto kind = require<std::string>(j, "kind", "x0");
  if (kind == "zeros") {
    x.kind = X0Spec::Kind::kZeros;
  } else if (kind == "constant") {
    x.kind = X0Spec::Kind::kConstant;
    x.value = require<double>(j, "value", "x0");
  } else if (kind == "explicit") {
    x.kind = X0Spec::Kind::kExplicit;
    const json& v = j.at("values");
    if (v.is_array() && !v.empty() && v.at(0).is_array()) {
      for (const json& row : v) {
        for (const json& e : row) x.values.push_back(e.get<double>());
        x.point_dim = static_cast<int>(row.size());
      }
    } else {
      x.values = v.get<std::vector<double>>();
      x.point_dim = static_cast<int>(x.values.size());
    }
  } else if (kind == "grid") {
    x.kind = X0Spec::Kind::kGrid;
    x.lo = require<std::vector<double>>(j, "lo", "x0");
    x.hi = require<std::vector<double>>(j, "hi", "x0");
    x.steps = get_or(j, "steps", 21);
    if (x.lo.size() != 2 || x.hi.size() != 2 || x.steps < 2) {
      throw ConfigError("x0 grid: lo and hi must have two entries and steps >= 2");
    }
  } else {
    throw ConfigError("unknown x0 kind '" + kind + "'");
  }
  return x;
}

}  // namespace

HessianStrategy strategy_by_name(const std::string& name, const ProblemInstance& problem) {
  StrategyKind kind;
  try {
    kind = strategy_kind_from_string(name);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  switch (kind) {
    case StrategyKind::kExact: return HessianStrategy::exact();
    case StrategyKind::kZero: return HessianStrategy::zero();
    case StrategyKind::kFisher: return HessianStrategy::fisher();
    case StrategyKind::kGaussNewtonConstant:
      if (!problem.design) throw ConfigError("gauss_newton_constant needs a dataset-based problem");
      return HessianStrategy::gauss_newton_constant(Matrix(problem.design->transpose() * *problem.design));
    case StrategyKind::kWeightedGaussNewton: return HessianStrategy::weighted_gauss_newton();
    case StrategyKind::kNonlinearPowerFull: return HessianStrategy::nonlinear_power_full();
    case StrategyKind::kNonlinearPowerFisherRankOne: return HessianStrategy::fisher_rank_one();
  }
  throw ConfigError("unknown strategy '" + name + "'");
}

std::vector<Vector> X0Spec::points(Index dim) const {
  std::vector<Vector> out;
  switch (kind) {
    case Kind::kZeros: out.push_back(Vector::Zero(dim)); break;
    case Kind::kConstant: out.push_back(Vector::Constant(dim, value)); break;
    case Kind::kExplicit: {
      if (point_dim != dim || values.size() % static_cast<std::size_t>(dim) != 0) {
        throw ConfigError("x0: explicit points must have dimension " + std::to_string(dim));
      }
      for (std::size_t i = 0; i < values.size(); i += dim) {
        out.push_back(Eigen::Map<const Vector>(values.data() + i, dim));
      }
      break;
    }
    case Kind::kGrid: {
      if (dim != 2) throw ConfigError("x0 grid requires a 2-D problem");
      // Row-major over x2 (outer) then x1, so the CSV reads as a raster.
      for (int j = 0; j < steps; ++j) {
        for (int i = 0; i < steps; ++i) {
          const double x1 = lo[0] + (hi[0] - lo[0]) * i / (steps - 1);
          const double x2 = lo[1] + (hi[1] - lo[1]) * j / (steps - 1);
          out.push_back(Vector{{x1, x2}});
        }
      }
      break;
    }
  }
  return out;
}

ProblemInstance build_problem(const json& spec, const fs::path& base_dir, std::uint64_t seed) {
  ProblemInstance p;
  p.type = require<std::string>(spec, "type", "problem");
  try {
    if (p.type == "logsumexp") {
      const double mu = get_or(spec, "mu", 1.0);
      Dataset data = load_dataset(spec.at("dataset"), base_dir, seed);
      p.design = data.A;
      p.oracle = logsumexp_oracle(std::move(data), mu);
      p.inexact_strategy = HessianStrategy::weighted_gauss_newton();
    } else if (p.type == "logistic") {
      Dataset data = load_dataset(spec.at("dataset"), base_dir, seed);
      p.design = data.A;
      p.oracle = logistic_oracle(std::move(data));
      p.inexact_strategy = HessianStrategy::fisher();
    } else if (p.type == "power_residual") {
      const auto op_name = require<std::string>(spec, "operator", "problem");
      const double pw = get_or(spec, "p", 2.0);
      ResidualPtr op;
      if (op_name == "linear") {
        Dataset data = load_dataset(spec.at("dataset"), base_dir, seed);
        p.design = data.A;
        op = linear_residuals(std::move(data));
      } else if (op_name == "rosenbrock") {
        op = rosenbrock_residuals();
      } else if (op_name == "chebyshev") {
        op = chebyshev_residuals(get_or<Index>(spec, "d", 2));
      } else {
        throw ConfigError("unknown residual operator '" + op_name + "'");
      }
      std::optional<Matrix> G;
      if (spec.contains("G")) G = matrix_from_json(spec.at("G"), "problem.G");
      p.oracle = power_residual_oracle(op, pw, G);
      p.inexact_strategy = HessianStrategy::nonlinear_power_full();
    } else if (p.type == "pnorm") {
      const auto dim = require<Index>(spec, "dim", "problem");
      p.oracle = pnorm_oracle(get_or(spec, "p", 3.0), NormPair::identity(dim));
      p.inexact_strategy = HessianStrategy::zero();
    } else if (p.type == "exp") {
      p.oracle = exp_scalar_oracle();
      p.inexact_strategy = HessianStrategy::zero();
    } else if (p.type == "quadratic") {
      Matrix Q;
      if (spec.contains("Q")) {
        Q = matrix_from_json(spec.at("Q"), "problem.Q");
      } else {
        const auto dim = require<Index>(spec, "dim", "problem");
        const Matrix M = synthetic_dataset(dim, dim, get_or<std::uint64_t>(spec, "seed", seed)).A;
        Q = M.transpose() * M + Matrix::Identity(dim, dim);
      }
      Vector c = spec.contains("center") ? vector_from_json(spec.at("center"), "problem.center")
                                         : Vector::Zero(Q.rows());
      p.oracle = quadratic_oracle(std::move(Q), std::move(c));
      p.inexact_strategy = HessianStrategy::zero();
    } else {
      throw ConfigError("unknown problem type '" + p.type + "'");
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  p.label = p.oracle->name();
  return p;
}

SolverConfig method_preset(const std::string& preset, const ProblemInstance& problem) {
  SolverConfig c;
  if (preset == "exact_func_search") {
    c.strategy = HessianStrategy::exact();
    c.gamma_rule = AdaptiveFuncSearch{};
  } else if (preset == "inexact_func_search") {
    c.strategy = problem.inexact_strategy;
    c.gamma_rule = AdaptiveFuncSearch{};
  } else if (preset == "grad_search_inv") {
    c.strategy = HessianStrategy::exact();
    c.gamma_rule = AdaptiveGradSearch{1.0, 1.0, AdaptiveGradSearch::Gamma::kInverse};
  } else if (preset == "grad_search_grad") {
    c.strategy = HessianStrategy::exact();
    c.gamma_rule = AdaptiveGradSearch{1.0, 1.0, AdaptiveGradSearch::Gamma::kGradient};
  } else if (preset == "gradient_method") {
    c.strategy = HessianStrategy::zero();
    c.gamma_rule = AdaptiveFuncSearch{};
  } else if (preset == "gauss_newton") {
    c.strategy = HessianStrategy::zero();
    c.gamma_rule = AdaptiveFuncSearch{};
    c.norm = gram_norm(problem);
  } else if (preset == "fisher_term") {
    c.strategy = HessianStrategy::fisher_rank_one();
    c.gamma_rule = AdaptiveFuncSearch{};
    c.norm = gram_norm(problem);
  } else {
    throw ConfigError("unknown method preset '" + preset + "'");
  }
  return c;
}

std::uint64_t run_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ExperimentConfig parse_experiment_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig cfg;
  cfg.raw = doc;
  cfg.name = get_or<std::string>(doc, "name", cfg.name);
  cfg.seed = get_or<std::uint64_t>(doc, "seed", 0);
  cfg.output_dir = get_or<std::string>(doc, "output_dir", "out/" + cfg.name);
  cfg.threads = get_or(doc, "threads", 1);
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  if (!doc.contains("problem")) throw ConfigError("config: missing 'problem'");
  cfg.problem = build_problem(doc.at("problem"), base_dir, cfg.seed);
  cfg.x0 = x0_from_json(doc.value("x0", json()));

  if (doc.contains("stop")) {
    const json& s = doc.at("stop");
    cfg.stop.grad_tol = get_or(s, "grad_tol", cfg.stop.grad_tol);
    if (s.contains("f_tol")) cfg.stop.f_tol = s.at("f_tol").get<double>();
    cfg.stop.max_iters = get_or(s, "max_iters", cfg.stop.max_iters);
    if (s.contains("max_oracle_calls")) cfg.stop.max_oracle_calls = s.at("max_oracle_calls").get<std::int64_t>();
  }

  const json methods = doc.value("methods", json::array());
  if (!methods.is_array() || methods.empty()) throw ConfigError("config: 'methods' must be a nonempty array");
  for (const json& m : methods) {
    MethodSpec spec;
    if (m.is_string()) {
      spec.preset = m.get<std::string>();
      spec.name = spec.preset;
    } else {
      spec.preset = get_or<std::string>(m, "preset", "");
      spec.name = get_or<std::string>(m, "name", spec.preset);
      if (spec.name.empty()) throw ConfigError("method without preset needs a 'name'");
    }
    spec.solver = spec.preset.empty() ? SolverConfig{} : method_preset(spec.preset, cfg.problem);
    if (m.is_object()) {
      if (m.contains("strategy")) spec.solver.strategy = strategy_by_name(m.at("strategy").get<std::string>(), cfg.problem);
      if (m.contains("gamma_rule")) spec.solver.gamma_rule = gamma_rule_from_json(m.at("gamma_rule"));
      if (m.contains("norm")) {
        const auto norm = m.at("norm").get<std::string>();
        if (norm == "identity") {
          spec.solver.norm.reset();
        } else if (norm == "gram") {
          spec.solver.norm = gram_norm(cfg.problem);
        } else {
          throw ConfigError("norm must be 'identity' or 'gram'");
        }
      }
      spec.solver.max_backtracks = get_or(m, "max_backtracks", spec.solver.max_backtracks);
    }
    cfg.methods.push_back(std::move(spec));
  }
  cfg.theory = doc.value("theory", json());
  cfg.inexactness = doc.value("inexactness", json());
  cfg.probe = doc.value("gamma_probe", json());
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return parse_experiment_config(doc, path.parent_path().empty() ? fs::path(".") : path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg, bool write_files) {
  const Index dim = cfg.problem.oracle->dim();
  const std::vector<Vector> starts = cfg.x0.points(dim);

  struct Job {
    std::size_t method;
    std::size_t start;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    for (std::size_t s = 0; s < starts.size(); ++s) jobs.push_back({m, s});
  }

  ExperimentOutput out;
  out.runs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const Job& job = jobs[i];
        const MethodSpec& method = cfg.methods[job.method];
        SolverConfig sc = method.solver;
        sc.stop = cfg.stop;
        sc.seed = run_seed(cfg.seed, i);
        RunArtifact& a = out.runs[i];
        a.method = method.name;
        a.run_index = i;
        a.x0 = starts[job.start];
        try {
          a.result = run(*cfg.problem.oracle, sc, a.x0);
        } catch (const DomainError& e) {
          a.result.status = SolverStatus::kStalled;
          a.result.message = e.what();
        }
        a.summary = summarize(a.result);
        a.summary.problem = cfg.problem.label;
        a.summary.method = method.name;
        a.summary.seed = sc.seed;
        a.summary.x0.assign(a.x0.data(), a.x0.data() + a.x0.size());
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n_threads = std::min<int>(cfg.threads, static_cast<int>(std::max<std::size_t>(1, jobs.size())));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  const bool grid = cfg.x0.kind == X0Spec::Kind::kGrid;
  for (const RunArtifact& a : out.runs) {
    const bool failed = a.result.status == SolverStatus::kStalled ||
                        a.result.status == SolverStatus::kFailedLinalg;
    if (failed && !grid) out.any_failed = true;
  }
  if (!write_files) return out;

  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw TraceError("cannot create output directory '" + cfg.output_dir.string() + "': " + ec.message());

  json echo = cfg.raw;
  echo["seed"] = cfg.seed;
  echo["output_dir"] = cfg.output_dir.string();
  const std::string echo_text = echo.dump();

  if (grid) {
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      std::vector<FailureCell> cells;
      for (const RunArtifact& a : out.runs) {
        if (a.method != cfg.methods[m].name) continue;
        cells.push_back({a.x0[0], a.x0[1], a.summary.status, a.summary.iterations, a.summary.final_f});
      }
      const fs::path path = cfg.output_dir / ("failure_map_" + cfg.methods[m].name + ".csv");
      std::ofstream f(path);
      if (!f) throw TraceError("cannot open '" + path.string() + "' for writing");
      write_failure_map_csv(cells, f);
      out.files.push_back(path);
    }
    return out;
  }

  for (RunArtifact& a : out.runs) {
    const std::string stem = a.method + "_run" + std::to_string(a.run_index);
    const fs::path trace_path = cfg.output_dir / (stem + ".csv");
    save_trace_csv(a.result.trace, trace_path.string());
    a.summary.trace_file = trace_path.filename().string();
    const fs::path summary_path = cfg.output_dir / (stem + ".json");
    std::ofstream f(summary_path);
    if (!f) throw TraceError("cannot open '" + summary_path.string() + "' for writing");
    f << summary_json(a.summary, echo_text);
    out.files.push_back(trace_path);
    out.files.push_back(summary_path);
  }
  return out;
}

}  // namespace grn
