#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "grn/solver.hpp"
#include "grn/theory.hpp"
#include "grn/trace_io.hpp"

namespace grn {

/// Invalid or unresolvable experiment configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemInstance {
  std::string type;  // logsumexp | logistic | power_residual | pnorm | exp | quadratic
  std::string label;
  OraclePtr oracle;
  std::optional<Matrix> design;  // A, when the problem is built on a dataset
  HessianStrategy inexact_strategy;  // used by the inexact_func_search preset
};

struct MethodSpec {
  std::string name;
  std::string preset;  // empty when fully custom
  SolverConfig solver;
};

struct X0Spec {
  enum class Kind { kZeros, kConstant, kExplicit, kGrid };
  Kind kind = Kind::kZeros;
  double value = 0.0;
  std::vector<double> values;  // explicit points, concatenated
  int point_dim = 0;
  std::vector<double> lo, hi;  // grid box (2-D)
  int steps = 21;

  std::vector<Vector> points(Index dim) const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  ProblemInstance problem;
  std::vector<MethodSpec> methods;
  X0Spec x0;
  StopCriteria stop;
  int threads = 1;
  nlohmann::ordered_json raw;  // echo of the parsed document
  nlohmann::ordered_json theory;       // optional "theory" block (predict)
  nlohmann::ordered_json inexactness;  // optional "inexactness" block
  nlohmann::ordered_json probe;        // optional "gamma_probe" block
};

/// Relative dataset paths are resolved against base_dir.
ExperimentConfig parse_experiment_config(const nlohmann::ordered_json& doc,
                                         const std::filesystem::path& base_dir = ".");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

ProblemInstance build_problem(const nlohmann::ordered_json& spec, const std::filesystem::path& base_dir,
                              std::uint64_t seed);
/// Strategy by its to_string() name; gauss_newton_constant uses the problem's design matrix.
HessianStrategy strategy_by_name(const std::string& name, const ProblemInstance& problem);

/// Named methods: exact_func_search, inexact_func_search, grad_search_inv,
/// grad_search_grad, gradient_method, gauss_newton, fisher_term.
SolverConfig method_preset(const std::string& preset, const ProblemInstance& problem);

/// Seed of run `index` derived from the experiment seed (splitmix64).
std::uint64_t run_seed(std::uint64_t seed, std::uint64_t index);

struct RunArtifact {
  std::string method;
  std::size_t run_index = 0;
  Vector x0;
  SolverResult result;
  RunSummary summary;
};

struct ExperimentOutput {
  std::vector<RunArtifact> runs;
  std::vector<std::filesystem::path> files;
  bool any_failed = false;  // some run ended stalled / failed_linalg
};

/// Runs every (method, x0) pair. With write_files, emits one CSV trace and one JSON
/// summary per run, or one failure-map CSV per method for grid starts.
ExperimentOutput run_experiment(const ExperimentConfig& cfg, bool write_files = true);

}  // namespace grn
