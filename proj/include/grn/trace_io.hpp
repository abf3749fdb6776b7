#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "grn/solver.hpp"

namespace grn {

inline constexpr const char* kTraceHeader =
    "iter,f,grad_dual_norm,gamma,backtracks,step_norm,oracle_calls,wall_seconds,accepted";
inline constexpr const char* kFailureMapHeader = "x1,x2,status,iters,final_f";

/// Thrown on I/O failures and malformed trace files.
class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_trace_csv(const std::vector<StepTrace>& trace, std::ostream& out);
void save_trace_csv(const std::vector<StepTrace>& trace, const std::string& path);
std::vector<StepTrace> parse_trace_csv(std::istream& in);
std::vector<StepTrace> load_trace_csv(const std::string& path);

struct RunSummary {
  std::string problem;
  std::string method;
  std::string status;
  double final_f = 0.0;
  double final_grad_dual_norm = 0.0;
  int iterations = 0;
  std::int64_t oracle_calls = 0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> x0;
  std::string trace_file;
  std::string message;
};

RunSummary summarize(const SolverResult& result);
/// Pretty-printed JSON object. `config_echo` (a JSON document or empty) is embedded as "config".
std::string summary_json(const RunSummary& summary, const std::string& config_echo = "");

struct FailureCell {
  double x1 = 0.0;
  double x2 = 0.0;
  std::string status;
  int iters = 0;
  double final_f = 0.0;
};

void write_failure_map_csv(const std::vector<FailureCell>& cells, std::ostream& out);

}  // namespace grn
