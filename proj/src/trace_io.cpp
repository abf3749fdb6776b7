#include "grn/trace_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "grn/format.hpp"

namespace grn {

void write_trace_csv(const std::vector<StepTrace>& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const StepTrace& r : trace) {
    out << r.k << ',' << shortest(r.f) << ',' << shortest(r.grad_dual_norm) << ',' << shortest(r.gamma)
        << ',' << r.backtracks << ',' << shortest(r.step_primal_norm) << ',' << r.oracle_calls_cum << ','
        << shortest(r.wall_seconds) << ',' << (r.accepted ? 1 : 0) << '\n';
  }
}

void save_trace_csv(const std::vector<StepTrace>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw TraceError("cannot open '" + path + "' for writing");
  write_trace_csv(trace, out);
  if (!out) throw TraceError("write failed for '" + path + "'");
}

std::vector<StepTrace> parse_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw TraceError("trace: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw TraceError("trace: unexpected header '" + line + "'");
  std::vector<StepTrace> trace;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() != 9) {
      throw TraceError("trace line " + std::to_string(lineno) + ": expected 9 columns, got " +
                       std::to_string(cols.size()));
    }
    try {
      StepTrace r;
      r.k = std::stoi(cols[0]);
      r.f = parse_double(cols[1]);
      r.grad_dual_norm = parse_double(cols[2]);
      r.gamma = parse_double(cols[3]);
      r.backtracks = std::stoi(cols[4]);
      r.step_primal_norm = parse_double(cols[5]);
      r.oracle_calls_cum = std::stoll(cols[6]);
      r.wall_seconds = parse_double(cols[7]);
      if (cols[8] != "0" && cols[8] != "1") throw std::invalid_argument("accepted must be 0 or 1");
      r.accepted = cols[8] == "1";
      trace.push_back(r);
    } catch (const std::exception& e) {
      throw TraceError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return trace;
}

std::vector<StepTrace> load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open '" + path + "'");
  return parse_trace_csv(in);
}

RunSummary summarize(const SolverResult& result) {
  RunSummary s;
  s.status = to_string(result.status);
  if (!result.trace.empty()) {
    s.final_f = result.trace.back().f;
    s.final_grad_dual_norm = result.trace.back().grad_dual_norm;
    s.wall_seconds = result.trace.back().wall_seconds;
  }
  s.iterations = result.iterations();
  s.oracle_calls = result.oracle_calls();
  s.message = result.message;
  return s;
}

namespace {

nlohmann::json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return shortest(v);
}

}  // namespace

std::string summary_json(const RunSummary& s, const std::string& config_echo) {
  nlohmann::ordered_json j;
  j["problem"] = s.problem;
  j["method"] = s.method;
  j["status"] = s.status;
  j["final_f"] = finite_or_string(s.final_f);
  j["final_grad_dual_norm"] = finite_or_string(s.final_grad_dual_norm);
  j["iterations"] = s.iterations;
  j["oracle_calls"] = s.oracle_calls;
  j["wall_seconds"] = s.wall_seconds;
  j["seed"] = s.seed;
  j["x0"] = s.x0;
  j["trace_file"] = s.trace_file;
  if (!s.message.empty()) j["message"] = s.message;
  if (!config_echo.empty()) j["config"] = nlohmann::ordered_json::parse(config_echo);
  return j.dump(2) + "\n";
}

void write_failure_map_csv(const std::vector<FailureCell>& cells, std::ostream& out) {
  out << kFailureMapHeader << '\n';
  for (const FailureCell& c : cells) {
    out << shortest(c.x1) << ',' << shortest(c.x2) << ',' << c.status << ',' << c.iters << ','
        << shortest(c.final_f) << '\n';
  }
}

}  // namespace grn
