#include "grn/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "grn/dataset.hpp"
#include "grn/experiment.hpp"
#include "grn/format.hpp"
#include "grn/gns.hpp"
#include "grn/theory.hpp"

namespace grn {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> max_iters;
  std::optional<double> grad_tol;
  std::optional<int> threads;
  bool quiet = false;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("config", f.config, "Experiment configuration (JSON)")->required();
  sub->add_option("--seed", f.seed, "Override the experiment seed");
  sub->add_option("--out", f.out, "Override the output directory");
  sub->add_option("--max-iters", f.max_iters, "Override the iteration budget");
  sub->add_option("--grad-tol", f.grad_tol, "Override the gradient-norm tolerance");
  sub->add_option("--threads", f.threads, "Worker threads for independent runs");
  sub->add_flag("--quiet", f.quiet, "Suppress progress output");
}

ExperimentConfig load_with_overrides(const CommonFlags& f) {
  json doc;
  {
    std::ifstream in(f.config);
    if (!in) throw ConfigError("cannot open config file '" + f.config + "'");
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(f.config + ": " + e.what());
    }
  }
  // The seed feeds dataset generation, so it is applied before parsing.
  if (f.seed) doc["seed"] = *f.seed;
  const fs::path base = fs::path(f.config).parent_path();
  ExperimentConfig cfg;
  try {
    cfg = parse_experiment_config(doc, base.empty() ? fs::path(".") : base);
  } catch (const ConfigError& e) {
    throw ConfigError(f.config + ": " + e.what());
  }
  if (f.out) cfg.output_dir = *f.out;
  if (f.max_iters) cfg.stop.max_iters = *f.max_iters;
  if (f.grad_tol) cfg.stop.grad_tol = *f.grad_tol;
  if (f.threads) cfg.threads = std::max(1, *f.threads);
  return cfg;
}

std::ofstream open_output(const fs::path& dir, const std::string& file, fs::path* path_out) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw TraceError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const fs::path path = dir / file;
  std::ofstream f(path);
  if (!f) throw TraceError("cannot open '" + path.string() + "' for writing");
  if (path_out) *path_out = path;
  return f;
}

int cmd_run(const CommonFlags& flags, std::ostream& out) {
  const ExperimentConfig cfg = load_with_overrides(flags);
  const ExperimentOutput result = run_experiment(cfg, true);
  if (!flags.quiet) {
    for (const RunArtifact& a : result.runs) {
      if (cfg.x0.kind == X0Spec::Kind::kGrid) continue;
      out << std::left << std::setw(24) << a.method << " status=" << a.summary.status
          << " iters=" << a.summary.iterations << " oracle_calls=" << a.summary.oracle_calls
          << " f=" << shortest(a.summary.final_f) << " grad=" << shortest(a.summary.final_grad_dual_norm)
          << '\n';
    }
    if (cfg.x0.kind == X0Spec::Kind::kGrid) {
      for (const MethodSpec& m : cfg.methods) {
        int failed = 0, total = 0;
        for (const RunArtifact& a : result.runs) {
          if (a.method != m.name) continue;
          ++total;
          failed += a.result.status != SolverStatus::kConverged;
        }
        out << std::left << std::setw(24) << m.name << " cells=" << total << " not_converged=" << failed << '\n';
      }
    }
    for (const fs::path& p : result.files) out << "wrote " << p.string() << '\n';
  }
  return result.any_failed ? kExitRunFailure : kExitOk;
}

EstimatorConfig estimator_from_block(const json& block, std::uint64_t seed) {
  EstimatorConfig ec;
  ec.seed = seed;
  if (block.is_object()) {
    ec.n_dirs = block.value("n_dirs", ec.n_dirs);
    ec.n_radii = block.value("n_radii", ec.n_radii);
    ec.grid_points = block.value("grid_points", ec.grid_points);
    ec.tol = block.value("tol", ec.tol);
    ec.symmetric_region = block.value("symmetric_region", ec.symmetric_region);
  }
  return ec;
}

int cmd_gamma_probe(const CommonFlags& flags, std::ostream& out) {
  ExperimentConfig cfg = load_with_overrides(flags);
  const MethodSpec& method = cfg.methods.front();
  const EstimatorConfig ec = estimator_from_block(cfg.probe, cfg.seed);
  const int max_points = cfg.probe.is_object() ? cfg.probe.value("max_points", 50) : 50;
  const Oracle& oracle = *cfg.problem.oracle;
  const NormPair np = method.solver.norm ? *method.solver.norm : NormPair::identity(oracle.dim());
  const auto starts = cfg.x0.points(oracle.dim());

  std::ostringstream csv;
  bool failed = false;
  if (cfg.x0.kind == X0Spec::Kind::kGrid) {
    csv << "x1,x2,grad_dual_norm,gamma_hat\n";
    for (const Vector& x : starts) {
      const Vector g = oracle.gradient(x);
      const double gd = np.dual_norm(g);
      const double gh = gd > 0.0 ? estimate_gamma(oracle, method.solver.strategy, x, g, np, ec) : kGammaMax;
      csv << shortest(x[0]) << ',' << shortest(x[1]) << ',' << shortest(gd) << ',' << shortest(gh) << '\n';
    }
  } else {
    csv << "run,iter,grad_dual_norm,gamma_method,gamma_hat\n";
    for (std::size_t s = 0; s < starts.size(); ++s) {
      SolverConfig sc = method.solver;
      sc.stop = cfg.stop;
      sc.seed = run_seed(cfg.seed, s);
      sc.record_iterates = true;
      const SolverResult r = run(oracle, sc, starts[s]);
      failed = failed || r.status == SolverStatus::kStalled || r.status == SolverStatus::kFailedLinalg;
      const int K = std::min<int>(r.iterations(), max_points);
      for (int k = 0; k < K; ++k) {
        const Vector& x = r.iterates[k];
        const Vector g = oracle.gradient(x);
        EstimatorConfig local = ec;
        local.step_direction = Vector(r.iterates[k + 1] - x);
        const double gh = estimate_gamma(oracle, method.solver.strategy, x, g, np, local);
        csv << s << ',' << k << ',' << shortest(r.trace[k].grad_dual_norm) << ','
            << shortest(r.trace[k + 1].gamma) << ',' << shortest(gh) << '\n';
      }
    }
  }
  fs::path path;
  open_output(cfg.output_dir, "gamma_probe_" + method.name + ".csv", &path) << csv.str();
  if (!flags.quiet) out << csv.str() << "wrote " << path.string() << '\n';
  return failed ? kExitRunFailure : kExitOk;
}

int cmd_inexactness(const CommonFlags& flags, std::ostream& out) {
  ExperimentConfig cfg = load_with_overrides(flags);
  const json& block = cfg.inexactness;
  const Oracle& oracle = *cfg.problem.oracle;
  const MethodSpec& method = cfg.methods.front();
  HessianStrategy strategy = cfg.problem.inexact_strategy;
  if (block.is_object() && block.contains("strategy")) {
    strategy = strategy_by_name(block.at("strategy").get<std::string>(), cfg.problem);
  }
  const double beta = block.is_object() ? block.value("beta", 0.0) : 0.0;
  const int max_points = block.is_object() ? block.value("max_points", 50) : 50;
  const NormPair np = method.solver.norm ? *method.solver.norm : NormPair::identity(oracle.dim());

  std::vector<Vector> points;
  bool failed = false;
  const auto starts = cfg.x0.points(oracle.dim());
  for (std::size_t s = 0; s < starts.size(); ++s) {
    SolverConfig sc = method.solver;
    sc.stop = cfg.stop;
    sc.seed = run_seed(cfg.seed, s);
    sc.record_iterates = true;
    const SolverResult r = run(oracle, sc, starts[s]);
    failed = failed || r.status == SolverStatus::kStalled || r.status == SolverStatus::kFailedLinalg;
    for (const Vector& x : r.iterates) {
      if (static_cast<int>(points.size()) >= max_points) break;
      points.push_back(x);
    }
  }
  InexactnessReport rep;
  try {
    rep = measure_inexactness(oracle, strategy, points, np, beta);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  json j;
  j["problem"] = cfg.problem.label;
  j["strategy"] = strategy.name();
  j["beta"] = beta;
  j["C1"] = rep.bound.C1;
  j["C2"] = rep.bound.C2;
  j["fitted_exponent"] = std::isfinite(rep.fitted_exponent) ? json(rep.fitted_exponent) : json(nullptr);
  j["residuals"] = rep.residuals;
  j["grad_norms"] = rep.grad_norms;
  fs::path path;
  open_output(cfg.output_dir, "inexactness_" + strategy.name() + ".json", &path) << j.dump(2) << '\n';
  if (!flags.quiet) {
    out << "strategy=" << strategy.name() << " beta=" << shortest(beta) << " C1=" << shortest(rep.bound.C1)
        << " C2=" << shortest(rep.bound.C2) << " fitted_exponent=" << shortest(rep.fitted_exponent)
        << " points=" << rep.residuals.size() << '\n'
        << "wrote " << path.string() << '\n';
  }
  return failed ? kExitRunFailure : kExitOk;
}

ProblemClassParams theory_params(const ExperimentConfig& cfg) {
  const json& t = cfg.theory;
  if (!t.is_object()) throw ConfigError("predict: config has no 'theory' block");
  ProblemClassParams p;
  if (t.contains("class")) {
    const json& c = t.at("class");
    const auto type = c.value("type", std::string());
    if (type == "pnorm") {
      const double pw = c.value("p", 3.0);
      if (!(pw >= 3.0)) throw ConfigError("theory.class pnorm needs p >= 3");
      const GenScParams gs = pnorm_gen_sc_params(pw);
      p.spec.terms.push_back(gen_sc_term(gs.Gq, gs.q));
      p.dominance = uniformly_convex_dominance(pw, std::pow(2.0, 2.0 - pw));
    } else if (type == "qsc") {
      p.spec.terms.push_back({c.value("M", 1.0), 0.0});
    } else if (type == "holder_hessian") {
      const double nu = c.value("nu", 1.0);
      // ((1+nu) g / L)^{1/(1+nu)} = g^{1/(1+nu)} / (L/(1+nu))^{1/(1+nu)}
      p.spec.terms.push_back({std::pow(c.value("L", 1.0) / (1.0 + nu), 1.0 / (1.0 + nu)), 1.0 / (1.0 + nu)});
    } else {
      throw ConfigError("theory.class: unknown type '" + type + "'");
    }
  }
  if (t.contains("terms")) {
    for (const json& term : t.at("terms")) p.spec.terms.push_back({term.at("M").get<double>(), term.at("alpha").get<double>()});
  }
  if (p.spec.terms.empty()) throw ConfigError("theory: need 'class' or 'terms'");
  if (!t.contains("D")) throw ConfigError("theory: missing 'D'");
  p.D = t.at("D").get<double>();

  const auto starts = cfg.x0.points(cfg.problem.oracle->dim());
  const double f_star = t.value("f_star", 0.0);
  p.F0 = t.contains("F0") ? t.at("F0").get<double>() : cfg.problem.oracle->value(starts.front()) - f_star;
  p.grad0_dual = t.contains("grad0") ? t.at("grad0").get<double>()
                                     : cfg.problem.oracle->gradient(starts.front()).norm();
  if (t.contains("dominance")) {
    const json& d = t.at("dominance");
    if (d.contains("uniformly_convex")) {
      const json& u = d.at("uniformly_convex");
      p.dominance = uniformly_convex_dominance(u.at("p").get<double>(), u.at("sigma").get<double>());
    } else {
      p.dominance = GradientDominance{d.at("c").get<double>(), d.at("Dc").get<double>()};
    }
  }
  if (t.contains("inexactness")) {
    const json& e = t.at("inexactness");
    p.inexactness = InexactnessBound{e.value("C1", 0.0), e.value("C2", 0.0), e.value("beta", 0.0)};
  }
  return p;
}

int cmd_predict(const CommonFlags& flags, std::ostream& out) {
  const ExperimentConfig cfg = load_with_overrides(flags);
  ProblemClassParams p;
  try {
    p = theory_params(cfg);
    p.spec.validate();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("theory: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("theory: ") + e.what());
  }
  std::vector<double> eps = cfg.theory.value("epsilons", std::vector<double>{1e-2, 1e-4, 1e-6, 1e-8});
  const GradientDominance dom = p.dominance.value_or(GradientDominance{0.0, p.D});
  const double alpha = p.spec.min_alpha();
  const double eta = (alpha - dom.c) / (1.0 + dom.c);

  std::ostringstream table;
  table << "epsilon,k_nonconvex,k_convex,k_grad_dominated" << (p.inexactness ? ",k_inexact_convex" : "") << '\n';
  for (double e : eps) {
    table << shortest(e) << ',' << shortest(k_nonconvex(p, e)) << ',' << shortest(k_convex(p, e)) << ',';
    try {
      table << shortest(k_grad_dominated(p, e));
    } catch (const DomainError&) {
      table << "nan";
    }
    if (p.inexactness) table << ',' << shortest(k_inexact_convex(p, e));
    table << '\n';
  }
  fs::path path;
  open_output(cfg.output_dir, "predict.csv", &path) << table.str();
  if (!flags.quiet) {
    out << "alpha=" << shortest(alpha) << " c=" << shortest(dom.c) << " eta=" << shortest(eta);
    if (dom.c > alpha + 1e-15) {
      out << " (c > alpha: gradient-dominated bound not applicable)";
    } else if (std::abs(eta) < 1e-6) {
      out << " rate=linear (k grows like log(F0/eps))";
    } else {
      out << " rate=sublinear (k grows like eps^-" << shortest(eta) << ")";
    }
    out << '\n' << table.str() << "wrote " << path.string() << '\n';
  }
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gradient-regularized Newton benchmarks", "grn-bench"};
  app.require_subcommand(1);

  CommonFlags run_f, probe_f, inex_f, pred_f;
  add_common(app.add_subcommand("run", "Run every method of an experiment"), run_f);
  add_common(app.add_subcommand("gamma-probe", "Estimate gamma along a trajectory or over a grid"), probe_f);
  add_common(app.add_subcommand("inexactness", "Measure Hessian inexactness along a trajectory"), inex_f);
  add_common(app.add_subcommand("predict", "Evaluate the complexity predictors"), pred_f);

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic U[-1,1] dataset in libsvm format");
  Index rows = 200, cols = 100;
  std::uint64_t seed = 0;
  std::string gen_out;
  bool gen_quiet = false;
  gen->add_option("--rows", rows, "Number of rows")->check(CLI::PositiveNumber);
  gen->add_option("--cols", cols, "Number of columns")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output file")->required();
  gen->add_flag("--quiet", gen_quiet, "Suppress progress output");

  std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (app.got_subcommand("run")) return cmd_run(run_f, out);
    if (app.got_subcommand("gamma-probe")) return cmd_gamma_probe(probe_f, out);
    if (app.got_subcommand("inexactness")) return cmd_inexactness(inex_f, out);
    if (app.got_subcommand("predict")) return cmd_predict(pred_f, out);
    if (app.got_subcommand("gen-data")) {
      save_libsvm(synthetic_dataset(rows, cols, seed), gen_out);
      if (!gen_quiet) out << "wrote " << gen_out << '\n';
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "run failure: " << e.what() << '\n';
    return kExitRunFailure;
  }
  return kExitConfigError;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace grn
