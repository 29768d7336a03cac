#include "lpinfer/cli.hpp"

#include "lpinfer/errors.hpp"
#include "lpinfer/io.hpp"
#include "lpinfer/lp.hpp"
#include "lpinfer/mst.hpp"
#include "lpinfer/parallel.hpp"
#include "lpinfer/pointwise.hpp"
#include "lpinfer/regularity.hpp"
#include "lpinfer/uniform.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>

namespace lpinfer::cli {

namespace {

using io::Json;

constexpr const char* kOrientation = "A*lambda >= b  <=>  b - A*lambda <= 0";

struct Options {
  std::string lp, data, mask, matrix, system, model = "system", grid, dgp = "a", out, kappa = "sqrt-log";
  double alpha = 0.05, tau = 0.0, penalty = 0.0, theta = 0.0;
  long long boot = 999, n = 250, reps = 1000;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string num(double v) {
  if (v == 0.0) v = 0.0;
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

Json num_json(double v) {
  if (v == 0.0) return 0.0;
  if (std::isfinite(v)) return v;
  return num(v);
}

Json header(const std::string& command, const Json& config) {
  Json j;
  j["tool"] = "lpinfer";
  j["version"] = LPINFER_VERSION;
  j["command"] = command;
  j["config"] = config;
  return j;
}

std::string csv_preamble(const std::string& command, const Json& config) {
  return "# lpinfer " LPINFER_VERSION "\n# command: " + command + "\n# config: " + config.dump() + "\n";
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw UsageError("--alpha must lie in (0, 0.5)");
}

void check_boot(long long b) {
  if (b < 1) throw UsageError("--boot must be at least 1");
}

Kappa parse_kappa(const std::string& s) {
  try {
    return Kappa::parse(s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

Matrix require_data(const Options& o) {
  if (o.data.empty()) throw UsageError("--data is required");
  return io::read_csv(o.data).values;
}

Json test_json(const TestOutcome& t, Index boot) {
  Json j;
  j["family"] = t.family;
  j["n"] = t.n;
  j["statistic"] = num_json(t.statistic);
  j["scaled_statistic"] = num_json(t.scaled);
  j["infinite_statistic"] = t.infinite;
  j["critical_value"] = t.infinite ? Json(nullptr) : num_json(t.critical_value);
  j["reject"] = t.reject;
  j["alpha"] = t.alpha;
  j["tau"] = t.tau;
  j["kappas"] = t.kappas;
  j["boot"] = boot;
  j["bootstrap_skipped"] = t.infinite;
  j["empty_draws"] = t.empty_draws;
  if (t.eta) {
    Json e;
    e["eta_hat"] = io::to_json(t.eta->eta_hat);
    e["active_set"] = t.eta->qp_active_set;
    e["objective"] = t.eta->objective;
    e["kkt_residual"] = t.eta->kkt_residual;
    j["eta"] = e;
  }
  return j;
}

Json base_config(const std::string& sub, const char* format = "json") {
  Json c;
  c["subcommand"] = sub;
  c["format"] = format;
  return c;
}

Json random_config(const std::string& sub, const Options& o, const char* format = "json") {
  Json c = base_config(sub, format);
  c["alpha"] = o.alpha;
  c["boot"] = o.boot;
  c["kappa"] = parse_kappa(o.kappa).describe();
  c["seed"] = o.seed;
  c["tau"] = o.tau;
  return c;
}

TestConfig test_config(const Options& o) {
  check_alpha(o.alpha);
  check_boot(o.boot);
  TestConfig cfg;
  cfg.alpha = o.alpha;
  cfg.kappa = parse_kappa(o.kappa);
  cfg.tau = o.tau;
  return cfg;
}

// ---- lp ----------------------------------------------------------------

void lp_solve(const Options& o) {
  const LinearProgram lp = io::lp_from_json(io::read_json(o.lp));
  Json c = base_config("solve");
  c["lp"] = o.lp;
  Json j = header("lp", c);
  const LPSolution s = solve(lp);
  j["status"] = to_string(s.status);
  j["value"] = s.optimal() ? Json(s.value) : Json(nullptr);
  if (s.primal) j["primal"] = io::to_json(*s.primal);
  if (s.dual) {
    j["dual_eq"] = io::to_json(s.dual->eq);
    j["dual_ineq"] = io::to_json(s.dual->ineq);
  }
  j["iterations"] = s.iterations;
  io::write_text(o.out, j.dump(2) + "\n");
}

void lp_diagnose(const Options& o) {
  const LinearProgram lp = io::lp_from_json(io::read_json(o.lp));
  Json c = base_config("diagnose");
  c["lp"] = o.lp;
  Json j = header("lp", c);
  const RegularityReport r = mfcq_check(lp);
  j["mfcq_holds"] = r.mfcq_holds;
  j["a_eq_full_row_rank"] = r.a_e_full_row_rank;
  j["slater_margin"] = num_json(r.slater_margin);
  j["slater_witness"] = r.slater_witness ? io::to_json(*r.slater_witness) : Json(nullptr);
  j["dual_solution_set_bounded"] = r.dual_solution_set_bounded;
  j["notes"] = r.notes;
  Matrix a(lp.rows_eq() + lp.rows_ineq(), lp.dim());
  if (lp.rows_eq() > 0) a.topRows(lp.rows_eq()) = lp.a_eq;
  if (lp.rows_ineq() > 0) a.bottomRows(lp.rows_ineq()) = lp.a_ineq;
  Json lc;
  lc["note"] = "sample heuristic, not inferential";
  try {
    lc["value"] = a.size() > 0 && a.norm() > 0.0 ? num_json(lambda_condition(a)) : Json(nullptr);
  } catch (const CapExceeded& e) {
    lc["value"] = nullptr;
    lc["error"] = e.what();
  }
  j["lambda_condition"] = lc;
  io::write_text(o.out, j.dump(2) + "\n");
}

void lp_regularize(const Options& o) {
  if (!(o.penalty > 0.0)) throw UsageError("--penalty must be positive");
  const LinearProgram lp = io::lp_from_json(io::read_json(o.lp));
  Json c = base_config("regularize");
  c["lp"] = o.lp;
  c["penalty"] = o.penalty;
  Json j = header("lp", c);
  j["layout"] = "theta | x (inequality slack) | y, z (equality slacks)";
  const Json body = io::lp_to_json(penalty_reformulate(lp, o.penalty));
  for (const auto& [k, v] : body.items()) j[k] = v;
  io::write_text(o.out, j.dump(2) + "\n");
}

// ---- infer ---------------------------------------------------------------

void infer_pointwise(const Options& o) {
  check_alpha(o.alpha);
  check_boot(o.boot);
  const Kappa kappa = parse_kappa(o.kappa);
  LinearProgram lp = io::lp_from_json(io::read_json(o.lp));
  if (o.data.empty()) throw UsageError("--data is required");
  const io::Table t = io::read_csv(o.data);
  if (t.header.empty()) throw UsageError("--data needs a header naming LP entries (c_j, AE_i_j, AI_i_j, bE_i, bI_i)");
  const auto names = lp_slot_names(lp);
  std::vector<Index> slots;
  for (const auto& h : t.header) {
    Index k = 0;
    while (k < static_cast<Index>(names.size()) && names[static_cast<std::size_t>(k)] != h) ++k;
    if (k == static_cast<Index>(names.size())) throw UsageError("--data: column '" + h + "' is not an LP entry");
    slots.push_back(k);
  }
  const Index n = t.values.rows();
  if (n < 2) throw DegenerateSample("infer pointwise: need at least two observations");
  Vector v = lp_to_vector(lp);
  for (std::size_t k = 0; k < slots.size(); ++k) v[slots[k]] = t.values.col(static_cast<Index>(k)).mean();
  lp = lp_from_vector(lp, v);
  const BootstrapDraws draws = bootstrap_lp_columns(t.values, slots, lp, o.boot, o.seed);
  PointwiseResult r = pointwise_distribution(lp, n, draws, kappa.value(n));
  const auto ci = ci_for_value(r, o.alpha);

  Json c = random_config("pointwise", o);
  c.erase("tau");
  c["lp"] = o.lp;
  c["data"] = o.data;
  Json j = header("infer", c);
  j["n"] = n;
  j["v_hat"] = r.v_hat;
  j["kappa"] = r.kappa;
  j["ci"] = {ci.first, ci.second};
  j["level"] = 1.0 - o.alpha;
  j["estimated_entries"] = t.header;
  j["draws"] = r.draws;
  io::write_text(o.out, j.dump(2) + "\n");
}

// ---- test / ci -----------------------------------------------------------

struct SystemProblem {
  EstimatedSystem est;
  BootstrapDraws draws;
  Vector b_theta;
  bool mst = false;
};

SystemProblem system_problem(const Options& o, double theta0) {
  const Matrix raw = require_data(o);
  SystemProblem p;
  if (o.model == "mst") {
    const MstBuilder builder(theta0);
    p.est = estimate_system(raw, builder);
    p.draws = bootstrap_system_root(raw, builder, p.est, o.boot, o.seed);
    p.mst = true;
    return p;
  }
  if (o.model != "system") throw UsageError("--model must be mst or system");
  if (o.system.empty()) throw UsageError("--system is required with --model system");
  const io::SystemSpec spec = io::system_from_json(io::read_json(o.system));
  const MeanBuilder builder(spec.a, spec.b, spec.estimated);
  p.est = estimate_system(raw, builder);
  p.draws = bootstrap_system_root(raw, builder, p.est, o.boot, o.seed);
  p.b_theta = spec.b_theta;
  return p;
}

EstimatedSystem at_theta(const SystemProblem& p, double theta) {
  if (p.mst) return with_theta(p.est, theta);
  EstimatedSystem e = p.est;
  e.b_hat += theta * p.b_theta;
  return e;
}

void run_test(const std::string& family, const Options& o) {
  const TestConfig cfg = test_config(o);
  Json c = random_config(family, o);
  if (!o.data.empty()) c["data"] = o.data;
  if (!o.mask.empty()) c["mask"] = o.mask;
  TestOutcome out;
  Json extra;
  if (family == "system-unknown") {
    c["model"] = o.model;
    if (o.model == "mst") {
      c["theta"] = o.theta;
      extra["orientation"] = kOrientation;
    } else {
      c["system"] = o.system;
    }
    if (!o.mask.empty()) throw UsageError("--mask does not apply to system-unknown; list estimated entries in --system");
    const SystemProblem p = system_problem(o, o.theta);
    out = test_linear_system_unknown(at_theta(p, o.theta), p.draws, cfg);
  } else {
    const Matrix obs = require_data(o);
    std::optional<ComponentMask> mask;
    if (!o.mask.empty()) mask = io::mask_from_json(io::read_json(o.mask), obs.cols());
    const MomentModel model = estimate_moments(obs, mask);
    const BootstrapDraws draws = bootstrap_root(obs, o.boot, o.seed, model.mask);
    if (family == "mi") {
      out = test_moment_ineq(model, draws, cfg);
    } else {
      if (o.matrix.empty()) throw UsageError("--matrix is required for " + family);
      c["matrix"] = o.matrix;
      const Matrix a = io::constraint_matrix_from_json(io::read_json(o.matrix));
      out = family == "nuisance" ? test_nuisance_linear(model, a, draws, cfg)
                                 : test_linear_system_known(model, a, draws, cfg);
    }
  }
  Json j = header("test", c);
  const Json body = test_json(out, o.boot);
  for (const auto& [k, v] : body.items()) j[k] = v;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  io::write_text(o.out, j.dump(2) + "\n");
}

void ci_invert(const Options& o) {
  const TestConfig cfg = test_config(o);
  if (o.grid.empty()) throw UsageError("--grid is required");
  std::vector<double> grid;
  try {
    grid = parse_grid(o.grid);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  Json c = random_config("invert", o, "csv");
  c["model"] = o.model;
  c["data"] = o.data;
  if (o.model == "system") c["system"] = o.system;
  c["grid"] = o.grid;
  const SystemProblem p = system_problem(o, grid.front());
  std::ostringstream s;
  s << csv_preamble("ci", c);
  if (p.mst) s << "# orientation: " << kOrientation << "\n";
  s << "theta,statistic,critical_value,reject\n";
  for (double th : grid) {
    const TestOutcome t = test_linear_system_unknown(at_theta(p, th), p.draws, cfg);
    s << num(th) << ',' << num(t.scaled) << ',' << num(t.critical_value) << ',' << (t.reject ? 1 : 0) << '\n';
  }
  io::write_text(o.out, s.str());
}

void replicate_mst(const Options& o) {
  check_alpha(o.alpha);
  check_boot(o.boot);
  if (o.n < 2) throw UsageError("--n must be at least 2");
  if (o.reps < 1) throw UsageError("--reps must be at least 1");
  MtrParams params;
  std::vector<double> grid;
  try {
    params = MtrParams::parse(o.dgp);
    grid = parse_grid(o.grid.empty() ? "0:1:0.05" : o.grid);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  PowerConfig cfg;
  cfg.alpha = o.alpha;
  cfg.boot = o.boot;
  cfg.kappa = parse_kappa(o.kappa);
  cfg.tau = o.tau;
  cfg.seed = o.seed;
  Json c = random_config("mst", o, "csv");
  c["dgp"] = o.dgp;
  c["params"] = {{"alpha", params.alpha}, {"beta", params.beta}, {"gamma", params.gamma},
                 {"p0", params.p0},       {"p1", params.p1},     {"pz1", params.pz1}};
  c["n"] = o.n;
  c["reps"] = o.reps;
  c["grid"] = o.grid.empty() ? "0:1:0.05" : o.grid;
  const auto rows = power_curve(params, o.n, o.reps, grid, cfg);
  const IdentifiedSet id = identified_set_oracle(params);
  const std::string kap = num(cfg.kappa.value(o.n));
  std::ostringstream s;
  s << csv_preamble("replicate", c);
  s << "# orientation: " << kOrientation << "\n";
  s << "# identified_set: [" << num(id.lower) << ", " << num(id.upper) << "]\n";
  s << "theta,reject_rate,n,reps,kappa,seed,mean_statistic,mean_critical_value\n";
  for (const auto& r : rows) {
    s << num(r.theta) << ',' << num(r.reject_rate) << ',' << o.n << ',' << o.reps << ',' << kap << ',' << o.seed << ','
      << num(r.mean_statistic) << ',' << num(r.mean_critical_value) << '\n';
  }
  io::write_text(o.out, s.str());
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Inference on the value of linear programs with estimated coefficients", "lpinfer"};
  app.set_version_flag("--version", std::string("lpinfer ") + LPINFER_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--threads", o.threads, "Worker cap for parallel kernels (0: OpenMP default)")
      ->envname("LPINFER_THREADS")
      ->check(CLI::NonNegativeNumber);

  const auto add_out = [&](CLI::App* s) { s->add_option("--out", o.out, "Output path (default stdout)"); };
  const auto add_random = [&](CLI::App* s, bool tau) {
    s->add_option("--alpha", o.alpha, "Level, in (0, 0.5)")->capture_default_str();
    s->add_option("--boot", o.boot, "Bootstrap replications")->capture_default_str();
    s->add_option("--kappa", o.kappa, "sqrt-log | log | fixed:<x>")->capture_default_str();
    s->add_option("--seed", o.seed, "Master seed")->required();
    if (tau) s->add_option("--tau", o.tau, "Reject iff sqrt(n) T > c + tau")->capture_default_str();
    add_out(s);
  };

  CLI::App* lp = app.add_subcommand("lp", "Linear program utilities");
  lp->require_subcommand(1);
  CLI::App* lp_solve_cmd = lp->add_subcommand("solve", "Solve an LP JSON file");
  CLI::App* lp_diag_cmd = lp->add_subcommand("diagnose", "MFCQ and dual boundedness report");
  CLI::App* lp_reg_cmd = lp->add_subcommand("regularize", "Penalty reformulation");
  for (CLI::App* s : {lp_solve_cmd, lp_diag_cmd, lp_reg_cmd}) {
    s->add_option("--lp", o.lp, "LP JSON file")->required();
    add_out(s);
  }
  lp_reg_cmd->add_option("--penalty", o.penalty, "Penalty M > 0")->required();

  CLI::App* infer = app.add_subcommand("infer", "Pointwise inference on the LP value");
  infer->require_subcommand(1);
  CLI::App* pw = infer->add_subcommand("pointwise", "Bootstrap distribution and interval for the value");
  pw->add_option("--lp", o.lp, "LP JSON file (template for the estimated entries)")->required();
  pw->add_option("--data", o.data, "CSV; one column per estimated LP entry, headed by its name")->required();
  pw->add_option("--draws,--boot", o.boot, "Bootstrap draws")->capture_default_str();
  pw->add_option("--alpha", o.alpha, "Interval level 1 - alpha")->capture_default_str();
  pw->add_option("--kappa", o.kappa, "sqrt-log | log | fixed:<x>")->capture_default_str();
  pw->add_option("--seed", o.seed, "Master seed")->required();
  add_out(pw);

  CLI::App* test = app.add_subcommand("test", "Uniformly valid one-sided tests");
  test->require_subcommand(1);
  std::vector<std::pair<std::string, CLI::App*>> tests;
  for (const char* f : {"mi", "nuisance", "system-known", "system-unknown"}) {
    CLI::App* s = test->add_subcommand(f, std::string("Test family ") + f);
    s->add_option("--data", o.data, "CSV of observations")->required();
    add_random(s, true);
    tests.emplace_back(f, s);
  }
  for (std::size_t k = 0; k < 3; ++k) tests[k].second->add_option("--mask", o.mask, "Mask JSON");
  for (std::size_t k = 1; k < 3; ++k) tests[k].second->add_option("--matrix", o.matrix, "Matrix JSON {\"A\": ...}");
  tests[3].second->add_option("--system", o.system, "System JSON");
  tests[3].second->add_option("--model", o.model, "system | mst")->capture_default_str();
  tests[3].second->add_option("--theta", o.theta, "Hypothesis shift")->capture_default_str();

  CLI::App* ci = app.add_subcommand("ci", "Confidence sets by test inversion");
  ci->require_subcommand(1);
  CLI::App* inv = ci->add_subcommand("invert", "Run the estimated-system test over a theta grid");
  inv->add_option("--model", o.model, "mst (Z,D,Y data) | system (--system with b_theta)")->capture_default_str();
  inv->add_option("--data", o.data, "CSV of observations")->required();
  inv->add_option("--system", o.system, "System JSON");
  inv->add_option("--grid", o.grid, "lo:hi:step")->required();
  add_random(inv, true);

  CLI::App* rep = app.add_subcommand("replicate", "Monte Carlo replication");
  rep->require_subcommand(1);
  CLI::App* mst = rep->add_subcommand("mst", "Power curves for the IV average treatment effect design");
  mst->add_option("--dgp", o.dgp, "a | b | custom:alpha,beta,gamma[,p0,p1,pz1]")->capture_default_str();
  mst->add_option("--n", o.n, "Sample size")->capture_default_str();
  mst->add_option("--reps", o.reps, "Monte Carlo replications")->capture_default_str();
  mst->add_option("--grid", o.grid, "lo:hi:step (default 0:1:0.05)");
  add_random(mst, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (CLI::App* s : app.get_subcommands()) {
      failing = s;
      for (CLI::App* t : s->get_subcommands()) failing = t;
    }
    std::cerr << failing->help();
    return 1;
  }
  set_thread_count(o.threads);

  try {
    if (lp_solve_cmd->parsed()) {
      lp_solve(o);
    } else if (lp_diag_cmd->parsed()) {
      lp_diagnose(o);
    } else if (lp_reg_cmd->parsed()) {
      lp_regularize(o);
    } else if (pw->parsed()) {
      infer_pointwise(o);
    } else if (inv->parsed()) {
      ci_invert(o);
    } else if (mst->parsed()) {
      replicate_mst(o);
    } else {
      for (const auto& [f, s] : tests) {
        if (s->parsed()) run_test(f, o);
      }
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("lpinfer");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace lpinfer::cli
