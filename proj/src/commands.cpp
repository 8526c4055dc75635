#include "holder_vi/commands.hpp"

#include "holder_vi/metrics.hpp"
#include "holder_vi/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

namespace hvi {

namespace {

using nlohmann::ordered_json;

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("output dir '" + dir + "': " + ec.message());
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("output dir '" + dir + "': cannot write " + name);
  f << text;
}

ordered_json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

ordered_json json_point(const Vector& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

/// Maps a library exception to an exit code with a message on err.
int report_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const UnsupportedOrder& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolverError;
  }
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ResolvedRun resolve_run(const RunConfig& cfg) {
  ProblemInstance inst = parse_problem_spec(cfg.problem);
  if (cfg.declared_H_scale != 1.0) inst = with_scaled_declared_H(inst, cfg.declared_H_scale);
  RunConfig resolved = cfg;
  resolved.problem = canonical_problem_spec(cfg.problem);
  if (resolved.solver.method == Method::Extragradient && !resolved.solver.step) {
    resolved.solver.step = default_extragradient_step(inst.op, inst.set, resolved.solver.seed);
  }
  if (!resolved.solver.inner_tol) resolved.solver.inner_tol = resolved.solver.resolved_inner_tol();
  resolved.solver.validate();
  return {std::move(inst), std::move(resolved)};
}

std::string trace_csv(const RunConfig& cfg, const RunResult& run) {
  std::ostringstream os;
  os << cfg.echo();
  os << "k,i_k,H_k,gamma_k,step_norm,F_evals_cum,J_evals_cum,subproblems_cum,gap_point,gap_avg,"
        "wall_ns\n";
  for (const auto& r : run.records) {
    os << r.k << ',' << r.i_k << ',' << format_double(r.H_k) << ',' << format_double(r.gamma_k)
       << ',' << format_double(r.step_norm) << ',' << r.F_evals_cum << ',' << r.J_evals_cum << ','
       << r.subproblems_cum << ',' << format_double(r.gap_point) << ','
       << format_double(r.gap_avg) << ',' << r.wall_ns << '\n';
  }
  return os.str();
}

std::string trials_csv(const RunConfig& cfg, const RunResult& run) {
  std::ostringstream os;
  os << cfg.echo();
  os << "k,i,H,lhs,rhs,accepted,subproblem_failed,gap\n";
  for (const auto& r : run.records) {
    for (std::size_t i = 0; i < r.trials.size(); ++i) {
      const auto& t = r.trials[i];
      os << r.k << ',' << i << ',' << format_double(t.H) << ',' << format_double(t.lhs) << ','
         << format_double(t.rhs) << ',' << (t.accepted ? 1 : 0) << ','
         << (t.subproblem_failed ? 1 : 0) << ',' << format_double(t.gap) << '\n';
    }
  }
  return os.str();
}

std::string summary_json(const RunConfig& cfg, const ProblemInstance& inst, const RunResult& run) {
  ordered_json j;
  j["config"] = cfg.to_ini();
  j["problem"] = {{"spec", cfg.problem},
                  {"declared_nu", inst.declared_nu},
                  {"declared_H", inst.declared_H},
                  {"diameter", json_number(inst.diameter)},
                  {"notes", inst.notes}};
  j["method"] = to_string(run.method);
  j["iterations"] = run.records.size();
  j["final_gap"] = json_number(run.final_gap);
  j["final_gap_avg"] = run.records.empty() ? ordered_json(nullptr)
                                           : json_number(run.records.back().gap_avg);
  j["oracle_calls"] = run.oracle_calls();
  if (!run.records.empty()) {
    const auto& last = run.records.back();
    j["F_evals"] = last.F_evals_cum;
    j["J_evals"] = last.J_evals_cum;
    j["subproblems"] = last.subproblems_cum;
  }
  j["averaged_point"] = json_point(run.averaged_point);
  if (run.early_exit) {
    j["early_exit"] = {{"k", run.early_exit->k},
                       {"i", run.early_exit->i},
                       {"gap", json_number(run.early_exit->gap)},
                       {"point", json_point(run.early_exit->point)}};
  } else {
    j["early_exit"] = nullptr;
  }
  j["converged_at"] = run.converged_at ? ordered_json(*run.converged_at) : ordered_json(nullptr);
  ordered_json verdicts = ordered_json::array();
  for (const auto& v : run.bound_checks) {
    verdicts.push_back({{"name", v.name},
                        {"status", to_string(v.status)},
                        {"measured", json_number(v.measured)},
                        {"theoretical", json_number(v.theoretical)},
                        {"detail", v.detail}});
  }
  j["bound_checks"] = verdicts;
  return j.dump(2) + "\n";
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    ResolvedRun rr = resolve_run(cfg);
    const RunResult run = run_method(rr.instance.op, rr.instance.set, rr.instance.z0, rr.config.solver);
    write_file(rr.config.out_dir, "trace.csv", trace_csv(rr.config, run));
    write_file(rr.config.out_dir, "trials.csv", trials_csv(rr.config, run));
    write_file(rr.config.out_dir, "summary.json", summary_json(rr.config, rr.instance, run));
    out << to_string(run.method) << " on " << rr.config.problem << ": " << run.records.size()
        << " iterations, final gap " << format_double(run.final_gap) << "\n";
    if (run.early_exit) {
      out << "early exit at k=" << run.early_exit->k << " i=" << run.early_exit->i << " with gap "
          << format_double(run.early_exit->gap) << "\n";
    }
    for (const auto& v : run.bound_checks) {
      out << "  " << std::left << std::setw(16) << to_string(v.status) << v.name << ": "
          << format_double(v.measured) << " vs " << format_double(v.theoretical) << "\n";
    }
    out << "wrote " << rr.config.out_dir << "/{trace.csv,trials.csv,summary.json}\n";
    return kExitOk;
  } catch (...) {
    return report_exception(err);
  }
}

double theoretical_slope(Method method, double nu, int p) {
  switch (method) {
    case Method::NuRen:
    case Method::NuAren:
      return -(2.0 + nu) / 2.0;
    case Method::Uren:
      return -3.0 * (1.0 + nu) / 4.0;
    case Method::NuAret:
      return -(p + nu) / 2.0;
    case Method::Uret:
      return -(p + 1.0) * (p - 1.0 + nu) / (2.0 * p);
    case Method::Extragradient:
      return -1.0;
  }
  return 0.0;
}

double default_slope_tolerance(Method method) {
  switch (method) {
    case Method::Uren:
    case Method::Uret:
    case Method::Extragradient:
      return 0.3;
    default:
      return 0.25;
  }
}

int sweep_threads(int jobs) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HOLDER_VI_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw ConfigError("HOLDER_VI_THREADS must be a positive integer, got '" + std::string(env) +
                        "'");
    }
    n = static_cast<int>(v);
  }
  return std::max(1, std::min(n, jobs));
}

namespace {

struct RatesRequest {
  RunConfig config;
  std::vector<int> K_grid;
  std::optional<double> tolerance;
  std::optional<double> selftest_slope;
};

struct SweepMember {
  int K = 0;
  double gap = 0.0;
  std::int64_t F_evals = 0, J_evals = 0, subproblems = 0;
  bool early_exit = false;
  int exit_code = kExitOk;
  std::string error;
};

int cmd_rates(const RatesRequest& req, std::ostream& out, std::ostream& err) {
  std::vector<std::pair<double, double>> points;
  double theory = 0.0;
  double tol = 0.0;
  std::vector<SweepMember> members(req.K_grid.size());
  std::string echo;
  for (std::size_t i = 0; i < req.K_grid.size(); ++i) members[i].K = req.K_grid[i];

  if (req.selftest_slope) {
    theory = *req.selftest_slope;
    tol = req.tolerance.value_or(0.25);
    for (auto& m : members) m.gap = std::pow(static_cast<double>(m.K), theory);
  } else {
    std::optional<ResolvedRun> resolved;
    try {
      resolved = resolve_run(req.config);
    } catch (...) {
      return report_exception(err);
    }
    const ResolvedRun& base = *resolved;
    echo = base.config.echo();
    const SolverConfig& s = base.config.solver;
    const bool knows_nu =
        s.method == Method::NuRen || s.method == Method::NuAren || s.method == Method::NuAret;
    const double nu = knows_nu && s.nu ? *s.nu : base.instance.declared_nu;
    theory = theoretical_slope(s.method, nu, s.p);
    tol = req.tolerance.value_or(default_slope_tolerance(s.method));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < members.size();) {
        SweepMember& m = members[i];
        try {
          SolverConfig c = s;
          c.K = m.K;
          const RunResult r = run_method(base.instance.op, base.instance.set, base.instance.z0, c);
          m.gap = r.final_gap;
          if (!r.records.empty()) {
            m.F_evals = r.records.back().F_evals_cum;
            m.J_evals = r.records.back().J_evals_cum;
            m.subproblems = r.records.back().subproblems_cum;
          }
          m.early_exit = r.early_exit.has_value();
        } catch (...) {
          std::ostringstream e;
          m.exit_code = report_exception(e);
          m.error = e.str();
        }
      }
    };
    int nthreads = 1;
    try {
      nthreads = sweep_threads(static_cast<int>(members.size()));
    } catch (...) {
      return report_exception(err);
    }
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& m : members) {
      if (m.exit_code != kExitOk) {
        err << "member K=" << m.K << ": " << m.error;
        return m.exit_code;
      }
    }
  }

  std::ostringstream csv;
  csv << echo;
  csv << "K,gap,F_evals,J_evals,subproblems,early_exit\n";
  for (const auto& m : members) {
    csv << m.K << ',' << format_double(m.gap) << ',' << m.F_evals << ',' << m.J_evals << ','
        << m.subproblems << ',' << (m.early_exit ? 1 : 0) << '\n';
    points.emplace_back(m.K, m.gap);
  }

  SlopeFit fit;
  try {
    fit = fit_rate_slope(points);
  } catch (const FitError& e) {
    err << "fit error: " << e.what() << "\n";
    return kExitSolverError;
  }
  for (const auto& w : fit.warnings) err << "warning: " << w << "\n";
  const bool ok = fit.slope <= theory + tol;
  csv << "# slope = " << format_double(fit.slope) << ", theoretical = " << format_double(theory)
      << ", tolerance = " << format_double(tol) << ", points = " << fit.used << "\n";
  try {
    write_file(req.config.out_dir, "rates.csv", csv.str());
  } catch (...) {
    return report_exception(err);
  }
  for (const auto& m : members) {
    out << "K=" << std::setw(5) << m.K << "  gap " << format_double(m.gap)
        << (m.early_exit ? "  (early exit)" : "") << "\n";
  }
  out << "slope " << std::fixed << std::setprecision(4) << fit.slope << "  theoretical " << theory
      << "  tolerance " << tol << "  max residual " << fit.max_residual << "  -> "
      << (ok ? "PASS" : "FAIL") << "\n";
  out.unsetf(std::ios::fixed);
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<CheckResult> results;
  try {
    results = run_verify_suite(opt);
  } catch (...) {
    return report_exception(err);
  }
  int failed = 0;
  for (const auto& r : results) {
    if (!r.passed) ++failed;
    out << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(12) << r.group
        << std::setw(50) << r.name << " measured " << std::setw(11) << format_double(r.measured)
        << " threshold " << format_double(r.threshold);
    if (!r.detail.empty()) out << "  [" << r.detail << "]";
    out << "\n";
  }
  out << results.size() << " checks, " << failed << " failed\n";
  return failed == 0 ? kExitOk : kExitCheckFailed;
}

/// Flags shared by solve and rates; unset flags leave the config file's values alone.
struct SolverFlags {
  std::string config_path;
  std::optional<std::string> problem, method, nu, H, out_dir;
  std::optional<double> H0, eps, inner_tol, step, declared_H_scale;
  std::optional<int> p, K, max_doublings;
  std::optional<std::uint64_t> seed;
  bool no_wall_time = false;
  bool final_gap_only = false;
  bool allow_untested_order = false;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "INI file with [problem], [solver], [output]");
    app.add_option("--problem", problem, "problem spec, e.g. power:d=5,nu=1,r=1");
    app.add_option("--method", method, "nu-ren, nu-aren, uren, nu-aret, uret, extragradient");
    app.add_option("--nu", nu, "Hölder exponent, or 'declared'");
    app.add_option("--H", H, "Hölder constant, or 'declared'");
    app.add_option("--H0", H0, "initial line-search estimate");
    app.add_option("--p", p, "tensor order");
    app.add_option("--K", K, "outer iterations");
    app.add_option("--eps", eps, "target accuracy");
    app.add_option("--inner-tol", inner_tol, "subproblem residual tolerance");
    app.add_option("--max-doublings", max_doublings, "cap on i_k");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--step", step, "extragradient step");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--no-wall-time", no_wall_time, "write wall_ns = 0");
    app.add_flag("--final-gap-only", final_gap_only, "compute gap_avg only at the last iteration");
    app.add_flag("--allow-untested-order", allow_untested_order, "permit p > 3");
    app.add_option("--declared-H-scale", declared_H_scale)->group("");
  }

  RunConfig build() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    SolverConfig& s = cfg.solver;
    if (problem) cfg.problem = *problem;
    if (declared_H_scale) cfg.declared_H_scale = *declared_H_scale;
    if (method) s.method = parse_method(*method);
    auto resolve = [&](const std::string& key, const std::string& v, bool want_nu) {
      if (v == "declared") {
        ProblemInstance inst = parse_problem_spec(cfg.problem);
        if (cfg.declared_H_scale != 1.0) inst = with_scaled_declared_H(inst, cfg.declared_H_scale);
        return want_nu ? inst.declared_nu : inst.declared_H;
      }
      try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos == v.size()) return x;
      } catch (const std::exception&) {
      }
      throw ConfigError("--" + key + " expects a number or 'declared', got '" + v + "'");
    };
    if (nu) s.nu = resolve("nu", *nu, true);
    if (H) s.H_nu = resolve("H", *H, false);
    if (H0) s.H0 = *H0;
    if (p) s.p = *p;
    if (K) s.K = *K;
    if (eps) s.eps = *eps;
    if (inner_tol) s.inner_tol = *inner_tol;
    if (max_doublings) s.max_doublings = *max_doublings;
    if (seed) s.seed = *seed;
    if (step) s.step = *step;
    if (out_dir) cfg.out_dir = *out_dir;
    if (no_wall_time) s.record_wall_time = false;
    if (final_gap_only) s.gap_every_iteration = false;
    if (allow_untested_order) s.allow_untested_order = true;
    return cfg;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solvers for monotone VIs with a Hölder continuous Jacobian", "holder-vi"};
  app.require_subcommand(1);

  SolverFlags solve_flags;
  CLI::App* solve = app.add_subcommand("solve", "run one solver and write its trace");
  solve_flags.attach(*solve);

  SolverFlags rates_flags;
  std::vector<int> K_grid;
  std::optional<double> tolerance;
  std::string selftest;
  CLI::App* rates = app.add_subcommand("rates", "sweep K and fit the log-log gap slope");
  rates_flags.attach(*rates);
  rates->add_option("--K-grid", K_grid, "comma-separated K values (default 16,...,1024)")
      ->delimiter(',');
  rates->add_option("--tolerance", tolerance, "allowed excess over the theoretical slope");
  rates->add_option("--selftest", selftest, "powerlaw:<slope> synthetic sweep");

  VerifyOptions vopt;
  CLI::App* verify = app.add_subcommand("verify", "run the invariant suites");
  verify->add_option("--only", vopt.only, "run a single group")
      ->check(CLI::IsMember(verify_groups()));
  verify->add_option("--seed", vopt.seed, "sampling seed");
  verify->add_option("--pairs", vopt.remainder_pairs, "pairs per remainder sweep");
  verify->add_option("--declared-H-scale", vopt.declared_H_scale)->group("");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  if (solve->parsed()) {
    RunConfig cfg;
    try {
      cfg = solve_flags.build();
    } catch (...) {
      return report_exception(err);
    }
    return cmd_solve(cfg, out, err);
  }
  if (rates->parsed()) {
    RatesRequest req;
    if (!selftest.empty()) {
      const std::string prefix = "powerlaw:";
      double slope = 0.0;
      try {
        if (selftest.rfind(prefix, 0) != 0) throw std::invalid_argument(selftest);
        std::size_t pos = 0;
        slope = std::stod(selftest.substr(prefix.size()), &pos);
        if (pos != selftest.size() - prefix.size()) throw std::invalid_argument(selftest);
      } catch (const std::exception&) {
        err << "config error: --selftest expects powerlaw:<slope>, got '" << selftest << "'\n";
        return kExitConfigError;
      }
      req.selftest_slope = slope;
    }
    try {
      req.config = rates_flags.build();
    } catch (...) {
      return report_exception(err);
    }
    // Sweeps measure the rate, so by default neither early exit nor a loose
    // inner tolerance is allowed to flatten the tail.
    if (!rates_flags.eps && rates_flags.config_path.empty()) req.config.solver.eps = 1e-300;
    if (!rates_flags.inner_tol && rates_flags.config_path.empty()) {
      req.config.solver.inner_tol = 1e-10;
    }
    if (K_grid.empty()) {
      for (int e = 4; e <= 10; ++e) K_grid.push_back(1 << e);
    }
    for (std::size_t i = 0; i < K_grid.size(); ++i) {
      if (K_grid[i] < 1 || (i > 0 && K_grid[i] <= K_grid[i - 1])) {
        err << "config error: --K-grid must be strictly increasing positive integers\n";
        return kExitConfigError;
      }
    }
    req.K_grid = K_grid;
    req.tolerance = tolerance;
    return cmd_rates(req, out, err);
  }
  return cmd_verify(vopt, out, err);
}

}  // namespace hvi
