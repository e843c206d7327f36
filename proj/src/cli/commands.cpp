#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "kslab/cli.hpp"
#include "kslab/errors.hpp"
#include "kslab/io.hpp"
#include "kslab/parallel.hpp"

namespace kslab::cli {

using spectral::BesovParams;
using spectral::Field;
using verification::CheckReport;

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

BesovParams parse_besov(const std::string& text) {
  std::vector<double> v;
  std::istringstream is(text);
  for (std::string part; std::getline(is, part, ',');) {
    try {
      v.push_back(part == "inf" ? spectral::kInf : std::stod(part));
    } catch (const std::exception&) {
      v.clear();
      break;
    }
  }
  if (v.size() != 3) throw ParseError("--besov expects s,p,r, got '" + text + "'");
  if (!(v[1] >= 1.0 && v[2] >= 1.0)) throw ParseError("--besov needs p >= 1 and r >= 1");
  return {v[0], v[1], v[2]};
}

std::string besov_tag(const BesovParams& bp) {
  return "B^{" + fmt(bp.s) + "}_{" + fmt(bp.p) + "," + fmt(bp.r) + "}";
}

struct Context {
  ExperimentConfig cfg;
  Flags flags;
  std::uint64_t seed = 12;
  std::string out_dir;
  std::vector<std::string> formats;
};

// Writes one report in the requested formats plus its summary.
void emit(Artifacts& art, const std::string& stem, const CheckReport& rep, const std::vector<std::string>& formats) {
  for (const auto& f : formats) {
    if (f == "csv") art.add(stem + ".csv", report_csv(rep));
    if (f == "json") art.add(stem + ".json", report_json(rep));
  }
}

int finish(Artifacts& art, const std::vector<CheckReport>& reps) {
  std::string summary;
  bool ok = true;
  for (const auto& r : reps) {
    summary += report_summary(r) + "\n";
    ok = ok && r.passed();
    std::cout << r.check_id << ": " << (r.passed() ? "pass" : "FAIL");
    if (!r.passed()) std::cout << " (" << r.first_failure() << ")";
    std::cout << '\n';
  }
  art.add("summary.txt", summary);
  art.finish();
  std::cout << "artifacts: " << art.dir() << '\n';
  return ok ? kPass : kCheckFailure;
}

spectral::CutoffProfile cutoffs() { return spectral::build_cutoffs(4); }

int cmd_construct(const Context& ctx) {
  const Setup st = setup_with_grid(ctx.cfg);
  const auto cut = cutoffs();
  const auto data = construction::build_initial_data(st.params, st.spec, st.grid, cut);
  Artifacts art(ctx.out_dir, "construct", ctx.cfg, ctx.seed);
  spectral::write_fields(art.dir() + "/u0.kslab", {{data.u0}, {}, "u0"});
  spectral::write_fields(art.dir() + "/v0.kslab", {{data.v0}, {}, "v0"});
  art.add_binary_file("u0.kslab");
  art.add_binary_file("v0.kslab");
  CheckReport rep;
  rep.check_id = "construct";
  for (int ax = 0; ax < st.grid.d; ++ax) {
    rep.constant("grid points axis " + std::to_string(ax), st.grid.n[static_cast<std::size_t>(ax)]);
    rep.constant("grid length axis " + std::to_string(ax), st.grid.L[static_cast<std::size_t>(ax)]);
  }
  rep.constant("u0 " + besov_tag({-1.5, 2.0 * st.params.d, st.params.r}), data.u0_besov);
  rep.constant("v0 " + besov_tag({-0.5, 2.0 * st.params.d, st.params.r}), data.v0_besov);
  const Field f = construction::build_f(st.params, st.spec, st.grid);
  const double leak = construction::support_report(f, construction::carrier_annulus(st.params, st.spec));
  rep.at_most("f spectrum outside the claimed annulus", leak, 1e-8);
  emit(art, "construct", rep, ctx.formats);
  return finish(art, {rep});
}

int cmd_norm(const Context& ctx, const std::string& file, const std::vector<std::string>& besov,
             const std::vector<double>& ps) {
  const auto bundle = spectral::read_fields(file);
  std::vector<BesovParams> bps;
  for (const auto& b : besov) bps.push_back(parse_besov(b));
  if (bps.empty()) bps = {{-1.5, 4.0, 1.0}, {-0.5, 4.0, 1.0}};
  const auto cut = cutoffs();
  CheckReport rep;
  rep.check_id = "norm";
  for (std::size_t i = 0; i < bundle.frames.size(); ++i) {
    const Field& f = bundle.frames[i];
    const std::string tag = bundle.label + "[" + std::to_string(i) + "]";
    const auto lp = spectral::lebesgue_norms(f, ps);
    for (std::size_t k = 0; k < ps.size(); ++k) rep.constant(tag + " L^" + fmt(ps[k]), lp[k]);
    for (const auto& bp : bps) rep.constant(tag + " " + besov_tag(bp), spectral::besov_norm(f, bp, cut));
  }
  Artifacts art(ctx.out_dir, "norm", ctx.cfg, ctx.seed);
  emit(art, "norm", rep, ctx.formats);
  return finish(art, {rep});
}

int cmd_decompose(const Context& ctx, const std::string& file) {
  const auto bundle = spectral::read_fields(file);
  if (bundle.frames.empty()) throw FormatError(file + " holds no frames");
  const Field& f = bundle.frames.front();
  const auto cut = cutoffs();
  const auto range = spectral::resolvable_range(f.grid());
  const auto dec = spectral::decompose(f, cut, range);
  const auto energy = spectral::shell_energy(f, cut, range);
  std::vector<int> shells;
  for (int j = range.lo; j <= range.hi; ++j) shells.push_back(j);
  const std::vector<double> ps{2.0, 4.0, spectral::kInf};
  const auto bn = spectral::block_norms(f, cut, shells, ps);
  std::ostringstream os;
  os << "shell,energy,L2,L4,Linf\n";
  for (std::size_t i = 0; i < shells.size(); ++i) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", shells[i], energy[i], bn.value[i][0], bn.value[i][1],
                  bn.value[i][2]);
    os << buf;
  }
  CheckReport rep;
  rep.check_id = "decompose";
  rep.at_most("reconstruction error", dec.reconstruction_error(), 1e-10);
  rep.constant("truncation residual", dec.truncation_residual);
  Artifacts art(ctx.out_dir, "decompose", ctx.cfg, ctx.seed);
  art.add("shells.csv", os.str());
  emit(art, "decompose", rep, ctx.formats);
  return finish(art, {rep});
}

evolution::SolverConfig solver_config(const ExperimentConfig& cfg) {
  evolution::SolverConfig sc;
  sc.integrator = cfg.solver.integrator;
  sc.steps = cfg.solver.steps;
  sc.dealias_fraction = cfg.solver.dealias_fraction;
  sc.quadrature_nodes = cfg.solver.quadrature_nodes;
  return sc;
}

int cmd_evolve(const Context& ctx) {
  const Setup st = setup_with_grid(ctx.cfg);
  const auto cut = cutoffs();
  const auto data = construction::build_initial_data(st.params, st.spec, st.grid, cut);
  const double eps = ctx.cfg.solver.epsilon.front();
  const double T = eps * std::exp2(-2.0 * st.params.m);
  const auto sol = evolution::solve_chemotaxis(data.u0, data.v0, T, solver_config(ctx.cfg));
  const BesovParams bu{-1.5, 2.0 * st.params.d, st.params.r};
  CheckReport rep;
  rep.check_id = "evolve";
  rep.constant("epsilon", eps);
  rep.constant("t_n", T);
  rep.constant("steps", sol.steps);
  rep.constant("u0 " + besov_tag(bu), data.u0_besov);
  rep.constant("u(t_n) " + besov_tag(bu), spectral::besov_norm(sol.u.frames.back(), bu, cut));
  rep.at_most("mean(u) drift", sol.max_mean_drift, 1e-12);
  std::ostringstream os;
  os << "t,mean_u,u_besov\n";
  for (std::size_t i = 0; i < sol.u.size(); ++i) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", sol.u.times[i], sol.mean_u[i],
                  spectral::besov_norm(sol.u.frames[i], bu, cut));
    os << buf;
  }
  Artifacts art(ctx.out_dir, "evolve", ctx.cfg, ctx.seed);
  art.add("trajectory.csv", os.str());
  spectral::write_fields(art.dir() + "/u_final.kslab", {{sol.u.frames.back()}, {T}, "u"});
  spectral::write_fields(art.dir() + "/v_final.kslab", {{sol.v.frames.back()}, {T}, "v"});
  art.add_binary_file("u_final.kslab");
  art.add_binary_file("v_final.kslab");
  emit(art, "evolve", rep, ctx.formats);
  return finish(art, {rep});
}

int cmd_ladder(const Context& ctx) {
  const Setup st = setup_with_grid(ctx.cfg);
  const auto cut = cutoffs();
  const auto data = construction::build_initial_data(st.params, st.spec, st.grid, cut);
  const double eps = ctx.cfg.solver.epsilon.front();
  const auto tg = evolution::TimeGrid::for_experiment(eps, st.params.m, ctx.cfg.solver.time_steps);
  const auto L = evolution::build_ladder(data, tg, evolution::LadderOptions{ctx.cfg.solver.dealias_fraction});
  const BesovParams bu{-1.5, 2.0 * st.params.d, st.params.r};
  const auto shells = construction::restricted_shells(st.params, st.spec);
  CheckReport rep;
  rep.check_id = "ladder";
  rep.constant("t_n", tg.T_final);
  rep.constant("picard iterations", L.picard_iterations);
  rep.constant("picard residual", L.picard_residual);
  rep.constant("|U1(t_n)|", spectral::besov_norm(L.U1.frames.back(), bu, cut));
  rep.constant("|U21(t_n)| on K", spectral::besov_norm_on(L.U21.frames.back(), bu, cut, shells));
  rep.constant("|U22(t_n)| on K", spectral::besov_norm_on(L.U22.frames.back(), bu, cut, shells));
  rep.constant("|U3(t_n)|", spectral::besov_norm(L.U3.frames.back(), bu, cut));
  const auto ledger = evolution::ladder_norm_ledger(L, data, cut, ctx.cfg.solver.dealias_fraction);
  // Slack ratios rhs/lhs; the inequalities hold up to an unspecified constant, so they are tabulated only.
  for (const auto& row : ledger.rows) {
    rep.constant("ledger " + row.id + " lhs", row.lhs);
    rep.constant("ledger " + row.id + " rhs", row.rhs);
    rep.constant("ledger " + row.id + " slack", row.ratio());
  }
  rep.constant("X_T", ledger.X_T);
  rep.constant("Y_T", ledger.Y_T);
  std::ostringstream os;
  os << "id,lhs,rhs,slack\n";
  for (const auto& row : ledger.rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g\n", row.id.c_str(), row.lhs, row.rhs, row.ratio());
    os << buf;
  }
  Artifacts art(ctx.out_dir, "ladder", ctx.cfg, ctx.seed);
  art.add("ledger.csv", os.str());
  emit(art, "ladder", rep, ctx.formats);
  return finish(art, {rep});
}

std::vector<std::string> selected_checks(const ExperimentConfig& cfg, const std::string& id) {
  if (id == "all") return cfg.checks.enabled.empty() ? verification::check_ids() : cfg.checks.enabled;
  const auto ids = verification::check_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
    std::string known;
    for (const auto& k : ids) known += " " + k;
    throw ParseError("unknown check id '" + id + "'; known:" + known + " all");
  }
  return {id};
}

int cmd_verify(const Context& ctx, const std::string& id) {
  const auto ids = selected_checks(ctx.cfg, id);
  std::vector<CheckReport> reps(ids.size());
  parallel_for(static_cast<int>(ids.size()), ctx.flags.workers,
               [&](int i) { reps[static_cast<std::size_t>(i)] = verification::run_check(ids[static_cast<std::size_t>(i)], ctx.seed, ctx.cfg.checks.corpus_size); });
  Artifacts art(ctx.out_dir, "verify " + id, ctx.cfg, ctx.seed);
  for (const auto& r : reps) emit(art, r.check_id, r, ctx.formats);
  return finish(art, reps);
}

verification::ExperimentConfig experiment_config(const Context& ctx) {
  verification::ExperimentConfig ec;
  const auto& c = ctx.cfg.construction;
  ec.counts = c.count_sweep;
  ec.epsilon = ctx.cfg.solver.epsilon.front();
  ec.epsilon_sweep = ctx.cfg.solver.epsilon_sweep;
  ec.m = c.m;
  ec.r = c.r;
  ec.beta = c.beta;
  ec.separation_units = c.separation_units;
  ec.time_steps = ctx.cfg.solver.time_steps;
  ec.solver = solver_config(ctx.cfg);
  ec.workers = ctx.flags.workers;
  return ec;
}

int cmd_experiment(const Context& ctx) {
  const auto rep = verification::run_discontinuity_experiment(experiment_config(ctx));
  Artifacts art(ctx.out_dir, "experiment", ctx.cfg, ctx.seed);
  emit(art, "experiment", rep.check, ctx.formats);
  art.add("records.csv", experiment_records_csv(rep));
  int k = 0;
  for (const auto& s : experiment_series(rep)) art.add("series_" + std::to_string(k++) + ".csv", series_csv(s));
  return finish(art, {rep.check});
}

// Data and solution norms over m x epsilon, one run per worker slot.
int cmd_sweep(const Context& ctx) {
  std::vector<int> ms = ctx.cfg.construction.m_sweep;
  if (ms.empty()) ms = {ctx.cfg.construction.m};
  struct Run {
    int m;
    double eps;
    double u0 = 0.0, v0 = 0.0, u = 0.0, T = 0.0;
  };
  std::vector<Run> runs;
  for (int m : ms)
    for (double e : ctx.cfg.solver.epsilon) runs.push_back({m, e});
  const auto cut = cutoffs();
  parallel_for(static_cast<int>(runs.size()), ctx.flags.workers, [&](int i) {
    Run& run = runs[static_cast<std::size_t>(i)];
    ExperimentConfig cfg = ctx.cfg;
    cfg.construction.m = run.m;
    const Setup st = setup_with_grid(cfg);
    construction::require_valid(st.params, st.spec, st.grid);
    const auto data = construction::build_initial_data(st.params, st.spec, st.grid, cut);
    run.T = run.eps * std::exp2(-2.0 * run.m);
    evolution::SolverConfig sc = solver_config(cfg);
    sc.output_stride = 1 << 30;
    const auto sol = evolution::solve_chemotaxis(data.u0, data.v0, run.T, sc);
    run.u0 = data.u0_besov;
    run.v0 = data.v0_besov;
    run.u = spectral::besov_norm(sol.u.frames.back(), {-1.5, 2.0 * st.params.d, st.params.r}, cut);
  });
  CheckReport rep;
  rep.check_id = "sweep";
  std::ostringstream os;
  os << "m,epsilon,t_n,u0_norm,v0_norm,u_norm\n";
  for (const auto& r : runs) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.m, r.eps, r.T, r.u0, r.v0, r.u);
    os << buf;
    const std::string tag = "m=" + std::to_string(r.m) + " epsilon=" + fmt(r.eps);
    rep.constant(tag + " u0 norm", r.u0);
    rep.constant(tag + " u(t_n) norm", r.u);
  }
  Artifacts art(ctx.out_dir, "sweep", ctx.cfg, ctx.seed);
  art.add("sweep_runs.csv", os.str());
  emit(art, "sweep", rep, ctx.formats);
  return finish(art, {rep});
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for a chemotaxis ill-posedness construction"};
  app.require_subcommand(1);
  Flags flags;
  std::uint64_t seed = 0;
  std::string format;
  app.add_option("--config", flags.config, "JSON configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "seed for random corpora");
  app.add_option("--workers", flags.workers, "concurrent runs")->check(CLI::PositiveNumber);
  app.add_option("--out", flags.out, "output directory (overrides KSLAB_OUT and the config)");
  auto* fmt_opt = app.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));

  auto* c_defaults = app.add_subcommand("defaults", "print the default configuration");
  auto* c_construct = app.add_subcommand("construct", "build the initial data and write it");
  auto* c_norm = app.add_subcommand("norm", "Lebesgue and Besov norms of a field file");
  std::string norm_file;
  std::vector<std::string> besov;
  std::vector<double> ps{1.0, 2.0, 4.0};
  c_norm->add_option("file", norm_file, "field file")->required();
  c_norm->add_option("--besov", besov, "s,p,r triple (repeatable)");
  c_norm->add_option("--lp", ps, "Lebesgue exponents");
  auto* c_decompose = app.add_subcommand("decompose", "Littlewood-Paley shell table of a field file");
  std::string dec_file;
  c_decompose->add_option("file", dec_file, "field file")->required();
  auto* c_evolve = app.add_subcommand("evolve", "solve the system to t_n");
  auto* c_ladder = app.add_subcommand("ladder", "build the perturbation ladder and its norm ledger");
  auto* c_verify = app.add_subcommand("verify", "run a verification check");
  std::string check_id;
  c_verify->add_option("check", check_id, "check id or 'all'")->required();
  auto* c_experiment = app.add_subcommand("experiment", "discontinuity experiment over the count sweep");
  auto* c_sweep = app.add_subcommand("sweep", "data and solution norms over m and epsilon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  try {
    Context ctx;
    if (flags.config) ctx.cfg = load_config(*flags.config);
    else if (const auto v = validate(ctx.cfg); !v.empty()) throw ValidationError(v);
    ctx.flags = flags;
    ctx.seed = seed_opt->count() ? seed : ctx.cfg.checks.seed;
    if (flags.out) ctx.out_dir = *flags.out;
    else if (const char* env = std::getenv("KSLAB_OUT"); env && *env) ctx.out_dir = env;
    else ctx.out_dir = ctx.cfg.output.directory;
    ctx.formats = fmt_opt->count() ? std::vector<std::string>{format} : ctx.cfg.output.formats;

    if (*c_defaults) {
      std::cout << dump_config(ctx.cfg);
      return kPass;
    }
    if (*c_construct) return cmd_construct(ctx);
    if (*c_norm) return cmd_norm(ctx, norm_file, besov, ps);
    if (*c_decompose) return cmd_decompose(ctx, dec_file);
    if (*c_evolve) return cmd_evolve(ctx);
    if (*c_ladder) return cmd_ladder(ctx);
    if (*c_verify) {
      if (check_id != "all") selected_checks(ctx.cfg, check_id);
      return cmd_verify(ctx, check_id);
    }
    if (*c_experiment) return cmd_experiment(ctx);
    if (*c_sweep) return cmd_sweep(ctx);
  } catch (const ValidationError& e) {
    std::cerr << "configuration error:\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << '\n';
    return kConfigError;
  } catch (const ParseError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kConfigError;
}

}  // namespace kslab::cli
