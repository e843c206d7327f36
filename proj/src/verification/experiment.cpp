#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kslab/errors.hpp"
#include "kslab/parallel.hpp"
#include "kslab/verification.hpp"

namespace kslab::verification {

using spectral::BesovParams;

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

ExperimentReport run_discontinuity_experiment(const ExperimentConfig& cfg) {
  if (cfg.counts.size() < 3) throw ConstraintViolation("the count sweep needs at least three entries for a trend fit");
  for (std::size_t i = 1; i < cfg.counts.size(); ++i)
    if (cfg.counts[i] <= cfg.counts[i - 1]) throw ConstraintViolation("counts must be strictly increasing");
  ExperimentReport out;
  CheckReport& rep = out.check;
  rep.check_id = "experiment";
  if (cfg.separation_units) {
    out.separation_units = *cfg.separation_units;
  } else {
    const auto cal = calibrate_separation(cfg.beta, cfg.m);
    out.separation_units = cal.units;
    rep.constant("separation_calibration_ratio", cal.measured_ratio);
  }
  rep.constant("separation_units", out.separation_units);

  const int count_max = cfg.counts.back();
  const auto cut = spectral::build_cutoffs(4);
  const int d = 2;
  const BesovParams bu{-1.5, 2.0 * d, cfg.r};

  auto family = [&](int count) {
    return fractional_family(count, count_max, out.separation_units, cfg.beta, cfg.m, cfg.r);
  };

  out.records.resize(cfg.counts.size());
  parallel_for(static_cast<int>(cfg.counts.size()), cfg.workers, [&](int i) {
    ExperimentRecord& rec = out.records[static_cast<std::size_t>(i)];
    rec.count = cfg.counts[static_cast<std::size_t>(i)];
    rec.epsilon = cfg.epsilon;
    const Family fam = family(rec.count);
    const auto data = construction::build_initial_data(fam.params, fam.spec, fam.grid, cut);
    const auto tg = evolution::TimeGrid::for_experiment(cfg.epsilon, cfg.m, cfg.time_steps);
    rec.t_n = tg.T_final;
    rec.u0_norm = data.u0_besov;
    rec.v0_norm = data.v0_besov;
    const auto shells = construction::restricted_shells(fam.params, fam.spec);
    evolution::PerturbationLadder L;
    try {
      L = evolution::build_ladder(data, tg, evolution::LadderOptions{cfg.solver.dealias_fraction});
    } catch (const NonContraction& e) {
      rec.excluded = true;
      rec.reason = e.what();
      return;
    }
    rec.picard_iterations = L.picard_iterations;
    const Field U1 = L.U1.frames.back(), U21 = L.U21.frames.back(), U22 = L.U22.frames.back();
    const Field U3 = L.U3.frames.back();
    const Field U2 = spectral::add(U21, U22);
    rec.U1_norm = spectral::besov_norm(U1, bu, cut);
    rec.U3_norm = spectral::besov_norm(U3, bu, cut);
    rec.U2_restricted = spectral::besov_norm_on(U2, bu, cut, shells);
    rec.U21_restricted = spectral::besov_norm_on(U21, bu, cut, shells);
    rec.U22_restricted = spectral::besov_norm_on(U22, bu, cut, shells);
    rec.U1_restricted = spectral::besov_norm_on(U1, bu, cut, shells);
    rec.U3_restricted = spectral::besov_norm_on(U3, bu, cut, shells);

    evolution::SolverConfig sc = cfg.solver;
    sc.output_stride = std::numeric_limits<int>::max();
    const auto sol = evolution::solve_chemotaxis(data.u0, data.v0, tg.T_final, sc);
    const Field u = sol.u.frames.back();
    rec.u_norm = spectral::besov_norm(u, bu, cut);
    const Field lu = spectral::linear_combination({1.0, 1.0, 1.0}, {U1, U2, U3});
    const double n21 = spectral::l2_spectral(U21);
    rec.defect = spectral::l2_spectral(spectral::sub(lu, u)) / n21;
    if (!(rec.defect <= cfg.gate)) {
      rec.excluded = true;
      rec.reason = "ladder defect " + fmt(rec.defect) + " exceeds " + fmt(cfg.gate) + " of |U21|";
    }
  });

  // The epsilon sweep only needs the second rung.
  out.epsilon_records.resize(cfg.epsilon_sweep.size());
  parallel_for(static_cast<int>(cfg.epsilon_sweep.size()), cfg.workers, [&](int i) {
    ExperimentRecord& rec = out.epsilon_records[static_cast<std::size_t>(i)];
    rec.count = count_max;
    rec.epsilon = cfg.epsilon_sweep[static_cast<std::size_t>(i)];
    const Family fam = family(count_max);
    const auto data = construction::build_initial_data(fam.params, fam.spec, fam.grid, cut);
    const auto tg = evolution::TimeGrid::for_experiment(rec.epsilon, cfg.m, cfg.time_steps);
    rec.t_n = tg.T_final;
    rec.u0_norm = data.u0_besov;
    rec.v0_norm = data.v0_besov;
    evolution::PerturbationLadder L;
    evolution::build_U2(data, tg, evolution::LadderOptions{cfg.solver.dealias_fraction}, L);
    const auto shells = construction::restricted_shells(fam.params, fam.spec);
    const Field U21 = L.U21.frames.back(), U22 = L.U22.frames.back();
    rec.U1_norm = spectral::besov_norm(L.U1.frames.back(), bu, cut);
    rec.U2_restricted = spectral::besov_norm_on(spectral::add(U21, U22), bu, cut, shells);
    rec.U21_restricted = spectral::besov_norm_on(U21, bu, cut, shells);
    rec.U22_restricted = spectral::besov_norm_on(U22, bu, cut, shells);
  });

  // (i) data norms fall along the sweep with the predicted exponent.
  std::vector<double> counts, u0n, v0n, un;
  for (const auto& r : out.records) {
    if (r.excluded) {
      rep.note("count " + std::to_string(r.count) + " excluded: " + r.reason);
      continue;
    }
    counts.push_back(r.count);
    u0n.push_back(r.u0_norm);
    v0n.push_back(r.v0_norm);
    un.push_back(r.u_norm);
  }
  const double target = 1.0 / (2.0 * d) - 1.0 / (2.0 * cfg.r);
  for (std::size_t i = 1; i < u0n.size(); ++i) {
    const std::string tag = "count " + fmt(counts[i - 1]) + " -> " + fmt(counts[i]);
    rep.at_least(tag + " u0 norm strictly decreasing", u0n[i - 1] / u0n[i], 1.0 + 1e-9);
    rep.at_least(tag + " v0 norm strictly decreasing", v0n[i - 1] / v0n[i], 1.0 + 1e-9);
  }
  rep.fits.push_back(fit_log2("u0 norm vs count", counts, u0n, target, cfg.exponent_band));
  rep.fits.push_back(fit_log2("v0 norm vs count", counts, v0n, target, cfg.exponent_band));

  // (ii) the solution norm does not decay along the sweep.
  if (!un.empty()) {
    const auto [mn, mx] = std::minmax_element(un.begin(), un.end());
    rep.at_least("min/max of |u(t_n)| over the sweep", *mn / *mx, 0.5);
  } else {
    rep.at_least("min/max of |u(t_n)| over the sweep", 0.0, 0.5);
  }

  // (iii) triangle audit.
  for (const auto& r : out.records) {
    if (r.excluded) continue;
    const std::string tag = "count " + std::to_string(r.count) + " U2 on K";
    rep.at_least(tag + " >= " + fmt(cfg.dominance) + " x |U1|", r.U2_restricted, cfg.dominance * r.U1_norm);
    rep.at_least(tag + " >= " + fmt(cfg.dominance) + " x |U3|", r.U2_restricted, cfg.dominance * r.U3_norm);
    const std::string c = "count " + std::to_string(r.count);
    rep.constant(c + " |U2| on K", r.U2_restricted);
    rep.constant(c + " |U1|", r.U1_norm);
    rep.constant(c + " |U3|", r.U3_norm);
    rep.constant(c + " |U1| on K", r.U1_restricted);
    rep.constant(c + " |U3| on K", r.U3_restricted);
    rep.constant(c + " triangle lower bound", r.U2_restricted - r.U1_norm - r.U3_norm);
  }

  // (iv) the U2 lower bound is linear in epsilon.
  std::vector<double> eps, u2;
  for (const auto& r : out.epsilon_records) {
    eps.push_back(r.epsilon);
    u2.push_back(r.U2_restricted);
  }
  for (std::size_t i = 0; i + 1 < eps.size(); ++i) {
    const double halving = std::log2(eps[i] / eps[i + 1]);
    const double ratio = std::pow(u2[i + 1] / u2[i], 1.0 / halving);
    const std::string tag = "epsilon " + fmt(eps[i]) + " -> " + fmt(eps[i + 1]) + " U2 on K ratio per halving";
    rep.at_least(tag + " >= 0.4", ratio, 0.4);
    rep.at_most(tag + " <= 0.6", ratio, 0.6);
  }
  return out;
}

}  // namespace kslab::verification
