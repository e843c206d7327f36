#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kslab/errors.hpp"
#include "kslab/verification.hpp"

namespace kslab::verification {

using evolution::Integrator;
using spectral::BesovParams;
using spectral::RealVec;

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Field along_x1(const GridSpec& g, double (*fn)(double)) {
  RealVec x(g.points());
  const std::size_t row = g.points() / static_cast<std::size_t>(g.n[0]);
  for (std::size_t q = 0; q < x.size(); ++q) x[q] = fn(g.L[0] * static_cast<double>(q / row) / g.n[0]);
  return Field::scalar_physical(g, std::move(x));
}

double nominal_order(Integrator it) { return it == Integrator::if_rk4 ? 4.0 : 2.0; }

}  // namespace

CheckReport check_solver(const SolverCheckConfig& cfg) {
  CheckReport rep;
  rep.check_id = "solver";
  const GridSpec g(2, cfg.points, 2.0 * std::numbers::pi);
  // Manufactured solution u = 1 + e^{-t} sin x1, v = (1 - e^{-t}) cos x1 e1.
  const Field one = along_x1(g, [](double) { return 1.0; });
  const Field s1 = along_x1(g, [](double x) { return std::sin(x); });
  const Field c1 = along_x1(g, [](double x) { return std::cos(x); });
  const Field c2 = along_x1(g, [](double x) { return std::cos(2.0 * x); });
  const Field zero = Field::zeros(g);
  const Field u0 = spectral::add(one, s1);
  const Field v0 = Field::zeros(g, spectral::FieldKind::vector);
  const evolution::Forcing forcing = [&](double t) {
    const double a = 1.0 - std::exp(-t), b = std::exp(-t);
    return spectral::linear_combination({a, -a * b}, {s1, c2});
  };
  const double T = cfg.T;
  const Field u_exact = spectral::add(one, spectral::scale(s1, std::exp(-T)));
  const Field v_exact = Field::stack({spectral::scale(c1, 1.0 - std::exp(-T)), zero});

  for (Integrator it : cfg.integrators) {
    std::vector<double> hs, errs;
    double drift = 0.0, wres = spectral::kInf;
    for (int n : cfg.steps) {
      evolution::SolverConfig sc;
      sc.integrator = it;
      sc.steps = n;
      const auto sol = evolution::solve_chemotaxis(u0, v0, T, sc, forcing);
      const double eu = spectral::l2_spectral(spectral::sub(sol.u.frames.back(), u_exact));
      const double ev = spectral::l2_spectral(spectral::sub(sol.v.frames.back(), v_exact));
      hs.push_back(T / n);
      errs.push_back(std::max(eu, ev));
      drift = std::max(drift, sol.max_mean_drift);
      if (!sol.W_residual.empty()) wres = *std::max_element(sol.W_residual.begin(), sol.W_residual.end());
      rep.constant(evolution::to_string(it) + " steps=" + std::to_string(n) + " error", errs.back());
    }
    const std::string name = evolution::to_string(it);
    rep.fits.push_back(fit_log2(name + " error vs h", hs, errs, nominal_order(it), cfg.order_band));
    rep.at_most(name + " mean drift", drift, cfg.drift_tol);
    rep.constant(name + " v-integral residual at finest step", wres);
    // The independent fourth-order quadrature only resolves the default integrator's W to this level.
    if (it == Integrator::if_rk4) rep.at_most(name + " v-integral residual", wres, cfg.residual_tol);
  }

  // Zero data stays zero.
  {
    evolution::SolverConfig sc;
    sc.steps = cfg.steps.front();
    const auto sol = evolution::solve_chemotaxis(zero, v0, T, sc);
    rep.at_most("zero data: |u(T)| + |v(T)|",
                spectral::l2_spectral(sol.u.frames.back()) + spectral::l2_spectral(sol.v.frames.back()), 0.0);
  }
  return rep;
}

CheckReport check_ladder(const LadderCheckConfig& cfg) {
  CheckReport rep;
  rep.check_id = "ladder";
  const Family fam = fractional_family(1, 1, construction::kSeparationUnits, cfg.beta);
  const auto cut = spectral::build_cutoffs(4);
  const auto base = construction::build_initial_data(fam.params, fam.spec, fam.grid, cut);
  const int m = fam.params.m;

  std::vector<double> lams, defects;
  double u21_unit = 0.0, defect_unit = 0.0;
  for (double lam : cfg.lambdas) {
    construction::DataPair data = base;
    data.u0 = spectral::scale(base.u0, lam);
    data.v0 = spectral::scale(base.v0, lam);
    const auto tg = evolution::TimeGrid::for_experiment(cfg.epsilon, m, cfg.time_steps);
    const auto L = evolution::build_ladder(data, tg, evolution::LadderOptions{});
    const auto sol = evolution::solve_chemotaxis(data.u0, data.v0, tg.T_final, evolution::SolverConfig{});
    const Field lu = L.u().frames.back();
    const double defect = spectral::l2_spectral(spectral::sub(lu, sol.u.frames.back()));
    lams.push_back(lam);
    defects.push_back(defect);
    rep.constant("lambda=" + fmt(lam) + " defect", defect);
    rep.constant("lambda=" + fmt(lam) + " picard iterations", L.picard_iterations);
    if (lam == 1.0) {
      u21_unit = spectral::l2_spectral(L.U21.frames.back());
      defect_unit = defect;
    }
  }
  rep.fits.push_back(fit_log2("defect vs lambda", lams, defects, cfg.min_order, 0.4, true));
  if (u21_unit > 0.0) rep.at_most("lambda=1 defect / |U21|", defect_unit / u21_unit, 0.05);

  const auto shells = construction::restricted_shells(fam.params, fam.spec);
  std::vector<double> eps, u22;
  for (double e : cfg.epsilons) {
    const auto tg = evolution::TimeGrid::for_experiment(e, m, cfg.time_steps);
    evolution::PerturbationLadder L;
    evolution::build_U2(base, tg, evolution::LadderOptions{}, L);
    const double n = spectral::besov_norm_on(L.U22.frames.back(), BesovParams{-1.5, 2.0 * fam.params.d, fam.params.r},
                                             cut, shells);
    eps.push_back(e);
    u22.push_back(n);
    rep.constant("epsilon=" + fmt(e) + " U22 restricted", n);
  }
  rep.fits.push_back(fit_log2("U22 restricted vs epsilon", eps, u22, 2.0, cfg.eps_band));
  return rep;
}

}  // namespace kslab::verification
