#include <algorithm>
#include <cmath>
#include <string>

#include "kslab/errors.hpp"
#include "kslab/evolution.hpp"

namespace kslab::evolution {

using spectral::add;
using spectral::cplx;
using spectral::CplxVec;
using spectral::linear_combination;

namespace {

double max_coefficient(const Field& f) {
  double m = 0.0;
  for (int c = 0; c < f.components(); ++c)
    for (const auto& v : f.spectral(c)) m = std::max(m, std::abs(v));
  return m;
}

double max_active_radius(const Field& f) {
  spectral::Lattice lat(f.grid());
  const double cmax = max_coefficient(f);
  double r = 0.0;
  const CplxVec& c = f.spectral(0);
  spectral::for_each_mode(lat, [&](std::size_t k, const double* xi, bool, double) {
    if (std::abs(c[k]) <= 1e-14 * cmax) return;
    double s = 0.0;
    for (int i = 0; i < f.grid().d; ++i) s += xi[i] * xi[i];
    r = std::max(r, std::sqrt(s));
  });
  return r;
}

class Stepper {
 public:
  Stepper(const Field& v0, const SolverConfig& cfg, const Forcing& forcing)
      : v0_(v0), cfg_(cfg), forcing_(forcing) {}

  Field N(const Field& u, const Field& W, double t) const {
    const Field v = add(v0_, spectral::gradient(W));
    Field out = spectral::divergence(product(u, v, cfg_.dealias_fraction));
    if (forcing_) out = add(out, forcing_(t));
    return out;
  }

  static Field E(const Field& f, double h) { return spectral::heat_propagate(f, h); }

  void step(Field& u, Field& W, double t, double h) const {
    switch (cfg_.integrator) {
      case Integrator::if_rk4: {
        const Field k1 = N(u, W, t);
        const Field a = E(linear_combination({1.0, 0.5 * h}, {u, k1}), 0.5 * h);
        const Field Wa = linear_combination({1.0, 0.5 * h}, {W, u});
        const Field k2 = N(a, Wa, t + 0.5 * h);
        const Field Eu = E(u, 0.5 * h);
        const Field b = linear_combination({1.0, 0.5 * h}, {Eu, k2});
        const Field Wb = linear_combination({1.0, 0.5 * h}, {W, a});
        const Field k3 = N(b, Wb, t + 0.5 * h);
        const Field c = linear_combination({1.0, h}, {E(Eu, 0.5 * h), E(k3, 0.5 * h)});
        const Field Wc = linear_combination({1.0, h}, {W, b});
        const Field k4 = N(c, Wc, t + h);
        const Field un = linear_combination({1.0, h / 6.0, h / 3.0, h / 6.0},
                                            {E(u, h), E(k1, h), E(add(k2, k3), 0.5 * h), k4});
        W = linear_combination({1.0, h / 6.0, h / 3.0, h / 3.0, h / 6.0}, {W, u, a, b, c});
        u = un;
        break;
      }
      case Integrator::if_rk2: {
        const Field k1 = N(u, W, t);
        const Field a = E(linear_combination({1.0, h}, {u, k1}), h);
        const Field Wa = linear_combination({1.0, h}, {W, u});
        const Field k2 = N(a, Wa, t + h);
        const Field un = linear_combination({1.0, 0.5 * h, 0.5 * h}, {E(u, h), E(k1, h), k2});
        W = linear_combination({1.0, 0.5 * h, 0.5 * h}, {W, u, a});
        u = un;
        break;
      }
      case Integrator::etd2: {
        const Field n0 = N(u, W, t);
        const Field a = add(E(u, h), etd_phi(n0, h, 1));
        const Field Wa = linear_combination({1.0, 0.5 * h, 0.5 * h}, {W, u, a});
        const Field n1 = N(a, Wa, t + h);
        const Field un = add(a, etd_phi(spectral::sub(n1, n0), h, 2));
        W = linear_combination({1.0, 0.5 * h, 0.5 * h}, {W, u, un});
        u = un;
        break;
      }
    }
  }

 private:
  // h * phi_k(-h |xi|^2) applied to f.
  static Field etd_phi(const Field& f, double h, int k) {
    return spectral::apply_radial(f, [h, k](double r) {
      const double z = -h * r * r;
      if (std::abs(z) < 1e-3) return k == 1 ? h * (1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0)
                                            : h * (0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0);
      const double em1 = std::expm1(z);
      return k == 1 ? h * em1 / z : h * (em1 - z) / (z * z);
    });
  }

  Field v0_;
  SolverConfig cfg_;
  Forcing forcing_;
};

// Cumulative integral by Simpson's rule on pairs of intervals, closing odd
// counts with the 3/8 rule over the last three intervals.
std::vector<Field> cumulative_simpson(const Trace& tr) {
  const std::size_t n = tr.size();
  std::vector<Field> out;
  const Field zero = Field::zeros(tr.frames[0].grid(), tr.frames[0].kind());
  out.push_back(zero);
  const double h = n > 1 ? tr.times[1] - tr.times[0] : 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    if (i == 1) {
      if (n >= 4) {
        // third-order start from a cubic through the first four nodes
        out.push_back(linear_combination({h * 9.0 / 24.0, h * 19.0 / 24.0, -h * 5.0 / 24.0, h / 24.0},
                                         {tr.frames[0], tr.frames[1], tr.frames[2], tr.frames[3]}));
      } else {
        out.push_back(linear_combination({0.5 * h, 0.5 * h}, {tr.frames[0], tr.frames[1]}));
      }
    } else if (i % 2 == 0) {
      out.push_back(linear_combination({1.0, h / 3.0, 4.0 * h / 3.0, h / 3.0},
                                       {out[i - 2], tr.frames[i - 2], tr.frames[i - 1], tr.frames[i]}));
    } else {
      out.push_back(linear_combination({1.0, 3.0 * h / 8.0, 9.0 * h / 8.0, 9.0 * h / 8.0, 3.0 * h / 8.0},
                                       {out[i - 3], tr.frames[i - 3], tr.frames[i - 2], tr.frames[i - 1], tr.frames[i]}));
    }
  }
  return out;
}

}  // namespace

Integrator parse_integrator(const std::string& name) {
  if (name == "if_rk4" || name == "rk4") return Integrator::if_rk4;
  if (name == "if_rk2" || name == "rk2") return Integrator::if_rk2;
  if (name == "etd2") return Integrator::etd2;
  throw ParseError("unknown integrator '" + name + "' (expected if_rk4, if_rk2 or etd2)");
}

std::string to_string(Integrator it) {
  switch (it) {
    case Integrator::if_rk4: return "if_rk4";
    case Integrator::if_rk2: return "if_rk2";
    case Integrator::etd2: return "etd2";
  }
  return "?";
}

int default_steps(const Field& u0, double T) {
  const double k = max_active_radius(u0);
  return std::max(8, static_cast<int>(std::ceil(T * k * k / 0.5)));
}

SolutionTrace solve_chemotaxis(const Field& u0, const Field& v0, double T, const SolverConfig& cfg,
                               const Forcing& forcing) {
  if (T < 0.0) throw NegativeTime("final time must be >= 0");
  if (v0.kind() != spectral::FieldKind::vector || v0.grid() != u0.grid())
    throw InvalidGrid("v0 must be a vector field on the grid of u0");
  if (!(cfg.dealias_fraction > 0.0 && cfg.dealias_fraction <= 1.0))
    throw InvalidGrid("dealias_fraction must lie in (0, 1]");
  const int steps = cfg.steps > 0 ? cfg.steps : default_steps(u0, T);
  const double h = steps > 0 ? T / steps : 0.0;
  const int stride = std::max(1, cfg.output_stride);

  {
    const double kcut = cfg.dealias_fraction * u0.grid().max_radius();
    const double umax = spectral::max_abs(u0);
    const double vmax = spectral::max_abs(v0);
    const double cfl = h * kcut * (vmax + std::sqrt(umax));
    if (cfl > 2.8)
      throw CFLViolation("explicit stability number " + std::to_string(cfl) + " exceeds 2.8; use more steps");
  }

  Stepper st(v0, cfg, forcing);
  SolutionTrace out;
  out.steps = steps;
  out.h = h;
  Field u = spectral::hermitian_project(u0);
  Field W = Field::zeros(u0.grid(), spectral::FieldKind::scalar);
  const double m0 = spectral::mean(u);
  auto record = [&](double t) {
    Field uu = u;
    Field vv = add(v0, spectral::gradient(W));
    uu.drop_physical();
    vv.drop_physical();
    out.u.times.push_back(t);
    out.u.frames.push_back(uu);
    out.v.times.push_back(t);
    out.v.frames.push_back(vv);
    out.mean_u.push_back(spectral::mean(u));
    out.max_mean_drift = std::max(out.max_mean_drift, std::abs(out.mean_u.back() - m0));
  };
  record(0.0);
  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    st.step(u, W, t, h);
    u.drop_physical();
    W.drop_physical();
    const double mc = max_coefficient(u);
    if (!std::isfinite(mc) || mc > cfg.blowup_guard)
      throw BlowupDetected("solution exceeded the overflow guard at t = " + std::to_string(t + h));
    if ((s + 1) % stride == 0 || s + 1 == steps) record(t + h);
  }

  // Independent check of v = v0 + int grad u from the stored samples.
  if (stride == 1 && out.u.size() >= 3) {
    const auto I = cumulative_simpson(out.u);
    double vmax = 0.0;
    std::vector<double> res;
    for (std::size_t i = 0; i < out.v.size(); ++i) {
      const Field dv = spectral::sub(out.v.frames[i], v0);
      vmax = std::max(vmax, spectral::l2_spectral(dv));
      res.push_back(spectral::l2_spectral(spectral::sub(dv, spectral::gradient(I[i]))));
    }
    for (double& r : res) r = vmax > 0.0 ? r / vmax : r;
    out.W_residual = std::move(res);
  }
  return out;
}

}  // namespace kslab::evolution
