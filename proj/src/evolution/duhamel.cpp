#include <cmath>
#include <numbers>
#include <string>

#include "kslab/errors.hpp"
#include "kslab/evolution.hpp"

namespace kslab::evolution {

using spectral::cplx;
using spectral::CplxVec;

namespace {

// phi_k(z) = sum_n z^n / (n + k)!
double phi_series(int k, double z) {
  double term = 1.0;
  for (int i = 1; i <= k; ++i) term /= i;
  double s = term;
  for (int n = 1; n < 30; ++n) {
    term *= z / (n + k);
    s += term;
    if (std::abs(term) < 1e-18 * std::abs(s)) break;
  }
  return s;
}

struct Phis {
  double e, p1, p2, p3;
};

Phis phis(double z) {
  Phis r;
  r.e = std::exp(z);
  if (std::abs(z) < 0.5) {
    r.p1 = phi_series(1, z);
    r.p2 = phi_series(2, z);
    r.p3 = phi_series(3, z);
  } else {
    const double em1 = std::expm1(z);
    r.p1 = em1 / z;
    r.p2 = (em1 - z) / (z * z);
    r.p3 = (em1 - z - 0.5 * z * z) / (z * z * z);
  }
  return r;
}

double k2_of(const double* xi, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += xi[i] * xi[i];
  return s;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(n - 1 - i)] = z;
    w[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

std::vector<double> sample_weights(std::size_t n, double h, QuadratureRule rule) {
  std::vector<double> w(n, h);
  if (n == 1) return {0.0};
  if (rule == QuadratureRule::simpson && n % 2 == 1) {
    for (std::size_t i = 0; i < n; ++i) w[i] = h / 3.0 * (i == 0 || i == n - 1 ? 1.0 : (i % 2 ? 4.0 : 2.0));
    return w;
  }
  w.front() = w.back() = 0.5 * h;
  return w;
}

}  // namespace

TimeGrid TimeGrid::for_experiment(double epsilon, int m, int steps) {
  TimeGrid tg;
  tg.epsilon = epsilon;
  tg.steps = steps;
  tg.T_final = epsilon * std::exp2(-2.0 * m);
  tg.validate();
  return tg;
}

void TimeGrid::validate() const {
  if (!(T_final > 0.0)) throw NegativeTime("T_final must be positive");
  if (steps < 8) throw InvalidGrid("time grid needs at least 8 steps, got " + std::to_string(steps));
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) t[static_cast<std::size_t>(i)] = T_final * i / steps;
  return t;
}

Field product(const Field& a, const Field& b, double dealias_fraction) {
  const Field p = spectral::multiply(spectral::dealias(a, dealias_fraction), spectral::dealias(b, dealias_fraction));
  Field out = spectral::dealias(p, dealias_fraction);
  out.drop_physical();
  return out;
}

Field duhamel_const_source(const Field& g, double t) {
  if (t < 0.0) throw NegativeTime("Duhamel time must be >= 0, got " + std::to_string(t));
  return spectral::apply_radial(g, [t](double r) { return spectral::duhamel_symbol(t, r * r); });
}

Field duhamel_quadrature(const std::function<Field(double)>& source, double t, int nodes, QuadratureRule rule) {
  if (t < 0.0) throw NegativeTime("Duhamel time must be >= 0");
  if (nodes < 1) throw EmptyTrace("quadrature needs at least one node");
  std::vector<double> s, w;
  if (rule == QuadratureRule::gauss_legendre) {
    gauss_legendre(nodes, s, w);
    for (auto& v : s) v = 0.5 * t * (v + 1.0);
    for (auto& v : w) v *= 0.5 * t;
  } else {
    const int n = std::max(nodes, 2);
    for (int i = 0; i < n; ++i) s.push_back(t * i / (n - 1));
    w = sample_weights(static_cast<std::size_t>(n), t / (n - 1), rule);
  }
  std::vector<Field> parts;
  for (std::size_t i = 0; i < s.size(); ++i) parts.push_back(spectral::heat_propagate(source(s[i]), t - s[i]));
  return spectral::linear_combination(w, parts);
}

Field duhamel_from_trace(const Trace& source, QuadratureRule rule) {
  if (source.empty()) throw EmptyTrace("source trace is empty");
  const double t = source.times.back();
  const std::size_t n = source.size();
  std::vector<double> w;
  if (n == 1) {
    w = {0.0};
  } else {
    const double h = (source.times.back() - source.times.front()) / static_cast<double>(n - 1);
    w = sample_weights(n, h, rule);
  }
  std::vector<Field> parts;
  for (std::size_t i = 0; i < n; ++i) parts.push_back(spectral::heat_propagate(source.frames[i], t - source.times[i]));
  return spectral::linear_combination(w, parts);
}

namespace {

// Shared ETD kernel: cumulative solution of U' = Delta U + S with S linear
// between nodes, plus optionally the running integral of U.
Trace etd_cumulative(const Trace& source, Trace* integral) {
  if (source.empty()) throw EmptyTrace("source trace is empty");
  const Field& f0 = source.frames.front();
  const auto& g = f0.grid();
  const int nc = f0.components();
  spectral::Lattice lat(g);
  std::vector<double> k2(g.spectral_points());
  spectral::for_each_mode(lat, [&](std::size_t k, const double* xi, bool, double) { k2[k] = k2_of(xi, g.d); });

  Trace out, acc;
  out.times = source.times;
  std::vector<CplxVec> U(static_cast<std::size_t>(nc), CplxVec(g.spectral_points(), cplx(0.0, 0.0)));
  std::vector<CplxVec> W = U;
  out.frames.push_back(Field::from_spectral(g, U, f0.kind()));
  if (integral) {
    acc.times = source.times;
    acc.frames.push_back(Field::from_spectral(g, W, f0.kind()));
  }
  for (std::size_t i = 0; i + 1 < source.size(); ++i) {
    const double h = source.times[i + 1] - source.times[i];
    if (h < 0.0) throw NegativeTime("trace times must be nondecreasing");
    for (int c = 0; c < nc; ++c) {
      const CplxVec& s0 = source.frames[i].spectral(c);
      const CplxVec& s1 = source.frames[i + 1].spectral(c);
      CplxVec& u = U[static_cast<std::size_t>(c)];
      CplxVec& w = W[static_cast<std::size_t>(c)];
      for (std::size_t k = 0; k < u.size(); ++k) {
        const Phis p = phis(-h * k2[k]);
        const cplx ds = s1[k] - s0[k];
        if (integral) w[k] += h * p.p1 * u[k] + h * h * (p.p2 * s0[k] + p.p3 * ds);
        u[k] = p.e * u[k] + h * (p.p1 * s0[k] + p.p2 * ds);
      }
    }
    out.frames.push_back(Field::from_spectral(g, U, f0.kind()));
    if (integral) acc.frames.push_back(Field::from_spectral(g, W, f0.kind()));
  }
  if (integral) *integral = std::move(acc);
  return out;
}

}  // namespace

Trace duhamel_cumulative(const Trace& source) { return etd_cumulative(source, nullptr); }

Trace duhamel_cumulative_with_integral(const Trace& source, Trace& integral) {
  return etd_cumulative(source, &integral);
}

Trace integrate_cumulative(const Trace& tr) {
  if (tr.empty()) throw EmptyTrace("trace is empty");
  Trace out;
  out.times = tr.times;
  Field acc = Field::zeros(tr.frames.front().grid(), tr.frames.front().kind());
  out.frames.push_back(acc);
  for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
    const double h = tr.times[i + 1] - tr.times[i];
    acc = spectral::linear_combination({1.0, 0.5 * h, 0.5 * h}, {acc, tr.frames[i], tr.frames[i + 1]});
    out.frames.push_back(acc);
  }
  return out;
}

}  // namespace kslab::evolution
