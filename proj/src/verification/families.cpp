#include <algorithm>
#include <cmath>
#include <numbers>

#include "kslab/errors.hpp"
#include "kslab/verification.hpp"

namespace kslab::verification {

using construction::AtomSpec;
using construction::ConstructionParams;
using spectral::cplx;
using spectral::CplxVec;

namespace {

constexpr double kPi = std::numbers::pi;

int pow2_at_least(double v) {
  int n = 4;
  while (n < v) n *= 2;
  return n;
}

void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
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
      if (std::abs(dz) < 1e-15) break;
    }
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    const auto lo = static_cast<std::size_t>(i), hi = static_cast<std::size_t>(n - 1 - i);
    x[lo] = 0.5 * (a + b) - 0.5 * (b - a) * z;
    x[hi] = 0.5 * (a + b) + 0.5 * (b - a) * z;
    w[lo] = w[hi] = 0.5 * (b - a) * wi;
  }
}

// theta and theta' from the inverse transform of theta_hat.
struct ThetaEval {
  explicit ThetaEval(const AtomSpec& spec) {
    const double inner = spec.plateau_fraction * spec.beta;
    std::vector<double> x, w;
    gauss_legendre(48, 0.0, inner, x, w);
    xi = x;
    wt = w;
    gauss_legendre(400, inner, spec.beta, x, w);
    for (std::size_t i = 0; i < x.size(); ++i) {
      xi.push_back(x[i]);
      wt.push_back(w[i]);
    }
    for (std::size_t i = 0; i < xi.size(); ++i) wt[i] *= construction::theta_hat(spec, xi[i]) / kPi;
  }
  double theta(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) s += wt[i] * std::cos(x * xi[i]);
    return s;
  }
  double dtheta(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) s -= wt[i] * xi[i] * std::sin(x * xi[i]);
    return s;
  }
  std::vector<double> xi, wt;
};

std::vector<cplx> full_spectrum_1d(const std::vector<double>& samples, double L, std::vector<double>& freqs) {
  const int n = static_cast<int>(samples.size());
  const GridSpec g1(1, n, L);
  CplxVec half(static_cast<std::size_t>(n / 2 + 1));
  spectral::fft::forward(g1, samples.data(), half.data());
  std::vector<cplx> out;
  freqs.clear();
  for (int i = -n / 2 + 1; i < n / 2; ++i) {
    const cplx c = i >= 0 ? half[static_cast<std::size_t>(i)] : std::conj(half[static_cast<std::size_t>(-i)]);
    out.push_back(c);
    freqs.push_back(2.0 * kPi * i / L);
  }
  return out;
}

}  // namespace

Family make_family(const ConstructionParams& p, const AtomSpec& spec, std::vector<double> lengths,
                   double nyquist_factor) {
  const auto bad = construction::violations(p, spec);
  if (!bad.empty()) throw ConstraintViolation(bad.front());
  if (static_cast<int>(lengths.size()) != p.d) throw InvalidGrid("one box length per axis is required");
  const GridSpec snapped = construction::snapped_grid(p, spec, std::vector<int>(static_cast<std::size_t>(p.d), 4), lengths);
  const double s = std::exp2(p.k_max());
  std::vector<int> pts;
  for (int ax = 0; ax < p.d; ++ax) {
    double top;
    if (ax == 0) top = p.modulation_outer * std::exp2(p.m) + (spec.modulation_inner + std::sqrt(p.d) * spec.beta) * s;
    else if (ax == p.d - 1) top = (spec.modulation_inner + spec.beta) * s;
    else top = spec.beta * s;
    const double L = snapped.L[static_cast<std::size_t>(ax)];
    pts.push_back(pow2_at_least(nyquist_factor * top * L / kPi));
  }
  Family fam{p, spec, GridSpec(pts, snapped.L)};
  construction::require_valid(fam.params, fam.spec, fam.grid);
  return fam;
}

Family default_family() {
  ConstructionParams p;
  AtomSpec spec;
  const double L = 8.0 * kPi / spec.beta;
  return make_family(p, spec, {L, L});
}

Family shifted_family(int shift) {
  ConstructionParams p;
  p.m += shift;
  p.K = {static_cast<double>(shift)};
  AtomSpec spec;
  const double L = 8.0 * kPi / (spec.beta * std::exp2(shift));
  return make_family(p, spec, {L, L});
}

Family fractional_family(int count, int count_max, double separation_units, double beta, int m, double r) {
  if (count < 1 || count > count_max) throw ConstraintViolation("atom count must lie in [1, count_max]");
  ConstructionParams p;
  p.m = m;
  p.r = r;
  p.separation_gap = 0.25;
  p.K.clear();
  p.offsets.clear();
  AtomSpec spec;
  spec.beta = beta;
  const double kmin = m - 4.0 - 0.25 * (count_max - 1);
  const double unit = 1.0 / (beta * std::exp2(kmin));
  const double D = separation_units * unit;
  for (int i = 0; i < count; ++i) {
    p.K.push_back(m - 4.0 - 0.25 * i);
    p.offsets.push_back(i * D);
  }
  const double L1 = 8.0 * kPi * unit;
  const double L0 = std::max(count_max * D, L1);
  return make_family(p, spec, {L0, L1});
}

std::vector<CrossTerms> cross_terms(const Family& fam, const std::vector<double>& ps) {
  std::vector<spectral::RealVec> atoms;
  const double cf = fam.params.effective_count_factor();
  for (std::size_t i = 0; i < fam.params.K.size(); ++i) {
    ConstructionParams one = fam.params;
    one.K = {fam.params.K[i]};
    one.offsets = {fam.params.offsets[i]};
    one.count_factor = cf;
    atoms.push_back(construction::build_f(one, fam.spec, fam.grid).physical(0));
  }
  const double cell = fam.grid.cell_volume();
  std::vector<CrossTerms> out(ps.size());
  const std::size_t n = fam.grid.points();
  for (std::size_t q = 0; q < n; ++q) {
    double sum = 0.0, abs_sum = 0.0;
    for (const auto& a : atoms) {
      sum += a[q];
      abs_sum += std::abs(a[q]);
    }
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const double p = ps[i];
      double diag = 0.0;
      for (const auto& a : atoms) diag += std::pow(std::abs(a[q]), p);
      out[i].total += std::pow(std::abs(sum), p);
      out[i].I1 += diag;
      out[i].I2 += std::pow(abs_sum, p) - diag;
    }
  }
  for (auto& c : out) {
    c.total *= cell;
    c.I1 *= cell;
    c.I2 *= cell;
  }
  return out;
}

SeparationCalibration calibrate_separation(double beta, int m, double target) {
  const double hi_units = 64.0;
  ConstructionParams p;
  p.m = m;
  p.separation_gap = 0.25;
  p.K = {m - 4.0, m - 4.25};
  p.min_separation = 0.0;
  AtomSpec spec;
  spec.beta = beta;
  const double unit = 1.0 / (beta * std::exp2(m - 4.25));
  const double q = 2.0 * p.d;
  auto ratio_at = [&](const Family& base, double units) {
    Family fam = base;
    fam.params.offsets = {0.0, units * unit};
    const auto ct = cross_terms(fam, {q});
    return ct[0].I2 / ct[0].I1;
  };
  p.offsets = {0.0, hi_units * unit};
  const Family base = make_family(p, spec, {2.0 * hi_units * unit, 8.0 * kPi * unit}, 2.0);
  double lo = 1.0, hi = hi_units;
  SeparationCalibration cal;
  if (ratio_at(base, hi) > target)
    throw SeparationNotCalibrated("cross term still above target at the largest calibrated offset");
  for (cal.iterations = 0; cal.iterations < 40 && hi - lo > 0.05; ++cal.iterations) {
    const double mid = 0.5 * (lo + hi);
    if (ratio_at(base, mid) > target) lo = mid;
    else hi = mid;
  }
  cal.units = hi;
  cal.measured_ratio = ratio_at(base, hi);
  return cal;
}

double sine_power_mean(double p) { return std::tgamma(0.5 * (p + 1.0)) / (std::sqrt(kPi) * std::tgamma(0.5 * p + 1.0)); }

double atom_lp_power(const AtomSpec& spec, int d, double p) {
  const double L = 128.0 * kPi / spec.beta;
  const double period = 2.0 * kPi / spec.modulation_inner;
  const int n = pow2_at_least(64.0 * L / std::min(period, 2.0 * kPi / spec.beta));
  construction::Factor1D plain;
  construction::Factor1D mod;
  mod.carrier = spec.modulation_inner;
  const auto a = construction::sample_factor(spec, plain, n, L);
  const auto b = construction::sample_factor(spec, mod, n, L);
  const double h = L / n;
  double sa = 0.0, sb = 0.0;
  for (int i = 0; i < n; ++i) {
    sa += std::pow(std::abs(a[static_cast<std::size_t>(i)]), p);
    sb += std::pow(std::abs(b[static_cast<std::size_t>(i)]), p);
  }
  return std::pow(sa * h, d - 1) * sb * h;
}

double h_ball_norm(const AtomSpec& spec, int d, double p) {
  if (d < 2 || d > 3) throw InvalidGrid("h_ball_norm supports d = 2 or 3");
  const ThetaEval th(spec);
  const double w2 = 2.0 * spec.modulation_inner;
  auto h = [&](const double* y) {
    double v = -th.theta(y[0]) * th.dtheta(y[0]);
    for (int i = 1; i < d; ++i) {
      const double t = th.theta(y[i]);
      v *= t * t;
    }
    return v * std::cos(w2 * y[d - 1]);
  };
  std::vector<double> rx, rw;
  gauss_legendre(64, 0.0, 1.0, rx, rw);
  const int nphi = 256;
  double s = 0.0;
  if (d == 2) {
    for (std::size_t i = 0; i < rx.size(); ++i)
      for (int k = 0; k < nphi; ++k) {
        const double a = 2.0 * kPi * k / nphi;
        const double y[2] = {rx[i] * std::cos(a), rx[i] * std::sin(a)};
        s += rw[i] * rx[i] * (2.0 * kPi / nphi) * std::pow(std::abs(h(y)), p);
      }
  } else {
    std::vector<double> cx, cw;
    gauss_legendre(64, -1.0, 1.0, cx, cw);
    for (std::size_t i = 0; i < rx.size(); ++i)
      for (std::size_t j = 0; j < cx.size(); ++j)
        for (int k = 0; k < nphi; ++k) {
          const double a = 2.0 * kPi * k / nphi;
          const double st = std::sqrt(1.0 - cx[j] * cx[j]);
          const double y[3] = {rx[i] * st * std::cos(a), rx[i] * st * std::sin(a), rx[i] * cx[j]};
          s += rw[i] * rx[i] * rx[i] * cw[j] * (2.0 * kPi / nphi) * std::pow(std::abs(h(y)), p);
        }
  }
  return std::pow(s, 1.0 / p);
}

double atom_pair_leakage(const AtomSpec& spec, int d, double k, double j) {
  if (!(k > j)) throw ConstraintViolation("atom_pair_leakage expects k > j");
  if (d < 2 || d > 3) throw InvalidGrid("atom_pair_leakage supports d = 2 or 3");
  const double sk = std::exp2(k), sj = std::exp2(j);
  const double L = 16.0 * kPi / (spec.beta * sj);
  const double top_t = spec.beta * (sk + sj);
  const double top_d = (spec.modulation_inner + spec.beta) * (sk + sj);
  auto axis_spectrum = [&](bool last, std::vector<double>& freqs) {
    const int n = pow2_at_least(1.5 * (last ? top_d : top_t) * L / kPi);
    construction::Factor1D fk, fj;
    fk.scale = sk;
    fj.scale = sj;
    if (last) {
      fk.carrier = spec.modulation_inner * sk;
      fj.carrier = spec.modulation_inner * sj;
    }
    auto a = construction::sample_factor(spec, fk, n, L);
    const auto b = construction::sample_factor(spec, fj, n, L);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
    return full_spectrum_1d(a, L, freqs);
  };
  // Transverse radii^2 with their energies, sorted for prefix sums.
  std::vector<double> ft;
  const auto ct = axis_spectrum(false, ft);
  double emax = 0.0;
  for (const auto& c : ct) emax = std::max(emax, std::norm(c));
  std::vector<std::pair<double, double>> tr1;
  for (std::size_t i = 0; i < ct.size(); ++i)
    if (std::norm(ct[i]) > 1e-40 * emax) tr1.emplace_back(ft[i] * ft[i], std::norm(ct[i]));
  std::vector<std::pair<double, double>> trans;
  if (d == 2) {
    trans = tr1;
  } else {
    for (const auto& a : tr1)
      for (const auto& b : tr1) trans.emplace_back(a.first + b.first, a.second * b.second);
  }
  std::sort(trans.begin(), trans.end());
  // Prefix and suffix sums so the outside mass never comes from a cancellation.
  std::vector<double> prefix(trans.size() + 1, 0.0), suffix(trans.size() + 1, 0.0);
  for (std::size_t i = 0; i < trans.size(); ++i) prefix[i + 1] = prefix[i] + trans[i].second;
  for (std::size_t i = trans.size(); i > 0; --i) suffix[i - 1] = suffix[i] + trans[i - 1].second;
  const double etrans = prefix.back();

  std::vector<double> fd;
  const auto cd = axis_spectrum(true, fd);
  const double rlo = 33.0 / 48.0 * sk, rhi = 35.0 / 48.0 * sk;
  double total = 0.0, outside = 0.0;
  for (std::size_t i = 0; i < cd.size(); ++i) {
    const double e = std::norm(cd[i]);
    if (e == 0.0) continue;
    total += e * etrans;
    const double a = rlo * rlo - fd[i] * fd[i], b = rhi * rhi - fd[i] * fd[i];
    if (b < 0.0) {
      outside += e * etrans;
      continue;
    }
    const auto lo = std::lower_bound(trans.begin(), trans.end(), std::make_pair(a, -1.0)) - trans.begin();
    const auto hi = std::upper_bound(trans.begin(), trans.end(), std::make_pair(b, spectral::kInf)) - trans.begin();
    outside += e * (prefix[static_cast<std::size_t>(lo)] + suffix[static_cast<std::size_t>(std::max(lo, hi))]);
  }
  if (total <= 0.0) return 0.0;
  return std::sqrt(outside / total);
}

}  // namespace kslab::verification
