#include "kslab/construction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kslab/errors.hpp"

namespace kslab::construction {

using spectral::cplx;
using spectral::CplxVec;
using spectral::RealVec;

namespace {

constexpr double kPi = std::numbers::pi;

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool is_integer(double v) { return std::abs(v - std::round(v)) < 1e-12; }

double periodic_distance(double a, double b, double L) {
  double d = std::fmod(std::abs(a - b), L);
  return std::min(d, L - d);
}

// Tensor product of per-axis samples, row-major with the last axis fastest.
RealVec outer(const GridSpec& g, const std::vector<std::vector<double>>& axes, double scale) {
  RealVec out(g.points());
  if (g.d == 1) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * axes[0][i];
    return out;
  }
  std::vector<double> pre{scale};
  for (int ax = 0; ax + 1 < g.d; ++ax) {
    std::vector<double> next;
    next.reserve(pre.size() * axes[static_cast<std::size_t>(ax)].size());
    for (double p : pre)
      for (double v : axes[static_cast<std::size_t>(ax)]) next.push_back(p * v);
    pre.swap(next);
  }
  const auto& last = axes[static_cast<std::size_t>(g.d - 1)];
  std::size_t k = 0;
  for (double p : pre)
    for (double v : last) out[k++] = p * v;
  return out;
}

std::vector<double> carrier_samples(double w, int n, double L, bool cosine) {
  std::vector<double> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = L * i / n;
    s[static_cast<std::size_t>(i)] = cosine ? std::cos(w * x) : std::sin(w * x);
  }
  return s;
}

std::vector<std::vector<double>> atom_axes(const AtomSpec& spec, const GridSpec& g, double k, double offset,
                                           double outer_carrier) {
  const double s = std::exp2(k);
  std::vector<std::vector<double>> axes;
  for (int ax = 0; ax < g.d; ++ax) {
    Factor1D fac;
    fac.scale = s;
    if (ax == 0) {
      fac.offset = offset;
      fac.carrier = outer_carrier;
    }
    if (ax == g.d - 1) fac.carrier = spec.modulation_inner * s;
    if (g.d == 1) fac.carrier = 0.0;
    axes.push_back(sample_factor(spec, fac, g.n[static_cast<std::size_t>(ax)], g.L[static_cast<std::size_t>(ax)]));
  }
  return axes;
}

double inner_radius_bound(const ConstructionParams& p, const AtomSpec& spec) {
  return spec.modulation_inner + std::sqrt(static_cast<double>(p.d)) * spec.beta;
}

}  // namespace

double theta_hat(const AtomSpec& spec, double xi) {
  const double a = std::abs(xi);
  const double inner = spec.plateau_fraction * spec.beta;
  if (a <= inner) return 1.0;
  if (a >= spec.beta) return 0.0;
  return 1.0 - smooth_step((a - inner) / (spec.beta - inner));
}

std::vector<double> sample_factor(const AtomSpec& spec, const Factor1D& fac, int n, double L) {
  const GridSpec g1(1, n, L);
  const int half = n / 2;
  CplxVec c(static_cast<std::size_t>(half + 1));
  const double s = fac.scale;
  auto ghat = [&](double eta) {
    cplx v = theta_hat(spec, eta / s) / s * std::polar(1.0, -eta * fac.offset);
    if (fac.derivative) v *= cplx(0.0, eta / s);
    return v;
  };
  for (int i = 0; i <= half; ++i) {
    const double xi = 2.0 * kPi * i / L;
    cplx F;
    if (fac.carrier != 0.0) F = (ghat(xi - fac.carrier) - ghat(xi + fac.carrier)) / cplx(0.0, 2.0);
    else F = ghat(xi);
    c[static_cast<std::size_t>(i)] = F / L;
  }
  c[0] = c[0].real();
  c[static_cast<std::size_t>(half)] = c[static_cast<std::size_t>(half)].real();
  RealVec out(static_cast<std::size_t>(n));
  spectral::fft::backward(g1, c.data(), out.data());
  return {out.begin(), out.end()};
}

double ConstructionParams::effective_count_factor() const {
  if (count_factor > 0.0) return count_factor;
  return std::pow(static_cast<double>(K.size()), -1.0 / (2.0 * r));
}

double ConstructionParams::k_max() const { return K.empty() ? 0.0 : *std::max_element(K.begin(), K.end()); }
double ConstructionParams::k_min() const { return K.empty() ? 0.0 : *std::min_element(K.begin(), K.end()); }

double ConstructionParams::effective_min_separation(const AtomSpec& spec) const {
  if (min_separation >= 0.0) return min_separation;
  return kSeparationUnits / (spec.beta * std::exp2(k_min()));
}

std::vector<std::string> violations(const ConstructionParams& p, const AtomSpec& spec) {
  std::vector<std::string> v;
  if (p.d < 2 || p.d > 3) v.push_back("construction requires d in {2, 3}, got " + std::to_string(p.d));
  if (!(p.r >= 1.0 && p.r < p.d)) v.push_back("requires 1 <= r < d, got r = " + fmt(p.r));
  if (!(spec.beta > 0.0)) v.push_back("beta must be positive");
  if (!(spec.plateau_fraction > 0.0 && spec.plateau_fraction < 1.0))
    v.push_back("plateau_fraction must lie in (0, 1)");
  if (p.K.empty()) v.push_back("K must contain at least one scale");
  if (p.offsets.size() != p.K.size()) v.push_back("offsets must have one entry per scale in K");
  for (std::size_t i = 0; i < p.K.size(); ++i)
    for (std::size_t j = i + 1; j < p.K.size(); ++j)
      if (std::abs(p.K[i] - p.K[j]) < p.separation_gap - 1e-12)
        v.push_back("scales " + fmt(p.K[i]) + " and " + fmt(p.K[j]) + " violate |k - j| >= separation_gap = " +
                    fmt(p.separation_gap));
  if (!v.empty() && p.K.empty()) return v;
  const double base = std::exp2(p.m);
  const double spread = inner_radius_bound(p, spec) * std::exp2(p.k_max());
  const double lo = p.modulation_outer * base - spread;
  const double hi = p.modulation_outer * base + spread;
  if (lo < 4.0 / 3.0 * base - 1e-12)
    v.push_back("support constraint modulation_outer*2^m - (modulation_inner + sqrt(d)*beta)*2^maxK >= 4/3*2^m fails (" +
                fmt(lo / base) + " < 1.33333)");
  if (hi > 1.5 * base + 1e-12)
    v.push_back("support constraint modulation_outer*2^m + (modulation_inner + sqrt(d)*beta)*2^maxK <= 3/2*2^m fails (" +
                fmt(hi / base) + " > 1.5)");
  return v;
}

std::vector<std::string> grid_violations(const ConstructionParams& p, const AtomSpec& spec, const GridSpec& g) {
  std::vector<std::string> v;
  if (g.d != p.d) v.push_back("grid dimension does not match construction dimension");
  const double bmin = spec.beta * std::exp2(p.k_min());
  for (int ax = 0; ax < g.d; ++ax) {
    const double step = 2.0 * kPi / g.L[static_cast<std::size_t>(ax)];
    if (bmin < 4.0 * step)
      v.push_back("beta*2^minK = " + fmt(bmin) + " holds fewer than 4 lattice points on axis " + std::to_string(ax));
  }
  const double top = p.modulation_outer * std::exp2(p.m) + inner_radius_bound(p, spec) * std::exp2(p.k_max());
  if (!spectral::shell_resolvable(g, p.m))
    v.push_back("shell m = " + std::to_string(p.m) + " is beyond the Nyquist frequency");
  if (top >= g.nyquist(0)) v.push_back("outer carrier band exceeds the axis-0 Nyquist frequency");
  const double sep = p.effective_min_separation(spec);
  for (std::size_t i = 0; i < p.offsets.size(); ++i)
    for (std::size_t j = i + 1; j < p.offsets.size(); ++j) {
      const double dist = periodic_distance(p.offsets[i], p.offsets[j], g.L[0]);
      if (dist < sep)
        v.push_back("offset collision: atoms " + std::to_string(i) + " and " + std::to_string(j) + " are " +
                    fmt(dist) + " apart, below the separation threshold " + fmt(sep));
    }
  return v;
}

void require_valid(const ConstructionParams& p, const AtomSpec& spec, const GridSpec& g) {
  const auto v = violations(p, spec);
  if (!v.empty()) throw ConstraintViolation(v.front());
  for (const auto& s : grid_violations(p, spec, g)) {
    if (s.rfind("offset collision", 0) == 0) throw OffsetCollision(s);
    if (s.find("lattice points") != std::string::npos) throw BetaUnresolvable(s);
    throw ConstraintViolation(s);
  }
}

GridSpec snapped_grid(const ConstructionParams& p, const AtomSpec& spec, std::vector<int> points,
                      std::vector<double> lengths) {
  auto snap = [](double L, double w) {
    const double unit = 2.0 * kPi / w;
    return unit * std::max(1.0, std::ceil(L / unit - 1e-9));
  };
  lengths[0] = snap(lengths[0], p.modulation_outer * std::exp2(p.m));
  const std::size_t last = lengths.size() - 1;
  lengths[last] = snap(lengths[last], spec.modulation_inner * std::exp2(p.k_min()));
  return GridSpec(std::move(points), std::move(lengths));
}

Field theta_profile(const AtomSpec& spec, const GridSpec& g) {
  std::vector<std::vector<double>> axes;
  for (int ax = 0; ax < g.d; ++ax) {
    const double L = g.L[static_cast<std::size_t>(ax)];
    if (spec.beta < 4.0 * 2.0 * kPi / L)
      throw BetaUnresolvable("beta = " + fmt(spec.beta) + " holds fewer than 4 lattice points on axis " +
                             std::to_string(ax));
    axes.push_back(sample_factor(spec, Factor1D{}, g.n[static_cast<std::size_t>(ax)], L));
  }
  return Field::scalar_physical(g, outer(g, axes, 1.0));
}

Field build_atom(const AtomSpec& spec, const GridSpec& g) {
  for (int ax = 0; ax < g.d; ++ax)
    if (spec.beta < 4.0 * 2.0 * kPi / g.L[static_cast<std::size_t>(ax)])
      throw BetaUnresolvable("beta = " + fmt(spec.beta) + " holds fewer than 4 lattice points on axis " +
                             std::to_string(ax));
  if (spec.modulation_inner + spec.beta >= g.nyquist(g.d - 1))
    throw BetaUnresolvable("modulation_inner + beta exceeds the Nyquist frequency");
  return Field::scalar_physical(g, outer(g, atom_axes(spec, g, 0.0, 0.0, 0.0), 1.0));
}

Field scaled_atom(const AtomSpec& spec, const GridSpec& g, double k, double offset) {
  return Field::scalar_physical(g, outer(g, atom_axes(spec, g, k, offset, 0.0), std::exp2(0.5 * k)));
}

Field build_f(const ConstructionParams& p, const AtomSpec& spec, const GridSpec& g, bool validate) {
  if (validate) require_valid(p, spec, g);
  const double omega = p.modulation_outer * std::exp2(p.m);
  const double cf = p.effective_count_factor();
  RealVec acc(g.points(), 0.0);
  for (std::size_t i = 0; i < p.K.size(); ++i) {
    const RealVec t = outer(g, atom_axes(spec, g, p.K[i], p.offsets[i], omega), cf * std::exp2(0.5 * p.K[i]));
    for (std::size_t q = 0; q < acc.size(); ++q) acc[q] += t[q];
  }
  Field f = Field::scalar_physical(g, std::move(acc));
  return spectral::hermitian_project(f);
}

DataPair build_initial_data(const ConstructionParams& p, const AtomSpec& spec, const GridSpec& g,
                            const spectral::CutoffProfile& cutoffs) {
  const Field f = build_f(p, spec, g);
  DataPair dp;
  dp.params = p;
  dp.u0 = spectral::scale(f, std::exp2(1.5 * p.m));
  std::vector<Field> comps{spectral::scale(f, std::exp2(0.5 * p.m))};
  for (int i = 1; i < g.d; ++i) comps.push_back(Field::zeros(g));
  dp.v0 = Field::stack(comps);
  const auto shells = spectral::active_shells(f);
  const double q = 2.0 * p.d;
  dp.u0_besov = spectral::besov_norm_on(dp.u0, {-1.5, q, p.r}, cutoffs, shells);
  dp.v0_besov = spectral::besov_norm_on(dp.v0, {-0.5, q, p.r}, cutoffs, shells);
  dp.u0.drop_physical();
  dp.v0.drop_physical();
  return dp;
}

FrequencySet annulus(int d, double rmin, double rmax) {
  return [=](const double* xi) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += xi[i] * xi[i];
    const double r = std::sqrt(s);
    return r >= rmin * (1.0 - 1e-12) && r <= rmax * (1.0 + 1e-12);
  };
}

FrequencySet carrier_annulus(const ConstructionParams& p, const AtomSpec& spec) {
  const double w = p.modulation_outer * std::exp2(p.m);
  const double spread = inner_radius_bound(p, spec) * std::exp2(p.k_max());
  return annulus(p.d, w - spread, w + spread);
}

double support_report(const Field& f, const FrequencySet& claimed) {
  spectral::Lattice lat(f.grid());
  double total = 0.0, out = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    const CplxVec& in = f.spectral(c);
    spectral::for_each_mode(lat, [&](std::size_t k, const double* xi, bool, double w) {
      const double e = w * std::norm(in[k]);
      total += e;
      if (!claimed(xi)) out += e;
    });
  }
  return total > 0.0 ? std::sqrt(out / total) : 0.0;
}

int shell_of(double ell) { return static_cast<int>(std::lround(ell)); }

std::vector<int> restricted_shells(const ConstructionParams& p, const AtomSpec& spec) {
  std::vector<int> out;
  const double mu2 = 2.0 * spec.modulation_inner;
  const double b2 = 2.0 * spec.beta;
  for (double ell : p.K) {
    const double s = std::exp2(ell);
    const double rlo = (mu2 - b2) * s;
    const double rhi = std::sqrt((mu2 + b2) * (mu2 + b2) + (p.d - 1) * b2 * b2) * s;
    for (int j = static_cast<int>(std::floor(ell)) - 2; j <= static_cast<int>(std::ceil(ell)) + 2; ++j) {
      const double a = 0.75 * std::ldexp(1.0, j), b = 8.0 / 3.0 * std::ldexp(1.0, j);
      if (rhi > a && rlo < b && std::find(out.begin(), out.end(), j) == out.end()) out.push_back(j);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ProductSplit product_split(const ConstructionParams& p, const AtomSpec& spec, const GridSpec& g, double ell,
                           const spectral::CutoffProfile& cutoffs) {
  require_valid(p, spec, g);
  if (!is_integer(ell)) throw ConstraintViolation("product_split needs an integer scale, got " + fmt(ell));
  std::size_t li = p.K.size();
  for (std::size_t i = 0; i < p.K.size(); ++i)
    if (std::abs(p.K[i] - ell) < 1e-12) li = i;
  if (li == p.K.size()) throw ConstraintViolation("scale " + fmt(ell) + " is not in K");
  const int j = shell_of(ell);
  if (!spectral::shell_resolvable(g, j))
    throw ShellNotResolvable("shell " + std::to_string(j) + " is beyond the Nyquist frequency");

  const std::size_t np = g.points();
  const int n0 = g.n[0];
  const std::size_t row = np / static_cast<std::size_t>(n0);
  const double omega = p.modulation_outer * std::exp2(p.m);
  const auto s1 = carrier_samples(omega, n0, g.L[0], false);
  const auto c2 = carrier_samples(2.0 * omega, n0, g.L[0], true);

  std::vector<RealVec> atoms;
  for (std::size_t i = 0; i < p.K.size(); ++i)
    atoms.push_back(outer(g, atom_axes(spec, g, p.K[i], p.offsets[i], 0.0), std::exp2(0.5 * p.K[i])));

  RealVec sum(np, 0.0), dc(np, 0.0), others(np, 0.0);
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (std::size_t q = 0; q < np; ++q) {
      sum[q] += atoms[i][q];
      const double a2 = atoms[i][q] * atoms[i][q];
      dc[q] += 0.5 * a2;
      if (i != li) others[q] += 0.5 * a2;
    }
  RealVec fsq(np), G(np), H(np, 0.0);
  for (std::size_t q = 0; q < np; ++q) {
    const std::size_t x0 = q / row;
    const double fv = s1[x0] * sum[q];
    fsq[q] = fv * fv;
    G[q] = -c2[x0] * dc[q];
  }
  for (std::size_t a = 0; a < atoms.size(); ++a)
    for (std::size_t b = 0; b < atoms.size(); ++b) {
      if (a == b) continue;
      for (std::size_t q = 0; q < np; ++q) H[q] += 0.5 * atoms[a][q] * atoms[b][q] * (1.0 - c2[q / row]);
    }
  atoms.clear();

  double emax = 0.0, fmax = 0.0;
  for (std::size_t q = 0; q < np; ++q) {
    emax = std::max(emax, std::abs(dc[q] + G[q] + H[q] - fsq[q]));
    fmax = std::max(fmax, std::abs(fsq[q]));
  }

  // Closed-form K1 from the periodized profile and its derivative.
  const double s = std::exp2(ell);
  std::vector<std::vector<double>> axes;
  for (int ax = 0; ax < g.d; ++ax) {
    const int n = g.n[static_cast<std::size_t>(ax)];
    const double L = g.L[static_cast<std::size_t>(ax)];
    Factor1D fac;
    fac.scale = s;
    if (ax == 0) {
      fac.offset = p.offsets[li];
      const auto th = sample_factor(spec, fac, n, L);
      fac.derivative = true;
      const auto dth = sample_factor(spec, fac, n, L);
      std::vector<double> v(th.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = -th[i] * dth[i];
      axes.push_back(std::move(v));
    } else {
      auto th = sample_factor(spec, fac, n, L);
      for (std::size_t i = 0; i < th.size(); ++i) {
        th[i] *= th[i];
        if (ax == g.d - 1) th[i] *= std::cos(2.0 * spec.modulation_inner * s * L * static_cast<double>(i) / n);
      }
      axes.push_back(std::move(th));
    }
  }

  ProductSplit out;
  out.ell = ell;
  out.dc = Field::scalar_physical(g, std::move(dc));
  out.G = Field::scalar_physical(g, std::move(G));
  out.H = Field::scalar_physical(g, std::move(H));
  out.K1 = Field::scalar_physical(g, outer(g, axes, std::exp2(2.0 * ell - 1.0)));
  out.K2 = spectral::partial(spectral::project_block(Field::scalar_physical(g, std::move(others)), j, cutoffs), 0);
  out.lhs = spectral::partial(spectral::project_block(Field::scalar_physical(g, std::move(fsq)), j, cutoffs), 0);
  out.exact_error = fmax > 0.0 ? emax / fmax : emax;
  const Field defect = spectral::linear_combination({1.0, -1.0, -1.0}, {out.lhs, out.K1, out.K2});
  const double ln = spectral::l2_spectral(out.lhs);
  out.identity_error = ln > 0.0 ? spectral::l2_spectral(defect) / ln : spectral::l2_spectral(defect);
  return out;
}

}  // namespace kslab::construction
