#include <algorithm>
#include <cmath>
#include <numbers>

#include "kslab/errors.hpp"
#include "kslab/spectral.hpp"

namespace kslab::spectral {

namespace {

double norm2(const double* xi, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += xi[i] * xi[i];
  return s;
}

// Maps every component's spectrum through fn(xi, nyquist, coefficient).
template <class Fn>
Field map_spectrum(const Field& f, Fn&& fn) {
  const GridSpec& g = f.grid();
  Lattice lat(g);
  std::vector<CplxVec> out;
  for (int c = 0; c < f.components(); ++c) {
    const CplxVec& in = f.spectral(c);
    CplxVec o(in.size());
    for_each_mode(lat, [&](std::size_t k, const double* xi, bool nyq, double) { o[k] = fn(xi, nyq, in[k]); });
    out.push_back(std::move(o));
  }
  return Field::from_spectral(g, std::move(out), f.kind());
}

void require_same_grid(const Field& a, const Field& b) {
  if (a.grid() != b.grid()) throw InvalidGrid("fields live on different grids");
}

}  // namespace

double duhamel_symbol(double t, double k2) {
  const double z = t * k2;
  if (z < 1e-5) return t * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0);
  return -std::expm1(-z) / k2;
}

Field apply_multiplier(const Field& f, const Symbol& symbol, bool check_hermitian) {
  const int d = f.grid().d;
  if (check_hermitian) {
    Lattice lat(f.grid());
    double worst = 0.0, scale = 0.0;
    for_each_mode(lat, [&](std::size_t, const double* xi, bool nyq, double) {
      if (nyq) return;
      double mxi[kMaxDim];
      for (int i = 0; i < d; ++i) mxi[i] = -xi[i];
      const cplx a = symbol(xi);
      const cplx b = symbol(mxi);
      worst = std::max(worst, std::abs(a - std::conj(b)));
      scale = std::max(scale, std::abs(a));
    });
    if (worst > 1e-12 * std::max(scale, 1.0))
      throw NonHermitianSymbol("symbol(-xi) differs from conj(symbol(xi)) by " + std::to_string(worst));
  }
  return map_spectrum(f, [&](const double* xi, bool nyq, cplx c) {
    if (!nyq) return symbol(xi) * c;
    // The Nyquist plane is its own mirror image: use the Hermitian part.
    const GridSpec& g = f.grid();
    double mxi[kMaxDim];
    for (int i = 0; i < d; ++i) {
      const double ny = g.nyquist(i);
      mxi[i] = std::abs(std::abs(xi[i]) - ny) < 1e-12 * ny ? -xi[i] : xi[i];
    }
    return 0.5 * (symbol(xi) + std::conj(symbol(mxi))) * c;
  });
}

Field apply_radial(const Field& f, const std::function<double(double)>& m) {
  const int d = f.grid().d;
  return map_spectrum(f, [&](const double* xi, bool, cplx c) { return m(std::sqrt(norm2(xi, d))) * c; });
}

Field heat_propagate(const Field& f, double t) {
  if (t < 0.0) throw NegativeTime("heat propagation needs t >= 0, got " + std::to_string(t));
  if (t == 0.0) return f;
  const int d = f.grid().d;
  return map_spectrum(f, [&](const double* xi, bool, cplx c) { return std::exp(-t * norm2(xi, d)) * c; });
}

Field partial(const Field& f, int axis) {
  if (f.components() != 1) throw InvalidGrid("partial derivative expects a scalar field");
  return map_spectrum(f, [&](const double* xi, bool nyq, cplx c) {
    if (nyq && std::abs(std::abs(xi[axis]) - f.grid().nyquist(axis)) < 1e-12 * f.grid().nyquist(axis))
      return cplx(0.0, 0.0);
    return cplx(0.0, xi[axis]) * c;
  });
}

Field gradient(const Field& f) {
  std::vector<Field> comps;
  for (int i = 0; i < f.grid().d; ++i) comps.push_back(partial(f, i));
  return Field::stack(comps);
}

Field divergence(const Field& v) {
  if (v.kind() != FieldKind::vector) throw InvalidGrid("divergence expects a vector field");
  const GridSpec& g = v.grid();
  Lattice lat(g);
  CplxVec out(g.spectral_points(), cplx(0.0, 0.0));
  for (int c = 0; c < g.d; ++c) {
    const CplxVec& in = v.spectral(c);
    const double ny = g.nyquist(c);
    for_each_mode(lat, [&](std::size_t k, const double* xi, bool, double) {
      if (std::abs(std::abs(xi[c]) - ny) < 1e-12 * ny) return;
      out[k] += cplx(0.0, xi[c]) * in[k];
    });
  }
  return Field::scalar_spectral(g, std::move(out));
}

Field laplacian(const Field& f) {
  const int d = f.grid().d;
  return map_spectrum(f, [&](const double* xi, bool, cplx c) { return -norm2(xi, d) * c; });
}

Field linear_combination(const std::vector<double>& coeffs, const std::vector<Field>& fields) {
  if (coeffs.size() != fields.size() || fields.empty()) throw InvalidGrid("linear combination size mismatch");
  const Field& f0 = fields.front();
  for (const auto& f : fields) {
    require_same_grid(f0, f);
    if (f.components() != f0.components()) throw InvalidGrid("linear combination of mixed kinds");
  }
  std::vector<CplxVec> out;
  for (int c = 0; c < f0.components(); ++c) {
    CplxVec o(f0.grid().spectral_points(), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const CplxVec& in = fields[i].spectral(c);
      const double a = coeffs[i];
      for (std::size_t k = 0; k < o.size(); ++k) o[k] += a * in[k];
    }
    out.push_back(std::move(o));
  }
  return Field::from_spectral(f0.grid(), std::move(out), f0.kind());
}

Field add(const Field& a, const Field& b) { return linear_combination({1.0, 1.0}, {a, b}); }
Field sub(const Field& a, const Field& b) { return linear_combination({1.0, -1.0}, {a, b}); }
Field scale(const Field& a, double s) { return linear_combination({s}, {a}); }
Field axpy(double a, const Field& x, const Field& y) { return linear_combination({a, 1.0}, {x, y}); }

Field multiply(const Field& a, const Field& b) {
  require_same_grid(a, b);
  const Field* s = &a;
  const Field* o = &b;
  if (a.components() != 1) std::swap(s, o);
  if (s->components() != 1) throw InvalidGrid("product needs at least one scalar factor");
  const RealVec& x = s->physical(0);
  std::vector<RealVec> out;
  for (int c = 0; c < o->components(); ++c) {
    const RealVec& y = o->physical(c);
    RealVec z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] * y[i];
    out.push_back(std::move(z));
  }
  return Field::from_physical(a.grid(), std::move(out), o->kind());
}

Field square(const Field& a) { return multiply(a, a); }

Field dealias(const Field& f, double fraction) {
  if (fraction >= 1.0) return f;
  const GridSpec& g = f.grid();
  std::array<double, kMaxDim> cut{};
  for (int i = 0; i < g.d; ++i) cut[static_cast<std::size_t>(i)] = fraction * g.nyquist(i) * (1.0 + 1e-12);
  return map_spectrum(f, [&](const double* xi, bool, cplx c) {
    for (int i = 0; i < g.d; ++i)
      if (std::abs(xi[i]) > cut[static_cast<std::size_t>(i)]) return cplx(0.0, 0.0);
    return c;
  });
}

double mean(const Field& f) { return f.spectral(0)[0].real(); }

double max_abs(const Field& f) {
  double m = 0.0;
  if (f.components() == 1) {
    for (double v : f.physical(0)) m = std::max(m, std::abs(v));
    return m;
  }
  const std::size_t n = f.grid().points();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int c = 0; c < f.components(); ++c) s += f.physical(c)[i] * f.physical(c)[i];
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

Field hermitian_project(const Field& f) {
  std::vector<RealVec> comps;
  for (int c = 0; c < f.components(); ++c) comps.push_back(f.physical(c));
  Field out = Field::from_physical(f.grid(), std::move(comps), f.kind());
  for (int c = 0; c < out.components(); ++c) out.spectral(c);
  return out;
}

Field random_band_limited(const GridSpec& g, std::mt19937_64& rng, double kmin, double kmax, FieldKind kind) {
  Lattice lat(g);
  std::normal_distribution<double> nd(0.0, 1.0);
  const int nc = kind == FieldKind::vector ? g.d : 1;
  std::vector<CplxVec> comps;
  for (int c = 0; c < nc; ++c) {
    CplxVec o(g.spectral_points(), cplx(0.0, 0.0));
    for_each_mode(lat, [&](std::size_t k, const double* xi, bool nyq, double) {
      const double re = nd(rng);
      const double im = nd(rng);
      const double r = std::sqrt(norm2(xi, g.d));
      if (nyq || r < kmin || r > kmax) return;
      o[k] = cplx(re, im);
    });
    comps.push_back(std::move(o));
  }
  Field raw = Field::from_spectral(g, std::move(comps), kind);
  return hermitian_project(raw);
}

std::vector<double> evaluate_tensor(const Field& f, int comp, const std::vector<std::vector<double>>& coords,
                                    double drop_tol) {
  const GridSpec& g = f.grid();
  if (static_cast<int>(coords.size()) != g.d) throw InvalidGrid("evaluation coordinates need one list per axis");
  const auto shape = g.spectral_shape();
  const CplxVec& c = f.spectral(comp);
  Lattice lat(g);
  double cmax = 0.0;
  for (const auto& v : c) cmax = std::max(cmax, std::abs(v));
  const double thresh = drop_tol * cmax;

  // Exponential tables per axis: E[axis][k * M + q].
  std::vector<std::vector<cplx>> E(static_cast<std::size_t>(g.d));
  for (int ax = 0; ax < g.d; ++ax) {
    const auto a = static_cast<std::size_t>(ax);
    const std::size_t M = coords[a].size();
    E[a].resize(static_cast<std::size_t>(shape[a]) * M);
    for (int k = 0; k < shape[a]; ++k) {
      const double xi = lat.xi[a][static_cast<std::size_t>(k)];
      for (std::size_t q = 0; q < M; ++q) E[a][static_cast<std::size_t>(k) * M + q] = std::polar(1.0, xi * coords[a][q]);
    }
  }

  // Contract the last axis first (with Parseval weights giving the real part),
  // then the remaining axes from last to first.
  const int last = g.d - 1;
  const std::size_t Ml = coords[static_cast<std::size_t>(last)].size();
  std::size_t outer = 1;
  for (int ax = 0; ax < last; ++ax) outer *= static_cast<std::size_t>(shape[static_cast<std::size_t>(ax)]);
  const std::size_t nl = static_cast<std::size_t>(shape[static_cast<std::size_t>(last)]);
  std::vector<cplx> A(outer * Ml, cplx(0.0, 0.0));
  std::vector<char> row_nonzero(outer, 0);
  for (std::size_t o = 0; o < outer; ++o) {
    const cplx* row = &c[o * nl];
    cplx* dst = &A[o * Ml];
    for (std::size_t k = 0; k < nl; ++k) {
      if (std::abs(row[k]) <= thresh) continue;
      row_nonzero[o] = 1;
      const cplx w = lat.weight(k) * row[k];
      const cplx* e = &E[static_cast<std::size_t>(last)][k * Ml];
      for (std::size_t q = 0; q < Ml; ++q) dst[q] += w * e[q];
    }
  }
  std::vector<std::size_t> dims_k(static_cast<std::size_t>(g.d)), dims_q(static_cast<std::size_t>(g.d));
  for (int ax = 0; ax < g.d; ++ax) {
    dims_k[static_cast<std::size_t>(ax)] = static_cast<std::size_t>(shape[static_cast<std::size_t>(ax)]);
    dims_q[static_cast<std::size_t>(ax)] = coords[static_cast<std::size_t>(ax)].size();
  }
  // Current tensor layout: [k_0, ..., k_{ax}, q_{ax+1}, ..., q_last].
  for (int ax = last - 1; ax >= 0; --ax) {
    const auto a = static_cast<std::size_t>(ax);
    std::size_t pre = 1;
    for (int i = 0; i < ax; ++i) pre *= dims_k[static_cast<std::size_t>(i)];
    std::size_t post = 1;
    for (int i = ax + 1; i <= last; ++i) post *= dims_q[static_cast<std::size_t>(i)];
    const std::size_t nk = dims_k[a], nq = dims_q[a];
    std::vector<cplx> B(pre * nq * post, cplx(0.0, 0.0));
    for (std::size_t p = 0; p < pre; ++p) {
      for (std::size_t k = 0; k < nk; ++k) {
        const cplx* src = &A[(p * nk + k) * post];
        bool any = false;
        for (std::size_t s = 0; s < post && !any; ++s) any = src[s] != cplx(0.0, 0.0);
        if (!any) continue;
        const cplx* e = &E[a][k * nq];
        for (std::size_t q = 0; q < nq; ++q) {
          cplx* dst = &B[(p * nq + q) * post];
          const cplx eq = e[q];
          for (std::size_t s = 0; s < post; ++s) dst[s] += eq * src[s];
        }
      }
    }
    A.swap(B);
  }
  std::vector<double> out(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i].real();
  return out;
}

}  // namespace kslab::spectral
