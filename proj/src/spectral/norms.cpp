#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kslab/errors.hpp"
#include "kslab/spectral.hpp"

namespace kslab::spectral {

namespace {

double periodic_delta(double x, double c, double L) {
  double d = std::fmod(x - c, L);
  if (d > 0.5 * L) d -= L;
  if (d < -0.5 * L) d += L;
  return d;
}

// Running accumulator for several exponents at once.
struct PowerSums {
  explicit PowerSums(const std::vector<double>& ps) : ps(ps), acc(ps.size(), 0.0) {}
  void add(double a) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (std::isinf(ps[i])) acc[i] = std::max(acc[i], a);
      else if (ps[i] == 2.0) acc[i] += a * a;
      else if (ps[i] == 4.0) acc[i] += (a * a) * (a * a);
      else if (ps[i] == 1.0) acc[i] += a;
      else acc[i] += std::pow(a, ps[i]);
    }
  }
  std::vector<double> finish(double cell) const {
    std::vector<double> out(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i)
      out[i] = std::isinf(ps[i]) ? acc[i] : std::pow(acc[i] * cell, 1.0 / ps[i]);
    return out;
  }
  const std::vector<double>& ps;
  std::vector<double> acc;
};

void check_exponents(const std::vector<double>& ps) {
  for (double p : ps)
    if (!(p >= 1.0)) throw InvalidGrid("Lebesgue exponent must be >= 1, got " + std::to_string(p));
}

// Axis coordinates of the region's sample set, inclusive of the region bounds.
std::vector<std::vector<double>> region_coords(const GridSpec& g, const Region& reg, double& cell) {
  std::vector<std::vector<double>> coords(static_cast<std::size_t>(g.d));
  cell = 1.0;
  for (int ax = 0; ax < g.d; ++ax) {
    const auto a = static_cast<std::size_t>(ax);
    double lo, hi;
    if (reg.shape == Region::Shape::box) {
      lo = reg.lo[a];
      hi = reg.hi[a];
    } else {
      lo = reg.center[a] - reg.radius;
      hi = reg.center[a] + reg.radius;
    }
    double h = g.L[a] / g.n[a];
    if (reg.refine > 1) h = std::min(h, (hi - lo) / 32.0) / reg.refine;
    const long i0 = static_cast<long>(std::ceil(lo / h - 1e-9));
    const long i1 = static_cast<long>(std::floor(hi / h + 1e-9));
    for (long i = i0; i <= i1; ++i) coords[a].push_back(static_cast<double>(i) * h);
    cell *= h;
  }
  return coords;
}

bool inside(const GridSpec& g, const Region& reg, const double* x) {
  if (reg.shape == Region::Shape::whole) return true;
  if (reg.shape == Region::Shape::box) {
    for (int i = 0; i < g.d; ++i) {
      const auto a = static_cast<std::size_t>(i);
      if (x[i] < reg.lo[a] - 1e-12 || x[i] > reg.hi[a] + 1e-12) return false;
    }
    return true;
  }
  double s = 0.0;
  for (int i = 0; i < g.d; ++i) {
    const double dd = periodic_delta(x[i], reg.center[static_cast<std::size_t>(i)], g.L[static_cast<std::size_t>(i)]);
    s += dd * dd;
  }
  return s <= reg.radius * reg.radius * (1.0 + 1e-12);
}

std::vector<double> region_norms(const Field& f, const std::vector<double>& ps, const Region& reg) {
  const GridSpec& g = f.grid();
  PowerSums sums(ps);
  const int nc = f.components();
  if (reg.shape == Region::Shape::whole) {
    const std::size_t n = g.points();
    if (nc == 1) {
      const RealVec& v = f.physical(0);
      for (std::size_t i = 0; i < n; ++i) sums.add(std::abs(v[i]));
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int c = 0; c < nc; ++c) s += f.physical(c)[i] * f.physical(c)[i];
        sums.add(std::sqrt(s));
      }
    }
    return sums.finish(g.cell_volume());
  }

  double cell = 1.0;
  const auto coords = region_coords(g, reg, cell);
  std::vector<std::vector<double>> comps;
  if (reg.refine <= 1) {
    // Gather grid samples by wrapping each coordinate to its index.
    std::size_t total = 1;
    for (const auto& c : coords) total *= c.size();
    for (int c = 0; c < nc; ++c) {
      const RealVec& v = f.physical(c);
      std::vector<double> out(total);
      std::vector<std::size_t> idx(static_cast<std::size_t>(g.d), 0);
      for (std::size_t t = 0; t < total; ++t) {
        std::size_t flat = 0, rem = t;
        for (int ax = g.d - 1; ax >= 0; --ax) {
          const auto a = static_cast<std::size_t>(ax);
          idx[a] = rem % coords[a].size();
          rem /= coords[a].size();
        }
        for (int ax = 0; ax < g.d; ++ax) {
          const auto a = static_cast<std::size_t>(ax);
          const double h = g.L[a] / g.n[a];
          long i = std::lround(coords[a][idx[a]] / h) % g.n[a];
          if (i < 0) i += g.n[a];
          flat = flat * static_cast<std::size_t>(g.n[a]) + static_cast<std::size_t>(i);
        }
        out[t] = v[flat];
      }
      comps.push_back(std::move(out));
    }
  } else {
    for (int c = 0; c < nc; ++c) comps.push_back(evaluate_tensor(f, c, coords));
  }

  const std::size_t total = comps[0].size();
  double x[kMaxDim] = {0.0, 0.0, 0.0};
  for (std::size_t t = 0; t < total; ++t) {
    std::size_t rem = t;
    for (int ax = g.d - 1; ax >= 0; --ax) {
      const auto a = static_cast<std::size_t>(ax);
      x[ax] = coords[a][rem % coords[a].size()];
      rem /= coords[a].size();
    }
    if (!inside(g, reg, x)) continue;
    double s = 0.0;
    for (int c = 0; c < nc; ++c) s += comps[static_cast<std::size_t>(c)][t] * comps[static_cast<std::size_t>(c)][t];
    sums.add(std::sqrt(s));
  }
  return sums.finish(cell);
}

}  // namespace

Region Region::whole() { return Region{}; }

Region Region::box(std::vector<double> lo, std::vector<double> hi, int refine) {
  Region r;
  r.shape = Shape::box;
  r.lo = std::move(lo);
  r.hi = std::move(hi);
  r.refine = std::max(1, refine);
  return r;
}

Region Region::ball(std::vector<double> center, double radius, int refine) {
  Region r;
  r.shape = Shape::ball;
  r.center = std::move(center);
  r.radius = radius;
  r.refine = std::max(1, refine);
  return r;
}

std::vector<double> lebesgue_norms(const Field& f, const std::vector<double>& ps, const Region& region) {
  check_exponents(ps);
  if (region.shape != Region::Shape::whole) {
    const auto need = static_cast<std::size_t>(f.grid().d);
    if ((region.shape == Region::Shape::box && (region.lo.size() != need || region.hi.size() != need)) ||
        (region.shape == Region::Shape::ball && region.center.size() != need))
      throw InvalidGrid("region dimension does not match the grid");
  }
  return region_norms(f, ps, region);
}

double lebesgue_norm(const Field& f, double p, const Region& region) { return lebesgue_norms(f, {p}, region)[0]; }

double l2_spectral(const Field& f) {
  Lattice lat(f.grid());
  double s = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    const CplxVec& in = f.spectral(c);
    for_each_mode(lat, [&](std::size_t k, const double*, bool, double w) { s += w * std::norm(in[k]); });
  }
  return std::sqrt(s * f.grid().volume());
}

double BlockNorms::get(int j, double p) const {
  for (std::size_t a = 0; a < shells.size(); ++a) {
    if (shells[a] != j) continue;
    for (std::size_t b = 0; b < ps.size(); ++b)
      if (ps[b] == p) return value[a][b];
  }
  throw InvalidGrid("block norm table has no entry for shell " + std::to_string(j));
}

BlockNorms block_norms(const Field& f, const CutoffProfile& cutoffs, const std::vector<int>& shells,
                       const std::vector<double>& ps) {
  BlockNorms bn;
  bn.shells = shells;
  bn.ps = ps;
  for (int j : shells) bn.value.push_back(lebesgue_norms(project_block(f, j, cutoffs), ps));
  return bn;
}

namespace {

double lr_sum(const std::vector<double>& terms, double r) {
  if (std::isinf(r)) {
    double m = 0.0;
    for (double t : terms) m = std::max(m, t);
    return m;
  }
  double s = 0.0;
  for (double t : terms) s += std::pow(t, r);
  return std::pow(s, 1.0 / r);
}

void check_besov(const BesovParams& bp) {
  if (!(bp.p >= 1.0) || !(bp.r >= 1.0)) throw InvalidGrid("Besov exponents need p >= 1 and r >= 1");
}

std::vector<int> shells_of(const GridSpec& g, std::optional<JRange> range) {
  const JRange r = range ? *range : resolvable_range(g);
  std::vector<int> s;
  for (int j = r.lo; j <= r.hi; ++j) s.push_back(j);
  return s;
}

}  // namespace

double aggregate_besov(const BlockNorms& bn, const BesovParams& bp) {
  check_besov(bp);
  std::vector<double> terms;
  for (std::size_t a = 0; a < bn.shells.size(); ++a)
    terms.push_back(std::exp2(bp.s * bn.shells[a]) * bn.get(bn.shells[a], bp.p));
  return lr_sum(terms, bp.r);
}

double besov_norm_on(const Field& f, const BesovParams& bp, const CutoffProfile& cutoffs,
                     const std::vector<int>& shells) {
  check_besov(bp);
  return aggregate_besov(block_norms(f, cutoffs, shells, {bp.p}), bp);
}

double besov_norm(const Field& f, const BesovParams& bp, const CutoffProfile& cutoffs, std::optional<JRange> range) {
  return besov_norm_on(f, bp, cutoffs, shells_of(f.grid(), range));
}

BlockNormTrace block_norm_trace(const Trace& tr, const CutoffProfile& cutoffs, const std::vector<int>& shells,
                                const std::vector<double>& ps) {
  if (tr.empty()) throw EmptyTrace("trace has no frames");
  BlockNormTrace out;
  out.times = tr.times;
  for (const auto& fr : tr.frames) out.per_time.push_back(block_norms(fr, cutoffs, shells, ps));
  return out;
}

double chemin_lerner_from_table(const BlockNormTrace& table, double rho, const BesovParams& bp) {
  check_besov(bp);
  if (table.per_time.empty()) throw EmptyTrace("trace has no frames");
  if (!(rho >= 1.0)) throw InvalidGrid("time exponent must be >= 1");
  const BlockNorms& first = table.per_time.front();
  const std::size_t nt = table.per_time.size();
  std::vector<double> terms;
  for (int j : first.shells) {
    double v = 0.0;
    if (std::isinf(rho)) {
      for (const auto& bn : table.per_time) v = std::max(v, bn.get(j, bp.p));
    } else {
      for (std::size_t t = 0; t + 1 < nt; ++t) {
        const double a = std::pow(table.per_time[t].get(j, bp.p), rho);
        const double b = std::pow(table.per_time[t + 1].get(j, bp.p), rho);
        v += 0.5 * (table.times[t + 1] - table.times[t]) * (a + b);
      }
      v = std::pow(v, 1.0 / rho);
    }
    terms.push_back(std::exp2(bp.s * j) * v);
  }
  return lr_sum(terms, bp.r);
}

double chemin_lerner_norm(const Trace& tr, double rho, const BesovParams& bp, const CutoffProfile& cutoffs,
                          std::optional<JRange> range) {
  if (tr.empty()) throw EmptyTrace("trace has no frames");
  const auto shells = shells_of(tr.frames.front().grid(), range);
  return chemin_lerner_from_table(block_norm_trace(tr, cutoffs, shells, {bp.p}), rho, bp);
}

}  // namespace kslab::spectral
