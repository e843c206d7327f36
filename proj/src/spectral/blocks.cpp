#include <algorithm>
#include <cmath>
#include <string>

#include "kslab/errors.hpp"
#include "kslab/spectral.hpp"

namespace kslab::spectral {

namespace {

constexpr double kAnnulusInner = 3.0 / 4.0;
constexpr double kAnnulusOuter = 8.0 / 3.0;

double radius(const double* xi, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += xi[i] * xi[i];
  return std::sqrt(s);
}

void require_resolvable(const GridSpec& g, int j) {
  if (!shell_resolvable(g, j))
    throw ShellNotResolvable("shell " + std::to_string(j) + " has outer radius " +
                             std::to_string(kAnnulusOuter * std::ldexp(1.0, j)) + " beyond the Nyquist frequency " +
                             std::to_string(g.max_nyquist()));
}

// Sum over shells of phi(2^{-j} rho), evaluated only on the two shells that can be nonzero.
double partition_weight(const CutoffProfile& c, double rho, JRange range) {
  if (rho <= 0.0) return 0.0;
  const int jc = static_cast<int>(std::floor(std::log2(rho)));
  double s = 0.0;
  for (int j = jc - 2; j <= jc + 2; ++j)
    if (j >= range.lo && j <= range.hi) s += c.phi(std::ldexp(rho, -j));
  return s;
}

}  // namespace

bool shell_resolvable(const GridSpec& g, int j) { return kAnnulusOuter * std::ldexp(1.0, j) <= g.max_nyquist(); }

JRange resolvable_range(const GridSpec& g) {
  JRange r;
  r.lo = static_cast<int>(std::ceil(std::log2(g.min_frequency() / kAnnulusOuter) - 1e-12));
  r.hi = static_cast<int>(std::floor(std::log2(g.max_nyquist() / kAnnulusOuter) + 1e-12));
  return r;
}

Field project_block(const Field& f, int j, const CutoffProfile& cutoffs) {
  const GridSpec& g = f.grid();
  require_resolvable(g, j);
  const double lo = kAnnulusInner * std::ldexp(1.0, j);
  const double hi = kAnnulusOuter * std::ldexp(1.0, j);
  const double inv = std::ldexp(1.0, -j);
  Lattice lat(g);
  std::vector<double> w(g.spectral_points(), 0.0);
  for_each_mode(lat, [&](std::size_t k, const double* xi, bool, double) {
    const double r = radius(xi, g.d);
    if (r > lo && r < hi) w[k] = cutoffs.phi(r * inv);
  });
  std::vector<CplxVec> out;
  for (int c = 0; c < f.components(); ++c) {
    const CplxVec& in = f.spectral(c);
    CplxVec o(in.size());
    for (std::size_t k = 0; k < in.size(); ++k) o[k] = w[k] * in[k];
    out.push_back(std::move(o));
  }
  return Field::from_spectral(g, std::move(out), f.kind());
}

Field project_shells(const Field& f, const std::vector<int>& shells, const CutoffProfile& cutoffs) {
  if (shells.empty()) return Field::zeros(f.grid(), f.kind());
  std::vector<Field> parts;
  for (int j : shells) parts.push_back(project_block(f, j, cutoffs));
  return linear_combination(std::vector<double>(parts.size(), 1.0), parts);
}

double truncation_residual(const Field& f, const CutoffProfile& cutoffs, JRange range) {
  const GridSpec& g = f.grid();
  Lattice lat(g);
  double total = 0.0, miss = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    const CplxVec& in = f.spectral(c);
    for_each_mode(lat, [&](std::size_t k, const double* xi, bool, double w) {
      const double e = w * std::norm(in[k]);
      const double defect = 1.0 - partition_weight(cutoffs, radius(xi, g.d), range);
      total += e;
      miss += e * defect * defect;
    });
  }
  return total > 0.0 ? std::sqrt(miss / total) : 0.0;
}

DyadicDecomposition decompose(const Field& f, const CutoffProfile& cutoffs, JRange range) {
  DyadicDecomposition dd;
  dd.source = f;
  for (int j = range.lo; j <= range.hi; ++j) dd.blocks.emplace(j, project_block(f, j, cutoffs));
  dd.truncation_residual = truncation_residual(f, cutoffs, range);
  return dd;
}

double DyadicDecomposition::reconstruction_error() const {
  const double denom = l2_spectral(source);
  if (blocks.empty()) return denom > 0.0 ? 1.0 : 0.0;
  std::vector<Field> parts{source};
  std::vector<double> coeffs{-1.0};
  for (const auto& [j, b] : blocks) {
    parts.push_back(b);
    coeffs.push_back(1.0);
  }
  const double err = l2_spectral(linear_combination(coeffs, parts));
  return denom > 0.0 ? err / denom : err;
}

std::vector<double> shell_energy(const Field& f, const CutoffProfile& cutoffs, JRange range) {
  const GridSpec& g = f.grid();
  Lattice lat(g);
  std::vector<double> e(static_cast<std::size_t>(std::max(0, range.hi - range.lo + 1)), 0.0);
  for (int c = 0; c < f.components(); ++c) {
    const CplxVec& in = f.spectral(c);
    for_each_mode(lat, [&](std::size_t k, const double* xi, bool, double w) {
      const double r = radius(xi, g.d);
      if (r <= 0.0) return;
      const int jc = static_cast<int>(std::floor(std::log2(r)));
      for (int j = std::max(range.lo, jc - 2); j <= std::min(range.hi, jc + 2); ++j) {
        const double p = cutoffs.phi(std::ldexp(r, -j));
        e[static_cast<std::size_t>(j - range.lo)] += w * p * p * std::norm(in[k]);
      }
    });
  }
  for (double& v : e) v *= g.volume();
  return e;
}

std::vector<int> active_shells(const Field& f, double rel_tol) {
  const GridSpec& g = f.grid();
  const JRange range = resolvable_range(g);
  Lattice lat(g);
  double cmax = 0.0;
  for (int c = 0; c < f.components(); ++c)
    for (const auto& v : f.spectral(c)) cmax = std::max(cmax, std::abs(v));
  if (cmax == 0.0) return {};
  const double thresh = rel_tol * cmax;
  std::vector<char> hit(static_cast<std::size_t>(std::max(0, range.hi - range.lo + 1)), 0);
  for (int c = 0; c < f.components(); ++c) {
    const CplxVec& in = f.spectral(c);
    for_each_mode(lat, [&](std::size_t k, const double* xi, bool, double) {
      if (std::abs(in[k]) <= thresh) return;
      const double r = radius(xi, g.d);
      if (r <= 0.0) return;
      const int jc = static_cast<int>(std::floor(std::log2(r)));
      for (int j = std::max(range.lo, jc - 2); j <= std::min(range.hi, jc + 2); ++j) {
        if (r > kAnnulusInner * std::ldexp(1.0, j) && r < kAnnulusOuter * std::ldexp(1.0, j))
          hit[static_cast<std::size_t>(j - range.lo)] = 1;
      }
    });
  }
  std::vector<int> out;
  for (int j = range.lo; j <= range.hi; ++j)
    if (hit[static_cast<std::size_t>(j - range.lo)]) out.push_back(j);
  return out;
}

}  // namespace kslab::spectral
