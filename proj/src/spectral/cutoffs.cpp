#include <cmath>

#include "kslab/errors.hpp"
#include "kslab/spectral.hpp"

namespace kslab::spectral {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// C^k polynomial smoothstep on [0, 1].
double smoothstep(int k, double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double acc = 0.0;
  double pw = 1.0;
  for (int i = 0; i <= k; ++i) {
    acc += binomial(k + i, i) * pw;
    pw *= (1.0 - t);
  }
  return std::pow(t, k + 1) * acc;
}

constexpr double kInner = 3.0 / 4.0;
constexpr double kOuter = 4.0 / 3.0;

}  // namespace

double CutoffProfile::chi(double rho) const {
  rho = std::abs(rho);
  if (rho <= kInner) return 1.0;
  if (rho >= kOuter) return 0.0;
  return 1.0 - smoothstep(smoothness_order, (rho - kInner) / (kOuter - kInner));
}

double CutoffProfile::phi(double rho) const { return chi(0.5 * rho) - chi(rho); }

std::vector<double> CutoffProfile::sample_chi(const std::vector<double>& radii) const {
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) out.push_back(chi(r));
  return out;
}

std::vector<double> CutoffProfile::sample_phi(const std::vector<double>& radii) const {
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) out.push_back(phi(r));
  return out;
}

CutoffProfile build_cutoffs(int smoothness_order) {
  if (smoothness_order < 1) throw InvalidGrid("cutoff smoothness order must be >= 1");
  CutoffProfile c;
  c.smoothness_order = smoothness_order;
  return c;
}

}  // namespace kslab::spectral
