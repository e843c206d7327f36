#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kslab/spectral.hpp"

namespace kslab::construction {

using spectral::Field;
using spectral::GridSpec;

struct AtomSpec {
  double beta = 0.04;
  double plateau_fraction = 0.5;
  double modulation_inner = 17.0 / 24.0;
};

// Real, even, compactly supported profile: 1 on |xi| <= plateau*beta, 0 on
// |xi| >= beta, joined by a C-infinity step.
double theta_hat(const AtomSpec& spec, double xi);

// Frequency-domain description of one periodized 1D factor
// g(x) = theta(s (x - o)) * sin(w x + phase) with the sine optional.
struct Factor1D {
  double scale = 1.0;   // s
  double offset = 0.0;  // o
  double carrier = 0.0; // w (0 means no modulation)
  bool derivative = false;  // use theta' instead of theta
};
// Samples of the periodized factor on a 1D axis of n points and length L.
std::vector<double> sample_factor(const AtomSpec& spec, const Factor1D& fac, int n, double L);

struct ConstructionParams {
  int d = 2;
  double r = 1.0;
  int m = 4;
  std::vector<double> K{0.0};
  std::vector<double> offsets{0.0};  // x_1 position of each atom center
  double modulation_outer = 17.0 / 12.0;
  double count_factor = -1.0;  // negative selects |K|^{-1/(2r)}
  double separation_gap = 8.0;
  double min_separation = -1.0;  // negative selects kSeparationUnits / (beta 2^{min K})

  double effective_count_factor() const;
  double effective_min_separation(const AtomSpec& spec) const;
  double k_max() const;
  double k_min() const;
};

inline constexpr double kSeparationUnits = 16.0;

// All violated preconditions, each naming the failed inequality.
std::vector<std::string> violations(const ConstructionParams& p, const AtomSpec& spec);
std::vector<std::string> grid_violations(const ConstructionParams& p, const AtomSpec& spec, const GridSpec& g);
// Throws ConstraintViolation / OffsetCollision / BetaUnresolvable.
void require_valid(const ConstructionParams& p, const AtomSpec& spec, const GridSpec& g);

// Smallest box lengths not below the requested ones that put the outer
// carrier (axis 0) and the inner carrier at scale minK (last axis) on the lattice.
GridSpec snapped_grid(const ConstructionParams& p, const AtomSpec& spec, std::vector<int> points,
                      std::vector<double> lengths);

Field theta_profile(const AtomSpec& spec, const GridSpec& g);
// a(x) = prod theta(x_i) sin(modulation_inner x_d), centered at the origin.
Field build_atom(const AtomSpec& spec, const GridSpec& g);
// 2^{k/2} a(2^k(x - offset e_1)) without carrier or count factor.
Field scaled_atom(const AtomSpec& spec, const GridSpec& g, double k, double offset);
// validate = false skips require_valid (used by negative tests).
Field build_f(const ConstructionParams& p, const AtomSpec& spec, const GridSpec& g, bool validate = true);

struct DataPair {
  Field u0;
  Field v0;
  ConstructionParams params;
  double u0_besov = 0.0;  // B^{-3/2}_{2d,r}
  double v0_besov = 0.0;  // B^{-1/2}_{2d,r}
};
DataPair build_initial_data(const ConstructionParams& p, const AtomSpec& spec, const GridSpec& g,
                            const spectral::CutoffProfile& cutoffs);

// Frequency-region predicate used by support_report.
using FrequencySet = std::function<bool(const double* xi)>;
FrequencySet annulus(int d, double rmin, double rmax);
// Claimed support of f: carrier*2^m -+ (modulation_inner + sqrt(d) beta) 2^maxK.
FrequencySet carrier_annulus(const ConstructionParams& p, const AtomSpec& spec);
// Relative spectral L2 norm of the part of f outside the set.
double support_report(const Field& f, const FrequencySet& claimed);

struct ProductSplit {
  double ell = 0.0;
  Field dc, G, H, K1, K2;
  Field lhs;  // dot-Delta_ell d/dx1 (f^2 / count_factor^2)
  double identity_error = 0.0;  // |lhs - K1 - K2| / |lhs| in L2
  double exact_error = 0.0;     // |dc + G + H - f^2/c^2|_inf / |f^2/c^2|_inf
};
// Shell index used for projections at scale ell (rounded to the nearest integer).
int shell_of(double ell);
ProductSplit product_split(const ConstructionParams& p, const AtomSpec& spec, const GridSpec& g, double ell,
                           const spectral::CutoffProfile& cutoffs);

// Integer shells whose annulus meets the spectrum of the K1 pieces for ell in K.
std::vector<int> restricted_shells(const ConstructionParams& p, const AtomSpec& spec);

}  // namespace kslab::construction
