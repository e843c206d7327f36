#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "kslab/field.hpp"
#include "kslab/grid.hpp"

namespace kslab::spectral {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Radial low-pass chi and annulus phi(rho) = chi(rho/2) - chi(rho). The
// transition of chi on [3/4, 4/3] is the order-k polynomial smoothstep.
struct CutoffProfile {
  int smoothness_order = 4;
  double chi(double rho) const;
  double phi(double rho) const;
  std::vector<double> sample_chi(const std::vector<double>& radii) const;
  std::vector<double> sample_phi(const std::vector<double>& radii) const;
};

CutoffProfile build_cutoffs(int smoothness_order);

struct BesovParams {
  double s = 0.0;
  double p = 2.0;
  double r = 2.0;
};

struct JRange {
  int lo = 0;
  int hi = -1;
  bool empty() const { return hi < lo; }
};

// Shells meeting the lattice's nonzero frequencies whose outer radius stays
// below the largest axis Nyquist frequency.
JRange resolvable_range(const GridSpec& g);
bool shell_resolvable(const GridSpec& g, int j);

struct DyadicDecomposition {
  Field source;
  std::map<int, Field> blocks;
  double truncation_residual = 0.0;
  double reconstruction_error() const;
};

Field project_block(const Field& f, int j, const CutoffProfile& cutoffs);
Field project_shells(const Field& f, const std::vector<int>& shells, const CutoffProfile& cutoffs);
DyadicDecomposition decompose(const Field& f, const CutoffProfile& cutoffs, JRange range);
// Relative spectral L2 mass of f outside the shells in range.
double truncation_residual(const Field& f, const CutoffProfile& cutoffs, JRange range);
std::vector<double> shell_energy(const Field& f, const CutoffProfile& cutoffs, JRange range);
// Resolvable shells whose open annulus holds a coefficient above rel_tol * max|c|.
std::vector<int> active_shells(const Field& f, double rel_tol = 1e-14);

struct Region {
  enum class Shape { whole, box, ball };
  Shape shape = Shape::whole;
  std::vector<double> lo, hi;  // box corners
  std::vector<double> center;  // ball center (periodic distance)
  double radius = 0.0;
  // >1 evaluates the trigonometric interpolant on a local grid with spacing
  // min(grid spacing, extent / 32) / refine.
  int refine = 1;
  static Region whole();
  static Region box(std::vector<double> lo, std::vector<double> hi, int refine = 1);
  static Region ball(std::vector<double> center, double radius, int refine = 1);
};

double lebesgue_norm(const Field& f, double p, const Region& region = Region::whole());
std::vector<double> lebesgue_norms(const Field& f, const std::vector<double>& ps,
                                   const Region& region = Region::whole());
double l2_spectral(const Field& f);

double besov_norm(const Field& f, const BesovParams& bp, const CutoffProfile& cutoffs,
                  std::optional<JRange> range = std::nullopt);
// Besov sum restricted to the listed shells.
double besov_norm_on(const Field& f, const BesovParams& bp, const CutoffProfile& cutoffs,
                     const std::vector<int>& shells);

// Per-shell L^p norms for several exponents from one block synthesis each.
struct BlockNorms {
  std::vector<int> shells;
  std::vector<double> ps;
  std::vector<std::vector<double>> value;  // value[shell_index][p_index]
  double get(int j, double p) const;
};
BlockNorms block_norms(const Field& f, const CutoffProfile& cutoffs, const std::vector<int>& shells,
                       const std::vector<double>& ps);
double aggregate_besov(const BlockNorms& bn, const BesovParams& bp);

// Time-sampled field sequence on a nondecreasing time grid.
struct Trace {
  std::vector<double> times;
  std::vector<Field> frames;
  bool empty() const { return frames.empty(); }
  std::size_t size() const { return frames.size(); }
};

struct BlockNormTrace {
  std::vector<double> times;
  std::vector<BlockNorms> per_time;
};
BlockNormTrace block_norm_trace(const Trace& tr, const CutoffProfile& cutoffs, const std::vector<int>& shells,
                                const std::vector<double>& ps);
double chemin_lerner_from_table(const BlockNormTrace& table, double rho, const BesovParams& bp);
double chemin_lerner_norm(const Trace& tr, double rho, const BesovParams& bp, const CutoffProfile& cutoffs,
                          std::optional<JRange> range = std::nullopt);

using Symbol = std::function<cplx(const double* xi)>;

// Multiplies every coefficient by symbol(xi). Nyquist-plane modes use the
// Hermitian part of the symbol so the output stays real.
Field apply_multiplier(const Field& f, const Symbol& symbol, bool check_hermitian = true);
Field apply_radial(const Field& f, const std::function<double(double)>& m);
Field heat_propagate(const Field& f, double t);
// (1 - exp(-t|xi|^2)) / |xi|^2, equal to t at xi = 0.
double duhamel_symbol(double t, double k2);

Field gradient(const Field& f);
Field divergence(const Field& v);
Field partial(const Field& f, int axis);
Field laplacian(const Field& f);

Field add(const Field& a, const Field& b);
Field sub(const Field& a, const Field& b);
Field scale(const Field& a, double s);
Field axpy(double a, const Field& x, const Field& y);  // a*x + y
Field linear_combination(const std::vector<double>& coeffs, const std::vector<Field>& fields);
// Pointwise product of a scalar with a scalar or vector field.
Field multiply(const Field& a, const Field& b);
Field square(const Field& a);
Field dealias(const Field& f, double fraction);
double mean(const Field& f);
double max_abs(const Field& f);

// Band-limited random field with coefficients supported where
// kmin <= |xi| <= kmax (kmin may be 0, which keeps the mean mode).
Field random_band_limited(const GridSpec& g, std::mt19937_64& rng, double kmin, double kmax,
                          FieldKind kind = FieldKind::scalar);
// Evaluates the trigonometric interpolant of one component at the tensor grid
// given by per-axis coordinate lists (row-major output).
std::vector<double> evaluate_tensor(const Field& f, int comp, const std::vector<std::vector<double>>& coords,
                                    double drop_tol = 1e-15);
// Re-synthesizes coefficients from samples so Nyquist planes are Hermitian.
Field hermitian_project(const Field& f);

}  // namespace kslab::spectral
