#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kslab/construction.hpp"
#include "kslab/evolution.hpp"
#include "kslab/spectral.hpp"

namespace kslab::verification {

using spectral::Field;
using spectral::GridSpec;

// One tested inequality lhs <= rhs, or lhs >= rhs for lower bounds; slack >= 1 means it holds.
struct Measurement {
  std::string params;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
};

// Least-squares line in log2-log2 space.
struct ExponentFit {
  std::string name;
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  double target = 0.0;
  double band = 0.0;
  bool lower_bound_only = false;  // pass when slope >= target - band
  std::size_t points = 0;
  bool pass() const;
};
ExponentFit fit_log2(std::string name, const std::vector<double>& x, const std::vector<double>& y, double target,
                     double band, bool lower_bound_only = false);

struct CheckReport {
  std::string check_id;
  double tolerance = 0.0;
  std::vector<Measurement> measured;
  std::vector<ExponentFit> fits;
  std::vector<std::pair<std::string, double>> constants;
  std::vector<std::string> notes;

  void at_most(std::string params, double value, double bound);
  void at_least(std::string params, double value, double bound);
  void constant(std::string name, double value);
  void note(std::string text) { notes.push_back(std::move(text)); }
  bool passed() const;
  double worst_slack() const;
  // First failing measurement or fit, empty when the check passes.
  std::string first_failure() const;
};

// Shared description of a construction on a concrete grid.
struct Family {
  construction::ConstructionParams params;
  construction::AtomSpec spec;
  GridSpec grid;
};
// Box lengths are snapped upward; points are the smallest powers of two giving
// axis Nyquist frequencies >= nyquist_factor times the highest data frequency.
Family make_family(const construction::ConstructionParams& p, const construction::AtomSpec& spec,
                   std::vector<double> lengths, double nyquist_factor = 3.0);
// d = 2, m = 4, K = {0}, beta = 0.04.
Family default_family();
// Same atom at base exponent m + shift and scale K + shift.
Family shifted_family(int shift);
// K = {m-4, m-4-1/4, ...} with count entries, atoms offset along e1 by
// separation_units / (beta 2^{min K}) where min K is taken over count_max atoms
// so every count shares one grid.
Family fractional_family(int count, int count_max, double separation_units, double beta = 0.4, int m = 4,
                         double r = 1.0);

// Offset (in units 1 / (beta 2^{min K})) beyond which the absolute cross term
// of a two-atom sum falls below target times the diagonal term at p = 2d.
struct SeparationCalibration {
  double units = 0.0;
  double measured_ratio = 0.0;
  int iterations = 0;
};
SeparationCalibration calibrate_separation(double beta = 0.4, int m = 4, double target = 0.01);

// Diagonal and absolute cross terms of the L^p mass of an atom sum:
// I1 = sum_k int |f_k|^p, I2 = int (sum_k |f_k|)^p - I1.
struct CrossTerms {
  double total = 0.0;  // int |f|^p
  double I1 = 0.0;
  double I2 = 0.0;
};
std::vector<CrossTerms> cross_terms(const Family& fam, const std::vector<double>& ps);

// ||a||_p^p for the unscaled atom by 1D tensor quadrature.
double atom_lp_power(const construction::AtomSpec& spec, int d, double p);
// Mean of |sin|^p over a period.
double sine_power_mean(double p);
// ||h||_{L^p(|y| <= 1)} with h = -theta theta'(y_1) theta^2(y_2..y_d) cos(2 mu y_d).
double h_ball_norm(const construction::AtomSpec& spec, int d, double p);

// Relative spectral L2 mass of the product of atoms at scales k > j (zero
// offsets) outside {33/48 2^k <= |xi| <= 35/48 2^k}, from exact 1D spectra.
double atom_pair_leakage(const construction::AtomSpec& spec, int d, double k, double j);

struct LpFrameConfig {
  int points = 1024;
  int fields = 50;
  std::uint64_t seed = 12;
  int cutoff_order = 4;
};
CheckReport check_lp_frame(const LpFrameConfig& cfg = {});

struct CorpusConfig {
  std::uint64_t seed = 12;
  int size = 100;
  int points = 256;
  double box_length = 6.283185307179586;
};

// Frozen corpus constants from a calibration run on seed 11, times 1.5.
inline constexpr double kBernsteinAnnulusC = 2.41;
inline constexpr double kBernsteinBallC = 0.83;
inline constexpr double kEmbeddingC = 1.37;
inline constexpr double kHeatC = 1.50;
inline constexpr double kProductC = 0.58;
inline constexpr double kProductN1C = 0.30;
inline constexpr double kProductN2C = 0.35;

struct BernsteinConfig {
  CorpusConfig corpus;
  std::vector<int> shells{1, 2, 3, 4, 5};
  std::vector<double> ps{1.0, 2.0, 4.0, spectral::kInf};
  std::vector<std::pair<double, double>> ball_pq{{1.0, 2.0}, {2.0, 4.0}, {1.0, spectral::kInf}, {2.0, spectral::kInf}};
  double annulus_constant = kBernsteinAnnulusC;
  double ball_constant = kBernsteinBallC;
  double max_constant = 8.0;
};
CheckReport check_bernstein(const BernsteinConfig& cfg = {});

struct EmbeddingCase {
  double s, p1, r1, p2, r2;
};
struct EmbeddingConfig {
  CorpusConfig corpus{12, 40, 256};
  std::vector<EmbeddingCase> cases{{0.0, 2.0, 1.0, 4.0, 2.0}, {-1.5, 2.0, 1.0, 4.0, 1.0},
                                   {0.5, 1.0, 2.0, spectral::kInf, spectral::kInf}, {-0.5, 3.5, 1.0, 4.0, 1.0}};
  double constant = kEmbeddingC;
};
CheckReport check_embedding(const EmbeddingConfig& cfg = {});

struct HeatConfig {
  CorpusConfig corpus{12, 50, 128};
  double T = 0.05;
  int steps = 64;
  std::vector<double> ps{2.0, 4.0};
  std::vector<double> rs{1.0, 2.0};
  double s = -1.0;
  std::vector<std::pair<double, double>> q_pairs{{1.0, 1.0}, {1.0, spectral::kInf}, {2.0, 2.0}};
  double constant = kHeatC;
};
CheckReport check_heat_regularity(const HeatConfig& cfg = {});

struct ProductConfig {
  CorpusConfig corpus{12, 30, 256};
  double kmax = 24.0;
  std::vector<double> p_law_s{0.5, 1.0};
  std::vector<double> p_law_p{2.0, 4.0};
  std::vector<double> n1_p{2.0, 3.0, 3.5};
  std::vector<std::pair<double, double>> n2_pq{{3.5, 4.0}};
  double constant = kProductC;
  double n1_constant = kProductN1C;
  double n2_constant = kProductN2C;
};
// Throws ExponentConstraintViolated if a configured exponent breaks the hypotheses of its product law.
CheckReport check_product_laws(const ProductConfig& cfg = {});

struct DuhamelConfig {
  std::uint64_t seed = 12;
  int sources = 20;
  int points = 128;
  double t = 0.25;
  double kmax = 8.0;
  int nodes = 64;
};
CheckReport check_duhamel(const DuhamelConfig& cfg = {});

struct BlockIdentityConfig {
  std::vector<Family> families;  // empty selects the default family
  bool negative_test = true;
  double broken_beta = 2.0;
  double tolerance = 1e-8;
};
CheckReport check_block_identity(const BlockIdentityConfig& cfg = {});

struct LpScalingConfig {
  std::optional<double> separation_units;  // unset: calibrate when allowed
  bool allow_calibration = true;
  std::vector<double> ps{2.0, 3.5, 4.0};
  int doublings = 3;
  double beta = 0.4;
  double band = 0.05;
  double min_decay = 10.0;
};
CheckReport check_lp_scaling(const LpScalingConfig& cfg = {});

struct VanishingConfig {
  std::vector<Family> families;  // empty selects the default family
  double tolerance = 1e-8;
  // Atom pairs (k, j) for the product-support claim at beta = 1/(100 d).
  std::vector<std::pair<double, double>> atom_pairs{{8.0, 0.0}};
};
CheckReport check_spectral_vanishing(const VanishingConfig& cfg = {});

struct K1K2Config {
  double match_tolerance = 0.02;
  double ratio_tolerance = 0.02;
  double k2_fraction = 0.1;
  double min_k2_decay = 4.0;
  std::optional<double> separation_units;
  int refine = 8;
  // Box length along the derivative axis, in units of 8 pi / beta.
  double axis0_boxes = 2.0;
};
CheckReport check_k1_k2(const K1K2Config& cfg = {});

struct SolverCheckConfig {
  std::vector<evolution::Integrator> integrators{evolution::Integrator::if_rk4, evolution::Integrator::if_rk2,
                                                 evolution::Integrator::etd2};
  std::vector<int> steps{32, 64, 128, 256};
  int points = 32;
  double T = 1.0;
  double order_band = 0.3;
  double residual_tol = 1e-10;
  double drift_tol = 1e-12;
};
CheckReport check_solver(const SolverCheckConfig& cfg = {});

struct LadderCheckConfig {
  std::vector<double> lambdas{1.0, 0.5, 0.25};
  std::vector<double> epsilons{0.125, 0.0625, 0.03125};
  double epsilon = 0.0625;
  int time_steps = 16;
  double min_order = 1.8;
  double eps_band = 0.2;
  double beta = 0.4;
};
CheckReport check_ladder(const LadderCheckConfig& cfg = {});

struct ExperimentConfig {
  std::vector<int> counts{1, 2, 3, 4};
  double epsilon = 0.0625;
  std::vector<double> epsilon_sweep{0.125, 0.0625, 0.03125};
  int m = 4;
  double r = 1.0;
  double beta = 0.4;
  std::optional<double> separation_units;
  int time_steps = 8;
  evolution::SolverConfig solver;
  double exponent_band = 0.05;
  double dominance = 5.0;
  double gate = 0.05;
  int workers = 1;
};

struct ExperimentRecord {
  int count = 0;
  double epsilon = 0.0;
  double t_n = 0.0;
  double u0_norm = 0.0;
  double v0_norm = 0.0;
  double u_norm = 0.0;         // ||u(t_n)|| in B^{-3/2}_{2d,r}
  double U1_norm = 0.0;
  double U3_norm = 0.0;
  double U2_restricted = 0.0;  // on the shells of K
  double U21_restricted = 0.0;
  double U22_restricted = 0.0;
  double U1_restricted = 0.0;
  double U3_restricted = 0.0;
  double defect = 0.0;  // ||ladder u - solver u|| / ||U21|| in L2 at t_n
  int picard_iterations = 0;
  bool excluded = false;
  std::string reason;
};

struct ExperimentReport {
  std::vector<ExperimentRecord> records;  // count sweep at the base epsilon
  std::vector<ExperimentRecord> epsilon_records;
  CheckReport check;
  double separation_units = 0.0;
};
ExperimentReport run_discontinuity_experiment(const ExperimentConfig& cfg = {});

// Identifiers accepted by run_check.
std::vector<std::string> check_ids();
// corpus_size > 0 overrides the per-check corpus or source count.
CheckReport run_check(const std::string& id, std::uint64_t seed, int corpus_size = 0);

}  // namespace kslab::verification
