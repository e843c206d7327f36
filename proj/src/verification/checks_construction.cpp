#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "kslab/errors.hpp"
#include "kslab/verification.hpp"

namespace kslab::verification {

using construction::ConstructionParams;
using spectral::BesovParams;

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string family_tag(const Family& f) {
  std::ostringstream os;
  os << "m=" << f.params.m << " |K|=" << f.params.K.size() << " beta=" << f.spec.beta << " grid=" << f.grid.n[0];
  for (int ax = 1; ax < f.grid.d; ++ax) os << 'x' << f.grid.n[static_cast<std::size_t>(ax)];
  return os.str();
}

// Relative spectral L2 mass of f outside shell m and the worst other shell.
struct ShellLeak {
  double off_target = 0.0;
  double worst_other = 0.0;
  int worst_shell = 0;
};

ShellLeak shell_leak(const Field& f, int m, const spectral::CutoffProfile& cut) {
  const spectral::JRange range = spectral::resolvable_range(f.grid());
  const double norm = spectral::l2_spectral(f);
  ShellLeak out;
  out.off_target = spectral::l2_spectral(spectral::sub(spectral::project_block(f, m, cut), f)) / norm;
  const auto e = spectral::shell_energy(f, cut, range);
  const double total = norm * norm * f.grid().volume();
  for (int j = range.lo; j <= range.hi; ++j) {
    if (j == m) continue;
    const double rel = std::sqrt(e[static_cast<std::size_t>(j - range.lo)] / total);
    if (rel >= out.worst_other) {
      out.worst_other = rel;
      out.worst_shell = j;
    }
  }
  return out;
}

double separation_or_calibrate(const std::optional<double>& units, bool allow, CheckReport& rep) {
  if (units) return *units;
  if (!allow) throw SeparationNotCalibrated("no separation given and calibration disabled");
  const auto cal = calibrate_separation();
  rep.constant("separation_units", cal.units);
  rep.constant("separation_calibration_ratio", cal.measured_ratio);
  return cal.units;
}

}  // namespace

CheckReport check_block_identity(const BlockIdentityConfig& cfg) {
  CheckReport rep;
  rep.check_id = "block-identity";
  const auto cut = spectral::build_cutoffs(4);
  std::vector<Family> fams = cfg.families;
  if (fams.empty()) fams.push_back(default_family());
  for (const auto& fam : fams) {
    const Field f = construction::build_f(fam.params, fam.spec, fam.grid);
    const auto leak = shell_leak(f, fam.params.m, cut);
    const std::string tag = family_tag(fam);
    rep.at_most(tag + " |D_m f - f| / |f|", leak.off_target, cfg.tolerance);
    rep.at_most(tag + " max other shell (j=" + std::to_string(leak.worst_shell) + ")", leak.worst_other,
                cfg.tolerance);
    // Single-shell collapse of the Besov norm.
    for (const BesovParams bp : {BesovParams{-1.5, 4.0, 1.0}, BesovParams{-0.5, 4.0, 2.0}, BesovParams{0.5, 3.5, 1.0}}) {
      const double b = spectral::besov_norm(f, bp, cut);
      const double pred = std::exp2(fam.params.m * bp.s) * spectral::lebesgue_norm(f, bp.p);
      rep.at_most(tag + " Besov collapse s=" + fmt(bp.s) + " p=" + fmt(bp.p) + " r=" + fmt(bp.r),
                  std::abs(b - pred) / pred, cfg.tolerance);
    }
  }
  if (cfg.negative_test) {
    Family broken = fams.front();
    broken.spec.beta = cfg.broken_beta;
    const auto bad = construction::violations(broken.params, broken.spec);
    rep.note("negative test beta=" + fmt(cfg.broken_beta) + " violates: " + (bad.empty() ? "nothing" : bad.front()));
    const Field f = construction::build_f(broken.params, broken.spec, broken.grid, false);
    const auto leak = shell_leak(f, broken.params.m, cut);
    const double worst = std::max(leak.off_target, leak.worst_other);
    rep.constant("negative_test_leak", worst);
    // The check must be able to fail: the broken family has to exceed the tolerance.
    rep.at_least("negative test beta=" + fmt(cfg.broken_beta) + " leak exceeds tolerance", worst, cfg.tolerance);
  }
  return rep;
}

CheckReport check_lp_scaling(const LpScalingConfig& cfg) {
  CheckReport rep;
  rep.check_id = "lp-scaling";
  rep.tolerance = 0.0;
  const double units = separation_or_calibrate(cfg.separation_units, cfg.allow_calibration, rep);
  const int d = 2;
  for (double p : cfg.ps)
    if (!(p >= 1.0 && p <= 2.0 * d)) throw ExponentConstraintViolated("Lp scaling needs 1 <= p <= 2d");

  // Diagonal-sum prediction over the count sweep at the calibrated separation.
  const int count_max = 4;
  for (int count = 1; count <= count_max; ++count) {
    const Family fam = fractional_family(count, count_max, units, cfg.beta);
    const Field f = construction::build_f(fam.params, fam.spec, fam.grid);
    const auto norms = spectral::lebesgue_norms(f, cfg.ps);
    const double c = fam.params.effective_count_factor();
    for (std::size_t i = 0; i < cfg.ps.size(); ++i) {
      const double p = cfg.ps[i];
      double pred = 0.0;
      for (double k : fam.params.K) pred += std::exp2((p / 2.0 - d) * k);
      pred *= std::pow(c, p) * atom_lp_power(fam.spec, d, p) * sine_power_mean(p);
      const double meas = std::pow(norms[i], p);
      rep.at_most("count=" + std::to_string(count) + " p=" + fmt(p) + " |meas/pred - 1|",
                  std::abs(meas / pred - 1.0), cfg.band);
    }
  }

  // Cross-term decay over offset doublings on one fixed long grid.
  ConstructionParams p;
  p.separation_gap = 0.25;
  p.K = {0.0, -0.25};
  p.min_separation = 0.0;
  construction::AtomSpec spec;
  spec.beta = cfg.beta;
  const double unit = 1.0 / (cfg.beta * std::exp2(-0.25));
  const double D0 = units * unit;
  const double top = D0 * std::exp2(cfg.doublings);
  p.offsets = {0.0, top};
  Family fam = make_family(p, spec, {2.0 * top, 8.0 * std::numbers::pi * unit}, 2.0);
  std::vector<std::vector<CrossTerms>> ct;
  for (int k = 0; k <= cfg.doublings; ++k) {
    fam.params.offsets = {0.0, D0 * std::exp2(k)};
    ct.push_back(cross_terms(fam, cfg.ps));
  }
  fam.params.offsets = {0.0, 0.5 * fam.grid.L[0]};
  const auto far = cross_terms(fam, cfg.ps);
  for (std::size_t i = 0; i < cfg.ps.size(); ++i) {
    if (cfg.ps[i] == 2.0 * d)
      rep.at_most("p=" + fmt(cfg.ps[i]) + " I2/I1 at calibrated offset", ct[0][i].I2 / ct[0][i].I1, 0.01);
    rep.at_most("p=" + fmt(cfg.ps[i]) + " I2/I1 at maximal torus separation", far[i].I2 / far[i].I1, 0.01);
    for (int k = 0; k < cfg.doublings; ++k) {
      const double ratio = ct[static_cast<std::size_t>(k)][i].I2 / ct[static_cast<std::size_t>(k + 1)][i].I2;
      rep.at_least("p=" + fmt(cfg.ps[i]) + " I2 decay D0*2^" + std::to_string(k) + " -> 2^" + std::to_string(k + 1),
                   ratio, cfg.min_decay);
    }
  }
  return rep;
}

CheckReport check_spectral_vanishing(const VanishingConfig& cfg) {
  CheckReport rep;
  rep.check_id = "spectral-vanishing";
  const auto cut = spectral::build_cutoffs(4);
  std::vector<Family> fams = cfg.families;
  if (fams.empty()) fams.push_back(default_family());
  for (const auto& fam : fams) {
    const std::string tag = family_tag(fam);
    for (double ell : fam.params.K) {
      const auto split = construction::product_split(fam.params, fam.spec, fam.grid, ell, cut);
      const int j = construction::shell_of(ell);
      const double gn = spectral::l2_spectral(split.G);
      const double dg = spectral::l2_spectral(spectral::project_block(split.G, j, cut));
      rep.at_most(tag + " ell=" + fmt(ell) + " |D_ell G|/|G|", gn > 0.0 ? dg / gn : dg, cfg.tolerance);
      // G lives next to twice the outer carrier.
      const double w2 = 2.0 * fam.params.modulation_outer * std::exp2(fam.params.m);
      const double spread = 2.0 * (fam.spec.modulation_inner + std::sqrt(fam.params.d) * fam.spec.beta) *
                            std::exp2(fam.params.k_max());
      rep.at_most(tag + " ell=" + fmt(ell) + " G outside 2*carrier band",
                  construction::support_report(split.G, construction::annulus(fam.params.d, w2 - spread, w2 + spread)),
                  cfg.tolerance);
      const double hn = spectral::l2_spectral(split.H);
      if (fam.params.K.size() < 2) {
        rep.note(tag + ": single atom, H vanishes identically (|H| = " + fmt(hn) + ")");
        rep.at_most(tag + " ell=" + fmt(ell) + " |H|", hn, 0.0);
      } else {
        const double dh = spectral::l2_spectral(spectral::project_block(split.H, j, cut));
        rep.at_most(tag + " ell=" + fmt(ell) + " |D_ell H|/|H|", hn > 0.0 ? dh / hn : dh, cfg.tolerance);
      }
    }
  }
  // Product-support claim for widely separated scales at beta = 1/(100 d).
  construction::AtomSpec narrow;
  for (int d : {2}) {
    narrow.beta = 1.0 / (100.0 * d);
    for (const auto& [k, j] : cfg.atom_pairs) {
      const double leak = atom_pair_leakage(narrow, d, k, j);
      rep.at_most("atom pair k=" + fmt(k) + " j=" + fmt(j) + " d=" + std::to_string(d) + " beta=" + fmt(narrow.beta) +
                      " leakage outside [33/48, 35/48] 2^k",
                  leak, cfg.tolerance);
    }
  }
  return rep;
}

CheckReport check_k1_k2(const K1K2Config& cfg) {
  CheckReport rep;
  rep.check_id = "k1-k2";
  const auto cut = spectral::build_cutoffs(4);
  const int d = 2;
  const double q = 2.0 * d;

  auto ball_for = [&](const Family& fam, double ell, std::size_t idx) {
    std::vector<double> center(static_cast<std::size_t>(d), 0.0);
    center[0] = fam.params.offsets[idx];
    return spectral::Region::ball(center, std::exp2(-ell), cfg.refine);
  };

  // K1 against the closed-form scaling on the default atom and its shift.
  std::vector<double> k1s;
  for (int shift : {0, 1}) {
    Family fam = shift == 0 ? default_family() : shifted_family(shift);
    std::vector<double> lengths = fam.grid.L;
    lengths[0] *= cfg.axis0_boxes;
    fam = make_family(fam.params, fam.spec, lengths);
    const double ell = fam.params.K[0];
    const auto split = construction::product_split(fam.params, fam.spec, fam.grid, ell, cut);
    const auto ball = ball_for(fam, ell, 0);
    const double k1 = spectral::lebesgue_norm(spectral::sub(split.lhs, split.K2), q, ball);
    const double h = h_ball_norm(fam.spec, d, q);
    const double pred = std::exp2(1.5 * ell - 1.0) * h;
    k1s.push_back(k1);
    const std::string tag = "ell=" + fmt(ell) + " m=" + std::to_string(fam.params.m);
    rep.constant(tag + " K1", k1);
    rep.constant(tag + " predicted", pred);
    rep.at_most(tag + " |K1/pred - 1|", std::abs(k1 / pred - 1.0), cfg.match_tolerance);
    const double k2 = spectral::lebesgue_norm(split.K2, q, ball);
    rep.at_most(tag + " single atom |K2|", k2, 0.0);
    const double lhs = spectral::lebesgue_norm(split.lhs, q, ball);
    rep.at_least(tag + " lower bound |D_ell d1 f^2| >= (1 - K2 fraction) 2^{3l/2-1}|h|", lhs,
                 (1.0 - cfg.k2_fraction) * pred);
  }
  rep.at_most("K1 ratio ell -> ell+1 |ratio/2^1.5 - 1|", std::abs(k1s[1] / k1s[0] / std::exp2(1.5) - 1.0),
              cfg.ratio_tolerance);

  // K2 on the two-atom family: size at the calibrated separation and decay with offset.
  const double units = separation_or_calibrate(cfg.separation_units, true, rep);
  ConstructionParams p;
  p.separation_gap = 0.25;
  p.K = {0.0, -0.25};
  construction::AtomSpec spec;
  spec.beta = 0.4;
  const double unit = 1.0 / (spec.beta * std::exp2(-0.25));
  const double D0 = units * unit;
  const int doublings = 2;
  p.offsets = {0.0, D0 * std::exp2(doublings)};
  Family fam = make_family(p, spec, {2.0 * p.offsets[1], 8.0 * std::numbers::pi * unit});
  std::vector<double> k2s;
  double k1_two = 0.0;
  for (int k = 0; k <= doublings; ++k) {
    fam.params.offsets = {0.0, D0 * std::exp2(k)};
    const auto split = construction::product_split(fam.params, fam.spec, fam.grid, 0.0, cut);
    const auto ball = ball_for(fam, 0.0, 0);
    k2s.push_back(spectral::lebesgue_norm(split.K2, q, ball));
    if (k == 0) k1_two = spectral::lebesgue_norm(split.K1, q, ball);
  }
  rep.constant("two-atom K1", k1_two);
  rep.at_most("two-atom K2/K1 at calibrated offset", k2s[0] / k1_two, cfg.k2_fraction);
  for (int k = 0; k < doublings; ++k)
    rep.at_least("K2 decay D0*2^" + std::to_string(k) + " -> 2^" + std::to_string(k + 1),
                 k2s[static_cast<std::size_t>(k)] / k2s[static_cast<std::size_t>(k + 1)], cfg.min_k2_decay);
  return rep;
}

}  // namespace kslab::verification
