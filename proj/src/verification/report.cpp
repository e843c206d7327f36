#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kslab/errors.hpp"
#include "kslab/verification.hpp"

namespace kslab::verification {

bool ExponentFit::pass() const {
  if (points < 3 || !std::isfinite(slope) || !std::isfinite(std_error)) return false;
  if (std_error > 0.5 * band) return false;
  if (lower_bound_only) return slope >= target;
  return std::abs(slope - target) <= band;
}

ExponentFit fit_log2(std::string name, const std::vector<double>& x, const std::vector<double>& y, double target,
                     double band, bool lower_bound_only) {
  ExponentFit f;
  f.name = std::move(name);
  f.target = target;
  f.band = band;
  f.lower_bound_only = lower_bound_only;
  f.points = std::min(x.size(), y.size());
  const auto n = static_cast<double>(f.points);
  if (f.points < 2) {
    f.slope = f.std_error = std::numeric_limits<double>::quiet_NaN();
    return f;
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < f.points; ++i) {
    lx.push_back(std::log2(x[i]));
    ly.push_back(std::log2(y[i]));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < f.points; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < f.points; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (f.points < 3) {
    f.std_error = std::numeric_limits<double>::infinity();
    return f;
  }
  double ssr = 0.0;
  for (std::size_t i = 0; i < f.points; ++i) {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    ssr += r * r;
  }
  f.std_error = std::sqrt(ssr / (n - 2.0) / sxx);
  return f;
}

void CheckReport::at_most(std::string params, double value, double bound) {
  double slack;
  if (value <= 0.0) slack = bound >= 0.0 ? spectral::kInf : 0.0;
  else slack = bound / value;
  if (!std::isfinite(value)) slack = 0.0;
  measured.push_back({std::move(params), value, bound, slack});
}

void CheckReport::at_least(std::string params, double value, double bound) {
  double slack;
  if (bound <= 0.0) slack = value >= bound ? spectral::kInf : 0.0;
  else slack = value / bound;
  if (!std::isfinite(value)) slack = 0.0;
  measured.push_back({std::move(params), value, bound, slack});
}

void CheckReport::constant(std::string name, double value) { constants.emplace_back(std::move(name), value); }

bool CheckReport::passed() const { return first_failure().empty(); }

double CheckReport::worst_slack() const {
  double w = spectral::kInf;
  for (const auto& m : measured) w = std::min(w, m.slack);
  return w;
}

std::string CheckReport::first_failure() const {
  for (const auto& m : measured)
    if (!(m.slack >= 1.0 - tolerance)) {
      std::ostringstream os;
      os << m.params << ": lhs " << m.lhs << " rhs " << m.rhs << " slack " << m.slack;
      return os.str();
    }
  for (const auto& f : fits)
    if (!f.pass()) {
      std::ostringstream os;
      os << "fit " << f.name << ": slope " << f.slope << " +- " << f.std_error << " target " << f.target
         << (f.lower_bound_only ? " (lower bound)" : " band ") << (f.lower_bound_only ? 0.0 : f.band);
      return os.str();
    }
  return {};
}

std::vector<std::string> check_ids() {
  return {"lp-frame",   "block-identity",     "bernstein", "embedding", "heat-regularity", "product-laws",
          "duhamel",    "lp-scaling",         "spectral-vanishing", "k1-k2", "solver", "ladder"};
}

CheckReport run_check(const std::string& id, std::uint64_t seed, int corpus_size) {
  if (id == "lp-frame") {
    LpFrameConfig c;
    c.seed = seed;
    if (corpus_size > 0) c.fields = corpus_size;
    return check_lp_frame(c);
  }
  if (id == "block-identity") return check_block_identity();
  if (id == "bernstein") {
    BernsteinConfig c;
    c.corpus.seed = seed;
    if (corpus_size > 0) c.corpus.size = corpus_size;
    return check_bernstein(c);
  }
  if (id == "embedding") {
    EmbeddingConfig c;
    c.corpus.seed = seed;
    if (corpus_size > 0) c.corpus.size = corpus_size;
    return check_embedding(c);
  }
  if (id == "heat-regularity") {
    HeatConfig c;
    c.corpus.seed = seed;
    if (corpus_size > 0) c.corpus.size = corpus_size;
    return check_heat_regularity(c);
  }
  if (id == "product-laws") {
    ProductConfig c;
    c.corpus.seed = seed;
    if (corpus_size > 0) c.corpus.size = corpus_size;
    return check_product_laws(c);
  }
  if (id == "duhamel") {
    DuhamelConfig c;
    c.seed = seed;
    if (corpus_size > 0) c.sources = corpus_size;
    return check_duhamel(c);
  }
  if (id == "lp-scaling") return check_lp_scaling();
  if (id == "spectral-vanishing") return check_spectral_vanishing();
  if (id == "k1-k2") return check_k1_k2();
  if (id == "solver") return check_solver();
  if (id == "ladder") return check_ladder();
  throw ParseError("unknown check id '" + id + "'");
}

}  // namespace kslab::verification
