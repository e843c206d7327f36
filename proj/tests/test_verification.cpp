#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kslab/verification.hpp"

using namespace kslab;
using namespace kslab::verification;

namespace {

constexpr double kPi = std::numbers::pi;

// theta(x) and theta'(x) from a plain Simpson inverse transform of theta_hat.
struct Theta {
  construction::AtomSpec s;
  double value(double x, bool deriv) const {
    const int n = 4000;
    const double h = s.beta / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double xi = i * h;
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const double th = construction::theta_hat(s, xi);
      acc += w * (deriv ? -xi * th * std::sin(x * xi) : th * std::cos(x * xi));
    }
    return acc * h / 3.0 / kPi;
  }
};

// ||h||_{L^p} over the unit disc by a midpoint cartesian grid (d = 2).
double h_ball_cartesian(const construction::AtomSpec& s, double p) {
  const Theta T{s};
  const double mu = s.modulation_inner;
  const int n = 400;
  const double h = 2.0 / n;
  std::vector<double> th(n), dth(n), y(n);
  for (int i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] = -1.0 + (i + 0.5) * h;
    th[static_cast<std::size_t>(i)] = T.value(y[static_cast<std::size_t>(i)], false);
    dth[static_cast<std::size_t>(i)] = T.value(y[static_cast<std::size_t>(i)], true);
  }
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
      if (y[a] * y[a] + y[b] * y[b] > 1.0) continue;
      const double v = th[a] * dth[a] * th[b] * th[b] * std::cos(2.0 * mu * y[b]);
      acc += std::pow(std::abs(v), p);
    }
  return std::pow(acc * h * h, 1.0 / p);
}

}  // namespace

TEST_CASE("log-log fit recovers an exact power law") {
  const std::vector<double> x{1, 2, 4, 8};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -0.25));
  const auto f = fit_log2("line", x, y, -0.25, 0.05);
  CHECK(f.slope == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log2(3.0)).epsilon(1e-12));
  CHECK(f.std_error <= 1e-12);
  CHECK(f.pass());
  CHECK(!fit_log2("off", x, y, -0.5, 0.05).pass());
  CHECK(fit_log2("floor", x, y, -0.5, 0.05, true).pass());
}

TEST_CASE("slack bookkeeping") {
  CheckReport r;
  r.check_id = "t";
  r.at_most("a", 1.0, 2.0);
  r.at_least("b", 3.0, 1.0);
  CHECK(r.passed());
  CHECK(r.worst_slack() == doctest::Approx(2.0));
  r.at_most("c", 5.0, 1.0);
  CHECK(!r.passed());
  CHECK(r.worst_slack() == doctest::Approx(0.2));
  CHECK(r.first_failure().find('c') != std::string::npos);
}

TEST_CASE("sine power means") {
  CHECK(sine_power_mean(2.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sine_power_mean(4.0) == doctest::Approx(3.0 / 8.0).epsilon(1e-12));
}

TEST_CASE("h ball norm agrees with a cartesian quadrature") {
  construction::AtomSpec s;
  s.beta = 0.4;
  const double ref = h_ball_cartesian(s, 4.0);
  CHECK(h_ball_norm(s, 2, 4.0) == doctest::Approx(ref).epsilon(5e-3));
}

TEST_CASE("atom pair product leakage is small only for narrow atoms") {
  construction::AtomSpec narrow;
  narrow.beta = 0.005;
  construction::AtomSpec wide;
  wide.beta = 0.3;
  const double a = atom_pair_leakage(narrow, 2, 8.0, 0.0);
  const double b = atom_pair_leakage(wide, 2, 8.0, 0.0);
  CHECK(a <= 1e-8);
  CHECK(b > 1e-3);
}

TEST_CASE("check ids dispatch and unknown ids are rejected") {
  CHECK(check_ids().size() == 12);
  CHECK_THROWS(run_check("no-such-check", 1));
  const auto r = run_check("duhamel", 3, 2);
  CHECK(r.passed());
}
