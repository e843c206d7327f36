#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kslab/construction.hpp"
#include "kslab/errors.hpp"
#include "kslab/verification.hpp"

using namespace kslab;
using namespace kslab::construction;

namespace {

constexpr double kPi = std::numbers::pi;

// Composite Simpson on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// theta(x) = (1/pi) int_0^beta theta_hat(xi) cos(x xi) dxi
double theta_direct(const AtomSpec& s, double x) {
  return simpson([&](double xi) { return theta_hat(s, xi) * std::cos(x * xi); }, 0.0, s.beta, 20000) / kPi;
}

verification::Family small_family() { return verification::fractional_family(1, 1, 21.4258); }

}  // namespace

TEST_CASE("theta_hat plateau, cutoff and symmetry") {
  AtomSpec s;
  s.beta = 0.4;
  CHECK(theta_hat(s, 0.0) == 1.0);
  CHECK(theta_hat(s, 0.2) == 1.0);
  CHECK(theta_hat(s, 0.4) == 0.0);
  CHECK(theta_hat(s, 0.7) == 0.0);
  CHECK(theta_hat(s, -0.31) == theta_hat(s, 0.31));
  const double mid = theta_hat(s, 0.3);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
  CHECK(theta_hat(s, 0.25) >= theta_hat(s, 0.35));
}

TEST_CASE("sampled theta agrees with a direct inverse transform") {
  AtomSpec s;
  s.beta = 0.4;
  // Large box: the periodized profile only converges to theta as L grows.
  const double L = 128.0 * kPi / s.beta;
  const spectral::GridSpec g(1, 2048, L);
  const auto th = theta_profile(s, g);
  const auto& x = th.physical();
  for (int i : {0, 3, 7, 12, 40}) {
    const double xi = L * i / 2048.0;
    CHECK(std::abs(x[static_cast<std::size_t>(i)] - theta_direct(s, xi)) <= 1e-8);
  }
}

TEST_CASE("atom L2 norm matches a Parseval quadrature") {
  AtomSpec s;
  s.beta = 0.4;
  const double L = 128.0 * kPi / s.beta;
  const auto g = snapped_grid(ConstructionParams{}, s, {512, 512}, {L, L});
  const auto a = build_atom(s, g);
  // ||theta||^2 = (1/pi) int_0^beta theta_hat^2; the carrier halves one factor.
  const double th2 = simpson([&](double xi) { return theta_hat(s, xi) * theta_hat(s, xi); }, 0.0, s.beta, 20000) / kPi;
  CHECK(spectral::lebesgue_norm(a, 2.0) == doctest::Approx(std::sqrt(0.5 * th2 * th2)).epsilon(1e-6));
}

TEST_CASE("violations name the broken precondition") {
  ConstructionParams p;
  AtomSpec s;
  CHECK(violations(p, s).empty());
  p.r = 2.0;
  const auto v = violations(p, s);
  REQUIRE(!v.empty());
  CHECK(v.front().find('r') != std::string::npos);

  ConstructionParams q;
  s.beta = 2.0;
  CHECK(!violations(q, s).empty());
}

TEST_CASE("colliding offsets are rejected") {
  auto fam = verification::fractional_family(1, 2, 21.4258);
  fam.params.K = {0.0, -0.25};
  fam.params.offsets = {0.0, 0.1};
  CHECK_THROWS_AS(require_valid(fam.params, fam.spec, fam.grid), OffsetCollision);
}

TEST_CASE("f is supported in the claimed carrier annulus") {
  const auto fam = small_family();
  const auto f = build_f(fam.params, fam.spec, fam.grid);
  CHECK(support_report(f, carrier_annulus(fam.params, fam.spec)) <= 1e-12);
  CHECK(support_report(f, annulus(2, 0.0, 1.0)) > 0.99);
}

TEST_CASE("product split reproduces the projected derivative of f squared") {
  // Needs the narrow default atom so a^2 sits on the plateau of its shell.
  const auto fam = verification::default_family();
  const auto ps = product_split(fam.params, fam.spec, fam.grid, 0.0, spectral::build_cutoffs(4));
  CHECK(ps.identity_error <= 1e-9);
  CHECK(ps.exact_error <= 1e-10);
}

TEST_CASE("initial data norms are positive and finite") {
  const auto fam = small_family();
  const auto d = build_initial_data(fam.params, fam.spec, fam.grid, spectral::build_cutoffs(4));
  CHECK(d.u0_besov > 0.0);
  CHECK(d.v0_besov > 0.0);
  CHECK(std::isfinite(d.u0_besov));
}
