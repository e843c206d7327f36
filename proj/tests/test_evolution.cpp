#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kslab/errors.hpp"
#include "kslab/evolution.hpp"
#include "kslab/verification.hpp"

using namespace kslab;
using namespace kslab::evolution;
using spectral::GridSpec;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("constant-source Duhamel integral matches the quadrature") {
  const GridSpec g(2, 32, 2.0 * kPi);
  std::mt19937_64 rng(21);
  const Field src = spectral::random_band_limited(g, rng, 1.0, 8.0);
  const Field exact = duhamel_const_source(src, 0.25);
  const Field quad = duhamel_quadrature([&](double) { return src; }, 0.25, 64);
  CHECK(spectral::l2_spectral(spectral::sub(exact, quad)) <= 1e-12 * spectral::l2_spectral(exact));
}

TEST_CASE("Duhamel integral of a single mode has the closed form (1 - e^{-tk^2}) / k^2") {
  const GridSpec g(1, 16, 2.0 * kPi);
  spectral::RealVec x(16);
  for (int i = 0; i < 16; ++i) x[static_cast<std::size_t>(i)] = std::cos(3.0 * 2.0 * kPi * i / 16.0);
  const auto f = Field::scalar_physical(g, x);
  const double t = 0.4;
  const auto out = duhamel_const_source(f, t);
  const double expect = (1.0 - std::exp(-9.0 * t)) / 9.0;
  CHECK(out.physical()[0] == doctest::Approx(expect).epsilon(1e-13));
  CHECK_THROWS_AS(duhamel_const_source(f, -1.0), NegativeTime);
}

TEST_CASE("zero data stays zero") {
  const GridSpec g(2, 16, 2.0 * kPi);
  const Field z = Field::zeros(g);
  SolverConfig sc;
  sc.steps = 8;
  const auto sol = solve_chemotaxis(z, Field::zeros(g, spectral::FieldKind::vector), 0.1, sc);
  CHECK(spectral::max_abs(sol.u.frames.back()) == 0.0);
  CHECK(spectral::max_abs(sol.v.frames.back()) == 0.0);
  CHECK(sol.max_mean_drift == 0.0);
}

TEST_CASE("integrator names round trip") {
  for (auto it : {Integrator::if_rk2, Integrator::if_rk4, Integrator::etd2}) CHECK(parse_integrator(to_string(it)) == it);
  CHECK_THROWS(parse_integrator("euler"));
}

TEST_CASE("a small ladder converges and reassembles u") {
  const auto fam = verification::fractional_family(1, 1, 21.4258);
  const auto data = construction::build_initial_data(fam.params, fam.spec, fam.grid, spectral::build_cutoffs(4));
  const auto tg = TimeGrid::for_experiment(0.0625, fam.params.m, 8);
  CHECK(tg.T_final == doctest::Approx(0.0625 / 256.0));
  const auto L = build_ladder(data, tg, LadderOptions{});
  CHECK(L.picard_residual <= 1e-10);
  REQUIRE(L.times.size() == 9);
  const auto u = L.u();
  const Field sum = spectral::add(spectral::add(L.U1.frames.back(), L.U2().frames.back()), L.U3.frames.back());
  CHECK(spectral::l2_spectral(spectral::sub(u.frames.back(), sum)) <= 1e-14 * spectral::l2_spectral(sum));
}
