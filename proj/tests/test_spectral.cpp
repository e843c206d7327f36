#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "kslab/errors.hpp"
#include "kslab/io.hpp"
#include "kslab/spectral.hpp"

using namespace kslab;
using namespace kslab::spectral;

namespace {

constexpr double kPi = std::numbers::pi;

// cos(k x1) on a square 2d torus of side 2 pi.
Field cosine(const GridSpec& g, int k) {
  RealVec x(g.points());
  const int n1 = g.n[1];
  for (std::size_t q = 0; q < x.size(); ++q) {
    const double x1 = 2.0 * kPi * static_cast<double>(q / static_cast<std::size_t>(n1)) / g.n[0];
    x[q] = std::cos(k * x1);
  }
  return Field::scalar_physical(g, std::move(x));
}

}  // namespace

TEST_CASE("grid rejects sizes that are not powers of two") {
  CHECK_THROWS_AS(GridSpec(2, 48, 1.0).validate(), InvalidGrid);
  CHECK_THROWS_AS(GridSpec(2, 2, 1.0).validate(), InvalidGrid);
  CHECK_NOTHROW(GridSpec(2, 64, 1.0).validate());
  CHECK_THROWS_AS(GridSpec(2, 64, -1.0).validate(), InvalidGrid);
}

TEST_CASE("physical to spectral round trip") {
  const GridSpec g(2, 64, 2.0 * kPi);
  std::mt19937_64 rng(3);
  const Field f = random_band_limited(g, rng, 0.0, 20.0);
  const Field back = Field::scalar_spectral(g, f.spectral());
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < g.points(); ++i) {
    err = std::max(err, std::abs(back.physical()[i] - f.physical()[i]));
    ref = std::max(ref, std::abs(f.physical()[i]));
  }
  CHECK(err <= 1e-12 * ref);
}

TEST_CASE("cutoff profile conventions") {
  const auto c = build_cutoffs(4);
  CHECK(c.chi(0.75) == doctest::Approx(1.0));
  CHECK(c.chi(4.0 / 3.0) == doctest::Approx(0.0));
  CHECK(c.phi(4.0 / 3.0) == doctest::Approx(1.0));
  CHECK(c.phi(1.5) == doctest::Approx(1.0));
  // Partition of unity at a few radii, summing every shell that can touch them.
  for (double rho : {0.9, 1.7, 5.3, 33.3}) {
    double s = 0.0;
    for (int j = -6; j <= 8; ++j) s += c.phi(std::ldexp(rho, -j));
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("a pure mode on a shell plateau collapses the Besov norm") {
  const GridSpec g(2, 64, 2.0 * kPi);
  const Field f = cosine(g, 11);  // 32/3 <= 11 <= 12: plateau of shell 3
  const auto cut = build_cutoffs(4);
  const double l4 = lebesgue_norm(f, 4.0);
  CHECK(besov_norm(f, {-1.5, 4.0, 1.0}, cut) == doctest::Approx(std::exp2(-4.5) * l4).epsilon(1e-12));
  const Field d3 = project_block(f, 3, cut);
  CHECK(l2_spectral(sub(d3, f)) <= 1e-13 * l2_spectral(f));
  // ||cos||_4^4 = 3/8 * area
  CHECK(l4 == doctest::Approx(std::pow(3.0 / 8.0 * 4.0 * kPi * kPi, 0.25)).epsilon(1e-12));
}

TEST_CASE("zero field has zero norms") {
  const GridSpec g(2, 32, 1.0);
  const Field z = Field::zeros(g);
  const auto cut = build_cutoffs(4);
  CHECK(lebesgue_norm(z, 2.0) == 0.0);
  CHECK(lebesgue_norm(z, kInf) == 0.0);
  CHECK(besov_norm(z, {-1.5, 4.0, 1.0}, cut) == 0.0);
}

TEST_CASE("heat semigroup and closed-form decay") {
  const GridSpec g(2, 32, 2.0 * kPi);
  const Field f = cosine(g, 3);
  const Field a = heat_propagate(heat_propagate(f, 0.1), 0.2);
  const Field b = heat_propagate(f, 0.3);
  CHECK(l2_spectral(sub(a, b)) <= 1e-12 * l2_spectral(b));
  CHECK(l2_spectral(b) == doctest::Approx(std::exp(-9.0 * 0.3) * l2_spectral(f)).epsilon(1e-12));
}

TEST_CASE("divergence of a gradient is the Laplacian") {
  const GridSpec g(2, 32, 2.0 * kPi);
  std::mt19937_64 rng(5);
  const Field f = random_band_limited(g, rng, 1.0, 9.0);
  const Field lhs = divergence(gradient(f));
  CHECK(l2_spectral(sub(lhs, laplacian(f))) <= 1e-12 * l2_spectral(lhs));
}

TEST_CASE("field files round trip") {
  const GridSpec g(2, 16, 3.0);
  std::mt19937_64 rng(9);
  FieldBundle b{{random_band_limited(g, rng, 0.0, 5.0), random_band_limited(g, rng, 0.0, 5.0)}, {0.0, 0.5}, "pair"};
  const std::string path = "spectral_roundtrip.kslab";
  write_fields(path, b);
  const auto r = read_fields(path);
  std::remove(path.c_str());
  REQUIRE(r.frames.size() == 2);
  CHECK(r.label == "pair");
  CHECK(r.times[1] == 0.5);
  CHECK(l2_spectral(sub(r.frames[1], b.frames[1])) == 0.0);
}
