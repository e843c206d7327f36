#include "kslab/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kslab/errors.hpp"

namespace kslab::spectral {

GridSpec::GridSpec(int dim, int points, double length)
    : d(dim), n(static_cast<std::size_t>(dim), points), L(static_cast<std::size_t>(dim), length) {
  validate();
}

GridSpec::GridSpec(std::vector<int> points, std::vector<double> lengths)
    : d(static_cast<int>(points.size())), n(std::move(points)), L(std::move(lengths)) {
  validate();
}

void GridSpec::validate() const {
  if (d < 1 || d > kMaxDim) throw InvalidGrid("dimension must be in 1..3, got " + std::to_string(d));
  if (static_cast<int>(n.size()) != d || static_cast<int>(L.size()) != d)
    throw InvalidGrid("points/box_length must have one entry per axis");
  for (int i = 0; i < d; ++i) {
    const int p = n[static_cast<std::size_t>(i)];
    if (p < 4 || (p & (p - 1)) != 0)
      throw InvalidGrid("points on axis " + std::to_string(i) + " must be a power of two >= 4");
    if (!(L[static_cast<std::size_t>(i)] > 0.0) || !std::isfinite(L[static_cast<std::size_t>(i)]))
      throw InvalidGrid("box length on axis " + std::to_string(i) + " must be positive");
  }
}

std::size_t GridSpec::points() const {
  std::size_t p = 1;
  for (int v : n) p *= static_cast<std::size_t>(v);
  return p;
}

std::array<int, kMaxDim> GridSpec::spectral_shape() const {
  std::array<int, kMaxDim> s{1, 1, 1};
  for (int i = 0; i < d; ++i) s[static_cast<std::size_t>(i)] = n[static_cast<std::size_t>(i)];
  s[static_cast<std::size_t>(d - 1)] = n[static_cast<std::size_t>(d - 1)] / 2 + 1;
  return s;
}

std::size_t GridSpec::spectral_points() const {
  auto s = spectral_shape();
  return static_cast<std::size_t>(s[0]) * static_cast<std::size_t>(s[1]) * static_cast<std::size_t>(s[2]);
}

double GridSpec::cell_volume() const { return volume() / static_cast<double>(points()); }

double GridSpec::volume() const {
  double v = 1.0;
  for (double l : L) v *= l;
  return v;
}

int GridSpec::signed_index(int axis, int idx) const {
  const int p = n[static_cast<std::size_t>(axis)];
  if (axis == d - 1) return idx;
  return idx <= p / 2 ? idx : idx - p;
}

double GridSpec::wavenumber(int axis, int idx) const {
  return 2.0 * std::numbers::pi * signed_index(axis, idx) / L[static_cast<std::size_t>(axis)];
}

bool GridSpec::is_nyquist(int axis, int idx) const { return idx == n[static_cast<std::size_t>(axis)] / 2; }

double GridSpec::nyquist(int axis) const {
  return std::numbers::pi * n[static_cast<std::size_t>(axis)] / L[static_cast<std::size_t>(axis)];
}

double GridSpec::max_nyquist() const {
  double m = 0.0;
  for (int i = 0; i < d; ++i) m = std::max(m, nyquist(i));
  return m;
}

double GridSpec::min_nyquist() const {
  double m = nyquist(0);
  for (int i = 1; i < d; ++i) m = std::min(m, nyquist(i));
  return m;
}

double GridSpec::min_frequency() const {
  double m = 2.0 * std::numbers::pi / L[0];
  for (int i = 1; i < d; ++i) m = std::min(m, 2.0 * std::numbers::pi / L[static_cast<std::size_t>(i)]);
  return m;
}

double GridSpec::max_radius() const {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += nyquist(i) * nyquist(i);
  return std::sqrt(s);
}

bool GridSpec::isotropic_points() const {
  for (int v : n)
    if (v != n[0]) return false;
  return true;
}

Lattice::Lattice(const GridSpec& g) : grid(g), shape(g.spectral_shape()) {
  for (int ax = 0; ax < g.d; ++ax) {
    const auto a = static_cast<std::size_t>(ax);
    xi[a].resize(static_cast<std::size_t>(shape[a]));
    nyq[a].resize(static_cast<std::size_t>(shape[a]));
    for (int i = 0; i < shape[a]; ++i) {
      xi[a][static_cast<std::size_t>(i)] = g.wavenumber(ax, i);
      nyq[a][static_cast<std::size_t>(i)] = g.is_nyquist(ax, i) ? 1 : 0;
    }
  }
}

double Lattice::weight(std::size_t last_idx) const {
  const int nl = grid.n[static_cast<std::size_t>(grid.d - 1)];
  if (last_idx == 0 || static_cast<int>(last_idx) == nl / 2) return 1.0;
  return 2.0;
}

}  // namespace kslab::spectral
