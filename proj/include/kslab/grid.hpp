#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace kslab::spectral {

inline constexpr int kMaxDim = 3;

// Periodic box [0, L_0) x ... x [0, L_{d-1}) sampled with n_i points per axis.
// Spectral arrays follow the real-to-complex layout: the last axis stores
// only the non-negative indices 0..n/2.
struct GridSpec {
  int d = 2;
  std::vector<int> n;
  std::vector<double> L;

  GridSpec() = default;
  GridSpec(int dim, int points, double length);
  GridSpec(std::vector<int> points, std::vector<double> lengths);

  void validate() const;

  std::size_t points() const;
  std::size_t spectral_points() const;
  std::array<int, kMaxDim> spectral_shape() const;
  double cell_volume() const;
  double volume() const;

  int signed_index(int axis, int idx) const;
  double wavenumber(int axis, int idx) const;
  bool is_nyquist(int axis, int idx) const;
  double nyquist(int axis) const;
  double max_nyquist() const;
  double min_nyquist() const;
  double min_frequency() const;
  double max_radius() const;
  bool isotropic_points() const;

  bool operator==(const GridSpec& o) const { return d == o.d && n == o.n && L == o.L; }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

// Precomputed per-axis frequency tables for tight spectral loops.
struct Lattice {
  explicit Lattice(const GridSpec& g);
  const GridSpec& grid;
  std::array<std::vector<double>, kMaxDim> xi;
  std::array<std::vector<char>, kMaxDim> nyq;
  std::array<int, kMaxDim> shape{1, 1, 1};
  // Parseval weight of a stored coefficient (2 for interior last-axis modes).
  double weight(std::size_t last_idx) const;
};

// Calls fn(flat_index, xi, is_nyquist_mode, parseval_weight) for every stored
// spectral coefficient.
template <class Fn>
void for_each_mode(const Lattice& lat, Fn&& fn) {
  const int d = lat.grid.d;
  double xi[kMaxDim] = {0.0, 0.0, 0.0};
  std::size_t flat = 0;
  const int s0 = lat.shape[0], s1 = d > 1 ? lat.shape[1] : 1, s2 = d > 2 ? lat.shape[2] : 1;
  const int last = d - 1;
  for (int a = 0; a < s0; ++a) {
    xi[0] = lat.xi[0][a];
    const bool n0 = lat.nyq[0][a];
    for (int b = 0; b < s1; ++b) {
      bool n1 = n0;
      if (d > 1) {
        xi[1] = lat.xi[1][b];
        n1 = n1 || lat.nyq[1][b];
      }
      for (int c = 0; c < s2; ++c) {
        bool n2 = n1;
        if (d > 2) {
          xi[2] = lat.xi[2][c];
          n2 = n2 || lat.nyq[2][c];
        }
        const int li = last == 0 ? a : (last == 1 ? b : c);
        fn(flat, static_cast<const double*>(xi), n2, lat.weight(static_cast<std::size_t>(li)));
        ++flat;
      }
    }
  }
}

}  // namespace kslab::spectral
