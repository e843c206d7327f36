#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "kslab/grid.hpp"

namespace kslab::spectral {

using cplx = std::complex<double>;

void* fft_alloc(std::size_t bytes);
void fft_free(void* p) noexcept;

template <class T>
struct FftAllocator {
  using value_type = T;
  FftAllocator() = default;
  template <class U>
  FftAllocator(const FftAllocator<U>&) {}
  T* allocate(std::size_t n) { return static_cast<T*>(fft_alloc(n * sizeof(T))); }
  void deallocate(T* p, std::size_t) noexcept { fft_free(p); }
  template <class U>
  bool operator==(const FftAllocator<U>&) const { return true; }
  template <class U>
  bool operator!=(const FftAllocator<U>&) const { return false; }
};

using RealVec = std::vector<double, FftAllocator<double>>;
using CplxVec = std::vector<cplx, FftAllocator<cplx>>;

enum class FieldKind { scalar, vector };

// Real-valued periodic field with lazily paired sample / coefficient arrays.
// Coefficients are Fourier-series coefficients: f(x) = sum_k c_k exp(i xi_k . x).
// Copies share storage; a Field is never mutated after construction.
class Field {
 public:
  Field() = default;

  static Field zeros(const GridSpec& g, FieldKind kind = FieldKind::scalar);
  static Field from_physical(const GridSpec& g, std::vector<RealVec> comps,
                             FieldKind kind = FieldKind::scalar);
  static Field from_spectral(const GridSpec& g, std::vector<CplxVec> comps,
                             FieldKind kind = FieldKind::scalar);
  static Field scalar_physical(const GridSpec& g, RealVec samples);
  static Field scalar_spectral(const GridSpec& g, CplxVec coeffs);
  static Field stack(const std::vector<Field>& scalars);

  bool empty() const { return !s_; }
  const GridSpec& grid() const;
  FieldKind kind() const;
  int components() const;
  bool has_physical() const;
  bool has_spectral() const;

  const RealVec& physical(int comp = 0) const;
  const CplxVec& spectral(int comp = 0) const;
  Field component(int comp) const;

  // Frees the sample cache; samples are recomputed on demand. Not safe while
  // another thread reads the same field.
  void drop_physical() const;

 private:
  struct Storage;
  std::shared_ptr<Storage> s_;
};

namespace fft {
// Normalized forward transform: out = (1/N) sum_x f(x) exp(-i xi.x).
void forward(const GridSpec& g, const double* in, cplx* out);
// Synthesis: out(x) = sum_k c_k exp(i xi.x). The input array is not modified.
void backward(const GridSpec& g, const cplx* in, double* out);
}  // namespace fft

}  // namespace kslab::spectral
