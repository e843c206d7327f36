#include "kslab/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <new>
#include <string>

#include "kslab/errors.hpp"

namespace kslab::spectral {

void* fft_alloc(std::size_t bytes) {
  void* p = fftw_malloc(bytes == 0 ? 1 : bytes);
  if (!p) throw std::bad_alloc();
  return p;
}

void fft_free(void* p) noexcept { fftw_free(p); }

namespace fft {
namespace {

struct Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

const Plans& plans_for(const GridSpec& g) {
  static std::map<std::vector<int>, Plans> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find(g.n);
  if (it != cache.end()) return it->second;
  RealVec r(g.points());
  CplxVec c(g.spectral_points());
  Plans p;
  p.fwd = fftw_plan_dft_r2c(g.d, g.n.data(), r.data(), reinterpret_cast<fftw_complex*>(c.data()),
                            FFTW_ESTIMATE);
  p.bwd = fftw_plan_dft_c2r(g.d, g.n.data(), reinterpret_cast<fftw_complex*>(c.data()), r.data(),
                            FFTW_ESTIMATE);
  if (!p.fwd || !p.bwd) throw InvalidGrid("FFTW could not plan the transform");
  return cache.emplace(g.n, p).first->second;
}

}  // namespace

void forward(const GridSpec& g, const double* in, cplx* out) {
  const Plans& p = plans_for(g);
  fftw_execute_dft_r2c(p.fwd, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  const double scale = 1.0 / static_cast<double>(g.points());
  const std::size_t ns = g.spectral_points();
  for (std::size_t i = 0; i < ns; ++i) out[i] *= scale;
}

void backward(const GridSpec& g, const cplx* in, double* out) {
  const Plans& p = plans_for(g);
  CplxVec scratch(in, in + g.spectral_points());
  fftw_execute_dft_c2r(p.bwd, reinterpret_cast<fftw_complex*>(scratch.data()), out);
}

}  // namespace fft

struct Field::Storage {
  GridSpec grid;
  FieldKind kind = FieldKind::scalar;
  int ncomp = 1;
  mutable std::mutex mu;
  mutable std::vector<std::optional<RealVec>> phys;
  mutable std::vector<std::optional<CplxVec>> spec;
};

namespace {

int components_for(const GridSpec& g, FieldKind kind) { return kind == FieldKind::vector ? g.d : 1; }

void check_count(const GridSpec& g, FieldKind kind, std::size_t got) {
  if (static_cast<int>(got) != components_for(g, kind))
    throw InvalidGrid("field component count does not match its kind");
}

}  // namespace

Field Field::zeros(const GridSpec& g, FieldKind kind) {
  std::vector<CplxVec> comps(static_cast<std::size_t>(components_for(g, kind)),
                             CplxVec(g.spectral_points(), cplx(0.0, 0.0)));
  return from_spectral(g, std::move(comps), kind);
}

Field Field::from_physical(const GridSpec& g, std::vector<RealVec> comps, FieldKind kind) {
  g.validate();
  check_count(g, kind, comps.size());
  Field f;
  f.s_ = std::make_shared<Storage>();
  f.s_->grid = g;
  f.s_->kind = kind;
  f.s_->ncomp = static_cast<int>(comps.size());
  f.s_->phys.resize(comps.size());
  f.s_->spec.resize(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (comps[i].size() != g.points()) throw InvalidGrid("sample array has the wrong length");
    f.s_->phys[i] = std::move(comps[i]);
  }
  return f;
}

Field Field::from_spectral(const GridSpec& g, std::vector<CplxVec> comps, FieldKind kind) {
  g.validate();
  check_count(g, kind, comps.size());
  Field f;
  f.s_ = std::make_shared<Storage>();
  f.s_->grid = g;
  f.s_->kind = kind;
  f.s_->ncomp = static_cast<int>(comps.size());
  f.s_->phys.resize(comps.size());
  f.s_->spec.resize(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (comps[i].size() != g.spectral_points()) throw InvalidGrid("coefficient array has the wrong length");
    f.s_->spec[i] = std::move(comps[i]);
  }
  return f;
}

Field Field::scalar_physical(const GridSpec& g, RealVec samples) {
  std::vector<RealVec> c;
  c.push_back(std::move(samples));
  return from_physical(g, std::move(c));
}

Field Field::scalar_spectral(const GridSpec& g, CplxVec coeffs) {
  std::vector<CplxVec> c;
  c.push_back(std::move(coeffs));
  return from_spectral(g, std::move(c));
}

Field Field::stack(const std::vector<Field>& scalars) {
  if (scalars.empty()) throw InvalidGrid("cannot stack zero fields");
  const GridSpec& g = scalars.front().grid();
  std::vector<CplxVec> comps;
  for (const auto& s : scalars) {
    if (s.grid() != g) throw InvalidGrid("stacked fields live on different grids");
    comps.push_back(s.spectral(0));
  }
  return from_spectral(g, std::move(comps), FieldKind::vector);
}

const GridSpec& Field::grid() const { return s_->grid; }
FieldKind Field::kind() const { return s_->kind; }
int Field::components() const { return s_->ncomp; }

bool Field::has_physical() const {
  std::lock_guard<std::mutex> lock(s_->mu);
  return s_->phys[0].has_value();
}

bool Field::has_spectral() const {
  std::lock_guard<std::mutex> lock(s_->mu);
  return s_->spec[0].has_value();
}

const RealVec& Field::physical(int comp) const {
  std::lock_guard<std::mutex> lock(s_->mu);
  auto& slot = s_->phys.at(static_cast<std::size_t>(comp));
  if (!slot) {
    RealVec out(s_->grid.points());
    fft::backward(s_->grid, s_->spec[static_cast<std::size_t>(comp)]->data(), out.data());
    slot = std::move(out);
  }
  return *slot;
}

const CplxVec& Field::spectral(int comp) const {
  std::lock_guard<std::mutex> lock(s_->mu);
  auto& slot = s_->spec.at(static_cast<std::size_t>(comp));
  if (!slot) {
    CplxVec out(s_->grid.spectral_points());
    fft::forward(s_->grid, s_->phys[static_cast<std::size_t>(comp)]->data(), out.data());
    slot = std::move(out);
  }
  return *slot;
}

Field Field::component(int comp) const {
  if (comp < 0 || comp >= s_->ncomp) throw InvalidGrid("component index out of range");
  if (s_->ncomp == 1) return *this;
  return scalar_spectral(s_->grid, spectral(comp));
}

void Field::drop_physical() const {
  std::lock_guard<std::mutex> lock(s_->mu);
  for (std::size_t i = 0; i < s_->phys.size(); ++i) {
    if (s_->spec[i]) s_->phys[i].reset();
  }
}

}  // namespace kslab::spectral
