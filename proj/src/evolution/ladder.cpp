#include <algorithm>
#include <cmath>
#include <string>

#include "kslab/errors.hpp"
#include "kslab/evolution.hpp"

namespace kslab::evolution {

using spectral::add;
using spectral::gradient;
using spectral::divergence;
using spectral::linear_combination;

namespace {

Trace sum_traces(const Trace& a, const Trace& b) {
  Trace out;
  out.times = a.times;
  for (std::size_t i = 0; i < a.size(); ++i) out.frames.push_back(add(a.frames[i], b.frames[i]));
  return out;
}

Trace gradient_trace(const Trace& tr) {
  Trace out;
  out.times = tr.times;
  for (const auto& f : tr.frames) out.frames.push_back(gradient(f));
  return out;
}

void drop(Trace& tr) {
  for (auto& f : tr.frames) f.drop_physical();
}

// (t - (1 - e^{-t k2}) / k2) / k2, equal to t^2/2 at k2 = 0.
double second_duhamel_symbol(double t, double k2) {
  const double z = t * k2;
  if (z < 1e-3) return t * t * (0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0);
  return (t + std::expm1(-z) / k2) / k2;
}

double sup_l2(const Trace& tr) {
  double m = 0.0;
  for (const auto& f : tr.frames) m = std::max(m, spectral::l2_spectral(f));
  return m;
}

double sup_l2_diff(const Trace& a, const Trace& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, spectral::l2_spectral(spectral::sub(a.frames[i], b.frames[i])));
  return m;
}

}  // namespace

Trace PerturbationLadder::U2() const { return sum_traces(U21, U22); }

Trace PerturbationLadder::u() const {
  Trace out;
  out.times = times;
  for (std::size_t i = 0; i < times.size(); ++i)
    out.frames.push_back(linear_combination({1.0, 1.0, 1.0, 1.0}, {U1.frames[i], U21.frames[i], U22.frames[i], U3.frames[i]}));
  return out;
}

Trace PerturbationLadder::v() const {
  Trace out;
  out.times = times;
  for (std::size_t i = 0; i < times.size(); ++i)
    out.frames.push_back(linear_combination({1.0, 1.0, 1.0}, {V1.frames[i], V2.frames[i], V3.frames[i]}));
  return out;
}

void build_U1_V1(const construction::DataPair& data, const TimeGrid& tg, PerturbationLadder& L) {
  tg.validate();
  L.times = tg.nodes();
  L.U1 = Trace{L.times, {}};
  L.V1 = Trace{L.times, {}};
  for (double t : L.times) {
    L.U1.frames.push_back(spectral::heat_propagate(data.u0, t));
    L.V1.frames.push_back(add(data.v0, gradient(duhamel_const_source(data.u0, t))));
  }
}

void build_U2(const construction::DataPair& data, const TimeGrid& tg, const LadderOptions& opt, PerturbationLadder& L) {
  if (L.U1.empty()) build_U1_V1(data, tg, L);
  const double fr = opt.dealias_fraction;
  const Field g = divergence(product(data.u0, data.v0, fr));
  L.U21 = Trace{L.times, {}};
  Trace src{L.times, {}};
  std::vector<Field> v21;
  for (std::size_t i = 0; i < L.times.size(); ++i) {
    const double t = L.times[i];
    L.U21.frames.push_back(duhamel_const_source(g, t));
    v21.push_back(gradient(spectral::apply_radial(g, [t](double r) { return second_duhamel_symbol(t, r * r); })));
    const Field a = product(L.U1.frames[i], spectral::sub(L.V1.frames[i], data.v0), fr);
    const Field b = product(spectral::sub(L.U1.frames[i], data.u0), data.v0, fr);
    src.frames.push_back(divergence(add(a, b)));
  }
  Trace w22;
  L.U22 = duhamel_cumulative_with_integral(src, w22);
  L.V2 = Trace{L.times, {}};
  for (std::size_t i = 0; i < L.times.size(); ++i) L.V2.frames.push_back(add(v21[i], gradient(w22.frames[i])));
  drop(L.U1);
  drop(L.V1);
  drop(L.U21);
  drop(L.U22);
  drop(L.V2);
}

Field ladder_source(const PerturbationLadder& L, std::size_t i, double fr) {
  const Field U2 = add(L.U21.frames[i], L.U22.frames[i]);
  const Field Usum = add(L.U1.frames[i], U2);
  const Field Vsum = add(L.V1.frames[i], L.V2.frames[i]);
  const Field& U3 = L.U3.frames[i];
  const Field& V3 = L.V3.frames[i];
  return linear_combination({1.0, 1.0, 1.0, 1.0}, {product(U3, add(V3, Vsum), fr), product(Usum, V3, fr),
                                                   product(L.U1.frames[i], L.V2.frames[i], fr), product(U2, Vsum, fr)});
}

void build_U3(const construction::DataPair& data, const TimeGrid& tg, const LadderOptions& opt, PerturbationLadder& L) {
  if (L.U21.empty()) build_U2(data, tg, opt, L);
  const auto& g = data.u0.grid();
  L.U3 = Trace{L.times, std::vector<Field>(L.times.size(), Field::zeros(g))};
  L.V3 = Trace{L.times, std::vector<Field>(L.times.size(), Field::zeros(g, spectral::FieldKind::vector))};
  double prev = spectral::kInf;
  for (int it = 1; it <= opt.picard_max_iters; ++it) {
    Trace src{L.times, {}};
    for (std::size_t i = 0; i < L.times.size(); ++i) src.frames.push_back(divergence(ladder_source(L, i, opt.dealias_fraction)));
    Trace w3;
    Trace U3 = duhamel_cumulative_with_integral(src, w3);
    src.frames.clear();
    drop(L.U1);
    drop(L.V1);
    drop(L.V2);
    const double scale = sup_l2(U3);
    const double diff = sup_l2_diff(U3, L.U3);
    const double rel = scale > 0.0 ? diff / scale : diff;
    L.U3 = std::move(U3);
    drop(L.U3);
    L.V3 = gradient_trace(w3);
    w3.frames.clear();
    drop(L.V3);
    L.picard_iterations = it;
    L.picard_residual = rel;
    if (!std::isfinite(rel))
      throw NonContraction("Picard iteration produced non-finite iterates at step " + std::to_string(it));
    if (rel <= opt.picard_tol) return;
    if (it > 3 && rel > prev && rel > 1e-2)
      throw NonContraction("Picard iteration diverges: relative update " + std::to_string(rel) + " at step " +
                           std::to_string(it));
    prev = rel;
  }
  throw NonContraction("Picard iteration did not reach tolerance after " + std::to_string(opt.picard_max_iters) +
                       " steps (last relative update " + std::to_string(L.picard_residual) + ")");
}

PerturbationLadder build_ladder(const construction::DataPair& data, const TimeGrid& tg, const LadderOptions& opt) {
  PerturbationLadder L;
  build_U1_V1(data, tg, L);
  build_U2(data, tg, opt, L);
  build_U3(data, tg, opt, L);
  return L;
}

}  // namespace kslab::evolution
