#include <algorithm>
#include <cmath>
#include <set>

#include "kslab/errors.hpp"
#include "kslab/evolution.hpp"

namespace kslab::evolution {

using spectral::BesovParams;
using spectral::BlockNormTrace;

double p0_for(int d) { return d == 2 ? 3.5 : 2.0 * d - 1.0; }

namespace {

Trace product_trace(const Trace& a, const Trace& b, double fr) {
  Trace out;
  out.times = a.times;
  for (std::size_t i = 0; i < a.size(); ++i) out.frames.push_back(product(a.frames[i], b.frames[i], fr));
  return out;
}

Trace plus(const Trace& a, const Trace& b) {
  Trace out;
  out.times = a.times;
  for (std::size_t i = 0; i < a.size(); ++i) out.frames.push_back(spectral::add(a.frames[i], b.frames[i]));
  return out;
}

class Table {
 public:
  Table(const Trace& tr, const spectral::CutoffProfile& cutoffs, const std::vector<int>& shells, double p0,
        double q0)
      : bt_(spectral::block_norm_trace(tr, cutoffs, shells, {p0, q0})) {}
  double cl(double rho, double s, double p) const { return spectral::chemin_lerner_from_table(bt_, rho, BesovParams{s, p, 1.0}); }

 private:
  BlockNormTrace bt_;
};

}  // namespace

NormLedger ladder_norm_ledger(const PerturbationLadder& L, const construction::DataPair& data,
                              const spectral::CutoffProfile& cutoffs, double fr) {
  if (L.U3.empty()) throw EmptyTrace("ladder has no U3 rung");
  const int d = data.u0.grid().d;
  NormLedger led;
  led.p0 = p0_for(d);
  led.q0 = 2.0 * d;
  const double p0 = led.p0, q0 = led.q0;
  const double a = d / p0, b = d / q0;

  const Trace U2 = L.U2();
  const Trace V12 = plus(L.V1, L.V2);
  const Trace U12 = plus(L.U1, U2);
  const Trace F = [&] {
    Trace f;
    f.times = L.times;
    for (std::size_t i = 0; i < L.times.size(); ++i) f.frames.push_back(ladder_source(L, i, fr));
    return f;
  }();
  const Trace U3V3 = product_trace(L.U3, L.V3, fr);
  const Trace U2V12 = product_trace(U2, V12, fr);
  const Trace U1V2 = product_trace(L.U1, L.V2, fr);
  const Trace U3V12 = product_trace(L.U3, V12, fr);
  const Trace U12V3 = product_trace(U12, L.V3, fr);
  const Trace U1V1 = product_trace(L.U1, L.V1, fr);

  std::set<int> all;
  for (const Trace* tr : {&L.U1, &U2, &L.U3, &L.V1, &L.V2, &L.V3, &F, &U1V1})
    for (const auto& f : tr->frames)
      for (int j : spectral::active_shells(f, 1e-12)) all.insert(j);
  const std::vector<int> shells(all.begin(), all.end());
  auto table = [&](const Trace& tr) { return Table(tr, cutoffs, shells, p0, q0); };

  const Table tU1 = table(L.U1), tU2 = table(U2), tU3 = table(L.U3);
  const Table tV1 = table(L.V1), tV2 = table(L.V2), tV3 = table(L.V3);
  const Table tV12 = table(V12), tU12 = table(U12), tF = table(F);
  const Table tU3V3 = table(U3V3), tU2V12 = table(U2V12), tU1V2 = table(U1V2);
  const Table tU3V12 = table(U3V12), tU12V3 = table(U12V3), tU1V1 = table(U1V1);

  const double inf = spectral::kInf;
  led.X_T = tU3.cl(inf, a - 2.0, p0) + tU3.cl(1.0, a, p0);
  led.Y_T = tV3.cl(inf, a - 1.0, p0);
  const double T = L.times.back();
  auto& R = led.rows;
  R.push_back({"y", led.Y_T, led.X_T});
  R.push_back({"l1", led.X_T, tF.cl(1.0, a - 1.0, p0)});
  R.push_back({"j1", tU3V3.cl(1.0, a - 1.0, p0), tU3.cl(1.0, a, p0) * led.Y_T});
  R.push_back({"j2", tU2V12.cl(1.0, a - 1.0, p0), tU2.cl(1.0, a, p0) * tV12.cl(inf, a - 1.0, p0)});
  R.push_back({"j3", tU1V2.cl(1.0, a - 1.0, p0), tU1.cl(1.0, a, p0) * tV2.cl(inf, a - 1.0, p0)});
  R.push_back({"j4", tU3V12.cl(1.0, a - 1.0, p0), led.X_T * tV12.cl(2.0, b, q0)});
  R.push_back({"j5", tU12V3.cl(1.0, a - 1.0, p0), led.X_T * tU12.cl(1.0, b, q0)});
  const double u0n = spectral::besov_norm_on(data.u0, BesovParams{a - 2.0, p0, 1.0}, cutoffs, shells);
  const double v0n = spectral::besov_norm_on(data.v0, BesovParams{a - 1.0, p0, 1.0}, cutoffs, shells);
  R.push_back({"u1", tU1.cl(inf, a - 2.0, p0) + tU1.cl(1.0, a, p0), u0n});
  R.push_back({"v1", tV1.cl(inf, a - 1.0, p0), v0n + tU1.cl(1.0, a, p0)});
  R.push_back({"u2", tU2.cl(inf, a - 2.0, p0), tU1V1.cl(1.0, a - 1.0, p0)});
  R.push_back({"v2", tU2.cl(1.0, b, q0) + tV2.cl(2.0, b, q0),
               tU1V1.cl(1.0, b - 1.0, q0) + std::sqrt(T) * tU1V1.cl(1.0, b, q0)});
  return led;
}

}  // namespace kslab::evolution
