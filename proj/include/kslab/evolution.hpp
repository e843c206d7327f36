#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kslab/construction.hpp"
#include "kslab/spectral.hpp"

namespace kslab::evolution {

using spectral::Field;
using spectral::Trace;

struct TimeGrid {
  double T_final = 0.0;
  int steps = 16;
  double epsilon = 1.0 / 16.0;
  // T_final = epsilon 2^{-2m}
  static TimeGrid for_experiment(double epsilon, int m, int steps);
  std::vector<double> nodes() const;
  void validate() const;
};

enum class Integrator { if_rk2, if_rk4, etd2 };
Integrator parse_integrator(const std::string& name);
std::string to_string(Integrator it);

enum class QuadratureRule { gauss_legendre, simpson, trapezoid };

struct SolverConfig {
  double dealias_fraction = 2.0 / 3.0;
  Integrator integrator = Integrator::if_rk4;
  int quadrature_nodes = 64;
  int steps = 0;          // 0 selects the step-count rule h * kmax^2 <= 0.5
  int output_stride = 1;  // store every n-th step
  double blowup_guard = 1e100;
};

// Dealiased pointwise product (inputs and output truncated per axis).
Field product(const Field& a, const Field& b, double dealias_fraction);

Field duhamel_const_source(const Field& g, double t);
// int_0^t e^{(t-s)Delta} source(s) ds by a node rule over [0, t]. The source is
// a callback so node placement is free; each node uses the exact heat multiplier.
Field duhamel_quadrature(const std::function<Field(double)>& source, double t, int nodes,
                         QuadratureRule rule = QuadratureRule::gauss_legendre);
// Same integral from samples on a time grid (trapezoid or Simpson on the samples).
Field duhamel_from_trace(const Trace& source, QuadratureRule rule = QuadratureRule::trapezoid);
// Cumulative Duhamel integral at every node of the trace, exact for sources
// linear between nodes.
Trace duhamel_cumulative(const Trace& source);
// As above, also returning the running time integral of the solution.
Trace duhamel_cumulative_with_integral(const Trace& source, Trace& integral);
// Cumulative time integral of a trace by the trapezoid rule.
Trace integrate_cumulative(const Trace& tr);

struct PerturbationLadder {
  std::vector<double> times;
  Trace U1, U21, U22, U3;
  Trace V1, V2, V3;
  int picard_iterations = 0;
  double picard_residual = 0.0;
  Trace U2() const;
  Trace u() const;
  Trace v() const;
};

struct LadderOptions {
  double dealias_fraction = 2.0 / 3.0;
  double picard_tol = 1e-10;
  int picard_max_iters = 60;
};

void build_U1_V1(const construction::DataPair& data, const TimeGrid& tg, PerturbationLadder& L);
void build_U2(const construction::DataPair& data, const TimeGrid& tg, const LadderOptions& opt, PerturbationLadder& L);
void build_U3(const construction::DataPair& data, const TimeGrid& tg, const LadderOptions& opt, PerturbationLadder& L);
PerturbationLadder build_ladder(const construction::DataPair& data, const TimeGrid& tg, const LadderOptions& opt);
// F = U3V3 + U3(V1+V2) + V3(U1+U2) + U1V2 + U2(V1+V2) at node i.
Field ladder_source(const PerturbationLadder& L, std::size_t i, double dealias_fraction);

struct SolutionTrace {
  Trace u, v;
  std::vector<double> mean_u;
  std::vector<double> W_residual;  // |v - v0 - grad int u| / max |v - v0| from an independent quadrature
  double max_mean_drift = 0.0;
  int steps = 0;
  double h = 0.0;
};

// Optional forcing added to the u equation.
using Forcing = std::function<Field(double t)>;

SolutionTrace solve_chemotaxis(const Field& u0, const Field& v0, double T, const SolverConfig& cfg,
                               const Forcing& forcing = nullptr);
int default_steps(const Field& u0, double T);

struct LedgerRow {
  std::string id;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio() const { return lhs > 0.0 ? rhs / lhs : spectral::kInf; }
};

struct NormLedger {
  double p0 = 3.5, q0 = 4.0;
  double X_T = 0.0, Y_T = 0.0;
  std::vector<LedgerRow> rows;
};

double p0_for(int d);
NormLedger ladder_norm_ledger(const PerturbationLadder& L, const construction::DataPair& data,
                              const spectral::CutoffProfile& cutoffs, double dealias_fraction);

}  // namespace kslab::evolution
