// SPDX-License-Identifier: Apache-2.0
//
// Trajectory bookkeeping: mass / energy / momentum / boost observables,
// continuity and center-of-mass residuals over sampled states, and the
// energy-momentum block whose continuity probes the full nonlinear dynamics.
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "evolve.hpp"
#include "fields.hpp"
#include "model.hpp"

namespace nlse {

// --- single-state observables ----------------------------------------------

double total_mass(const ComplexField& psi);

// hbar * Im integral(psi* d_a psi); axes beyond the grid dimension read 0.
std::array<double, 2> total_momentum(const ComplexField& psi, double hbar);

// (1 / N) * integral(x_a rho) with raw coordinates in [0, L_a).
std::array<double, 2> center_of_mass(const ComplexField& psi);

// integral(hbar^2/2m |grad psi|^2 + potential density) for the selected
// dynamics. Empty when that dynamics has no closed-form potential density.
std::optional<double> total_energy(const ModelSpec& m, Which which,
                                   const ComplexField& psi);

// Boost-generator drift rate, m * integral(F_a), for the original dynamics.
// The transformed dynamics carries no current defect, so its rate is zero.
std::array<double, 2> boost_drift_rate(const ModelSpec& m, Which which,
                                       const ComplexField& psi);

// --- energy-momentum block (canonical original dynamics, 1D) ----------------

// T00: energy density. T0x: momentum density rho * dS. Tx0: energy flux.
// Txx: momentum flux. The fluxes take every time derivative from the
// equation of motion, so d_t T00 + d_x Tx0 and d_t T0x + d_x Txx vanishing
// along a trajectory is a genuine dynamical check, not an identity.
struct Stress1D {
  RealField T00, T0x, Tx0, Txx;
};
Stress1D stress_1d(const ModelSpec& m, const ComplexField& psi);

// --- trajectory table --------------------------------------------------------

struct DiagnosticsRow {
  double t = 0.0;
  double N = 0.0;
  std::optional<double> E;
  std::array<std::optional<double>, 2> P{};
  std::array<std::optional<double>, 2> xc{};
  std::array<std::optional<double>, 2> G{};          // P t - m N xc
  std::optional<double> continuity_residual;         // time-windowed
  std::array<std::optional<double>, 2> ehrenfest{};  // time-windowed
  std::array<std::optional<double>, 2> galilei{};    // m integral(F)
  std::optional<double> T00_int, T0x_int, T0y_int;
  std::optional<double> stress_continuity_residual;  // time-windowed
};

// Column names in the order artifacts print them.
const std::vector<std::string>& diagnostics_columns();

// One row per trajectory sample. Time-windowed entries need five uniformly
// spaced samples centered on the row and stay empty elsewhere (edges, or a
// final sample that closes a partial interval).
std::vector<DiagnosticsRow> compute_diagnostics(const ModelSpec& m, Which which,
                                                const EvolveResult& traj);

}  // namespace nlse
