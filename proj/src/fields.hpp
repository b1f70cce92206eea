// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

#include "grid.hpp"

namespace nlse {

// Hydrodynamic representation: psi = sqrt(rho) * exp(i S / hbar).
// S is stored as a continuous representative along the unwrap sweep; crossing
// the box seam along axis a adds 2*pi*hbar*winding[a]. Spectral derivatives
// of S must peel off that secular ramp first — use grad_S / deriv2_S, never
// deriv() on S directly when winding can be nonzero.
struct HydroFields {
  RealField rho;
  RealField S;
  std::array<int, 2> winding{0, 0};
  double hbar = 1.0;
  double rho_min = 0.0;  // absolute density floor fixed at decomposition time
};

// Splits psi into (rho, S, winding). The phase unwraps from site 0 along x
// (row 0), then along y within each column; S(site 0) is normalized into
// [0, 2*pi*hbar). Any site with rho < rho_min_rel * max(rho) aborts — the
// unwrap is meaningless through a near-node.
HydroFields decompose(const ComplexField& psi, double hbar,
                      double rho_min_rel = 1e-12);

ComplexField compose(const HydroFields& h);

// Winding-aware spectral derivatives of the phase.
RealField grad_S(const HydroFields& h, int axis);
RealField deriv2_S(const HydroFields& h, int axis);

// Printed quantum-potential display:
//   -(kQuantumPotentialFactor * hbar^2 / m) * laplacian(sqrt(rho)) / sqrt(rho).
// The factor is exposed on purpose; this operator is informational and never
// feeds the dynamics.
inline constexpr double kQuantumPotentialFactor = 0.25;
RealField quantum_potential(const RealField& rho, double hbar, double mass);

}  // namespace nlse
