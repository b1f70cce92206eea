// SPDX-License-Identifier: Apache-2.0
//
// Phase-shift transformation that removes the imaginary part of the
// nonlinearity. The generator sigma obeys grad(sigma) = -(m/rho) F; on a
// torus it splits into a periodic part plus linear ramps kappa_a x_a whose
// slopes must land on the momentum lattice for exp(i sigma/hbar) to be
// single-valued.
#pragma once

#include <array>

#include "fields.hpp"
#include "model.hpp"

namespace nlse {

struct GaugeGenerator {
  RealField periodic;         // sigma minus its linear ramps, zero at site 0
  std::array<double, 2> kappa{0.0, 0.0};  // ramp slope per axis
  std::array<bool, 2> compatible{true, true};  // kappa_a L_a on the 2 pi hbar lattice
  double hbar = 1.0;

  bool all_compatible(int dims) const {
    for (int a = 0; a < dims; ++a) {
      if (!compatible[a]) return false;
    }
    return true;
  }
};

// Builds the generator for the given model and state. Fails (ErrorCode::Gauge)
// when the model has no phase-shift realization on this grid (e.g. a
// two-dimensional current whose rotational part does not vanish).
GaugeGenerator compute_sigma(const ModelSpec& m, const HydroFields& h);

// Evaluates sigma pointwise, ramps included.
RealField sigma_values(const GaugeGenerator& gen, const Grid& g);

// Multiplies psi by exp(i sigma / hbar). Fails (ErrorCode::Gauge) when a ramp
// slope is off the momentum lattice, naming the offending axis and the
// nearest admissible slope.
ComplexField apply_gauge(const ComplexField& psi, const GaugeGenerator& gen);

// Transformed nonlinearity acting on the new wavefunction's hydrodynamic
// fields (rho is unchanged; the phase has absorbed sigma).
RealField transformed_nonlinearity(const ModelSpec& m, const HydroFields& h_new);

// Same assembly for generic models from raw fields: the density plus the
// first derivatives of the transformed phase (one per axis). This is the
// entry point evolution uses, where the phase is never unwrapped.
RealField generic_transformed_fields(const ModelSpec& m, const RealField& rho,
                                     const std::array<RealField, 2>& dscal);

// hbar/m Im(conj(phi) grad phi): the current carried by a state with no
// explicit drift term.
std::array<RealField, 2> bilinear_current(const ComplexField& phi, double hbar,
                                          double mass);

}  // namespace nlse
