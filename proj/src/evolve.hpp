// SPDX-License-Identifier: Apache-2.0
//
// Time integration: Strang splitting with an exact spectral kinetic flow and
// a classical RK4 stage for the pointwise nonlinear flow. Phase-derivative
// data is rebuilt bilinearly from psi at every stage; the phase itself is
// never unwrapped while stepping.
#pragma once

#include <vector>

#include "grid.hpp"
#include "model.hpp"

namespace nlse {

// Which equation of motion drives the state: the original one (real and
// imaginary nonlinearities) or the transformed one (real only).
enum class Which { Original, Transformed };

struct EvolveConfig {
  double T = 1.0;
  double dt = 1e-3;
  int sample_every = 0;       // record every k-th step; 0 keeps ends only
  double rho_min_rel = 1e-12; // density floor relative to max(rho)
};

struct Sample {
  double t = 0.0;
  ComplexField psi;
};

struct EvolveResult {
  std::vector<Sample> samples;  // always includes t = 0 and t = T
  int steps = 0;
};

// One Strang step of size dt, in place. Throws ErrorCode::Runtime on node
// formation (when the model reads phase derivatives) or loss of positivity.
void step(ComplexField& psi, const ModelSpec& m, Which which, double dt,
          double rho_min_rel);

// Integrates from t = 0 to t = T. T must be an integer number of steps of dt
// (within 1e-9 relative). Runtime failures are annotated with the time they
// occurred at.
EvolveResult run(const ComplexField& init, const ModelSpec& m, Which which,
                 const EvolveConfig& cfg);

}  // namespace nlse
