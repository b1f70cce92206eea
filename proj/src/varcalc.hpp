// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>

#include "expr.hpp"

namespace nlse {

struct ModelSpec;

// Field a functional derivative is taken against. DSx/DSy treat b = d_a S as
// the independent field (so S-slots with a derivative along that axis drop
// one order); this is what defines gauge generators and current defects.
enum class Target { Rho, S, DSx, DSy };

// delta I / delta target for I = integral of `density`:
//   sum over slots (-1)^|I| D_I [ d density / d (D_I target) ]
// with |I| <= 2. Tables must hold every slot the density references.
RealField euler_lagrange(const ExprPtr& density, Target t, const SlotTables& tables);
RealField euler_lagrange(const ExprPtr& density, Target t, const HydroFields& h);

// Independent central-difference oracle for the same functional derivative.
// Perturbs the target site-by-site with spectral delta columns so the
// induced derivative-slot shifts are exactly what the grid's deriv() sees.
// eps is relative to the target's scale and must lie in [1e-8, 1e-4].
// Site batches run across GAUGE_NLSE_THREADS threads (0/unset: sequential)
// with disjoint writes — results are bitwise independent of the thread count.
RealField fd_oracle(const ExprPtr& density, Target t, const HydroFields& h,
                    double eps = 1e-6);

// Max |curl| of a vector field (2D); the obstruction to writing it as a
// gradient. The argument is F/rho for gauge-existence checks.
double check_curl_condition(const std::array<RealField, 2>& v);

// Same obstruction for a model's drift current: curl of (mass/rho) F, with F
// taken variationally for canonical models. 1D is vacuously zero.
struct RotCheck {
  double residual = 0.0;
  bool vacuous = false;  // true on 1D grids
};
RotCheck check_rot_condition(const ModelSpec& m, const HydroFields& h);

// Does the transformed nonlinearity depend on the transformed phase? Probed
// by re-evaluating under a smooth deterministic phase perturbation.
struct CanonicityCheck {
  bool canonical = false;
  std::size_t witness_site = 0;  // site of strongest phase dependence
  double max_dependence = 0.0;
};
CanonicityCheck check_canonicity_transformed(const ModelSpec& m, const HydroFields& h);

}  // namespace nlse
