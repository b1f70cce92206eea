// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "expr.hpp"
#include "fields.hpp"
#include "grid.hpp"

namespace nlse {

// Catalog of nonlinearities with hard-coded closed forms, plus a Generic kind
// driven by user expressions. Catalog evaluation deliberately does not go
// through the expression engine — the two paths cross-validate each other.
enum class ModelKind {
  Free,
  LogDriftCubic,
  ChenLeeLiu,
  JackiwAglietti,
  EIP,
  DGSub,
  DGGeneral,
  DerivFamily,
  Eckhaus,
  Generic,
};

struct GenericSpec {
  bool canonical = true;
  ExprPtr potential;                // canonical branch: U(rho, grad S, ...)
  ExprPtr W;                        // noncanonical branch: real part
  std::array<ExprPtr, 2> F{};      // noncanonical branch: current defect per axis
  ExprPtr sigma_rho;                // optional pointwise gauge generator sigma(rho)
};

struct ModelSpec {
  ModelKind kind = ModelKind::Free;
  double hbar = 1.0;
  double mass = 1.0;
  double alpha = 0.0;               // ChenLeeLiu, DGSub, DerivFamily, Eckhaus
  double beta = 0.0;                // LogDriftCubic, DGSub, Eckhaus
  double lambda = 0.0;              // JackiwAglietti
  double kappa = 0.0;               // EIP
  double q = 0.0;                   // DerivFamily interpolation parameter
  double D = 0.0, Dprime = 0.0;     // DGGeneral diffusion/strength
  std::array<double, 2> alpha_vec{0.0, 0.0};  // LogDriftCubic drift vector
  std::array<double, 5> c{};        // DGGeneral coefficients
  std::optional<GenericSpec> generic;
};

// Structural validation; throws Model errors (bad constants, generic
// potentials with a bare phase, missing branches).
void validate_model(const ModelSpec& m);

// Does the original presentation derive from a potential density?
bool is_canonical(const ModelSpec& m);

// Grid dimensionalities the model's dynamics support.
std::vector<int> supported_dims(const ModelSpec& m);
std::string kind_name(ModelKind k);

// ---------------------------------------------------------------------------
// Pointwise field bundle consumed by the closed-form kernels. Only the
// members flagged by `SlotNeeds` are filled by the builders.
struct SlotNeeds {
  bool drho = false;     // first density derivatives
  bool lap_rho = false;  // density laplacian
  bool dS = false;       // phase gradient
  bool lap_S = false;    // phase laplacian
  SlotNeeds operator|(const SlotNeeds& o) const {
    return {drho || o.drho, lap_rho || o.lap_rho, dS || o.dS, lap_S || o.lap_S};
  }
};

struct HydroSlots {
  const Grid* grid = nullptr;
  RealField rho;
  std::array<RealField, 2> drho{};
  RealField lap_rho;
  std::array<RealField, 2> dS{};
  RealField lap_S;
};

SlotNeeds needs_original(const ModelSpec& m);
SlotNeeds needs_transformed(const ModelSpec& m);

// Builders. The psi-based builder derives phase slots bilinearly
// (grad S = hbar * Im(psi* grad psi) / rho) and never unwraps; it requires
// rho >= floor_rel * max(rho) whenever phase slots are requested.
HydroSlots slots_from_hydro(const HydroFields& h, const SlotNeeds& needs);
HydroSlots slots_from_psi(const ComplexField& psi, double hbar,
                          const SlotNeeds& needs, double floor_rel);

// ---------------------------------------------------------------------------
// Closed-form kernels over a filled bundle.
RealField eval_W(const ModelSpec& m, const HydroSlots& s);
RealField eval_Wcal(const ModelSpec& m, const HydroSlots& s);
std::array<RealField, 2> eval_F(const ModelSpec& m, const HydroSlots& s);
RealField eval_U(const ModelSpec& m, const HydroSlots& s);  // canonical only

// Transformed nonlinearity evaluated on the new pair (rho, Scal): the bundle's
// dS/lap_S members hold Scal derivatives.
RealField eval_Wt(const ModelSpec& m, const HydroSlots& s);

// Convenience wrappers on the hydro representation.
struct Nonlinearity {
  RealField W;
  RealField Wcal;
};
Nonlinearity eval_nonlinearity(const ModelSpec& m, const HydroFields& h);
RealField potential_density(const ModelSpec& m, const HydroFields& h);

// Some transformed dynamics again derive from a closed-form potential
// density evaluated on (rho, grad Scal). These helpers expose the cases with
// a known closed form; the second throws a Model error otherwise.
bool has_transformed_potential(const ModelSpec& m);
RealField transformed_potential_density(const ModelSpec& m, const HydroFields& h);
std::array<RealField, 2> current_F(const ModelSpec& m, const HydroFields& h);
// Physical current rho grad S / mass - F.
std::array<RealField, 2> model_current(const ModelSpec& m, const HydroFields& h);

// Canonical potential as an expression tree (variational cross-checks, the
// rot condition, stress tensor). dims selects the 1D or 2D form; throws for
// noncanonical kinds.
ExprPtr u_expression(const ModelSpec& m, int dims);

}  // namespace nlse
