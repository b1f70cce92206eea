// SPDX-License-Identifier: Apache-2.0
#include "gauge.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "errors.hpp"
#include "expr.hpp"
#include "varcalc.hpp"

namespace nlse {

namespace {

constexpr double kLatticeTol = 1e-9;       // |kappa L / 2 pi hbar - nearest int|
constexpr double kReconstructTol = 1e-8;   // relative residual of grad sigma vs target

double lattice_defect(double kappa, double length, double hbar) {
  const double winding = kappa * length / (2.0 * std::numbers::pi * hbar);
  return std::abs(winding - std::round(winding));
}

double snap_to_lattice(double kappa, double length, double hbar) {
  const double winding = std::round(kappa * length / (2.0 * std::numbers::pi * hbar));
  return 2.0 * std::numbers::pi * hbar * winding / length;
}

// sigma = factor * running integral of f along x (one-dimensional models).
GaugeGenerator from_cumulative(const RealField& f, double factor, double hbar) {
  CumulativeIntegral cum = cumulative_integral(f, 0);
  GaugeGenerator gen;
  gen.hbar = hbar;
  gen.periodic = RealField(*f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) gen.periodic[i] = factor * cum.periodic[i];
  gen.kappa[0] = factor * cum.slope;
  gen.compatible[0] = lattice_defect(gen.kappa[0], f.grid->length(0), hbar) <= kLatticeTol;
  return gen;
}

// sigma = pointwise function of the density, normalized to zero at site 0.
GaugeGenerator from_pointwise(const RealField& sigma, double hbar) {
  GaugeGenerator gen;
  gen.hbar = hbar;
  gen.periodic = RealField(*sigma.grid);
  const double base = sigma[0];
  for (std::size_t i = 0; i < sigma.size(); ++i) gen.periodic[i] = sigma[i] - base;
  return gen;
}

double max_abs(const RealField& f) {
  double m = 0.0;
  for (double x : f.v) m = std::max(m, std::abs(x));
  return m;
}

// Reconstructs sigma from its target gradient B by path integration
// (axis 0 within each row, axis 1 along the first column), then verifies the
// reconstruction reproduces B.
GaugeGenerator from_gradient(const std::array<RealField, 2>& B, double hbar) {
  const Grid& g = *B[0].grid;
  GaugeGenerator gen;
  gen.hbar = hbar;

  const double scale = std::max({1.0, max_abs(B[0]), g.dims() == 2 ? max_abs(B[1]) : 0.0});
  if (g.dims() == 2) {
    const double curl = check_curl_condition(B);
    if (curl > kReconstructTol * scale) {
      fail(ErrorCode::Gauge,
           "no single-valued generator: the drift current has a rotational "
           "component (max curl " + std::to_string(curl) + ")");
    }
  }

  CumulativeIntegral cx = cumulative_integral(B[0], 0);
  gen.periodic = cx.periodic;
  gen.kappa[0] = cx.slope;
  if (g.dims() == 2) {
    CumulativeIntegral cy = cumulative_integral(B[1], 1);
    gen.kappa[1] = cy.slope;
    for (int iy = 0; iy < g.points(1); ++iy) {
      const double offset = cy.periodic[g.index(0, iy)];
      for (int ix = 0; ix < g.points(0); ++ix) gen.periodic[g.index(ix, iy)] += offset;
    }
  }

  double worst = 0.0;
  for (int a = 0; a < g.dims(); ++a) {
    RealField da = deriv(gen.periodic, a, 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
      worst = std::max(worst, std::abs(da[i] + gen.kappa[a] - B[a][i]));
    }
  }
  if (worst > kReconstructTol * scale) {
    fail(ErrorCode::Gauge,
         "generator reconstruction failed: grad sigma misses its target by " +
             std::to_string(worst));
  }

  for (int a = 0; a < g.dims(); ++a) {
    gen.compatible[a] = lattice_defect(gen.kappa[a], g.length(a), hbar) <= kLatticeTol;
  }
  return gen;
}

RealField eval_sigma_rho(const GenericSpec& gs, const RealField& rho) {
  SlotTables t(*rho.grid);
  t.set(Slot{Sym::Rho, 0, 0}, rho);
  return eval(gs.sigma_rho, t);
}

RealField eval_dsigma_drho(const GenericSpec& gs, const RealField& rho) {
  ExprPtr dG = d_slot(gs.sigma_rho, Slot{Sym::Rho, 0, 0});
  SlotTables t(*rho.grid);
  t.set(Slot{Sym::Rho, 0, 0}, rho);
  return eval(dG, t);
}

}  // namespace

// Transformed nonlinearity for generic models carrying sigma = G(rho):
//   Wt = W(rho, S := Scal - sigma slots) + |grad sigma|^2 / 2m
//        - J . grad sigma / rho - sigma_t,     sigma_t = -G'(rho) div J,
// with J the current of the transformed state. Inputs are the density and
// the first derivatives of the transformed phase, so callers can supply them
// either from unwrapped hydro fields or bilinearly from the wavefunction.
RealField generic_transformed_fields(const ModelSpec& m, const RealField& rho,
                                     const std::array<RealField, 2>& dscal) {
  const Grid& g = *rho.grid;
  const GenericSpec& gs = *m.generic;
  if (!gs.sigma_rho) {
    fail(ErrorCode::Gauge,
         "transformed dynamics for a generic model requires sigma_rho (a "
         "pointwise generator)");
  }
  const ExprPtr& source = gs.canonical ? gs.potential : gs.W;
  if (references_bare(source, Sym::S)) {
    fail(ErrorCode::Model,
         "expression references the bare phase; the substitution S -> Scal - "
         "sigma is only defined for phase derivatives");
  }

  RealField dG = eval_dsigma_drho(gs, rho);

  // sigma derivative fields: first orders pointwise, higher ones spectrally.
  std::array<RealField, 2> dsigma{RealField(g), RealField(g)};
  for (int a = 0; a < g.dims(); ++a) {
    RealField drho = deriv(rho, a, 1);
    dsigma[a] = RealField(g);
    for (std::size_t i = 0; i < g.size(); ++i) dsigma[a][i] = dG[i] * drho[i];
  }
  auto scal_slot = [&](int dx, int dy) -> RealField {
    if (dx >= 1) return apply_derivs(dscal[0], dx - 1, dy);
    return apply_derivs(dscal[1], dx, dy - 1);
  };
  auto sigma_slot = [&](int dx, int dy) -> RealField {
    if (dx >= 1) return apply_derivs(dsigma[0], dx - 1, dy);
    return apply_derivs(dsigma[1], dx, dy - 1);
  };

  // Slot tables with the original phase slots reconstructed from the
  // transformed ones.
  SlotTables tables(g);
  for (const Slot& s : slots_of(source)) {
    if (s.field == Sym::Rho) {
      tables.set(s, apply_derivs(rho, s.dx, s.dy));
    } else {
      RealField scal = scal_slot(s.dx, s.dy);
      RealField sig = sigma_slot(s.dx, s.dy);
      for (std::size_t i = 0; i < g.size(); ++i) scal[i] -= sig[i];
      tables.set(s, std::move(scal));
    }
  }
  RealField Wt = gs.canonical ? euler_lagrange(gs.potential, Target::Rho, tables)
                              : eval(gs.W, tables);

  // Gauge terms built from the transformed state's own current.
  std::array<RealField, 2> J{RealField(g), RealField(g)};
  RealField divJ(g);
  for (int a = 0; a < g.dims(); ++a) {
    J[a] = RealField(g);
    for (std::size_t i = 0; i < g.size(); ++i) J[a][i] = rho[i] * dscal[a][i] / m.mass;
    RealField da = deriv(J[a], a, 1);
    for (std::size_t i = 0; i < g.size(); ++i) divJ[i] += da[i];
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    double gsig_sq = 0.0, j_dot = 0.0;
    for (int a = 0; a < g.dims(); ++a) {
      gsig_sq += dsigma[a][i] * dsigma[a][i];
      j_dot += J[a][i] * dsigma[a][i];
    }
    const double sigma_t = -dG[i] * divJ[i];
    Wt[i] += 0.5 * gsig_sq / m.mass - j_dot / rho[i] - sigma_t;
  }
  return Wt;
}

GaugeGenerator compute_sigma(const ModelSpec& m, const HydroFields& h) {
  const Grid& g = *h.rho.grid;
  const double hb = m.hbar, ms = m.mass;
  switch (m.kind) {
    case ModelKind::Free: {
      GaugeGenerator gen;
      gen.hbar = hb;
      gen.periodic = RealField(g, 0.0);
      return gen;
    }
    case ModelKind::LogDriftCubic: {
      GaugeGenerator gen;
      gen.hbar = hb;
      gen.periodic = RealField(g, 0.0);
      for (int a = 0; a < g.dims(); ++a) {
        gen.kappa[a] = -ms * m.alpha_vec[a] / hb;
        gen.compatible[a] = lattice_defect(gen.kappa[a], g.length(a), hb) <= kLatticeTol;
      }
      return gen;
    }
    case ModelKind::ChenLeeLiu:
      return from_cumulative(h.rho, -ms * m.alpha / (2.0 * hb), hb);
    case ModelKind::JackiwAglietti:
      return from_cumulative(h.rho, -0.5 * m.lambda, hb);
    case ModelKind::EIP: {
      if (g.dims() != 1) {
        fail(ErrorCode::Gauge,
             "no single-valued generator: the drift current has a rotational "
             "component in two dimensions");
      }
      RealField integrand = grad_S(h, 0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        integrand[i] *= m.kappa * h.rho[i];
      }
      return from_cumulative(integrand, 1.0, hb);
    }
    case ModelKind::DGSub:
    case ModelKind::DGGeneral: {
      const double coeff = m.kind == ModelKind::DGSub ? m.alpha : m.D;
      RealField sigma(g);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(h.rho[i] > 0.0)) {
          fail(ErrorCode::Runtime, "log-density generator needs strictly positive density");
        }
        sigma[i] = -ms * coeff * std::log(h.rho[i]);
      }
      GaugeGenerator gen = from_pointwise(sigma, hb);
      return gen;
    }
    case ModelKind::DerivFamily:
      return from_cumulative(h.rho, -ms * m.alpha * (1.0 + m.q) / (2.0 * hb), hb);
    case ModelKind::Eckhaus:
      return from_cumulative(h.rho, -ms * m.alpha / hb, hb);
    case ModelKind::Generic: {
      const GenericSpec& gs = *m.generic;
      if (gs.sigma_rho) {
        return from_pointwise(eval_sigma_rho(gs, h.rho), hb);
      }
      std::array<RealField, 2> F = current_F(m, h);
      std::array<RealField, 2> B{RealField(g), RealField(g)};
      for (int a = 0; a < g.dims(); ++a) {
        B[a] = RealField(g);
        for (std::size_t i = 0; i < g.size(); ++i) {
          B[a][i] = -ms * F[a][i] / h.rho[i];
        }
      }
      return from_gradient(B, hb);
    }
  }
  fail(ErrorCode::Gauge, "no generator for this model");
}

RealField sigma_values(const GaugeGenerator& gen, const Grid& g) {
  RealField out = gen.periodic;
  for (int a = 0; a < g.dims(); ++a) {
    if (gen.kappa[a] == 0.0) continue;
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += gen.kappa[a] * g.coord(i, a);
  }
  return out;
}

ComplexField apply_gauge(const ComplexField& psi, const GaugeGenerator& gen) {
  const Grid& g = *psi.grid;
  std::array<double, 2> kappa = gen.kappa;
  for (int a = 0; a < g.dims(); ++a) {
    const double defect = lattice_defect(kappa[a], g.length(a), gen.hbar);
    if (defect > kLatticeTol) {
      fail(ErrorCode::Gauge,
           "gauge slope kappa[" + std::to_string(a) + "] = " + std::to_string(kappa[a]) +
               " is off the momentum lattice (defect " + std::to_string(defect) +
               "); nearest admissible value is " +
               std::to_string(snap_to_lattice(kappa[a], g.length(a), gen.hbar)));
    }
    kappa[a] = snap_to_lattice(kappa[a], g.length(a), gen.hbar);
  }
  ComplexField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double sigma = gen.periodic[i];
    for (int a = 0; a < g.dims(); ++a) sigma += kappa[a] * g.coord(i, a);
    out[i] = psi[i] * std::polar(1.0, sigma / gen.hbar);
  }
  return out;
}

RealField transformed_nonlinearity(const ModelSpec& m, const HydroFields& h_new) {
  if (m.kind == ModelKind::Generic) {
    const Grid& g = *h_new.rho.grid;
    std::array<RealField, 2> dscal{RealField(g), RealField(g)};
    for (int a = 0; a < g.dims(); ++a) dscal[a] = grad_S(h_new, a);
    return generic_transformed_fields(m, h_new.rho, dscal);
  }
  HydroSlots s = slots_from_hydro(h_new, needs_transformed(m));
  return eval_Wt(m, s);
}

std::array<RealField, 2> bilinear_current(const ComplexField& phi, double hbar,
                                          double mass) {
  const Grid& g = *phi.grid;
  std::array<RealField, 2> j{RealField(g), RealField(g)};
  for (int a = 0; a < g.dims(); ++a) {
    ComplexField dphi = deriv(phi, a, 1);
    j[a] = RealField(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      j[a][i] = hbar * std::imag(std::conj(phi[i]) * dphi[i]) / mass;
    }
  }
  return j;
}

}  // namespace nlse
