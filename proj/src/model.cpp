// SPDX-License-Identifier: Apache-2.0
#include "model.hpp"

#include <cmath>

#include "errors.hpp"
#include "varcalc.hpp"

namespace nlse {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) fail(ErrorCode::Model, std::string("model parameter not finite: ") + name);
}

// Shorthand field constructors.
RealField zeros(const Grid& g) { return RealField(g, 0.0); }

}  // namespace

void validate_model(const ModelSpec& m) {
  if (!(m.hbar > 0.0) || !std::isfinite(m.hbar)) fail(ErrorCode::Model, "hbar must be positive");
  if (!(m.mass > 0.0) || !std::isfinite(m.mass)) fail(ErrorCode::Model, "mass must be positive");
  require_finite(m.alpha, "alpha");
  require_finite(m.beta, "beta");
  require_finite(m.lambda, "lambda");
  require_finite(m.kappa, "kappa");
  require_finite(m.q, "q");
  require_finite(m.D, "D");
  require_finite(m.Dprime, "Dprime");
  require_finite(m.alpha_vec[0], "alpha[0]");
  require_finite(m.alpha_vec[1], "alpha[1]");
  for (double ci : m.c) require_finite(ci, "c[i]");

  if (m.kind == ModelKind::Generic) {
    if (!m.generic) fail(ErrorCode::Model, "generic model without expressions");
    const GenericSpec& gs = *m.generic;
    if (gs.canonical) {
      if (!gs.potential) fail(ErrorCode::Model, "generic canonical model needs a potential");
      if (gs.W || gs.F[0] || gs.F[1]) {
        fail(ErrorCode::Model, "generic canonical model must not carry W/F expressions");
      }
      // Structural admissibility: the phase may enter the potential only
      // under derivatives, otherwise the variational pair (W, Wcal) does not
      // close into a well-defined nonlinearity.
      if (references_bare(gs.potential, Sym::S)) {
        fail(ErrorCode::Model,
             "generic potential references the bare phase; only phase "
             "derivatives are admissible");
      }
    } else {
      if (gs.potential) fail(ErrorCode::Model, "generic noncanonical model must not carry a potential");
      if (!gs.W || !gs.F[0]) {
        fail(ErrorCode::Model, "generic noncanonical model needs W and F expressions");
      }
    }
    if (gs.sigma_rho) {
      for (const Slot& s : slots_of(gs.sigma_rho)) {
        if (s.field != Sym::Rho || s.order() != 0) {
          fail(ErrorCode::Model, "sigma_rho must be a pointwise function of rho");
        }
      }
    }
  } else if (m.generic) {
    fail(ErrorCode::Model, "catalog model with generic expressions attached");
  }
}

bool is_canonical(const ModelSpec& m) {
  switch (m.kind) {
    case ModelKind::Free:
    case ModelKind::LogDriftCubic:
    case ModelKind::ChenLeeLiu:
    case ModelKind::JackiwAglietti:
    case ModelKind::EIP:
    case ModelKind::DGSub:
      return true;
    case ModelKind::DGGeneral:
    case ModelKind::DerivFamily:
    case ModelKind::Eckhaus:
      return false;
    case ModelKind::Generic:
      return m.generic && m.generic->canonical;
  }
  return false;
}

std::vector<int> supported_dims(const ModelSpec& m) {
  switch (m.kind) {
    case ModelKind::Free:
    case ModelKind::LogDriftCubic:
    case ModelKind::DGSub:
    case ModelKind::DGGeneral:
    case ModelKind::Generic:
      return {1, 2};
    default:
      return {1};
  }
}

std::string kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Free: return "Free";
    case ModelKind::LogDriftCubic: return "LogDriftCubic";
    case ModelKind::ChenLeeLiu: return "ChenLeeLiu";
    case ModelKind::JackiwAglietti: return "JackiwAglietti";
    case ModelKind::EIP: return "EIP";
    case ModelKind::DGSub: return "DGSub";
    case ModelKind::DGGeneral: return "DGGeneral";
    case ModelKind::DerivFamily: return "DerivFamily";
    case ModelKind::Eckhaus: return "Eckhaus";
    case ModelKind::Generic: return "Generic";
  }
  return "?";
}

SlotNeeds needs_original(const ModelSpec& m) {
  switch (m.kind) {
    case ModelKind::Free:
      return {};
    case ModelKind::LogDriftCubic:
      return {.drho = true, .dS = true};
    case ModelKind::ChenLeeLiu:
    case ModelKind::JackiwAglietti:
    case ModelKind::DerivFamily:
      return {.drho = true, .dS = true};
    case ModelKind::EIP:
      return {.drho = true, .dS = true, .lap_S = true};
    case ModelKind::DGSub:
      return {.drho = true, .lap_rho = true, .lap_S = true};
    case ModelKind::DGGeneral:
      return {.drho = true, .lap_rho = true, .dS = true, .lap_S = true};
    case ModelKind::Eckhaus:
      return {.drho = true};
    case ModelKind::Generic: {
      const GenericSpec& gs = *m.generic;
      SlotNeeds n;
      auto absorb = [&n](const ExprPtr& e) {
        if (!e) return;
        const int ro = max_order(e, Sym::Rho);
        const int so = max_order(e, Sym::S);
        n.drho = n.drho || ro >= 1;
        n.lap_rho = n.lap_rho || ro >= 2;
        n.dS = n.dS || so >= 1;
        n.lap_S = n.lap_S || so >= 2;
      };
      absorb(gs.potential);
      absorb(gs.W);
      absorb(gs.F[0]);
      absorb(gs.F[1]);
      return n;
    }
  }
  return {};
}

SlotNeeds needs_transformed(const ModelSpec& m) {
  switch (m.kind) {
    case ModelKind::Free:
    case ModelKind::LogDriftCubic:
    case ModelKind::Eckhaus:
      return {};
    case ModelKind::ChenLeeLiu:
    case ModelKind::JackiwAglietti:
      return {.dS = true};
    case ModelKind::EIP:
      return {.drho = true, .lap_rho = true, .dS = true};
    case ModelKind::DGSub:
      return {.drho = true, .lap_rho = true};
    case ModelKind::DGGeneral:
      return {.drho = true, .lap_rho = true, .dS = true, .lap_S = true};
    case ModelKind::DerivFamily:
      return m.q == 1.0 ? SlotNeeds{} : SlotNeeds{.dS = true};
    case ModelKind::Generic:
      // The sigma(rho) assembly touches everything the original does, plus
      // the transformed current.
      return needs_original(m) | SlotNeeds{.drho = true, .lap_rho = true, .dS = true, .lap_S = true};
  }
  return {};
}

HydroSlots slots_from_hydro(const HydroFields& h, const SlotNeeds& needs) {
  const Grid& g = *h.rho.grid;
  HydroSlots s;
  s.grid = &g;
  s.rho = h.rho;
  if (needs.drho) {
    s.drho[0] = deriv(h.rho, 0, 1);
    if (g.dims() == 2) s.drho[1] = deriv(h.rho, 1, 1);
  }
  if (needs.lap_rho) {
    s.lap_rho = deriv(h.rho, 0, 2);
    if (g.dims() == 2) {
      RealField d2y = deriv(h.rho, 1, 2);
      for (std::size_t i = 0; i < g.size(); ++i) s.lap_rho[i] += d2y[i];
    }
  }
  if (needs.dS) {
    s.dS[0] = grad_S(h, 0);
    if (g.dims() == 2) s.dS[1] = grad_S(h, 1);
  }
  if (needs.lap_S) {
    s.lap_S = deriv2_S(h, 0);
    if (g.dims() == 2) {
      RealField d2y = deriv2_S(h, 1);
      for (std::size_t i = 0; i < g.size(); ++i) s.lap_S[i] += d2y[i];
    }
  }
  return s;
}

HydroSlots slots_from_psi(const ComplexField& psi, double hbar,
                          const SlotNeeds& needs, double floor_rel) {
  const Grid& g = *psi.grid;
  HydroSlots s;
  s.grid = &g;
  s.rho = RealField(g);
  double rho_max = 0.0, rho_min = 1e300;
  for (std::size_t i = 0; i < g.size(); ++i) {
    s.rho[i] = std::norm(psi[i]);
    rho_max = std::max(rho_max, s.rho[i]);
    rho_min = std::min(rho_min, s.rho[i]);
  }
  if ((needs.dS || needs.lap_S) && !(rho_min >= floor_rel * rho_max)) {
    fail(ErrorCode::Runtime, "node formation: density fell below its floor");
  }
  if (needs.drho) {
    s.drho[0] = deriv(s.rho, 0, 1);
    if (g.dims() == 2) s.drho[1] = deriv(s.rho, 1, 1);
  }
  if (needs.lap_rho) {
    s.lap_rho = deriv(s.rho, 0, 2);
    if (g.dims() == 2) {
      RealField d2y = deriv(s.rho, 1, 2);
      for (std::size_t i = 0; i < g.size(); ++i) s.lap_rho[i] += d2y[i];
    }
  }
  if (needs.dS || needs.lap_S) {
    for (int a = 0; a < g.dims(); ++a) {
      ComplexField dpsi = deriv(psi, a, 1);
      s.dS[a] = RealField(g);
      for (std::size_t i = 0; i < g.size(); ++i) {
        s.dS[a][i] = hbar * std::imag(std::conj(psi[i]) * dpsi[i]) / s.rho[i];
      }
    }
    if (needs.lap_S) {
      s.lap_S = deriv(s.dS[0], 0, 1);
      if (g.dims() == 2) {
        RealField dy = deriv(s.dS[1], 1, 1);
        for (std::size_t i = 0; i < g.size(); ++i) s.lap_S[i] += dy[i];
      }
    }
  }
  return s;
}

namespace {

// Generic models evaluate through the expression engine; this adapts a
// HydroSlots-independent call path. Tables come straight from hydro fields.
RealField generic_W(const ModelSpec& m, const HydroFields& h) {
  const GenericSpec& gs = *m.generic;
  if (gs.canonical) {
    return euler_lagrange(gs.potential, Target::Rho, h);
  }
  return eval(gs.W, tables_for(gs.W, h));
}

RealField generic_Wcal(const ModelSpec& m, const HydroFields& h) {
  const Grid& g = *h.rho.grid;
  const GenericSpec& gs = *m.generic;
  RealField out(g);
  if (gs.canonical) {
    RealField dIdS = euler_lagrange(gs.potential, Target::S, h);
    for (std::size_t i = 0; i < g.size(); ++i) {
      out[i] = 0.5 * m.hbar * dIdS[i] / h.rho[i];
    }
    return out;
  }
  // Wcal = (hbar / 2 rho) div F.
  RealField divF(g);
  for (int a = 0; a < g.dims(); ++a) {
    const ExprPtr& fe = gs.F[a];
    if (!fe) continue;
    RealField fa = eval(fe, tables_for(fe, h));
    RealField da = deriv(fa, a, 1);
    for (std::size_t i = 0; i < g.size(); ++i) divF[i] += da[i];
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    out[i] = 0.5 * m.hbar * divF[i] / h.rho[i];
  }
  return out;
}

std::array<RealField, 2> generic_F(const ModelSpec& m, const HydroFields& h) {
  const Grid& g = *h.rho.grid;
  const GenericSpec& gs = *m.generic;
  std::array<RealField, 2> F{zeros(g), zeros(g)};
  if (gs.canonical) {
    F[0] = euler_lagrange(gs.potential, Target::DSx, h);
    for (auto& x : F[0].v) x = -x;
    if (g.dims() == 2) {
      F[1] = euler_lagrange(gs.potential, Target::DSy, h);
      for (auto& x : F[1].v) x = -x;
    }
    return F;
  }
  for (int a = 0; a < g.dims(); ++a) {
    if (gs.F[a]) F[a] = eval(gs.F[a], tables_for(gs.F[a], h));
  }
  return F;
}

void check_dims(const ModelSpec& m, const Grid& g, const char* what) {
  for (int d : supported_dims(m)) {
    if (d == g.dims()) return;
  }
  fail(ErrorCode::Model, kind_name(m.kind) + std::string(": ") + what +
                             " unsupported on a " + std::to_string(g.dims()) + "D grid");
}

}  // namespace

RealField eval_W(const ModelSpec& m, const HydroSlots& s) {
  const Grid& g = *s.grid;
  RealField W(g);
  const double hb = m.hbar, ms = m.mass;
  switch (m.kind) {
    case ModelKind::Free:
      break;
    case ModelKind::LogDriftCubic:
      for (std::size_t i = 0; i < g.size(); ++i) {
        double drift = m.alpha_vec[0] * s.dS[0][i];
        if (g.dims() == 2) drift += m.alpha_vec[1] * s.dS[1][i];
        W[i] = m.beta * s.rho[i] - drift / hb;
      }
      break;
    case ModelKind::ChenLeeLiu:
      for (std::size_t i = 0; i < g.size(); ++i) {
        W[i] = -(m.alpha / hb) * s.rho[i] * s.dS[0][i];
      }
      break;
    case ModelKind::JackiwAglietti:
      for (std::size_t i = 0; i < g.size(); ++i) {
        W[i] = (3.0 * m.lambda * m.lambda / (8.0 * ms)) * s.rho[i] * s.rho[i] -
               (m.lambda / ms) * s.rho[i] * s.dS[0][i];
      }
      break;
    case ModelKind::EIP:
      for (std::size_t i = 0; i < g.size(); ++i) {
        W[i] = (m.kappa / ms) * s.rho[i] * s.dS[0][i] * s.dS[0][i];
      }
      break;
    case ModelKind::DGSub:
      for (std::size_t i = 0; i < g.size(); ++i) {
        double grad_sq = s.drho[0][i] * s.drho[0][i];
        if (g.dims() == 2) grad_sq += s.drho[1][i] * s.drho[1][i];
        const double r = s.rho[i];
        W[i] = m.alpha * s.lap_S[i] -
               (2.0 * m.beta * hb * hb / ms) *
                   (s.lap_rho[i] / r - 0.5 * grad_sq / (r * r));
      }
      break;
    case ModelKind::DGGeneral:
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = s.rho[i];
        double gr_gs = s.drho[0][i] * s.dS[0][i];
        double gs_sq = s.dS[0][i] * s.dS[0][i];
        double gr_sq = s.drho[0][i] * s.drho[0][i];
        if (g.dims() == 2) {
          gr_gs += s.drho[1][i] * s.dS[1][i];
          gs_sq += s.dS[1][i] * s.dS[1][i];
          gr_sq += s.drho[1][i] * s.drho[1][i];
        }
        const double R1 = (gr_gs + r * s.lap_S[i]) / (ms * r);
        const double R2 = s.lap_rho[i] / r;
        const double R3 = gs_sq / (ms * ms);
        const double R4 = gr_gs / (ms * r);
        const double R5 = gr_sq / (r * r);
        W[i] = hb * m.Dprime *
               (m.c[0] * R1 + m.c[1] * R2 + m.c[2] * R3 + m.c[3] * R4 + m.c[4] * R5);
      }
      break;
    case ModelKind::DerivFamily:
      for (std::size_t i = 0; i < g.size(); ++i) {
        W[i] = -(m.alpha / hb) * (1.0 - m.q) * s.rho[i] * s.dS[0][i];
      }
      break;
    case ModelKind::Eckhaus:
      for (std::size_t i = 0; i < g.size(); ++i) {
        W[i] = m.beta * s.rho[i] * s.rho[i];
      }
      break;
    case ModelKind::Generic:
      fail(ErrorCode::Runtime, "generic models evaluate through the expression path");
  }
  return W;
}

RealField eval_Wcal(const ModelSpec& m, const HydroSlots& s) {
  const Grid& g = *s.grid;
  RealField Wc(g);
  const double hb = m.hbar, ms = m.mass;
  switch (m.kind) {
    case ModelKind::Free:
      break;
    case ModelKind::LogDriftCubic:
      for (std::size_t i = 0; i < g.size(); ++i) {
        double v = m.alpha_vec[0] * s.drho[0][i];
        if (g.dims() == 2) v += m.alpha_vec[1] * s.drho[1][i];
        Wc[i] = 0.5 * v / s.rho[i];
      }
      break;
    case ModelKind::ChenLeeLiu:
      for (std::size_t i = 0; i < g.size(); ++i) Wc[i] = 0.5 * m.alpha * s.drho[0][i];
      break;
    case ModelKind::JackiwAglietti:
      for (std::size_t i = 0; i < g.size(); ++i) {
        Wc[i] = (hb * m.lambda / (2.0 * ms)) * s.drho[0][i];
      }
      break;
    case ModelKind::EIP:
      for (std::size_t i = 0; i < g.size(); ++i) {
        Wc[i] = -(m.kappa * hb / (2.0 * ms)) *
                (2.0 * s.drho[0][i] * s.dS[0][i] + s.rho[i] * s.lap_S[i]);
      }
      break;
    case ModelKind::DGSub:
      for (std::size_t i = 0; i < g.size(); ++i) {
        Wc[i] = 0.5 * m.alpha * hb * s.lap_rho[i] / s.rho[i];
      }
      break;
    case ModelKind::DGGeneral:
      for (std::size_t i = 0; i < g.size(); ++i) {
        Wc[i] = 0.5 * hb * m.D * s.lap_rho[i] / s.rho[i];
      }
      break;
    case ModelKind::DerivFamily:
      for (std::size_t i = 0; i < g.size(); ++i) {
        Wc[i] = 0.5 * m.alpha * (1.0 + m.q) * s.drho[0][i];
      }
      break;
    case ModelKind::Eckhaus:
      for (std::size_t i = 0; i < g.size(); ++i) Wc[i] = m.alpha * s.drho[0][i];
      break;
    case ModelKind::Generic:
      fail(ErrorCode::Runtime, "generic models evaluate through the expression path");
  }
  return Wc;
}

std::array<RealField, 2> eval_F(const ModelSpec& m, const HydroSlots& s) {
  const Grid& g = *s.grid;
  std::array<RealField, 2> F{zeros(g), zeros(g)};
  const double hb = m.hbar, ms = m.mass;
  switch (m.kind) {
    case ModelKind::Free:
      break;
    case ModelKind::LogDriftCubic:
      for (int a = 0; a < g.dims(); ++a) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          F[a][i] = s.rho[i] * m.alpha_vec[a] / hb;
        }
      }
      break;
    case ModelKind::ChenLeeLiu:
      for (std::size_t i = 0; i < g.size(); ++i) {
        F[0][i] = (m.alpha / (2.0 * hb)) * s.rho[i] * s.rho[i];
      }
      break;
    case ModelKind::JackiwAglietti:
      for (std::size_t i = 0; i < g.size(); ++i) {
        F[0][i] = (m.lambda / (2.0 * ms)) * s.rho[i] * s.rho[i];
      }
      break;
    case ModelKind::EIP:
      for (std::size_t i = 0; i < g.size(); ++i) {
        F[0][i] = -(m.kappa / ms) * s.rho[i] * s.rho[i] * s.dS[0][i];
      }
      break;
    case ModelKind::DGSub:
      for (int a = 0; a < g.dims(); ++a) {
        for (std::size_t i = 0; i < g.size(); ++i) F[a][i] = m.alpha * s.drho[a][i];
      }
      break;
    case ModelKind::DGGeneral:
      for (int a = 0; a < g.dims(); ++a) {
        for (std::size_t i = 0; i < g.size(); ++i) F[a][i] = m.D * s.drho[a][i];
      }
      break;
    case ModelKind::DerivFamily:
      for (std::size_t i = 0; i < g.size(); ++i) {
        F[0][i] = (m.alpha * (1.0 + m.q) / (2.0 * hb)) * s.rho[i] * s.rho[i];
      }
      break;
    case ModelKind::Eckhaus:
      for (std::size_t i = 0; i < g.size(); ++i) {
        F[0][i] = (m.alpha / hb) * s.rho[i] * s.rho[i];
      }
      break;
    case ModelKind::Generic:
      fail(ErrorCode::Runtime, "generic models evaluate through the expression path");
  }
  return F;
}

RealField eval_U(const ModelSpec& m, const HydroSlots& s) {
  const Grid& g = *s.grid;
  RealField U(g);
  const double hb = m.hbar, ms = m.mass;
  switch (m.kind) {
    case ModelKind::Free:
      break;
    case ModelKind::LogDriftCubic:
      for (std::size_t i = 0; i < g.size(); ++i) {
        double drift = m.alpha_vec[0] * s.dS[0][i];
        if (g.dims() == 2) drift += m.alpha_vec[1] * s.dS[1][i];
        U[i] = 0.5 * m.beta * s.rho[i] * s.rho[i] - s.rho[i] * drift / hb;
      }
      break;
    case ModelKind::ChenLeeLiu:
      for (std::size_t i = 0; i < g.size(); ++i) {
        U[i] = -(m.alpha / (2.0 * hb)) * s.dS[0][i] * s.rho[i] * s.rho[i];
      }
      break;
    case ModelKind::JackiwAglietti:
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = s.rho[i];
        U[i] = (m.lambda * m.lambda / (8.0 * ms)) * r * r * r -
               (m.lambda / (2.0 * ms)) * s.dS[0][i] * r * r;
      }
      break;
    case ModelKind::EIP:
      for (std::size_t i = 0; i < g.size(); ++i) {
        double gs_sq = s.dS[0][i] * s.dS[0][i];
        if (g.dims() == 2) gs_sq += s.dS[1][i] * s.dS[1][i];
        U[i] = (m.kappa / (2.0 * ms)) * s.rho[i] * s.rho[i] * gs_sq;
      }
      break;
    case ModelKind::DGSub:
      for (std::size_t i = 0; i < g.size(); ++i) {
        double gr_sq = s.drho[0][i] * s.drho[0][i];
        if (g.dims() == 2) gr_sq += s.drho[1][i] * s.drho[1][i];
        U[i] = m.alpha * s.rho[i] * s.lap_S[i] + (m.beta * hb * hb / ms) * gr_sq / s.rho[i];
      }
      break;
    default:
      fail(ErrorCode::Model, kind_name(m.kind) + ": no potential density (noncanonical)");
  }
  return U;
}

RealField eval_Wt(const ModelSpec& m, const HydroSlots& s) {
  const Grid& g = *s.grid;
  RealField Wt(g);
  const double hb = m.hbar, ms = m.mass;
  switch (m.kind) {
    case ModelKind::Free:
      break;
    case ModelKind::LogDriftCubic: {
      double asq = m.alpha_vec[0] * m.alpha_vec[0];
      if (g.dims() == 2) asq += m.alpha_vec[1] * m.alpha_vec[1];
      const double shift = ms * asq / (2.0 * hb * hb);
      for (std::size_t i = 0; i < g.size(); ++i) Wt[i] = m.beta * s.rho[i] + shift;
      break;
    }
    case ModelKind::ChenLeeLiu:
      for (std::size_t i = 0; i < g.size(); ++i) {
        Wt[i] = -(m.alpha / hb) * s.rho[i] * s.dS[0][i] -
                (3.0 * ms * m.alpha * m.alpha / (8.0 * hb * hb)) * s.rho[i] * s.rho[i];
      }
      break;
    case ModelKind::JackiwAglietti:
      for (std::size_t i = 0; i < g.size(); ++i) {
        Wt[i] = -(m.lambda / ms) * s.rho[i] * s.dS[0][i];
      }
      break;
    case ModelKind::EIP:
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = s.rho[i];
        const double denom = 1.0 + m.kappa * r;
        if (!(denom > 0.0)) {
          fail(ErrorCode::Runtime,
               "intensity factor 1 + kappa rho lost positivity; the "
               "transformed flow is undefined past this density");
        }
        // d^2/dx^2 log rho = lap_rho/rho - (drho/rho)^2 (1D).
        const double dlog2 = s.lap_rho[i] / r - (s.drho[0][i] / r) * (s.drho[0][i] / r);
        Wt[i] = (m.kappa / ms) * (r / denom) * s.dS[0][i] * s.dS[0][i] -
                (m.kappa * hb * hb / (4.0 * ms)) * r * dlog2;
      }
      break;
    case ModelKind::DGSub: {
      const double gamma = ms * m.alpha * m.alpha - 2.0 * m.beta * hb * hb / ms;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = s.rho[i];
        double gr_sq = s.drho[0][i] * s.drho[0][i];
        if (g.dims() == 2) gr_sq += s.drho[1][i] * s.drho[1][i];
        Wt[i] = gamma * (s.lap_rho[i] / r - 0.5 * gr_sq / (r * r));
      }
      break;
    }
    case ModelKind::DGGeneral: {
      // Transformed coefficients from eliminating the diffusive current:
      // the new current is bilinear in (rho, Scal).
      const double hD = hb * m.Dprime;
      const double ct1 = hD * m.c[0] - ms * m.D;
      const double ct2 = hD * m.c[1] + hD * m.c[0] * m.D;
      const double ct3 = hD * m.c[2];
      const double ct4 = hD * m.c[3] + 2.0 * hD * m.c[2] * m.D + ms * m.D;
      const double ct5 = hD * m.c[4] + hD * m.c[3] * m.D + hD * m.c[2] * m.D * m.D +
                         0.5 * ms * m.D * m.D;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = s.rho[i];
        double gr_gs = s.drho[0][i] * s.dS[0][i];
        double gs_sq = s.dS[0][i] * s.dS[0][i];
        double gr_sq = s.drho[0][i] * s.drho[0][i];
        if (g.dims() == 2) {
          gr_gs += s.drho[1][i] * s.dS[1][i];
          gs_sq += s.dS[1][i] * s.dS[1][i];
          gr_sq += s.drho[1][i] * s.drho[1][i];
        }
        const double R1 = (gr_gs + r * s.lap_S[i]) / (ms * r);
        const double R2 = s.lap_rho[i] / r;
        const double R3 = gs_sq / (ms * ms);
        const double R4 = gr_gs / (ms * r);
        const double R5 = gr_sq / (r * r);
        Wt[i] = ct1 * R1 + ct2 * R2 + ct3 * R3 + ct4 * R4 + ct5 * R5;
      }
      break;
    }
    case ModelKind::DerivFamily: {
      const double fam = (m.alpha * ms / (8.0 * hb)) * (3.0 - 2.0 * m.q - 5.0 * m.q * m.q);
      const bool has_phase_term = m.q != 1.0;  // slots carry dS only then
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double phase = has_phase_term ? (1.0 - m.q) * s.dS[0][i] : 0.0;
        Wt[i] = -(m.alpha / hb) * (phase + fam * s.rho[i]) * s.rho[i];
      }
      break;
    }
    case ModelKind::Eckhaus: {
      const double coeff = m.beta + ms * m.alpha * m.alpha / (2.0 * hb * hb);
      for (std::size_t i = 0; i < g.size(); ++i) Wt[i] = coeff * s.rho[i] * s.rho[i];
      break;
    }
    case ModelKind::Generic:
      fail(ErrorCode::Runtime, "generic models evaluate through the expression path");
  }
  return Wt;
}

Nonlinearity eval_nonlinearity(const ModelSpec& m, const HydroFields& h) {
  check_dims(m, *h.rho.grid, "evaluation");
  if (m.kind == ModelKind::Generic) {
    return {generic_W(m, h), generic_Wcal(m, h)};
  }
  HydroSlots s = slots_from_hydro(h, needs_original(m));
  return {eval_W(m, s), eval_Wcal(m, s)};
}

RealField potential_density(const ModelSpec& m, const HydroFields& h) {
  if (!is_canonical(m)) {
    fail(ErrorCode::Model, kind_name(m.kind) + ": no potential density (noncanonical)");
  }
  if (m.kind == ModelKind::Generic) {
    const ExprPtr& U = m.generic->potential;
    return eval(U, tables_for(U, h));
  }
  HydroSlots s = slots_from_hydro(h, needs_original(m));
  return eval_U(m, s);
}

bool has_transformed_potential(const ModelSpec& m) {
  switch (m.kind) {
    case ModelKind::Free:
    case ModelKind::LogDriftCubic:
    case ModelKind::DGSub:
    case ModelKind::Eckhaus:
      return true;
    case ModelKind::DerivFamily:
      return m.q == 1.0;
    default:
      return false;
  }
}

RealField transformed_potential_density(const ModelSpec& m, const HydroFields& h) {
  if (!has_transformed_potential(m)) {
    fail(ErrorCode::Model,
         kind_name(m.kind) + ": no closed-form potential density for the transformed dynamics");
  }
  const Grid& g = *h.rho.grid;
  check_dims(m, g, "transformed potential");
  RealField u(g, 0.0);
  const double hb = m.hbar, ms = m.mass;
  switch (m.kind) {
    case ModelKind::Free:
      break;
    case ModelKind::LogDriftCubic: {
      double shift = 0.0;
      for (int a = 0; a < g.dims(); ++a) shift += m.alpha_vec[a] * m.alpha_vec[a];
      shift *= ms / (2.0 * hb * hb);
      for (std::size_t i = 0; i < g.size(); ++i) {
        u[i] = 0.5 * m.beta * h.rho[i] * h.rho[i] + shift * h.rho[i];
      }
      break;
    }
    case ModelKind::Eckhaus: {
      const double c = m.beta + ms * m.alpha * m.alpha / (2.0 * hb * hb);
      for (std::size_t i = 0; i < g.size(); ++i) {
        u[i] = (c / 3.0) * h.rho[i] * h.rho[i] * h.rho[i];
      }
      break;
    }
    case ModelKind::DerivFamily: {
      const double c = ms * m.alpha * m.alpha / (2.0 * hb * hb);
      for (std::size_t i = 0; i < g.size(); ++i) {
        u[i] = (c / 3.0) * h.rho[i] * h.rho[i] * h.rho[i];
      }
      break;
    }
    case ModelKind::DGSub: {
      const double gamma = ms * m.alpha * m.alpha - 2.0 * m.beta * hb * hb / ms;
      for (int a = 0; a < g.dims(); ++a) {
        RealField ra = deriv(h.rho, a, 1);
        for (std::size_t i = 0; i < g.size(); ++i) {
          u[i] += -0.5 * gamma * ra[i] * ra[i] / h.rho[i];
        }
      }
      break;
    }
    default:
      break;
  }
  return u;
}

std::array<RealField, 2> current_F(const ModelSpec& m, const HydroFields& h) {
  check_dims(m, *h.rho.grid, "current");
  if (m.kind == ModelKind::Generic) return generic_F(m, h);
  HydroSlots s = slots_from_hydro(h, needs_original(m));
  return eval_F(m, s);
}

std::array<RealField, 2> model_current(const ModelSpec& m, const HydroFields& h) {
  const Grid& g = *h.rho.grid;
  std::array<RealField, 2> j = current_F(m, h);
  for (int a = 0; a < g.dims(); ++a) {
    RealField sa = grad_S(h, a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      j[a][i] = h.rho[i] * sa[i] / m.mass - j[a][i];
    }
  }
  return j;
}

ExprPtr u_expression(const ModelSpec& m, int dims) {
  using E = Expr;
  const double hb = m.hbar, ms = m.mass;
  auto rho = E::slot(Sym::Rho);
  auto sx = E::slot(Sym::S, 1, 0);
  auto sy = E::slot(Sym::S, 0, 1);
  switch (m.kind) {
    case ModelKind::Free:
      return E::constant(0.0);
    case ModelKind::LogDriftCubic: {
      std::vector<ExprPtr> drift = {E::mul({E::constant(m.alpha_vec[0]), sx})};
      if (dims == 2) drift.push_back(E::mul({E::constant(m.alpha_vec[1]), sy}));
      return E::add({E::mul({E::constant(0.5 * m.beta), E::pow(rho, 2)}),
                     E::mul({E::constant(-1.0 / hb), rho, E::add(std::move(drift))})});
    }
    case ModelKind::ChenLeeLiu:
      return E::mul({E::constant(-m.alpha / (2.0 * hb)), sx, E::pow(rho, 2)});
    case ModelKind::JackiwAglietti:
      return E::add({E::mul({E::constant(m.lambda * m.lambda / (8.0 * ms)), E::pow(rho, 3)}),
                     E::mul({E::constant(-m.lambda / (2.0 * ms)), sx, E::pow(rho, 2)})});
    case ModelKind::EIP: {
      std::vector<ExprPtr> gs = {E::pow(sx, 2)};
      if (dims == 2) gs.push_back(E::pow(sy, 2));
      return E::mul({E::constant(m.kappa / (2.0 * ms)), E::pow(rho, 2), E::add(std::move(gs))});
    }
    case ModelKind::DGSub: {
      std::vector<ExprPtr> lapS = {E::slot(Sym::S, 2, 0)};
      std::vector<ExprPtr> grho = {E::pow(E::slot(Sym::Rho, 1, 0), 2)};
      if (dims == 2) {
        lapS.push_back(E::slot(Sym::S, 0, 2));
        grho.push_back(E::pow(E::slot(Sym::Rho, 0, 1), 2));
      }
      return E::add({E::mul({E::constant(m.alpha), rho, E::add(std::move(lapS))}),
                     E::mul({E::constant(m.beta * hb * hb / ms),
                             E::div(E::add(std::move(grho)), rho)})});
    }
    case ModelKind::Generic:
      if (m.generic && m.generic->canonical) return m.generic->potential;
      [[fallthrough]];
    default:
      fail(ErrorCode::Model, kind_name(m.kind) + ": no potential density (noncanonical)");
  }
}

}  // namespace nlse
