// SPDX-License-Identifier: Apache-2.0
#include "evolve.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "errors.hpp"
#include "expr.hpp"
#include "gauge.hpp"
#include "varcalc.hpp"

namespace nlse {

namespace {

RealField density_of(const ComplexField& psi) {
  RealField rho(*psi.grid);
  for (std::size_t i = 0; i < psi.size(); ++i) rho[i] = std::norm(psi[i]);
  return rho;
}

void check_floor(const RealField& rho, double floor_rel) {
  double lo = 1e300, hi = 0.0;
  for (double v : rho.v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo >= floor_rel * hi)) {
    fail(ErrorCode::Runtime, "node formation: density fell below its floor");
  }
}

// First phase derivatives taken bilinearly: d_a S = hbar Im(psi* d_a psi)/rho.
std::array<RealField, 2> bilinear_dS(const ComplexField& psi, const RealField& rho,
                                     double hbar) {
  const Grid& g = *psi.grid;
  std::array<RealField, 2> ds{RealField(g), RealField(g)};
  for (int a = 0; a < g.dims(); ++a) {
    ComplexField dpsi = deriv(psi, a, 1);
    ds[a] = RealField(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ds[a][i] = hbar * std::imag(std::conj(psi[i]) * dpsi[i]) / rho[i];
    }
  }
  return ds;
}

// The multiplicative rate of the nonlinear sub-flow:
//   original:     dpsi/dt = (Wcal - i W) / hbar * psi
//   transformed:  dpsi/dt = -i Wt / hbar * psi
ComplexField nonlinear_rate(const ComplexField& psi, const ModelSpec& m, Which which,
                            double rho_min_rel) {
  const Grid& g = *psi.grid;
  ComplexField rate(g);

  if (m.kind == ModelKind::Generic) {
    const GenericSpec& gs = *m.generic;
    if (which == Which::Transformed) {
      RealField rho = density_of(psi);
      check_floor(rho, rho_min_rel);
      std::array<RealField, 2> dscal = bilinear_dS(psi, rho, m.hbar);
      RealField Wt = generic_transformed_fields(m, rho, dscal);
      for (std::size_t i = 0; i < g.size(); ++i) {
        rate[i] = cplx(0.0, -Wt[i] / m.hbar) * psi[i];
      }
      return rate;
    }
    RealField rho = density_of(psi);
    RealField W(g), Wcal(g);
    if (gs.canonical) {
      SlotTables t = tables_from_psi(gs.potential, psi, m.hbar, rho_min_rel);
      W = euler_lagrange(gs.potential, Target::Rho, t);
      RealField dIdS = euler_lagrange(gs.potential, Target::S, t);
      for (std::size_t i = 0; i < g.size(); ++i) {
        Wcal[i] = 0.5 * m.hbar * dIdS[i] / rho[i];
      }
    } else {
      W = eval(gs.W, tables_from_psi(gs.W, psi, m.hbar, rho_min_rel));
      RealField divF(g);
      for (int a = 0; a < g.dims(); ++a) {
        if (!gs.F[a]) continue;
        RealField fa = eval(gs.F[a], tables_from_psi(gs.F[a], psi, m.hbar, rho_min_rel));
        RealField da = deriv(fa, a, 1);
        for (std::size_t i = 0; i < g.size(); ++i) divF[i] += da[i];
      }
      for (std::size_t i = 0; i < g.size(); ++i) {
        Wcal[i] = 0.5 * m.hbar * divF[i] / rho[i];
      }
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      rate[i] = cplx(Wcal[i] / m.hbar, -W[i] / m.hbar) * psi[i];
    }
    return rate;
  }

  if (which == Which::Transformed) {
    HydroSlots s = slots_from_psi(psi, m.hbar, needs_transformed(m), rho_min_rel);
    RealField Wt = eval_Wt(m, s);
    for (std::size_t i = 0; i < g.size(); ++i) {
      rate[i] = cplx(0.0, -Wt[i] / m.hbar) * psi[i];
    }
    return rate;
  }
  HydroSlots s = slots_from_psi(psi, m.hbar, needs_original(m), rho_min_rel);
  RealField W = eval_W(m, s);
  RealField Wc = eval_Wcal(m, s);
  for (std::size_t i = 0; i < g.size(); ++i) {
    rate[i] = cplx(Wc[i] / m.hbar, -W[i] / m.hbar) * psi[i];
  }
  return rate;
}

void rk4_nonlinear(ComplexField& psi, const ModelSpec& m, Which which, double dt,
                   double rho_min_rel) {
  const std::size_t n = psi.size();
  ComplexField k1 = nonlinear_rate(psi, m, which, rho_min_rel);
  ComplexField stage(*psi.grid);
  for (std::size_t i = 0; i < n; ++i) stage[i] = psi[i] + 0.5 * dt * k1[i];
  ComplexField k2 = nonlinear_rate(stage, m, which, rho_min_rel);
  for (std::size_t i = 0; i < n; ++i) stage[i] = psi[i] + 0.5 * dt * k2[i];
  ComplexField k3 = nonlinear_rate(stage, m, which, rho_min_rel);
  for (std::size_t i = 0; i < n; ++i) stage[i] = psi[i] + dt * k3[i];
  ComplexField k4 = nonlinear_rate(stage, m, which, rho_min_rel);
  for (std::size_t i = 0; i < n; ++i) {
    psi[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

}  // namespace

void step(ComplexField& psi, const ModelSpec& m, Which which, double dt,
          double rho_min_rel) {
  const cplx half_kinetic(0.0, -m.hbar * dt / (4.0 * m.mass));
  apply_spectral_exp_ksq(psi, half_kinetic);
  rk4_nonlinear(psi, m, which, dt, rho_min_rel);
  apply_spectral_exp_ksq(psi, half_kinetic);
}

EvolveResult run(const ComplexField& init, const ModelSpec& m, Which which,
                 const EvolveConfig& cfg) {
  validate_model(m);
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) {
    fail(ErrorCode::Config, "evolution: dt must be positive");
  }
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) {
    fail(ErrorCode::Config, "evolution: T must be positive");
  }
  if (cfg.sample_every < 0) {
    fail(ErrorCode::Config, "evolution: sample_every must be >= 0");
  }
  const double ratio = cfg.T / cfg.dt;
  const long long steps = std::llround(ratio);
  if (steps < 1 || std::abs(double(steps) * cfg.dt - cfg.T) > 1e-9 * std::max(1.0, cfg.T)) {
    fail(ErrorCode::Config, "evolution: T must be an integer number of dt steps");
  }

  EvolveResult result;
  result.steps = int(steps);
  ComplexField psi = init;
  result.samples.push_back({0.0, psi});

  for (long long k = 1; k <= steps; ++k) {
    const double t_next = double(k) * cfg.dt;
    try {
      step(psi, m, which, cfg.dt, cfg.rho_min_rel);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Runtime) {
        fail(ErrorCode::Runtime,
             std::string(e.what()) + " (during the step ending at t = " +
                 std::to_string(t_next) + ")");
      }
      throw;
    }
    for (std::size_t i = 0; i < psi.size(); ++i) {
      if (!std::isfinite(psi[i].real()) || !std::isfinite(psi[i].imag())) {
        fail(ErrorCode::Runtime,
             "non-finite amplitude at t = " + std::to_string(t_next));
      }
    }
    const bool at_end = k == steps;
    if (at_end || (cfg.sample_every > 0 && k % cfg.sample_every == 0)) {
      result.samples.push_back({t_next, psi});
    }
  }
  return result;
}

}  // namespace nlse
