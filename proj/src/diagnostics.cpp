// SPDX-License-Identifier: Apache-2.0
#include "diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <tuple>
#include <utility>

#include "errors.hpp"
#include "expr.hpp"
#include "gauge.hpp"

namespace nlse {
namespace {

RealField density_of(const ComplexField& psi) {
  RealField rho(*psi.grid, 0.0);
  for (std::size_t i = 0; i < psi.size(); ++i) rho[i] = std::norm(psi[i]);
  return rho;
}

double max_abs(const RealField& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
  return m;
}

double k_nyquist(const Grid& g) {
  double k = 0.0;
  for (int a = 0; a < g.dims(); ++a) {
    k = std::max(k, std::numbers::pi * g.points(a) / g.length(a));
  }
  return k;
}

// Fourth-order centered difference over five uniformly spaced samples.
double central4(double m2, double m1, double p1, double p2, double dt) {
  return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * dt);
}

RealField central4(const RealField& m2, const RealField& m1, const RealField& p1,
                   const RealField& p2, double dt) {
  RealField out(*m2.grid, 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = central4(m2[i], m1[i], p1[i], p2[i], dt);
  }
  return out;
}

double kinetic_energy(const ComplexField& psi, double hbar, double mass) {
  const Grid& g = *psi.grid;
  double kin = 0.0;
  for (int a = 0; a < g.dims(); ++a) {
    ComplexField da = deriv(psi, a, 1);
    RealField f(g, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::norm(da[i]);
    kin += integrate(f);
  }
  return hbar * hbar / (2.0 * mass) * kin;
}

// Potential-sector flux along x for densities with slots of order <= 2:
//   Phi(df) = sum_f [ U_{f_x} df + U_{f_xx} d_x(df) - (d_x U_{f_xx}) df ].
// Inserting time derivatives yields the energy flux contribution, spatial
// derivatives the momentum flux contribution.
struct PotentialFlux {
  std::vector<std::pair<Slot, RealField>> first;                    // U_{f_x}
  std::vector<std::tuple<Slot, RealField, RealField>> second;       // U_{f_xx}, d_x
};

PotentialFlux build_flux(const ExprPtr& u, const SlotTables& tb) {
  PotentialFlux out;
  for (const Slot& s : slots_of(u)) {
    if (s.dx == 0) continue;
    ExprPtr p = d_slot(u, s);
    if (p->is_zero()) continue;
    RealField pf = eval(p, tb);
    if (s.dx == 1) {
      out.first.emplace_back(s, std::move(pf));
    } else {
      RealField dpf = apply_derivs(pf, 1, 0);
      out.second.emplace_back(s, std::move(pf), std::move(dpf));
    }
  }
  return out;
}

RealField apply_flux(const PotentialFlux& fx, const Grid& g, const RealField& drho,
                     const RealField& dS) {
  RealField out(g, 0.0);
  RealField drho_x = deriv(drho, 0, 1);
  RealField dS_x = deriv(dS, 0, 1);
  auto pick = [&](Sym f) -> const RealField& { return f == Sym::Rho ? drho : dS; };
  auto pick_x = [&](Sym f) -> const RealField& { return f == Sym::Rho ? drho_x : dS_x; };
  for (const auto& [s, pf] : fx.first) {
    const RealField& df = pick(s.field);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += pf[i] * df[i];
  }
  for (const auto& [s, pf, dpf] : fx.second) {
    const RealField& df = pick(s.field);
    const RealField& dfx = pick_x(s.field);
    for (std::size_t i = 0; i < g.size(); ++i) {
      out[i] += pf[i] * dfx[i] - dpf[i] * df[i];
    }
  }
  return out;
}

// Rate of the coordinate moment integral(x_a rho) implied by continuity.
// The coordinate is the sawtooth representative on [0, L_a), so integrating
// by parts in the continuum gives integral(j_a) - L_a * (flux through the
// seam x_a = 0): the circulating part of the current drops out. Evaluating
// the weighted divergence directly keeps the identity exact for the discrete
// moment as well, without a separate seam quadrature.
double moment_rate(const RealField& divj, int axis) {
  const Grid& g = *divj.grid;
  RealField w(g, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) w[i] = -g.coord(i, axis) * divj[i];
  return integrate(w);
}

}  // namespace

double total_mass(const ComplexField& psi) { return integrate(density_of(psi)); }

std::array<double, 2> total_momentum(const ComplexField& psi, double hbar) {
  const Grid& g = *psi.grid;
  std::array<double, 2> P{0.0, 0.0};
  for (int a = 0; a < g.dims(); ++a) {
    ComplexField da = deriv(psi, a, 1);
    RealField f(g, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      f[i] = std::imag(std::conj(psi[i]) * da[i]);
    }
    P[a] = hbar * integrate(f);
  }
  return P;
}

std::array<double, 2> center_of_mass(const ComplexField& psi) {
  const Grid& g = *psi.grid;
  RealField rho = density_of(psi);
  const double N = integrate(rho);
  std::array<double, 2> xc{0.0, 0.0};
  for (int a = 0; a < g.dims(); ++a) {
    RealField xr(g, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) xr[i] = g.coord(i, a) * rho[i];
    xc[a] = integrate(xr) / N;
  }
  return xc;
}

std::optional<double> total_energy(const ModelSpec& m, Which which,
                                   const ComplexField& psi) {
  const Grid& g = *psi.grid;
  const double kin = kinetic_energy(psi, m.hbar, m.mass);
  if (which == Which::Original) {
    if (!is_canonical(m)) return std::nullopt;
    HydroFields h = decompose(psi, m.hbar);
    return kin + integrate(potential_density(m, h));
  }
  if (!has_transformed_potential(m)) return std::nullopt;
  HydroFields h;
  h.rho = density_of(psi);
  h.S = RealField(g, 0.0);
  h.hbar = m.hbar;
  return kin + integrate(transformed_potential_density(m, h));
}

std::array<double, 2> boost_drift_rate(const ModelSpec& m, Which which,
                                       const ComplexField& psi) {
  std::array<double, 2> out{0.0, 0.0};
  if (which == Which::Transformed) return out;
  const Grid& g = *psi.grid;
  HydroFields h = decompose(psi, m.hbar);
  std::array<RealField, 2> F = current_F(m, h);
  for (int a = 0; a < g.dims(); ++a) out[a] = m.mass * integrate(F[a]);
  return out;
}

Stress1D stress_1d(const ModelSpec& m, const ComplexField& psi) {
  const Grid& g = *psi.grid;
  if (g.dims() != 1) {
    fail(ErrorCode::Model, "energy-momentum block: expected a one-dimensional state");
  }
  if (!is_canonical(m)) {
    fail(ErrorCode::Model,
         kind_name(m.kind) + ": energy-momentum block needs a potential density");
  }
  const double hb = m.hbar, ms = m.mass;
  HydroFields h = decompose(psi, hb);
  ExprPtr u = u_expression(m, 1);
  SlotTables tb = tables_for(u, h);
  RealField U = eval(u, tb);
  Nonlinearity nl = eval_nonlinearity(m, h);

  RealField sqrt_rho(g, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) sqrt_rho[i] = std::sqrt(h.rho[i]);
  RealField dsq = deriv(sqrt_rho, 0, 1);
  RealField lap_sq = deriv(sqrt_rho, 0, 2);
  RealField Sx = grad_S(h, 0);
  ComplexField psi_x = deriv(psi, 0, 1);
  ComplexField psi_xx = deriv(psi, 0, 2);

  // Equation-of-motion time derivatives: the complex field, the density
  // (through the full current, defect included), and the phase (quantum
  // Hamilton-Jacobi; only the real nonlinearity enters).
  ComplexField psi_t(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    psi_t[i] = cplx(0.0, hb / (2.0 * ms)) * psi_xx[i] +
               cplx(nl.Wcal[i] / hb, -nl.W[i] / hb) * psi[i];
  }
  std::array<RealField, 2> j = model_current(m, h);
  RealField rho_t = deriv(j[0], 0, 1);
  for (std::size_t i = 0; i < g.size(); ++i) rho_t[i] = -rho_t[i];
  RealField S_t(g, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    S_t[i] = -Sx[i] * Sx[i] / (2.0 * ms) +
             (hb * hb / (2.0 * ms)) * lap_sq[i] / sqrt_rho[i] - nl.W[i];
  }

  PotentialFlux fx = build_flux(u, tb);
  RealField rho_x = deriv(h.rho, 0, 1);
  RealField fluxE = apply_flux(fx, g, rho_t, S_t);
  RealField fluxP = apply_flux(fx, g, rho_x, Sx);

  Stress1D st{RealField(g, 0.0), RealField(g, 0.0), RealField(g, 0.0),
              RealField(g, 0.0)};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double kin =
        (hb * hb / (2.0 * ms)) * dsq[i] * dsq[i] + h.rho[i] * Sx[i] * Sx[i] / (2.0 * ms);
    st.T00[i] = kin + U[i];
    st.T0x[i] = h.rho[i] * Sx[i];
    const double lag = -hb * std::imag(std::conj(psi[i]) * psi_t[i]) -
                       (hb * hb / (2.0 * ms)) * std::norm(psi_x[i]) - U[i];
    st.Tx0[i] = -(hb * hb / ms) * std::real(std::conj(psi_x[i]) * psi_t[i]) - fluxE[i];
    st.Txx[i] = (hb * hb / ms) * std::norm(psi_x[i]) + lag + fluxP[i];
  }
  return st;
}

const std::vector<std::string>& diagnostics_columns() {
  static const std::vector<std::string> cols = {
      "t",           "N",           "E",           "Px",
      "Py",          "xc_x",        "xc_y",        "Gx",
      "Gy",          "continuity_residual",        "ehrenfest_x",
      "ehrenfest_y", "galilei_x",   "galilei_y",   "T00_int",
      "T0x_int",     "T0y_int",     "stress_continuity_residual"};
  return cols;
}

std::vector<DiagnosticsRow> compute_diagnostics(const ModelSpec& m, Which which,
                                                const EvolveResult& traj) {
  if (traj.samples.empty()) {
    fail(ErrorCode::Config, "diagnostics: the trajectory holds no samples");
  }
  validate_model(m);
  const Grid& g = *traj.samples[0].psi.grid;
  const int d = g.dims();
  const double hb = m.hbar, ms = m.mass;
  const std::size_t n = traj.samples.size();
  const bool orig = which == Which::Original;
  const bool have_E = orig ? is_canonical(m) : has_transformed_potential(m);
  const bool have_stress = orig && is_canonical(m);
  const bool have_flux_block = have_stress && d == 1;

  struct PerSample {
    RealField rho;
    std::array<RealField, 2> j{};
    RealField divj;
    Stress1D st;
  };
  std::vector<PerSample> per(n);
  std::vector<DiagnosticsRow> rows(n);

  for (std::size_t k = 0; k < n; ++k) {
    const ComplexField& psi = traj.samples[k].psi;
    DiagnosticsRow& r = rows[k];
    PerSample& p = per[k];
    r.t = traj.samples[k].t;
    p.rho = density_of(psi);
    r.N = integrate(p.rho);
    const std::array<double, 2> P = total_momentum(psi, hb);
    for (int a = 0; a < d; ++a) {
      RealField xr(g, 0.0);
      for (std::size_t i = 0; i < g.size(); ++i) xr[i] = g.coord(i, a) * p.rho[i];
      const double xca = integrate(xr) / r.N;
      r.P[a] = P[a];
      r.xc[a] = xca;
      r.G[a] = P[a] * r.t - ms * r.N * xca;
    }

    if (orig) {
      HydroFields h = decompose(psi, hb);
      std::array<RealField, 2> F = current_F(m, h);
      for (int a = 0; a < d; ++a) {
        RealField sa = grad_S(h, a);
        p.j[a] = RealField(g, 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
          p.j[a][i] = h.rho[i] * sa[i] / ms - F[a][i];
        }
        r.galilei[a] = ms * integrate(F[a]);
      }
      if (have_E) {
        r.E = kinetic_energy(psi, hb, ms) + integrate(potential_density(m, h));
      }
      if (have_flux_block) {
        p.st = stress_1d(m, psi);
        r.T00_int = integrate(p.st.T00);
        r.T0x_int = integrate(p.st.T0x);
      } else if (have_stress) {
        // 2D: energy and momentum densities in hydrodynamic form.
        RealField sqrt_rho(g, 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) sqrt_rho[i] = std::sqrt(h.rho[i]);
        RealField T00 = potential_density(m, h);
        for (int a = 0; a < d; ++a) {
          RealField dsq = deriv(sqrt_rho, a, 1);
          RealField sa = grad_S(h, a);
          RealField T0a(g, 0.0);
          for (std::size_t i = 0; i < g.size(); ++i) {
            T00[i] += (hb * hb / (2.0 * ms)) * dsq[i] * dsq[i] +
                      h.rho[i] * sa[i] * sa[i] / (2.0 * ms);
            T0a[i] = h.rho[i] * sa[i];
          }
          if (a == 0) r.T0x_int = integrate(T0a);
          if (a == 1) r.T0y_int = integrate(T0a);
        }
        r.T00_int = integrate(T00);
      }
    } else {
      p.j = bilinear_current(psi, hb, ms);
      for (int a = 0; a < d; ++a) r.galilei[a] = 0.0;
      if (have_E) r.E = total_energy(m, which, psi);
    }

    p.divj = RealField(g, 0.0);
    for (int a = 0; a < d; ++a) {
      RealField dj = deriv(p.j[a], a, 1);
      for (std::size_t i = 0; i < g.size(); ++i) p.divj[i] += dj[i];
    }
  }

  // Time-windowed residuals.
  if (n >= 5) {
    const double dt_s = rows[1].t - rows[0].t;
    auto uniform = [&](std::size_t k) {
      for (std::size_t i = k - 2; i <= k + 1; ++i) {
        if (std::abs((rows[i + 1].t - rows[i].t) - dt_s) >
            1e-9 * std::max(1.0, std::abs(dt_s))) {
          return false;
        }
      }
      return true;
    };
    const double kmax = k_nyquist(g);
    for (std::size_t k = 2; k + 2 < n; ++k) {
      if (!uniform(k)) continue;

      RealField rho_t =
          central4(per[k - 2].rho, per[k - 1].rho, per[k + 1].rho, per[k + 2].rho, dt_s);
      double num = 0.0, jmax = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        num = std::max(num, std::abs(rho_t[i] + per[k].divj[i]));
      }
      for (int a = 0; a < d; ++a) jmax = std::max(jmax, max_abs(per[k].j[a]));
      const double denom =
          std::max({max_abs(per[k].divj), 1e-4 * kmax * jmax, 1e-12});
      rows[k].continuity_residual = num / denom;

      for (int a = 0; a < d; ++a) {
        const double xdot = central4(*rows[k - 2].xc[a], *rows[k - 1].xc[a],
                                     *rows[k + 1].xc[a], *rows[k + 2].xc[a], dt_s);
        rows[k].ehrenfest[a] = std::abs(xdot - moment_rate(per[k].divj, a) / rows[k].N);
      }

      if (have_flux_block) {
        RealField T00_t = central4(per[k - 2].st.T00, per[k - 1].st.T00,
                                   per[k + 1].st.T00, per[k + 2].st.T00, dt_s);
        RealField T0x_t = central4(per[k - 2].st.T0x, per[k - 1].st.T0x,
                                   per[k + 1].st.T0x, per[k + 2].st.T0x, dt_s);
        RealField dTx0 = deriv(per[k].st.Tx0, 0, 1);
        RealField dTxx = deriv(per[k].st.Txx, 0, 1);
        double numE = 0.0, numP = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          numE = std::max(numE, std::abs(T00_t[i] + dTx0[i]));
          numP = std::max(numP, std::abs(T0x_t[i] + dTxx[i]));
        }
        const double denE =
            std::max({max_abs(dTx0), 1e-4 * kmax * max_abs(per[k].st.Tx0), 1e-12});
        const double denP =
            std::max({max_abs(dTxx), 1e-4 * kmax * max_abs(per[k].st.Txx), 1e-12});
        rows[k].stress_continuity_residual = std::max(numE / denE, numP / denP);
      }
    }
  }
  return rows;
}

}  // namespace nlse
