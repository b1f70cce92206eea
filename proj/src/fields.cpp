// SPDX-License-Identifier: Apache-2.0
#include "fields.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace nlse {

namespace {

using std::numbers::pi;

// Principal-branch wrap into (-pi, pi].
double wrap_angle(double d) {
  d = std::fmod(d, 2.0 * pi);
  if (d <= -pi) d += 2.0 * pi;
  if (d > pi) d -= 2.0 * pi;
  return d;
}

// Net winding of theta along one closed lattice loop.
int loop_winding(const std::vector<double>& theta) {
  double total = 0.0;
  const std::size_t n = theta.size();
  for (std::size_t j = 0; j + 1 < n; ++j) total += wrap_angle(theta[j + 1] - theta[j]);
  total += wrap_angle(theta[0] - theta[n - 1]);
  return int(std::lround(total / (2.0 * pi)));
}

}  // namespace

HydroFields decompose(const ComplexField& psi, double hbar, double rho_min_rel) {
  const Grid& g = *psi.grid;
  HydroFields h;
  h.hbar = hbar;
  h.rho = RealField(g);
  h.S = RealField(g);

  double rho_max = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    h.rho[i] = std::norm(psi[i]);
    rho_max = std::max(rho_max, h.rho[i]);
  }
  h.rho_min = rho_min_rel * rho_max;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(h.rho[i] >= h.rho_min)) {
      fail(ErrorCode::Runtime,
           "decompose: vacuum region at site " + std::to_string(i) + " (rho=" +
               std::to_string(h.rho[i]) + " < floor " + std::to_string(h.rho_min) +
               "); phase unwrap undefined");
    }
  }

  const int nx = g.points(0);
  const int ny = g.dims() == 2 ? g.points(1) : 1;
  std::vector<double> theta(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) theta[i] = std::arg(psi[i]);

  // Anchor: S(site 0) in [0, 2*pi*hbar).
  double s0 = theta[0];
  if (s0 < 0.0) s0 += 2.0 * pi;
  h.S[0] = hbar * s0;

  // Row 0 along x.
  for (int ix = 1; ix < nx; ++ix) {
    const std::size_t i = g.index(ix, 0), p = g.index(ix - 1, 0);
    h.S[i] = h.S[p] + hbar * wrap_angle(theta[i] - theta[p]);
  }
  {
    std::vector<double> row(nx);
    for (int ix = 0; ix < nx; ++ix) row[ix] = theta[g.index(ix, 0)];
    h.winding[0] = loop_winding(row);
  }

  if (g.dims() == 2) {
    // Columns along y, each seeded from row 0.
    for (int ix = 0; ix < nx; ++ix) {
      for (int iy = 1; iy < ny; ++iy) {
        const std::size_t i = g.index(ix, iy), p = g.index(ix, iy - 1);
        h.S[i] = h.S[p] + hbar * wrap_angle(theta[i] - theta[p]);
      }
    }
    std::vector<double> col(ny);
    for (int iy = 0; iy < ny; ++iy) col[iy] = theta[g.index(0, iy)];
    h.winding[1] = loop_winding(col);

    // A single-valued smooth phase has the same winding on every row and
    // column; a mismatch means a phase defect slipped past the density floor.
    for (int iy = 1; iy < ny; ++iy) {
      std::vector<double> row(nx);
      for (int ix = 0; ix < nx; ++ix) row[ix] = theta[g.index(ix, iy)];
      if (loop_winding(row) != h.winding[0]) {
        fail(ErrorCode::Runtime, "decompose: inconsistent x-winding on row " +
                                     std::to_string(iy) + " (phase defect)");
      }
    }
    for (int ix = 1; ix < nx; ++ix) {
      for (int iy = 0; iy < ny; ++iy) col[iy] = theta[g.index(ix, iy)];
      if (loop_winding(col) != h.winding[1]) {
        fail(ErrorCode::Runtime, "decompose: inconsistent y-winding on column " +
                                     std::to_string(ix) + " (phase defect)");
      }
    }
  }
  return h;
}

ComplexField compose(const HydroFields& h) {
  const Grid& g = *h.rho.grid;
  ComplexField psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    psi[i] = std::polar(std::sqrt(h.rho[i]), h.S[i] / h.hbar);
  }
  return psi;
}

namespace {

// S minus its winding ramp; strictly periodic, safe to differentiate.
RealField periodic_part_of_S(const HydroFields& h) {
  const Grid& g = *h.S.grid;
  RealField sp = h.S;
  for (int a = 0; a < g.dims(); ++a) {
    if (h.winding[a] == 0) continue;
    const double slope = 2.0 * pi * h.hbar * h.winding[a] / g.length(a);
    for (std::size_t i = 0; i < g.size(); ++i) sp[i] -= slope * g.coord(i, a);
  }
  return sp;
}

}  // namespace

RealField grad_S(const HydroFields& h, int axis) {
  const Grid& g = *h.S.grid;
  RealField d = deriv(periodic_part_of_S(h), axis, 1);
  const double slope = 2.0 * pi * h.hbar * h.winding[axis] / g.length(axis);
  if (slope != 0.0) {
    for (auto& x : d.v) x += slope;
  }
  return d;
}

RealField deriv2_S(const HydroFields& h, int axis) {
  return deriv(periodic_part_of_S(h), axis, 2);
}

RealField quantum_potential(const RealField& rho, double hbar, double mass) {
  const Grid& g = *rho.grid;
  RealField root(g);
  for (std::size_t i = 0; i < g.size(); ++i) root[i] = std::sqrt(rho[i]);
  RealField lap = deriv(root, 0, 2);
  if (g.dims() == 2) {
    RealField lap_y = deriv(root, 1, 2);
    for (std::size_t i = 0; i < g.size(); ++i) lap[i] += lap_y[i];
  }
  RealField out(g);
  const double c = -kQuantumPotentialFactor * hbar * hbar / mass;
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = c * lap[i] / root[i];
  return out;
}

}  // namespace nlse
