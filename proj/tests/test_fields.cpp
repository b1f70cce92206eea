// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "fields.hpp"
#include "grid.hpp"

using namespace nlse;
using std::numbers::pi;

TEST_CASE("plane wave decomposes into unit density and a winding ramp") {
  Grid g(1, {32.0, 0.0}, {64, 1});
  const double hbar = 1.0;
  const int w = 3;
  ComplexField psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    psi[i] = std::polar(1.0, 2.0 * pi * w * g.coord(i, 0) / 32.0);
  }
  HydroFields h = decompose(psi, hbar);
  CHECK(h.winding[0] == w);
  const double k = 2.0 * pi * w / 32.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(h.rho[i] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(h.S[i] == doctest::Approx(hbar * k * g.coord(i, 0)).epsilon(1e-12));
  }
  RealField sx = grad_S(h, 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(sx[i] - hbar * k) <= 1e-12);
  }
}

TEST_CASE("compose inverts decompose bit-tightly") {
  Grid g(1, {32.0, 0.0}, {128, 1});
  ComplexField psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0);
    const double amp = 0.8 + 0.3 * std::cos(2.0 * pi * x / 32.0);
    psi[i] = std::polar(amp, 2.0 * pi * x / 32.0 + 0.4 * std::sin(4.0 * pi * x / 32.0));
  }
  ComplexField back = compose(decompose(psi, 1.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(back[i] - psi[i]) <= 1e-13);
  }
}

TEST_CASE("global-phase anchor lands in [0, 2*pi*hbar)") {
  Grid g(1, {32.0, 0.0}, {64, 1});
  const double hbar = 0.7;
  for (double phase : {-2.5, -0.1, 0.0, 1.7, 3.0}) {
    ComplexField psi(g);
    for (std::size_t i = 0; i < g.size(); ++i) psi[i] = std::polar(1.0, phase);
    HydroFields h = decompose(psi, hbar);
    CHECK(h.S[0] >= 0.0);
    CHECK(h.S[0] < 2.0 * pi * hbar);
    CHECK(std::abs(std::remainder(h.S[0] / hbar - phase, 2.0 * pi)) <= 1e-12);
  }
}

TEST_CASE("hbar scaling enters the stored phase") {
  Grid g(1, {32.0, 0.0}, {64, 1});
  const double hbar = 0.5;
  ComplexField psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    psi[i] = std::polar(1.0, 2.0 * pi * g.coord(i, 0) / 32.0);
  }
  HydroFields h = decompose(psi, hbar);
  CHECK(h.winding[0] == 1);
  // S must satisfy psi = sqrt(rho) exp(iS/hbar): S = hbar * theta.
  CHECK(h.S[10] == doctest::Approx(hbar * 2.0 * pi * g.coord(10, 0) / 32.0).epsilon(1e-12));
}

TEST_CASE("vacuum regions are rejected with the offending site") {
  Grid g(1, {32.0, 0.0}, {64, 1});
  ComplexField psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) psi[i] = 1.0;
  psi[17] = 0.0;
  bool threw = false;
  try {
    decompose(psi, 1.0);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == ErrorCode::Runtime);
    CHECK(std::string(e.what()).find("17") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("2D decomposition tracks both windings") {
  Grid g(2, {16.0, 8.0}, {32, 16});
  const int wx = 2, wy = -1;
  ComplexField psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0), y = g.coord(i, 1);
    const double phase = 2.0 * pi * wx * x / 16.0 + 2.0 * pi * wy * y / 8.0 +
                         0.2 * std::sin(2.0 * pi * x / 16.0) * std::cos(2.0 * pi * y / 8.0);
    psi[i] = std::polar(1.0 + 0.1 * std::cos(2.0 * pi * x / 16.0), phase);
  }
  HydroFields h = decompose(psi, 1.0);
  CHECK(h.winding[0] == wx);
  CHECK(h.winding[1] == wy);
  ComplexField back = compose(h);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(back[i] - psi[i]) <= 1e-12);
  }
  // grad_S must reproduce the analytic phase gradient.
  RealField sy = grad_S(h, 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0), y = g.coord(i, 1);
    const double expect = 2.0 * pi * wy / 8.0 -
                          0.2 * (2.0 * pi / 8.0) * std::sin(2.0 * pi * x / 16.0) *
                              std::sin(2.0 * pi * y / 8.0);
    CHECK(std::abs(sy[i] - expect) <= 1e-10);
  }
}

TEST_CASE("second phase derivative ignores the winding ramp") {
  Grid g(1, {32.0, 0.0}, {64, 1});
  ComplexField psi(g);
  const double a = 0.3, kk = 2.0 * pi / 32.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0);
    psi[i] = std::polar(1.0, 2.0 * pi * 2.0 * x / 32.0 + a * std::sin(kk * x));
  }
  HydroFields h = decompose(psi, 1.0);
  RealField sxx = deriv2_S(h, 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0);
    CHECK(std::abs(sxx[i] + a * kk * kk * std::sin(kk * x)) <= 1e-10);
  }
}

TEST_CASE("quantum potential display matches the analytic value") {
  Grid g(1, {32.0, 0.0}, {128, 1});
  const double hbar = 0.8, mass = 1.3, a = 0.5, k = 2.0 * pi / 32.0;
  RealField rho(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    rho[i] = 1.0 + a * std::cos(k * g.coord(i, 0));
  }
  RealField qp = quantum_potential(rho, hbar, mass);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0);
    const double u = 1.0 + a * std::cos(k * x);
    const double du = -a * k * std::sin(k * x);
    const double ddu = -a * k * k * std::cos(k * x);
    // laplacian(sqrt(u))/sqrt(u) = ddu/(2u) - du^2/(4u^2)
    const double expect = -kQuantumPotentialFactor * hbar * hbar / mass *
                          (ddu / (2.0 * u) - du * du / (4.0 * u * u));
    CHECK(std::abs(qp[i] - expect) <= 1e-10);
  }
}
