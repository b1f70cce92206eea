// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "grid.hpp"

using namespace nlse;
using std::numbers::pi;

namespace {

double max_abs_diff(const RealField& a, const RealField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("grid construction validates its parameters") {
  CHECK_NOTHROW(Grid(1, {32.0, 0.0}, {256, 1}));
  CHECK_NOTHROW(Grid(2, {16.0, 8.0}, {64, 32}));
  CHECK_THROWS_AS(Grid(3, {1, 1}, {16, 16}), Error);
  CHECK_THROWS_AS(Grid(1, {32.0, 0.0}, {100, 1}), Error);  // not a power of two
  CHECK_THROWS_AS(Grid(1, {32.0, 0.0}, {8, 1}), Error);    // too few points
  CHECK_THROWS_AS(Grid(1, {-4.0, 0.0}, {64, 1}), Error);
  try {
    Grid(1, {32.0, 0.0}, {100, 1});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
}

TEST_CASE("spectral derivative of a single mode is exact") {
  Grid g(1, {32.0, 0.0}, {64, 1});
  RealField f(g), d1_expect(g), d2_expect(g);
  const double k = 2.0 * pi * 3.0 / 32.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0);
    f[i] = std::sin(k * x);
    d1_expect[i] = k * std::cos(k * x);
    d2_expect[i] = -k * k * std::sin(k * x);
  }
  CHECK(max_abs_diff(deriv(f, 0, 1), d1_expect) <= 1e-12);
  CHECK(max_abs_diff(deriv(f, 0, 2), d2_expect) <= 1e-12);
}

TEST_CASE("first derivative twice matches the second derivative") {
  Grid g(1, {32.0, 0.0}, {128, 1});
  RealField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0);
    f[i] = std::exp(std::sin(2.0 * pi * x / 32.0)) + 0.3 * std::cos(4.0 * pi * x / 32.0);
  }
  RealField dd = deriv(deriv(f, 0, 1), 0, 1);
  RealField d2 = deriv(f, 0, 2);
  CHECK(max_abs_diff(dd, d2) <= 1e-10);
}

TEST_CASE("integral of a derivative vanishes") {
  Grid g(1, {32.0, 0.0}, {128, 1});
  RealField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0);
    f[i] = 1.0 / (2.0 + std::sin(2.0 * pi * x / 32.0));
  }
  CHECK(std::abs(integrate(deriv(f, 0, 1))) <= 1e-12);
}

TEST_CASE("quadrature reproduces a Gaussian integral to near machine precision") {
  Grid g(1, {32.0, 0.0}, {256, 1});
  RealField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0) - 16.0;
    f[i] = std::exp(-x * x);
  }
  CHECK(std::abs(integrate(f) - std::sqrt(pi)) <= 1e-12);
}

TEST_CASE("cumulative integral splits a pure mode and a constant correctly") {
  Grid g(1, {32.0, 0.0}, {64, 1});
  RealField cosf(g), constf(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0);
    cosf[i] = std::cos(2.0 * pi * x / 32.0);
    constf[i] = 0.7;
  }
  auto ci = cumulative_integral(cosf, 0);
  CHECK(std::abs(ci.slope) <= 1e-13);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0);
    err = std::max(err, std::abs(ci.periodic[i] - (32.0 / (2.0 * pi)) * std::sin(2.0 * pi * x / 32.0)));
  }
  CHECK(err <= 1e-12);

  auto cc = cumulative_integral(constf, 0);
  CHECK(cc.slope == doctest::Approx(0.7).epsilon(1e-14));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(cc.periodic[i]) <= 1e-13);
}

TEST_CASE("cumulative integral round-trips through the derivative") {
  Grid g(1, {32.0, 0.0}, {128, 1});
  RealField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0);
    f[i] = 0.4 + std::sin(2.0 * pi * x / 32.0) + 0.2 * std::cos(6.0 * pi * x / 32.0);
  }
  auto ci = cumulative_integral(f, 0);
  RealField rebuilt = deriv(ci.periodic, 0, 1);
  for (auto& x : rebuilt.v) x += ci.slope;
  CHECK(max_abs_diff(rebuilt, f) <= 1e-10);
}

TEST_CASE("2D derivatives act on the correct axis and commute") {
  Grid g(2, {16.0, 8.0}, {64, 32});
  RealField f(g), dy_expect(g);
  const double kx = 2.0 * pi * 2.0 / 16.0;
  const double ky = 2.0 * pi * 3.0 / 8.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0), y = g.coord(i, 1);
    f[i] = std::sin(kx * x) * std::cos(ky * y);
    dy_expect[i] = -ky * std::sin(kx * x) * std::sin(ky * y);
  }
  CHECK(max_abs_diff(deriv(f, 1, 1), dy_expect) <= 1e-12);
  RealField dxy = deriv(deriv(f, 0, 1), 1, 1);
  RealField dyx = deriv(deriv(f, 1, 1), 0, 1);
  CHECK(max_abs_diff(dxy, dyx) <= 1e-12);
}

TEST_CASE("2D cumulative integral recovers a separable antiderivative") {
  Grid g(2, {16.0, 8.0}, {32, 32});
  RealField f(g);
  const double ky = 2.0 * pi * 2.0 / 8.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0), y = g.coord(i, 1);
    f[i] = (1.0 + 0.5 * std::cos(2.0 * pi * x / 16.0)) * std::cos(ky * y) * ky;
  }
  // Antiderivative along y of d/dy[(1 + 0.5 cos kx x) sin ky y].
  auto ci = cumulative_integral(f, 1);
  CHECK(std::abs(ci.slope) <= 1e-13);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0), y = g.coord(i, 1);
    const double expect = (1.0 + 0.5 * std::cos(2.0 * pi * x / 16.0)) * std::sin(ky * y);
    err = std::max(err, std::abs(ci.periodic[i] - expect));
  }
  CHECK(err <= 1e-12);
}

TEST_CASE("Nyquist mode: odd derivative is dropped, even derivative kept") {
  Grid g(1, {16.0, 0.0}, {32, 1});
  RealField f(g);
  const double k = pi * 32.0 / 16.0;  // Nyquist wavenumber
  for (std::size_t i = 0; i < g.size(); ++i) {
    f[i] = std::cos(k * g.coord(i, 0));  // alternating +-1 samples
  }
  RealField d1 = deriv(f, 0, 1);
  RealField d2 = deriv(f, 0, 2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(d1[i]) <= 1e-11);
    CHECK(d2[i] == doctest::Approx(-k * k * f[i]).epsilon(1e-12));
  }
}

TEST_CASE("complex spectral phase multiplication matches the analytic free mode") {
  Grid g(1, {32.0, 0.0}, {64, 1});
  ComplexField psi(g);
  const double k = 2.0 * pi * 5.0 / 32.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0);
    psi[i] = std::polar(1.0, k * x);
  }
  const cplx scale = cplx(0.0, -0.125);  // exp(-0.125 i k^2)
  ComplexField out = psi;
  apply_spectral_exp_ksq(out, scale);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const cplx expect = psi[i] * std::exp(scale * k * k);
    CHECK(std::abs(out[i] - expect) <= 1e-12);
  }
}
