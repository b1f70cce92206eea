// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>

#include "diagnostics.hpp"
#include "errors.hpp"
#include "evolve.hpp"
#include "fields.hpp"
#include "grid.hpp"
#include "model.hpp"

using namespace nlse;
using std::numbers::pi;

namespace {

constexpr double kHbar = 0.7;
constexpr double kMass = 1.3;

ModelSpec base_model(ModelKind kind) {
  ModelSpec m;
  m.kind = kind;
  m.hbar = kHbar;
  m.mass = kMass;
  return m;
}

ComplexField plane_wave(const Grid& g, double amp, int winding) {
  ComplexField psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    psi[i] = std::polar(amp, 2.0 * pi * winding * g.coord(i, 0) / g.length(0));
  }
  return psi;
}

ComplexField modulated_state(const Grid& g, double amp2 = 1.0, int winding = 1) {
  ComplexField psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0);
    const double amp =
        std::sqrt(amp2 * (1.0 + 0.3 * std::cos(2.0 * pi * x / g.length(0))));
    psi[i] = std::polar(amp, 2.0 * pi * winding * x / g.length(0));
  }
  return psi;
}

// Periodized Gaussian centered at L/2 under a plane-wave carrier; the packet
// is localized, so seam fluxes are negligible over short runs.
ComplexField gaussian_packet(const Grid& g, double amp, double width, int winding) {
  ComplexField psi(g);
  const double L = g.length(0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0);
    double a = 0.0;
    for (int im = -4; im <= 4; ++im) {
      const double u = x - 0.5 * L + im * L;
      a += std::exp(-u * u / (2.0 * width * width));
    }
    psi[i] = std::polar(amp * a, 2.0 * pi * winding * x / L);
  }
  return psi;
}

double max_drift(const std::vector<DiagnosticsRow>& rows,
                 double (*get)(const DiagnosticsRow&)) {
  double d = 0.0;
  const double ref = get(rows.front());
  for (const auto& r : rows) d = std::max(d, std::abs(get(r) - ref));
  return d;
}

}  // namespace

TEST_CASE("free plane wave reproduces the closed-form stress block") {
  Grid g(1, {16.0, 0.0}, {64, 1});
  const double A = 0.9;
  const int w = 3;
  ComplexField psi = plane_wave(g, A, w);
  ModelSpec m = base_model(ModelKind::Free);

  Stress1D st = stress_1d(m, psi);
  const double k = 2.0 * pi * w / g.length(0);
  const double rho = A * A;
  const double T00 = kHbar * kHbar * k * k * rho / (2.0 * kMass);
  const double T0x = rho * kHbar * k;
  const double Tx0 = std::pow(kHbar * k, 3) * rho / (2.0 * kMass * kMass);
  const double Txx = kHbar * kHbar * k * k * rho / kMass;
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(st.T00[i] == doctest::Approx(T00).epsilon(1e-12));
    CHECK(st.T0x[i] == doctest::Approx(T0x).epsilon(1e-12));
    CHECK(st.Tx0[i] == doctest::Approx(Tx0).epsilon(1e-12));
    CHECK(st.Txx[i] == doctest::Approx(Txx).epsilon(1e-12));
  }
}

TEST_CASE("stress integrals reproduce energy and momentum") {
  Grid g(1, {16.0, 0.0}, {128, 1});
  ComplexField psi = modulated_state(g, 1.1, 1);
  ModelSpec m = base_model(ModelKind::ChenLeeLiu);
  m.alpha = 0.3;

  Stress1D st = stress_1d(m, psi);
  RealField t00 = st.T00, t0x = st.T0x;
  const double E = *total_energy(m, Which::Original, psi);
  const double P = total_momentum(psi, kHbar)[0];
  CHECK(integrate(t00) == doctest::Approx(E).epsilon(1e-12));
  CHECK(integrate(t0x) == doctest::Approx(P).epsilon(1e-12));
}

TEST_CASE("stress continuity holds along a trajectory and tightens under refinement") {
  Grid g(1, {16.0, 0.0}, {128, 1});
  ComplexField psi0 = modulated_state(g, 1.0, 1);
  ModelSpec m = base_model(ModelKind::ChenLeeLiu);
  m.alpha = 0.3;

  auto worst = [&](double dt) {
    EvolveConfig cfg;
    cfg.T = 0.1;
    cfg.dt = dt;
    cfg.sample_every = 5;
    auto rows = compute_diagnostics(m, Which::Original, run(psi0, m, Which::Original, cfg));
    double sres = 0.0, cres = 0.0;
    int seen = 0;
    for (const auto& r : rows) {
      if (!r.stress_continuity_residual) continue;
      sres = std::max(sres, *r.stress_continuity_residual);
      cres = std::max(cres, *r.continuity_residual);
      ++seen;
    }
    REQUIRE(seen > 0);
    CHECK(cres <= 1e-4);
    return sres;
  };

  const double coarse = worst(1e-3);
  const double fine = worst(5e-4);
  CHECK(coarse <= 1e-4);
  CHECK(coarse / fine >= 2.0);
}

TEST_CASE("mass, energy, and momentum stay conserved along a canonical flow") {
  Grid g(1, {16.0, 0.0}, {128, 1});
  ComplexField psi0 = modulated_state(g, 1.0, 1);
  ModelSpec m = base_model(ModelKind::ChenLeeLiu);
  m.alpha = 0.3;

  EvolveConfig cfg;
  cfg.T = 0.1;
  cfg.dt = 1e-3;
  cfg.sample_every = 5;
  auto rows = compute_diagnostics(m, Which::Original, run(psi0, m, Which::Original, cfg));
  REQUIRE(rows.size() == 21);

  CHECK(max_drift(rows, [](const DiagnosticsRow& r) { return r.N; }) <= 1e-10 * rows[0].N);
  CHECK(max_drift(rows, [](const DiagnosticsRow& r) { return *r.E; }) <=
        1e-6 * std::abs(*rows[0].E));
  CHECK(max_drift(rows, [](const DiagnosticsRow& r) { return *r.P[0]; }) <=
        1e-6 * std::max(1.0, std::abs(*rows[0].P[0])));

  // The drift-rate column is the defect quadrature itself.
  for (const auto& r : rows) {
    CHECK(r.P[1] == std::nullopt);  // 1D: no second axis
    REQUIRE(r.galilei[0].has_value());
  }

  // Torus-corrected center-of-mass residual on the windowed interior.
  for (std::size_t k = 2; k + 2 < rows.size(); ++k) {
    REQUIRE(rows[k].ehrenfest[0].has_value());
    CHECK(*rows[k].ehrenfest[0] <= 1e-5);
  }
}

TEST_CASE("boost drift rate matches the differenced boost observable for a packet") {
  // Width 3: the packet leaves ~1e-12 of relative density at the seam, so
  // bulk boost bookkeeping is probed without torus wrap-around effects.
  Grid g(1, {32.0, 0.0}, {256, 1});
  ComplexField psi0 = gaussian_packet(g, 0.8, 3.0, 2);

  EvolveConfig cfg;
  cfg.T = 0.1;
  cfg.dt = 1e-3;
  cfg.sample_every = 5;

  auto gdot_gap = [&](const ModelSpec& m) {
    auto rows = compute_diagnostics(m, Which::Original, run(psi0, m, Which::Original, cfg));
    const double dt_s = rows[1].t - rows[0].t;
    double gap = 0.0;
    for (std::size_t k = 2; k + 2 < rows.size(); ++k) {
      const double gdot = (*rows[k - 2].G[0] - 8.0 * *rows[k - 1].G[0] +
                           8.0 * *rows[k + 1].G[0] - *rows[k + 2].G[0]) /
                          (12.0 * dt_s);
      gap = std::max(gap, std::abs(gdot - *rows[k].galilei[0]));
    }
    return gap;
  };

  ModelSpec free = base_model(ModelKind::Free);
  CHECK(gdot_gap(free) <= 1e-7);

  ModelSpec cll = base_model(ModelKind::ChenLeeLiu);
  cll.alpha = 0.25;
  CHECK(gdot_gap(cll) <= 1e-5);
}

TEST_CASE("plane-wave center of mass sits still despite a finite current") {
  Grid g(1, {16.0, 0.0}, {64, 1});
  ComplexField psi0 = plane_wave(g, 0.9, 2);
  ModelSpec m = base_model(ModelKind::Free);

  EvolveConfig cfg;
  cfg.T = 0.05;
  cfg.dt = 1e-3;
  cfg.sample_every = 5;
  auto rows = compute_diagnostics(m, Which::Original, run(psi0, m, Which::Original, cfg));

  bool saw_window = false;
  for (const auto& r : rows) {
    if (!r.ehrenfest[0]) continue;
    saw_window = true;
    // The raw current integral is finite, so this vanishing is exactly the
    // seam correction at work.
    CHECK(*r.ehrenfest[0] <= 1e-10);
    CHECK(std::abs(*r.P[0]) > 0.1);
  }
  CHECK(saw_window);
}

TEST_CASE("transformed trajectories expose the closed-form energy when it exists") {
  Grid g(1, {16.0, 0.0}, {128, 1});
  ComplexField psi0 = modulated_state(g, 0.9, 1);

  EvolveConfig cfg;
  cfg.T = 0.1;
  cfg.dt = 1e-3;
  cfg.sample_every = 5;

  ModelSpec eck = base_model(ModelKind::Eckhaus);
  eck.alpha = 0.3;
  eck.beta = 0.2;
  auto rows = compute_diagnostics(eck, Which::Transformed, run(psi0, eck, Which::Transformed, cfg));
  REQUIRE(rows[0].E.has_value());
  CHECK(max_drift(rows, [](const DiagnosticsRow& r) { return *r.E; }) <=
        1e-6 * std::abs(*rows[0].E));
  for (const auto& r : rows) {
    CHECK(r.galilei[0] == 0.0);          // no current defect after the map
    CHECK(!r.T00_int.has_value());       // stress block reports original dynamics only
    if (r.continuity_residual) CHECK(*r.continuity_residual <= 1e-4);
  }

  ModelSpec dg = base_model(ModelKind::DGSub);
  dg.alpha = 0.2;
  dg.beta = 0.1;
  auto dgrows = compute_diagnostics(dg, Which::Transformed, run(psi0, dg, Which::Transformed, cfg));
  REQUIRE(dgrows[0].E.has_value());
  CHECK(max_drift(dgrows, [](const DiagnosticsRow& r) { return *r.E; }) <=
        1e-6 * std::max(1.0, std::abs(*dgrows[0].E)));

  ModelSpec cll = base_model(ModelKind::ChenLeeLiu);
  cll.alpha = 0.3;
  auto crows = compute_diagnostics(cll, Which::Transformed, run(psi0, cll, Which::Transformed, cfg));
  CHECK(!crows[0].E.has_value());
  CHECK(!total_energy(cll, Which::Transformed, psi0).has_value());

  ModelSpec dgg = base_model(ModelKind::DGGeneral);
  dgg.D = 0.2;
  dgg.Dprime = 0.15;
  dgg.c = {0.3, -0.2, 0.1, 0.25, -0.15};
  CHECK(!total_energy(dgg, Which::Original, psi0).has_value());
}

TEST_CASE("two-dimensional trajectories fill both axes") {
  Grid g(2, {12.0, 12.0}, {32, 32});
  ComplexField psi0(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0), y = g.coord(i, 1);
    const double amp2 = 1.0 + 0.2 * std::cos(2.0 * pi * x / g.length(0)) +
                        0.15 * std::sin(2.0 * pi * y / g.length(1));
    psi0[i] = std::polar(std::sqrt(amp2), 2.0 * pi * x / g.length(0));
  }
  ModelSpec m = base_model(ModelKind::LogDriftCubic);
  m.beta = 0.15;
  m.alpha_vec = {0.1, -0.2};

  EvolveConfig cfg;
  cfg.T = 0.05;
  cfg.dt = 1e-3;
  cfg.sample_every = 5;
  auto rows = compute_diagnostics(m, Which::Original, run(psi0, m, Which::Original, cfg));
  REQUIRE(rows.size() == 11);

  CHECK(max_drift(rows, [](const DiagnosticsRow& r) { return r.N; }) <= 1e-10 * rows[0].N);
  CHECK(max_drift(rows, [](const DiagnosticsRow& r) { return *r.E; }) <=
        1e-6 * std::max(1.0, std::abs(*rows[0].E)));

  const DiagnosticsRow& r0 = rows.front();
  REQUIRE(r0.P[1].has_value());
  REQUIRE(r0.xc[1].has_value());
  REQUIRE(r0.G[1].has_value());
  REQUIRE(r0.T00_int.has_value());
  REQUIRE(r0.T0y_int.has_value());
  CHECK(!r0.stress_continuity_residual.has_value());

  // Integrated densities against the bilinear observables.
  CHECK(*r0.T00_int == doctest::Approx(*r0.E).epsilon(1e-10));
  CHECK(*r0.T0x_int == doctest::Approx(*r0.P[0]).epsilon(1e-10));
  CHECK(*r0.T0y_int == doctest::Approx(*r0.P[1]).epsilon(1e-10));

  // Constant-in-rho drift current: the rate is alpha_y * N * mass / hbar.
  const double expected = kMass * m.alpha_vec[1] * r0.N / kHbar;
  CHECK(*r0.galilei[1] == doctest::Approx(expected).epsilon(1e-12));

  for (std::size_t k = 2; k + 2 < rows.size(); ++k) {
    REQUIRE(rows[k].ehrenfest[0].has_value());
    REQUIRE(rows[k].ehrenfest[1].has_value());
    CHECK(*rows[k].ehrenfest[0] <= 1e-5);
    CHECK(*rows[k].ehrenfest[1] <= 1e-5);
    CHECK(*rows[k].continuity_residual <= 1e-4);
  }
}

TEST_CASE("diagnostic column names stay pinned") {
  const auto& cols = diagnostics_columns();
  REQUIRE(cols.size() == 18);
  CHECK(cols.front() == "t");
  CHECK(cols[2] == "E");
  CHECK(cols[9] == "continuity_residual");
  CHECK(cols.back() == "stress_continuity_residual");
}
