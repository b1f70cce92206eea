// SPDX-License-Identifier: Apache-2.0
//
// Exercises the shared library strictly through its C interface: handle
// lifecycles, data marshalling, status codes, and the batch commands.
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "gauge_nlse.h"

namespace {

namespace fs = std::filesystem;
using std::numbers::pi;

struct TempDir {
  fs::path path;
  explicit TempDir(const char* tag) {
    path = fs::temp_directory_path() / (std::string("gn_capi_") + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::string s((std::istreambuf_iterator<char>(f)),
                std::istreambuf_iterator<char>());
  return s;
}

}  // namespace

TEST_CASE("version and catalog strings") {
  CHECK(std::string(gn_version()) == "0.1.0");

  char* catalog = gn_catalog_json();
  REQUIRE(catalog != nullptr);
  const std::string text = catalog;
  gn_string_free(catalog);
  CHECK(text.find("\"deriv_family\"") != std::string::npos);
  CHECK(text.find("\"eckhaus\"") != std::string::npos);
  CHECK(text.find("\"generic\"") != std::string::npos);
}

TEST_CASE("grid lifecycle, accessors, and validation") {
  const double lengths[2] = {16.0, 0.0};
  const int points[2] = {64, 1};
  gn_grid* g = nullptr;
  REQUIRE(gn_grid_create(1, lengths, points, &g) == GN_OK);
  CHECK(gn_grid_dims(g) == 1);
  CHECK(gn_grid_size(g) == 64);
  CHECK(gn_grid_length(g, 0) == doctest::Approx(16.0));
  CHECK(gn_grid_points(g, 0) == 64);
  gn_grid_destroy(g);
  gn_grid_destroy(nullptr);  // must be a no-op

  const int bad_points[2] = {48, 1};  // not a power of two
  gn_grid* bad = nullptr;
  CHECK(gn_grid_create(1, lengths, bad_points, &bad) != GN_OK);
  CHECK(std::strlen(gn_last_error()) > 0);

  gn_grid* from_json = nullptr;
  REQUIRE(gn_grid_from_json(
              "{\"dims\": 2, \"lengths\": [8.0, 4.0], \"points\": [32, 16]}",
              &from_json) == GN_OK);
  CHECK(gn_grid_dims(from_json) == 2);
  CHECK(gn_grid_size(from_json) == 32 * 16);
  CHECK(gn_grid_length(from_json, 1) == doctest::Approx(4.0));
  gn_grid_destroy(from_json);
}

TEST_CASE("model creation, classification, and error codes") {
  gn_model* cll = nullptr;
  REQUIRE(gn_model_create("{\"kind\": \"chen_lee_liu\", \"alpha\": 0.3}", &cll) ==
          GN_OK);
  CHECK(gn_model_is_canonical(cll) == 1);
  CHECK(gn_model_has_transformed_potential(cll) == 0);
  gn_model_destroy(cll);

  gn_model* dgsub = nullptr;
  REQUIRE(gn_model_create(
              "{\"kind\": \"dg_sub\", \"alpha\": 0.2, \"beta\": 0.1}", &dgsub) ==
          GN_OK);
  CHECK(gn_model_is_canonical(dgsub) == 1);
  CHECK(gn_model_has_transformed_potential(dgsub) == 1);
  gn_model_destroy(dgsub);

  gn_model* out = nullptr;
  CHECK(gn_model_create("{\"kind\": \"unheard_of\"}", &out) == GN_ERR_CONFIG);
  CHECK(gn_model_create("not json at all", &out) == GN_ERR_CONFIG);
  CHECK(gn_model_create("{\"kind\": \"chen_lee_liu\"}", &out) == GN_ERR_CONFIG);
  // Structurally valid JSON, physically invalid constants.
  CHECK(gn_model_create(
            "{\"kind\": \"chen_lee_liu\", \"alpha\": 0.3, \"hbar\": -1.0}",
            &out) == GN_ERR_MODEL);
}

TEST_CASE("field set/get round-trips bit-exactly") {
  const double lengths[2] = {8.0, 0.0};
  const int points[2] = {32, 1};
  gn_grid* g = nullptr;
  REQUIRE(gn_grid_create(1, lengths, points, &g) == GN_OK);

  gn_cfield* f = nullptr;
  REQUIRE(gn_field_create(g, &f) == GN_OK);
  REQUIRE(gn_field_size(f) == 32);

  std::vector<double> in(64), back(64);
  for (int i = 0; i < 32; ++i) {
    in[2 * i] = std::cos(0.37 * i);
    in[2 * i + 1] = std::sin(0.91 * i) * 0.25;
  }
  REQUIRE(gn_field_set(f, in.data()) == GN_OK);
  REQUIRE(gn_field_get(f, back.data()) == GN_OK);
  CHECK(std::memcmp(in.data(), back.data(), in.size() * sizeof(double)) == 0);

  gn_field_destroy(f);
  gn_grid_destroy(g);
}

TEST_CASE("initial conditions parse and evaluate") {
  const double lengths[2] = {16.0, 0.0};
  const int points[2] = {64, 1};
  gn_grid* g = nullptr;
  REQUIRE(gn_grid_create(1, lengths, points, &g) == GN_OK);

  gn_cfield* pw = nullptr;
  REQUIRE(gn_initial_condition(
              g, "{\"type\": \"plane_wave\", \"amplitude\": 1.5, \"winding\": 1}",
              &pw) == GN_OK);
  std::vector<double> v(2 * 64);
  REQUIRE(gn_field_get(pw, v.data()) == GN_OK);
  // Site 0 sits at phase zero; halfway across the box the carrier flips sign.
  CHECK(v[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v[2 * 32] == doctest::Approx(-1.5).epsilon(1e-12));
  for (int i = 0; i < 64; ++i) {
    const double mag = std::hypot(v[2 * i], v[2 * i + 1]);
    CHECK(mag == doctest::Approx(1.5).epsilon(1e-12));
  }
  gn_field_destroy(pw);

  gn_cfield* bad = nullptr;
  CHECK(gn_initial_condition(g, "{\"type\": \"vortex_sheet\"}", &bad) ==
        GN_ERR_CONFIG);
  CHECK(gn_initial_condition(
            g, "{\"type\": \"modulated\", \"depth\": 1.5}", &bad) ==
        GN_ERR_CONFIG);

  gn_grid_destroy(g);
}

TEST_CASE("decompose and compose invert each other") {
  const double lengths[2] = {16.0, 0.0};
  const int points[2] = {64, 1};
  gn_grid* g = nullptr;
  REQUIRE(gn_grid_create(1, lengths, points, &g) == GN_OK);
  gn_model* m = nullptr;
  REQUIRE(gn_model_create(
              "{\"kind\": \"free\", \"hbar\": 0.7, \"mass\": 1.3}", &m) == GN_OK);

  gn_cfield* psi = nullptr;
  REQUIRE(gn_initial_condition(g,
                               "{\"type\": \"modulated\", \"amplitude\": 1.2, "
                               "\"depth\": 0.4, \"winding\": 2}",
                               &psi) == GN_OK);

  gn_hydro* h = nullptr;
  REQUIRE(gn_decompose(m, psi, 1e-12, &h) == GN_OK);

  std::vector<double> rho(64), S(64);
  REQUIRE(gn_hydro_get(h, rho.data(), S.data()) == GN_OK);
  for (double r : rho) CHECK(r > 0.0);

  gn_cfield* rebuilt = nullptr;
  REQUIRE(gn_compose(h, &rebuilt) == GN_OK);
  std::vector<double> a(2 * 64), b(2 * 64);
  REQUIRE(gn_field_get(psi, a.data()) == GN_OK);
  REQUIRE(gn_field_get(rebuilt, b.data()) == GN_OK);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  CHECK(worst < 1e-12);

  gn_field_destroy(rebuilt);
  gn_hydro_destroy(h);
  gn_field_destroy(psi);
  gn_model_destroy(m);
  gn_grid_destroy(g);
}

TEST_CASE("homogeneous states have a divergence-free defect") {
  const double lengths[2] = {16.0, 0.0};
  const int points[2] = {64, 1};
  gn_grid* g = nullptr;
  REQUIRE(gn_grid_create(1, lengths, points, &g) == GN_OK);
  gn_model* m = nullptr;
  REQUIRE(gn_model_create("{\"kind\": \"chen_lee_liu\", \"alpha\": 0.3}", &m) ==
          GN_OK);

  gn_cfield* psi = nullptr;
  REQUIRE(gn_initial_condition(
              g, "{\"type\": \"plane_wave\", \"winding\": 1}", &psi) == GN_OK);
  gn_hydro* h = nullptr;
  REQUIRE(gn_decompose(m, psi, 1e-12, &h) == GN_OK);

  std::vector<double> W(64), Wcal(64);
  REQUIRE(gn_eval_nonlinearity(m, h, W.data(), Wcal.data()) == GN_OK);
  for (int i = 0; i < 64; ++i) {
    CHECK(std::isfinite(W[i]));
    CHECK(std::abs(Wcal[i]) < 1e-12);  // div F vanishes on a uniform state
  }

  gn_hydro_destroy(h);
  gn_field_destroy(psi);
  gn_model_destroy(m);
  gn_grid_destroy(g);
}

TEST_CASE("gauge pipeline on a diffusive model") {
  const double lengths[2] = {16.0, 0.0};
  const int points[2] = {128, 1};
  gn_grid* g = nullptr;
  REQUIRE(gn_grid_create(1, lengths, points, &g) == GN_OK);
  gn_model* m = nullptr;
  REQUIRE(gn_model_create(
              "{\"kind\": \"dg_sub\", \"alpha\": 0.25, \"beta\": 0.15}", &m) ==
          GN_OK);

  gn_cfield* psi = nullptr;
  REQUIRE(gn_initial_condition(g,
                               "{\"type\": \"modulated\", \"amplitude\": 1.1, "
                               "\"depth\": 0.35, \"winding\": 1}",
                               &psi) == GN_OK);
  gn_hydro* h = nullptr;
  REQUIRE(gn_decompose(m, psi, 1e-12, &h) == GN_OK);

  gn_gauge* gen = nullptr;
  REQUIRE(gn_compute_sigma(m, h, &gen) == GN_OK);
  double kappa[2] = {-1.0, -1.0};
  int compatible[2] = {0, 0};
  REQUIRE(gn_gauge_info(gen, kappa, compatible) == GN_OK);
  CHECK(kappa[0] == doctest::Approx(0.0).epsilon(1e-14));  // gradient drift
  CHECK(compatible[0] == 1);

  std::vector<double> sigma(128);
  REQUIRE(gn_gauge_sigma_values(gen, g, sigma.data()) == GN_OK);
  for (double s : sigma) CHECK(std::isfinite(s));

  gn_cfield* phi = nullptr;
  REQUIRE(gn_apply_gauge(psi, gen, &phi) == GN_OK);

  // After the map the plain bilinear current must reproduce the model
  // current of the original state.
  std::vector<double> jm(128), jb(128);
  REQUIRE(gn_model_current(m, h, 0, jm.data()) == GN_OK);
  REQUIRE(gn_bilinear_current(m, phi, 0, jb.data()) == GN_OK);
  double worst = 0.0, scale = 1.0;
  for (int i = 0; i < 128; ++i) {
    worst = std::max(worst, std::abs(jm[i] - jb[i]));
    scale = std::max(scale, std::abs(jm[i]));
  }
  CHECK(worst / scale < 1e-9);

  CHECK(gn_model_current(m, h, 1, jm.data()) == GN_ERR_RUNTIME);  // no y axis

  gn_field_destroy(phi);
  gn_gauge_destroy(gen);
  gn_hydro_destroy(h);
  gn_field_destroy(psi);
  gn_model_destroy(m);
  gn_grid_destroy(g);
}

TEST_CASE("gauge failures come back as status codes") {
  // A rotational drift current: sigma cannot exist on a 2D box.
  const double lengths[2] = {8.0, 8.0};
  const int points[2] = {32, 32};
  gn_grid* g = nullptr;
  REQUIRE(gn_grid_create(2, lengths, points, &g) == GN_OK);
  gn_model* m = nullptr;
  REQUIRE(gn_model_create(
              "{\"kind\": \"generic\", \"canonical\": false,"
              " \"W\": {\"op\": \"mul\", \"args\": [0.2, {\"slot\": \"rho\"}]},"
              " \"F\": [{\"slot\": \"S\", \"dy\": 1},"
              "         {\"op\": \"neg\", \"args\": [{\"slot\": \"S\", \"dx\": 1}]}]}",
              &m) == GN_OK);

  gn_cfield* psi = nullptr;
  gn_field_create(g, &psi);
  std::vector<double> v(2 * 32 * 32);
  for (int iy = 0; iy < 32; ++iy) {
    for (int ix = 0; ix < 32; ++ix) {
      const double x = 8.0 * ix / 32.0, y = 8.0 * iy / 32.0;
      const double amp = std::sqrt(1.2 + 0.3 * std::cos(2.0 * pi * x / 8.0) +
                                   0.2 * std::sin(2.0 * pi * y / 8.0));
      const double ph = 2.0 * pi * x / 8.0 + 0.2 * std::sin(2.0 * pi * y / 8.0);
      const std::size_t i = std::size_t(iy) * 32 + ix;
      v[2 * i] = amp * std::cos(ph);
      v[2 * i + 1] = amp * std::sin(ph);
    }
  }
  REQUIRE(gn_field_set(psi, v.data()) == GN_OK);
  gn_hydro* h = nullptr;
  REQUIRE(gn_decompose(m, psi, 1e-12, &h) == GN_OK);

  gn_gauge* gen = nullptr;
  CHECK(gn_compute_sigma(m, h, &gen) == GN_ERR_GAUGE);
  CHECK(std::strlen(gn_last_error()) > 0);

  gn_hydro_destroy(h);
  gn_field_destroy(psi);
  gn_model_destroy(m);
  gn_grid_destroy(g);

  // Slope off the momentum lattice: sigma exists, the phase map does not.
  const double lengths1[2] = {16.0, 0.0};
  const int points1[2] = {64, 1};
  gn_grid* g1 = nullptr;
  REQUIRE(gn_grid_create(1, lengths1, points1, &g1) == GN_OK);
  gn_model* cll = nullptr;
  REQUIRE(gn_model_create("{\"kind\": \"chen_lee_liu\", \"alpha\": 0.19}",
                          &cll) == GN_OK);
  gn_cfield* psi1 = nullptr;
  REQUIRE(gn_initial_condition(
              g1, "{\"type\": \"modulated\", \"depth\": 0.3, \"winding\": 1}",
              &psi1) == GN_OK);
  gn_hydro* h1 = nullptr;
  REQUIRE(gn_decompose(cll, psi1, 1e-12, &h1) == GN_OK);
  gn_gauge* gen1 = nullptr;
  REQUIRE(gn_compute_sigma(cll, h1, &gen1) == GN_OK);
  int compat[2] = {1, 1};
  REQUIRE(gn_gauge_info(gen1, nullptr, compat) == GN_OK);
  CHECK(compat[0] == 0);
  gn_cfield* phi1 = nullptr;
  CHECK(gn_apply_gauge(psi1, gen1, &phi1) == GN_ERR_GAUGE);

  gn_gauge_destroy(gen1);
  gn_hydro_destroy(h1);
  gn_field_destroy(psi1);
  gn_model_destroy(cll);
  gn_grid_destroy(g1);
}

TEST_CASE("free evolution reproduces the exact propagator") {
  const double L = 16.0, hbar = 0.7, mass = 1.3, T = 0.5;
  const double lengths[2] = {L, 0.0};
  const int points[2] = {64, 1};
  gn_grid* g = nullptr;
  REQUIRE(gn_grid_create(1, lengths, points, &g) == GN_OK);
  gn_model* m = nullptr;
  REQUIRE(gn_model_create("{\"kind\": \"free\", \"hbar\": 0.7, \"mass\": 1.3}",
                          &m) == GN_OK);
  gn_cfield* psi0 = nullptr;
  REQUIRE(gn_initial_condition(
              g, "{\"type\": \"plane_wave\", \"winding\": 1}", &psi0) == GN_OK);

  gn_cfield* psiT = nullptr;
  REQUIRE(gn_evolve(m, psi0, 0, T, 0.01, 1e-12, &psiT) == GN_OK);

  const double k = 2.0 * pi / L;
  const double omega = hbar * k * k / (2.0 * mass);
  std::vector<double> v(2 * 64);
  REQUIRE(gn_field_get(psiT, v.data()) == GN_OK);
  double worst = 0.0;
  for (int i = 0; i < 64; ++i) {
    const double x = L * i / 64.0;
    const std::complex<double> expect =
        std::polar(1.0, k * x - omega * T);
    worst = std::max(worst, std::abs(std::complex<double>(v[2 * i], v[2 * i + 1]) -
                                     expect));
  }
  CHECK(worst < 1e-9);

  // T not an integer multiple of dt is a configuration error.
  gn_cfield* reject = nullptr;
  CHECK(gn_evolve(m, psi0, 0, 0.5, 0.013, 1e-12, &reject) == GN_ERR_CONFIG);

  gn_field_destroy(psiT);
  gn_field_destroy(psi0);
  gn_model_destroy(m);
  gn_grid_destroy(g);
}

TEST_CASE("batch commands write artifacts and surface status codes") {
  TempDir dir("cmds");
  const char* config =
      "{\"model\": {\"kind\": \"dg_sub\", \"alpha\": 0.3, \"beta\": 0.1},"
      " \"evolution\": {\"T\": 0.02, \"dt\": 0.001, \"which\": \"both\","
      " \"sample_every\": 10}}";

  REQUIRE(gn_cmd_run(config, dir.str().c_str(), 1) == GN_OK);
  CHECK(fs::exists(dir.path / "summary.json"));
  CHECK(fs::exists(dir.path / "diagnostics.csv"));
  CHECK(fs::exists(dir.path / "diagnostics_transformed.csv"));
  CHECK(fs::exists(dir.path / "snapshots.jsonl"));
  CHECK(slurp(dir.path / "summary.json").find("\"equivalence\"") !=
        std::string::npos);

  REQUIRE(gn_cmd_transform(config, dir.str().c_str(), 1) == GN_OK);
  CHECK(slurp(dir.path / "transform.json").find("\"available\": true") !=
        std::string::npos);

  REQUIRE(gn_cmd_derive(config, dir.str().c_str(), 1) == GN_OK);
  CHECK(fs::exists(dir.path / "derive.json"));

  int all_pass = 0;
  REQUIRE(gn_cmd_check(config, dir.str().c_str(), 1, &all_pass) == GN_OK);
  CHECK(all_pass == 1);
  CHECK(slurp(dir.path / "check.json").find("\"all_pass\": true") !=
        std::string::npos);

  CHECK(gn_cmd_run("this is not json", dir.str().c_str(), 1) == GN_ERR_CONFIG);
  CHECK(gn_cmd_run("{\"model\": {\"kind\": \"dg_sub\", \"alpha\": 0.1, "
                   "\"beta\": 0.1}, \"grain\": 7}",
                   dir.str().c_str(), 1) == GN_ERR_CONFIG);
  // Valid model, but its closed forms only exist in 1D.
  CHECK(gn_cmd_run("{\"model\": {\"kind\": \"eckhaus\", \"alpha\": 0.2, "
                   "\"beta\": 0.3}, \"grid\": {\"dims\": 2, \"lengths\": "
                   "[8.0, 8.0], \"points\": [16, 16]}}",
                   dir.str().c_str(), 1) == GN_ERR_MODEL);
}

TEST_CASE("null arguments are reported, not crashed") {
  CHECK(gn_field_get(nullptr, nullptr) == GN_ERR_RUNTIME);
  CHECK(std::string(gn_last_error()).find("null") != std::string::npos);
  CHECK(gn_cmd_run(nullptr, "/tmp", 0) == GN_ERR_RUNTIME);
  gn_model* out = nullptr;
  CHECK(gn_model_create(nullptr, &out) == GN_ERR_RUNTIME);
}
