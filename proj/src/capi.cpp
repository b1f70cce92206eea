// SPDX-License-Identifier: Apache-2.0
#include "gauge_nlse.h"

#include <cstring>
#include <memory>
#include <string>
#include <utility>

#include "commands.hpp"
#include "errors.hpp"
#include "evolve.hpp"
#include "fields.hpp"
#include "gauge.hpp"
#include "grid.hpp"
#include "model.hpp"

// Handles own a stable Grid copy and re-point their fields at it, so the
// caller may destroy a gn_grid while derived objects are still alive.
struct gn_grid {
  nlse::Grid g;
};
struct gn_model {
  nlse::ModelSpec m;
};
struct gn_cfield {
  std::unique_ptr<nlse::Grid> grid;
  nlse::ComplexField f;
};
struct gn_hydro {
  std::unique_ptr<nlse::Grid> grid;
  nlse::HydroFields h;
};
struct gn_gauge {
  std::unique_ptr<nlse::Grid> grid;
  nlse::GaugeGenerator gen;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <class Fn>
gn_status guarded(Fn&& fn) {
  try {
    fn();
    return GN_OK;
  } catch (const nlse::Error& e) {
    set_error(e.what());
    return gn_status(int(e.code()));
  } catch (const std::exception& e) {
    set_error(e.what());
    return GN_ERR_RUNTIME;
  }
}

gn_status null_arg(const char* which) {
  set_error(std::string("null argument: ") + which);
  return GN_ERR_RUNTIME;
}

gn_cfield* wrap_field(nlse::ComplexField f) {
  auto* out = new gn_cfield;
  out->grid = std::make_unique<nlse::Grid>(*f.grid);
  out->f = std::move(f);
  out->f.grid = out->grid.get();
  return out;
}

gn_hydro* wrap_hydro(nlse::HydroFields h) {
  auto* out = new gn_hydro;
  out->grid = std::make_unique<nlse::Grid>(*h.rho.grid);
  out->h = std::move(h);
  out->h.rho.grid = out->grid.get();
  out->h.S.grid = out->grid.get();
  return out;
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* gn_version(void) { return nlse::kVersionString; }

const char* gn_last_error(void) { return g_last_error.c_str(); }

void gn_string_free(char* s) { delete[] s; }

/* --- grids ---------------------------------------------------------------- */

gn_status gn_grid_create(int dims, const double* lengths, const int* points,
                         gn_grid** out) {
  if (!lengths || !points || !out) return null_arg("gn_grid_create");
  return guarded([&] {
    std::array<double, 2> L{lengths[0], dims > 1 ? lengths[1] : 0.0};
    std::array<int, 2> N{points[0], dims > 1 ? points[1] : 1};
    *out = new gn_grid{nlse::Grid(dims, L, N)};
  });
}

void gn_grid_destroy(gn_grid* g) { delete g; }

int gn_grid_dims(const gn_grid* g) { return g ? g->g.dims() : 0; }

long long gn_grid_size(const gn_grid* g) {
  return g ? (long long)g->g.size() : 0;
}

double gn_grid_length(const gn_grid* g, int axis) {
  return g && axis >= 0 && axis < g->g.dims() ? g->g.length(axis) : 0.0;
}

int gn_grid_points(const gn_grid* g, int axis) {
  return g && axis >= 0 && axis < g->g.dims() ? g->g.points(axis) : 0;
}

gn_status gn_grid_from_json(const char* json_text, gn_grid** out) {
  if (!json_text || !out) return null_arg("gn_grid_from_json");
  return guarded([&] { *out = new gn_grid{nlse::grid_from_json(json_text)}; });
}

/* --- models --------------------------------------------------------------- */

gn_status gn_model_create(const char* json_text, gn_model** out) {
  if (!json_text || !out) return null_arg("gn_model_create");
  return guarded([&] { *out = new gn_model{nlse::model_from_json(json_text)}; });
}

void gn_model_destroy(gn_model* m) { delete m; }

char* gn_catalog_json(void) { return copy_string(nlse::catalog_json()); }

int gn_model_is_canonical(const gn_model* m) {
  return m && nlse::is_canonical(m->m) ? 1 : 0;
}

int gn_model_has_transformed_potential(const gn_model* m) {
  return m && nlse::has_transformed_potential(m->m) ? 1 : 0;
}

/* --- fields --------------------------------------------------------------- */

gn_status gn_field_create(const gn_grid* g, gn_cfield** out) {
  if (!g || !out) return null_arg("gn_field_create");
  return guarded([&] { *out = wrap_field(nlse::ComplexField(g->g)); });
}

void gn_field_destroy(gn_cfield* f) { delete f; }

long long gn_field_size(const gn_cfield* f) {
  return f ? (long long)f->f.size() : 0;
}

gn_status gn_field_get(const gn_cfield* f, double* re_im) {
  if (!f || !re_im) return null_arg("gn_field_get");
  for (std::size_t i = 0; i < f->f.size(); ++i) {
    re_im[2 * i] = f->f[i].real();
    re_im[2 * i + 1] = f->f[i].imag();
  }
  return GN_OK;
}

gn_status gn_field_set(gn_cfield* f, const double* re_im) {
  if (!f || !re_im) return null_arg("gn_field_set");
  for (std::size_t i = 0; i < f->f.size(); ++i) {
    f->f[i] = nlse::cplx(re_im[2 * i], re_im[2 * i + 1]);
  }
  return GN_OK;
}

gn_status gn_initial_condition(const gn_grid* g, const char* json_text,
                               gn_cfield** out) {
  if (!g || !json_text || !out) return null_arg("gn_initial_condition");
  return guarded(
      [&] { *out = wrap_field(nlse::initial_from_json(g->g, json_text)); });
}

/* --- density/phase decomposition ------------------------------------------ */

gn_status gn_decompose(const gn_model* m, const gn_cfield* psi,
                       double rho_min_rel, gn_hydro** out) {
  if (!m || !psi || !out) return null_arg("gn_decompose");
  return guarded(
      [&] { *out = wrap_hydro(nlse::decompose(psi->f, m->m.hbar, rho_min_rel)); });
}

void gn_hydro_destroy(gn_hydro* h) { delete h; }

gn_status gn_hydro_get(const gn_hydro* h, double* rho, double* S) {
  if (!h) return null_arg("gn_hydro_get");
  for (std::size_t i = 0; i < h->h.rho.size(); ++i) {
    if (rho) rho[i] = h->h.rho[i];
    if (S) S[i] = h->h.S[i];
  }
  return GN_OK;
}

gn_status gn_compose(const gn_hydro* h, gn_cfield** out) {
  if (!h || !out) return null_arg("gn_compose");
  return guarded([&] { *out = wrap_field(nlse::compose(h->h)); });
}

/* --- nonlinearity and currents -------------------------------------------- */

gn_status gn_eval_nonlinearity(const gn_model* m, const gn_hydro* h, double* W,
                               double* Wcal) {
  if (!m || !h) return null_arg("gn_eval_nonlinearity");
  return guarded([&] {
    nlse::Nonlinearity nl = nlse::eval_nonlinearity(m->m, h->h);
    for (std::size_t i = 0; i < nl.W.size(); ++i) {
      if (W) W[i] = nl.W[i];
      if (Wcal) Wcal[i] = nl.Wcal[i];
    }
  });
}

gn_status gn_transformed_nonlinearity(const gn_model* m, const gn_hydro* h,
                                      double* Wtilde) {
  if (!m || !h || !Wtilde) return null_arg("gn_transformed_nonlinearity");
  return guarded([&] {
    nlse::RealField w = nlse::transformed_nonlinearity(m->m, h->h);
    for (std::size_t i = 0; i < w.size(); ++i) Wtilde[i] = w[i];
  });
}

gn_status gn_model_current(const gn_model* m, const gn_hydro* h, int axis,
                           double* j) {
  if (!m || !h || !j) return null_arg("gn_model_current");
  return guarded([&] {
    if (axis < 0 || axis >= h->grid->dims()) {
      nlse::fail(nlse::ErrorCode::Runtime, "current axis out of range");
    }
    std::array<nlse::RealField, 2> jj = nlse::model_current(m->m, h->h);
    for (std::size_t i = 0; i < jj[axis].size(); ++i) j[i] = jj[axis][i];
  });
}

gn_status gn_bilinear_current(const gn_model* m, const gn_cfield* phi, int axis,
                              double* j) {
  if (!m || !phi || !j) return null_arg("gn_bilinear_current");
  return guarded([&] {
    if (axis < 0 || axis >= phi->grid->dims()) {
      nlse::fail(nlse::ErrorCode::Runtime, "current axis out of range");
    }
    std::array<nlse::RealField, 2> jj =
        nlse::bilinear_current(phi->f, m->m.hbar, m->m.mass);
    for (std::size_t i = 0; i < jj[axis].size(); ++i) j[i] = jj[axis][i];
  });
}

/* --- the phase map ---------------------------------------------------------- */

gn_status gn_compute_sigma(const gn_model* m, const gn_hydro* h,
                           gn_gauge** out) {
  if (!m || !h || !out) return null_arg("gn_compute_sigma");
  return guarded([&] {
    nlse::GaugeGenerator gen = nlse::compute_sigma(m->m, h->h);
    auto* wrapped = new gn_gauge;
    wrapped->grid = std::make_unique<nlse::Grid>(*gen.periodic.grid);
    wrapped->gen = std::move(gen);
    wrapped->gen.periodic.grid = wrapped->grid.get();
    *out = wrapped;
  });
}

void gn_gauge_destroy(gn_gauge* gen) { delete gen; }

gn_status gn_gauge_info(const gn_gauge* gen, double* kappa, int* compatible) {
  if (!gen) return null_arg("gn_gauge_info");
  for (int a = 0; a < 2; ++a) {
    if (kappa) kappa[a] = gen->gen.kappa[a];
    if (compatible) compatible[a] = gen->gen.compatible[a] ? 1 : 0;
  }
  return GN_OK;
}

gn_status gn_gauge_sigma_values(const gn_gauge* gen, const gn_grid* g,
                                double* sigma) {
  if (!gen || !g || !sigma) return null_arg("gn_gauge_sigma_values");
  return guarded([&] {
    nlse::RealField s = nlse::sigma_values(gen->gen, g->g);
    for (std::size_t i = 0; i < s.size(); ++i) sigma[i] = s[i];
  });
}

gn_status gn_apply_gauge(const gn_cfield* psi, const gn_gauge* gen,
                         gn_cfield** out) {
  if (!psi || !gen || !out) return null_arg("gn_apply_gauge");
  return guarded(
      [&] { *out = wrap_field(nlse::apply_gauge(psi->f, gen->gen)); });
}

/* --- evolution -------------------------------------------------------------- */

gn_status gn_evolve(const gn_model* m, const gn_cfield* psi0, int transformed,
                    double T, double dt, double rho_min_rel,
                    gn_cfield** out_final) {
  if (!m || !psi0 || !out_final) return null_arg("gn_evolve");
  return guarded([&] {
    nlse::EvolveConfig evo;
    evo.T = T;
    evo.dt = dt;
    evo.sample_every = 0;
    evo.rho_min_rel = rho_min_rel;
    nlse::EvolveResult r = nlse::run(
        psi0->f, m->m,
        transformed ? nlse::Which::Transformed : nlse::Which::Original, evo);
    *out_final = wrap_field(std::move(r.samples.back().psi));
  });
}

/* --- batch commands ---------------------------------------------------------- */

gn_status gn_cmd_run(const char* config_json, const char* out_dir,
                     int desk_preset) {
  if (!config_json || !out_dir) return null_arg("gn_cmd_run");
  return guarded(
      [&] { nlse::cmd_run(config_json, out_dir, desk_preset != 0); });
}

gn_status gn_cmd_transform(const char* config_json, const char* out_dir,
                           int desk_preset) {
  if (!config_json || !out_dir) return null_arg("gn_cmd_transform");
  return guarded(
      [&] { nlse::cmd_transform(config_json, out_dir, desk_preset != 0); });
}

gn_status gn_cmd_derive(const char* config_json, const char* out_dir,
                        int desk_preset) {
  if (!config_json || !out_dir) return null_arg("gn_cmd_derive");
  return guarded(
      [&] { nlse::cmd_derive(config_json, out_dir, desk_preset != 0); });
}

gn_status gn_cmd_check(const char* config_json, const char* out_dir,
                       int desk_preset, int* all_pass) {
  if (!config_json || !out_dir) return null_arg("gn_cmd_check");
  return guarded([&] {
    const bool ok = nlse::cmd_check(config_json, out_dir, desk_preset != 0);
    if (all_pass) *all_pass = ok ? 1 : 0;
  });
}

}  // extern "C"
