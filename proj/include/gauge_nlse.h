/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to the gauge-equivalence toolkit for Schrodinger equations
 * whose nonlinearity carries an imaginary part of divergence form.
 *
 * Conventions shared by every entry point:
 *   - Functions that can fail return gn_status; GN_OK is zero.  On failure
 *     gn_last_error() returns a thread-local message describing the problem,
 *     valid until the same thread's next failing call.
 *   - Objects are opaque handles created by gn_*_create functions and
 *     released by the matching gn_*_destroy.  Destroy functions accept NULL.
 *   - Output parameters are written only on success.  Array outputs must be
 *     allocated by the caller at the documented size.
 *   - Complex fields cross the boundary as interleaved doubles
 *     (re, im, re, im, ...) in the grid's row-major site order, 2 * size
 *     doubles in total.
 *   - Strings returned as char* are heap copies; release them with
 *     gn_string_free.
 */
#ifndef GAUGE_NLSE_H
#define GAUGE_NLSE_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gn_status {
  GN_OK = 0,
  GN_ERR_CONFIG = 2,  /* malformed JSON or invalid configuration values */
  GN_ERR_MODEL = 3,   /* model parameters outside the supported regime */
  GN_ERR_RUNTIME = 4, /* I/O failure or internal numeric breakdown */
  GN_ERR_GAUGE = 5    /* the phase map does not exist for this state */
} gn_status;

/* Library version, a static string such as "0.1.0". */
const char* gn_version(void);

/* Message for this thread's most recent failing call ("" if none yet). */
const char* gn_last_error(void);

/* Release a string returned by this library. */
void gn_string_free(char* s);

typedef struct gn_grid gn_grid;     /* periodic box discretization */
typedef struct gn_model gn_model;   /* equation selection and parameters */
typedef struct gn_cfield gn_cfield; /* complex field on a grid */
typedef struct gn_hydro gn_hydro;   /* density/phase decomposition */
typedef struct gn_gauge gn_gauge;   /* generator of the phase map */

/* --- grids ---------------------------------------------------------------- */

/*
 * A periodic box with `dims` axes (1 or 2), side lengths `lengths[a]` and
 * `points[a]` equispaced sites per axis.  Point counts must be powers of two
 * so the spectral transforms stay exact and fast.
 */
gn_status gn_grid_create(int dims, const double* lengths, const int* points,
                         gn_grid** out);
void gn_grid_destroy(gn_grid* g);
int gn_grid_dims(const gn_grid* g);
long long gn_grid_size(const gn_grid* g);
double gn_grid_length(const gn_grid* g, int axis);
int gn_grid_points(const gn_grid* g, int axis);

/*
 * Parse {"dims":..,"lengths":[..],"points":[..]} into a grid.
 */
gn_status gn_grid_from_json(const char* json_text, gn_grid** out);

/* --- models --------------------------------------------------------------- */

/*
 * Create a model from a JSON document {"kind": "...", ...parameters...};
 * optional "hbar" and "mass" keys (default 1.0) fix the physical constants.
 * gn_catalog_json() lists the available kinds with their parameter names.
 */
gn_status gn_model_create(const char* json_text, gn_model** out);
void gn_model_destroy(gn_model* m);

/* JSON catalog of every model kind: id, parameters, supported dimensions,
 * whether the real nonlinearity derives from a potential density, and whether
 * the mapped dynamics does too.  Free the result with gn_string_free. */
char* gn_catalog_json(void);

int gn_model_is_canonical(const gn_model* m);
int gn_model_has_transformed_potential(const gn_model* m);

/* --- fields --------------------------------------------------------------- */

gn_status gn_field_create(const gn_grid* g, gn_cfield** out); /* zeroed */
void gn_field_destroy(gn_cfield* f);
long long gn_field_size(const gn_cfield* f);

/* Copy field values out to / in from 2*size interleaved doubles. */
gn_status gn_field_get(const gn_cfield* f, double* re_im);
gn_status gn_field_set(gn_cfield* f, const double* re_im);

/*
 * Build an initial state from a JSON document on the given grid.  Supported
 * types: plane_wave, gaussian, modulated; see the project README for the
 * exact schema.
 */
gn_status gn_initial_condition(const gn_grid* g, const char* json_text,
                               gn_cfield** out);

/* --- density/phase decomposition ------------------------------------------ */

/*
 * Split psi into density rho = |psi|^2 and a phase consistent across the
 * periodic seam (integer winding plus a smooth periodic part).  Densities
 * below rho_min_rel * max(rho) are floored to keep the phase well defined;
 * pass 0 to disable the floor.
 */
gn_status gn_decompose(const gn_model* m, const gn_cfield* psi,
                       double rho_min_rel, gn_hydro** out);
void gn_hydro_destroy(gn_hydro* h);

/* Copy rho and the phase action S to caller arrays of grid size; either
 * pointer may be NULL to skip that output. */
gn_status gn_hydro_get(const gn_hydro* h, double* rho, double* S);

/* Rebuild the complex field exp(i S / hbar) * sqrt(rho). */
gn_status gn_compose(const gn_hydro* h, gn_cfield** out);

/* --- nonlinearity and currents -------------------------------------------- */

/*
 * Evaluate the real part W and imaginary part Wcal of the nonlinearity on a
 * decomposed state; either output may be NULL.  Arrays hold grid size
 * doubles.
 */
gn_status gn_eval_nonlinearity(const gn_model* m, const gn_hydro* h, double* W,
                               double* Wcal);

/* The real potential governing the mapped equation, evaluated on the mapped
 * state's decomposition. */
gn_status gn_transformed_nonlinearity(const gn_model* m, const gn_hydro* h,
                                      double* Wtilde);

/* Conserved current of the original equation along `axis`:
 * rho grad(S)/m - F.  Array holds grid size doubles. */
gn_status gn_model_current(const gn_model* m, const gn_hydro* h, int axis,
                           double* j);

/* Standard bilinear current (hbar/m) Im(conj(phi) grad phi) along `axis`. */
gn_status gn_bilinear_current(const gn_model* m, const gn_cfield* phi, int axis,
                              double* j);

/* --- the phase map ---------------------------------------------------------- */

/*
 * Solve grad(sigma) = -m F / rho for the generator of the multiplicative
 * phase map.  Fails with GN_ERR_GAUGE when the right-hand side is not a
 * gradient (rotational drift) or not single-valued on the box.
 */
gn_status gn_compute_sigma(const gn_model* m, const gn_hydro* h,
                           gn_gauge** out);
void gn_gauge_destroy(gn_gauge* gen);

/*
 * Ramp slopes kappa[2] and per-axis lattice compatibility flags: axis a is
 * compatible when kappa_a L_a / (2 pi hbar) is an integer, i.e. the phase
 * factor is single-valued.  Arrays of 2 are always written; entries beyond
 * the grid dimension are 0/1 respectively.
 */
gn_status gn_gauge_info(const gn_gauge* gen, double* kappa, int* compatible);

/* Full generator values sigma = periodic part + ramps on the grid. */
gn_status gn_gauge_sigma_values(const gn_gauge* gen, const gn_grid* g,
                                double* sigma);

/* Apply the phase map: phi = exp(i sigma / hbar) psi.  Fails with
 * GN_ERR_GAUGE when a ramp slope is off the momentum lattice. */
gn_status gn_apply_gauge(const gn_cfield* psi, const gn_gauge* gen,
                         gn_cfield** out);

/* --- evolution -------------------------------------------------------------- */

/*
 * Integrate the original (transformed = 0) or mapped (transformed = 1)
 * equation from psi0 over time T with step dt and return the final state.
 * T must be an integer multiple of dt.
 */
gn_status gn_evolve(const gn_model* m, const gn_cfield* psi0, int transformed,
                    double T, double dt, double rho_min_rel,
                    gn_cfield** out_final);

/* --- batch commands ---------------------------------------------------------- */

/*
 * The same operations the command-line tool exposes; each parses a JSON
 * configuration, runs, and writes its artifacts into out_dir (created if
 * missing).  Pass desk_preset = 1 to overlay the configuration on the
 * standard desk defaults.  gn_cmd_check additionally reports whether every
 * check passed via *all_pass (may be NULL).
 */
gn_status gn_cmd_run(const char* config_json, const char* out_dir,
                     int desk_preset);
gn_status gn_cmd_transform(const char* config_json, const char* out_dir,
                           int desk_preset);
gn_status gn_cmd_derive(const char* config_json, const char* out_dir,
                        int desk_preset);
gn_status gn_cmd_check(const char* config_json, const char* out_dir,
                       int desk_preset, int* all_pass);

#ifdef __cplusplus
}
#endif

#endif /* GAUGE_NLSE_H */
