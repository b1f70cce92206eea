// SPDX-License-Identifier: Apache-2.0
#include "grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>

#include "errors.hpp"

namespace nlse {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Thread-local FFTW workspace per transform shape. Plans are built once with
// FFTW_ESTIMATE on owned buffers and data is copied through them: execution
// stays deterministic and each thread owns its plans (the FFTW planner itself
// is serialized by a global mutex).
struct Workspace {
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::size_t n = 0;

  Workspace(int nx, int ny) {
    n = ny == 0 ? std::size_t(nx) : std::size_t(nx) * std::size_t(ny);
    buf = fftw_alloc_complex(n);
    if (ny == 0) {
      fwd = fftw_plan_dft_1d(nx, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_1d(nx, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
      // Our layout is iy slow / ix fast, so FFTW's leading dimension is ny.
      fwd = fftw_plan_dft_2d(ny, nx, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_2d(ny, nx, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
  }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
  ~Workspace() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (buf) fftw_free(buf);
  }
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

Workspace& workspace(int nx, int ny) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<Workspace>> cache;
  auto& slot = cache[{nx, ny}];
  if (!slot) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    slot = std::make_unique<Workspace>(nx, ny);
  }
  return *slot;
}

// Signed mode number for index m of an N-point transform.
int mode_number(int m, int n) { return m < n / 2 ? m : m - n; }

// Derivative multiplier along one axis. Odd orders zero the Nyquist mode.
cplx deriv_multiplier(int m, int n, double length, int order) {
  const double k = 2.0 * std::numbers::pi * mode_number(m, n) / length;
  if (order == 1) {
    if (m == n / 2) return {0.0, 0.0};
    return {0.0, k};
  }
  return {-k * k, 0.0};
}

void load(const ComplexField& f, fftw_complex* buf) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    buf[i][0] = f[i].real();
    buf[i][1] = f[i].imag();
  }
}

void store(const fftw_complex* buf, double norm, ComplexField& f) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = cplx(buf[i][0] * norm, buf[i][1] * norm);
  }
}

ComplexField spectral_map(const ComplexField& f,
                          const std::function<cplx(int, int)>& mult) {
  const Grid& g = *f.grid;
  const int nx = g.points(0);
  const int ny = g.dims() == 2 ? g.points(1) : 0;
  Workspace& ws = workspace(nx, ny);
  load(f, ws.buf);
  fftw_execute(ws.fwd);
  if (ny == 0) {
    for (int m = 0; m < nx; ++m) {
      const cplx c = mult(m, 0) * cplx(ws.buf[m][0], ws.buf[m][1]);
      ws.buf[m][0] = c.real();
      ws.buf[m][1] = c.imag();
    }
  } else {
    for (int my = 0; my < ny; ++my) {
      for (int mx = 0; mx < nx; ++mx) {
        const std::size_t i = std::size_t(my) * nx + mx;
        const cplx c = mult(mx, my) * cplx(ws.buf[i][0], ws.buf[i][1]);
        ws.buf[i][0] = c.real();
        ws.buf[i][1] = c.imag();
      }
    }
  }
  fftw_execute(ws.bwd);
  ComplexField out(g);
  store(ws.buf, 1.0 / double(ws.n), out);
  return out;
}

}  // namespace

Grid::Grid(int dims, std::array<double, 2> lengths, std::array<int, 2> points)
    : dims_(dims), lengths_(lengths), points_(points) {
  if (dims != 1 && dims != 2) fail(ErrorCode::Config, "grid: dims must be 1 or 2");
  for (int a = 0; a < dims; ++a) {
    if (!(lengths_[a] > 0.0) || !std::isfinite(lengths_[a]))
      fail(ErrorCode::Config, "grid: lengths must be positive and finite");
    if (points_[a] < 16 || !power_of_two(points_[a]))
      fail(ErrorCode::Config, "grid: points must be a power of two and at least 16");
  }
  if (dims == 1) {
    lengths_[1] = 0.0;
    points_[1] = 1;
  }
  size_ = std::size_t(points_[0]) * std::size_t(points_[1]);
}

double Grid::cell() const {
  double c = spacing(0);
  if (dims_ == 2) c *= spacing(1);
  return c;
}

double Grid::coord(std::size_t site, int axis) const {
  const std::size_t ix = site % std::size_t(points_[0]);
  const std::size_t iy = site / std::size_t(points_[0]);
  return axis == 0 ? double(ix) * spacing(0) : double(iy) * spacing(1);
}

std::size_t Grid::index(int ix, int iy) const {
  return std::size_t(iy) * std::size_t(points_[0]) + std::size_t(ix);
}

bool Grid::same_shape(const Grid& o) const {
  return dims_ == o.dims_ && points_ == o.points_ && lengths_ == o.lengths_;
}

ComplexField deriv(const ComplexField& f, int axis, int order) {
  const Grid& g = *f.grid;
  if (axis < 0 || axis >= g.dims()) fail(ErrorCode::Config, "deriv: axis out of range");
  if (order != 1 && order != 2) fail(ErrorCode::Config, "deriv: order must be 1 or 2");
  const int nx = g.points(0);
  const int ny = g.dims() == 2 ? g.points(1) : 0;
  return spectral_map(f, [&](int mx, int my) {
    if (axis == 0) return deriv_multiplier(mx, nx, g.length(0), order);
    return deriv_multiplier(my, ny, g.length(1), order);
  });
}

RealField deriv(const RealField& f, int axis, int order) {
  ComplexField c(*f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) c[i] = f[i];
  ComplexField d = deriv(c, axis, order);
  RealField out(*f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = d[i].real();
  return out;
}

double integrate(const RealField& f) {
  double s = 0.0;
  for (double x : f.v) s += x;
  return s * f.grid->cell();
}

CumulativeIntegral cumulative_integral(const RealField& f, int axis) {
  const Grid& g = *f.grid;
  if (axis < 0 || axis >= g.dims()) {
    fail(ErrorCode::Config, "cumulative_integral: axis out of range");
  }
  const int n = g.points(axis);
  const double length = g.length(axis);
  const int rows = int(g.size()) / n;
  Workspace& ws = workspace(n, 0);

  CumulativeIntegral result;
  result.periodic = RealField(g);
  // Row-resolved antiderivatives A_row of (f_row - mean_row), pinned to 0 at
  // the axis origin; the global slope is the mean of f. For gradient-type
  // inputs every row mean equals the global mean and the leftover linear
  // term below vanishes identically.
  std::vector<double> row_mean(rows, 0.0);
  std::vector<std::size_t> row_sites(n);
  double mean_total = 0.0;

  for (int r = 0; r < rows; ++r) {
    // Gather the row's site indices: along x rows are contiguous; along y
    // they stride by N_x.
    if (axis == 0) {
      for (int j = 0; j < n; ++j) row_sites[j] = std::size_t(r) * n + j;
    } else {
      for (int j = 0; j < n; ++j) row_sites[j] = std::size_t(j) * g.points(0) + r;
    }
    for (int j = 0; j < n; ++j) {
      ws.buf[j][0] = f[row_sites[j]];
      ws.buf[j][1] = 0.0;
    }
    fftw_execute(ws.fwd);
    row_mean[r] = ws.buf[0][0] / n;
    ws.buf[0][0] = 0.0;
    ws.buf[0][1] = 0.0;
    for (int m = 1; m < n; ++m) {
      if (m == n / 2) {
        ws.buf[m][0] = 0.0;
        ws.buf[m][1] = 0.0;
        continue;
      }
      const double k = 2.0 * std::numbers::pi * mode_number(m, n) / length;
      const cplx c = cplx(ws.buf[m][0], ws.buf[m][1]) / cplx(0.0, k);
      ws.buf[m][0] = c.real();
      ws.buf[m][1] = c.imag();
    }
    fftw_execute(ws.bwd);
    const double at_zero = ws.buf[0][0] / n;
    for (int j = 0; j < n; ++j) {
      result.periodic[row_sites[j]] = ws.buf[j][0] / n - at_zero;
    }
    mean_total += row_mean[r];
  }
  result.slope = mean_total / rows;

  // Fold any per-row mean deviation back in so that periodic + slope*x is
  // exactly the running integral from the axis origin.
  for (int r = 0; r < rows; ++r) {
    const double extra = row_mean[r] - result.slope;
    if (extra == 0.0) continue;
    if (axis == 0) {
      for (int j = 0; j < n; ++j) {
        result.periodic[std::size_t(r) * n + j] += extra * j * g.spacing(0);
      }
    } else {
      for (int j = 0; j < n; ++j) {
        result.periodic[std::size_t(j) * g.points(0) + r] += extra * j * g.spacing(1);
      }
    }
  }
  return result;
}

void apply_spectral_exp_ksq(ComplexField& f, cplx scale) {
  const Grid& g = *f.grid;
  const int nx = g.points(0);
  const int ny = g.dims() == 2 ? g.points(1) : 0;
  f = spectral_map(f, [&](int mx, int my) {
    const double kx = 2.0 * std::numbers::pi * mode_number(mx, nx) / g.length(0);
    double ksq = kx * kx;
    if (ny != 0) {
      const double ky = 2.0 * std::numbers::pi * mode_number(my, ny) / g.length(1);
      ksq += ky * ky;
    }
    return std::exp(scale * ksq);
  });
}

}  // namespace nlse
