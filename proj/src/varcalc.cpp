// SPDX-License-Identifier: Apache-2.0
#include "varcalc.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "gauge.hpp"
#include "model.hpp"

namespace nlse {

namespace {

// Effective derivative orders a slot applies to the independent field of a
// target, or nullopt when the slot does not involve that target.
struct KernelOrders {
  int dx = 0;
  int dy = 0;
  bool active = false;
};

KernelOrders orders_for(const Slot& s, Target t) {
  switch (t) {
    case Target::Rho:
      if (s.field == Sym::Rho) return {s.dx, s.dy, true};
      return {};
    case Target::S:
      if (s.field == Sym::S) return {s.dx, s.dy, true};
      return {};
    case Target::DSx:
      if (s.field == Sym::S && s.dx >= 1) return {s.dx - 1, s.dy, true};
      return {};
    case Target::DSy:
      if (s.field == Sym::S && s.dy >= 1) return {s.dx, s.dy - 1, true};
      return {};
  }
  return {};
}

int parity(int order) { return order % 2 == 0 ? 1 : -1; }

}  // namespace

RealField euler_lagrange(const ExprPtr& density, Target t, const SlotTables& tables) {
  const Grid& g = tables.grid();
  RealField out(g);
  for (const Slot& s : slots_of(density)) {
    const KernelOrders k = orders_for(s, t);
    if (!k.active) continue;
    RealField partial = eval(d_slot(density, s), tables);
    RealField term = apply_derivs(partial, k.dx, k.dy);
    const int sign = parity(k.dx + k.dy);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += sign * term[i];
  }
  return out;
}

RealField euler_lagrange(const ExprPtr& density, Target t, const HydroFields& h) {
  return euler_lagrange(density, t, tables_for(density, h));
}

namespace {

// Spectral derivative kernels of a one-site delta along one axis: the column
// K_d with K_d[(j - s) mod n] = (D^d delta_s)[j].
std::array<std::vector<double>, 3> delta_kernels(double length, int n) {
  std::array<std::vector<double>, 3> K;
  K[0].assign(std::size_t(n), 0.0);
  K[0][0] = 1.0;
  if (n == 1) {
    K[1].assign(1, 0.0);
    K[2].assign(1, 0.0);
    return K;
  }
  Grid line(1, {length, 0.0}, {n, 1});
  RealField delta(line);
  delta[0] = 1.0;
  for (int d = 1; d <= 2; ++d) {
    RealField col = deriv(delta, 0, d);
    K[d].assign(col.v.begin(), col.v.end());
  }
  return K;
}

struct SlotColumn {
  Slot slot;
  const RealField* base = nullptr;
  const std::vector<double>* kx = nullptr;  // null when unperturbed
  const std::vector<double>* ky = nullptr;
};

struct SiteContext {
  const std::vector<SlotColumn>* cols;
  std::size_t site;   // evaluation site j
  int jx, jy;         // its coordinates
  int sx, sy;         // perturbation site s
  int nx, ny;
  double amp;         // signed eps * scale
};

double slot_value(const SiteContext& c, const Slot& s) {
  for (const SlotColumn& col : *c.cols) {
    if (col.slot == s) {
      double v = (*col.base)[c.site];
      if (col.kx) {
        const double wx = (*col.kx)[std::size_t((c.jx - c.sx + c.nx) % c.nx)];
        const double wy = (*col.ky)[std::size_t((c.jy - c.sy + c.ny) % c.ny)];
        v += c.amp * wx * wy;
      }
      return v;
    }
  }
  fail(ErrorCode::Runtime, "internal: slot missing from oracle tables");
}

double eval_site(const Expr& e, const SiteContext& c) {
  switch (e.kind) {
    case Expr::Kind::Const:
      return e.value;
    case Expr::Kind::SlotRef:
      return slot_value(c, e.ref);
    case Expr::Kind::Add: {
      double s = 0.0;
      for (const ExprPtr& k : e.kids) s += eval_site(*k, c);
      return s;
    }
    case Expr::Kind::Mul: {
      double p = 1.0;
      for (const ExprPtr& k : e.kids) p *= eval_site(*k, c);
      return p;
    }
    case Expr::Kind::Pow: {
      const double b = eval_site(*e.kids[0], c);
      if (e.pden == 1) {
        double r = 1.0;
        const int n = e.pnum < 0 ? -e.pnum : e.pnum;
        for (int i = 0; i < n; ++i) r *= b;
        return e.pnum < 0 ? 1.0 / r : r;
      }
      return std::pow(b, double(e.pnum) / double(e.pden));
    }
    case Expr::Kind::Log:
      return std::log(eval_site(*e.kids[0], c));
  }
  return 0.0;
}

int thread_count() {
  const char* env = std::getenv("GAUGE_NLSE_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n > 1 ? n : 1;
}

}  // namespace

RealField fd_oracle(const ExprPtr& density, Target t, const HydroFields& h,
                    double eps) {
  if (!(eps >= 1e-8 && eps <= 1e-4)) {
    fail(ErrorCode::Config, "fd_oracle: eps must lie in [1e-8, 1e-4]");
  }
  const Grid& g = *h.rho.grid;
  SlotTables tables = tables_for(density, h);

  const int nx = g.points(0);
  const int ny = g.dims() == 2 ? g.points(1) : 1;
  const auto Kx = delta_kernels(g.length(0), nx);
  const auto Ky = g.dims() == 2 ? delta_kernels(g.length(1), ny)
                                : delta_kernels(1.0, 1);

  // Perturbation amplitude: eps relative to the size of the field being
  // varied (floored at 1).
  double scale = 1.0;
  {
    RealField base(g);
    switch (t) {
      case Target::Rho: base = h.rho; break;
      case Target::S: base = h.S; break;
      case Target::DSx: base = grad_S(h, 0); break;
      case Target::DSy: base = grad_S(h, 1); break;
    }
    for (double v : base.v) scale = std::max(scale, std::abs(v));
  }

  std::vector<SlotColumn> cols;
  for (const Slot& s : slots_of(density)) {
    SlotColumn col;
    col.slot = s;
    col.base = tables.find(s);
    if (!col.base) fail(ErrorCode::Runtime, "internal: oracle tables incomplete");
    const KernelOrders k = orders_for(s, t);
    if (k.active) {
      col.kx = &Kx[std::size_t(k.dx)];
      col.ky = &Ky[std::size_t(k.dy)];
    }
    cols.push_back(col);
  }

  RealField out(g);
  const double amp = eps * scale;
  auto worker = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t site = lo; site < hi; ++site) {
      SiteContext c;
      c.cols = &cols;
      c.sx = int(site % std::size_t(nx));
      c.sy = int(site / std::size_t(nx));
      c.nx = nx;
      c.ny = ny;
      double plus = 0.0, minus = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        c.site = j;
        c.jx = int(j % std::size_t(nx));
        c.jy = int(j / std::size_t(nx));
        c.amp = amp;
        plus += eval_site(*density, c);
        c.amp = -amp;
        minus += eval_site(*density, c);
      }
      out[site] = (plus - minus) / (2.0 * amp);
    }
  };

  const int nthreads = thread_count();
  if (nthreads <= 1 || g.size() < 2 * std::size_t(nthreads)) {
    worker(0, g.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (g.size() + nthreads - 1) / nthreads;
    for (int i = 0; i < nthreads; ++i) {
      const std::size_t lo = std::size_t(i) * chunk;
      const std::size_t hi = std::min(g.size(), lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

double check_curl_condition(const std::array<RealField, 2>& v) {
  const Grid& g = *v[0].grid;
  if (g.dims() != 2) return 0.0;
  RealField dxy = deriv(v[1], 0, 1);
  RealField dyx = deriv(v[0], 1, 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    worst = std::max(worst, std::abs(dxy[i] - dyx[i]));
  }
  return worst;
}

RotCheck check_rot_condition(const ModelSpec& m, const HydroFields& h) {
  const Grid& g = *h.rho.grid;
  if (g.dims() != 2) return {0.0, true};
  // Canonical models are probed through their potential so the check also
  // covers models whose dynamics is one-dimensional but whose potential has
  // a two-dimensional extension.
  std::array<RealField, 2> B{RealField(g), RealField(g)};
  if (is_canonical(m)) {
    ExprPtr u = u_expression(m, 2);
    B[0] = euler_lagrange(u, Target::DSx, h);
    B[1] = euler_lagrange(u, Target::DSy, h);
    for (int a = 0; a < 2; ++a) {
      for (std::size_t i = 0; i < g.size(); ++i) B[a][i] *= -1.0;
    }
  } else {
    B = current_F(m, h);
  }
  for (int a = 0; a < 2; ++a) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      B[a][i] *= m.mass / h.rho[i];
    }
  }
  return {check_curl_condition(B), false};
}

CanonicityCheck check_canonicity_transformed(const ModelSpec& m, const HydroFields& h) {
  const Grid& g = *h.rho.grid;
  RealField base = transformed_nonlinearity(m, h);

  HydroFields probe = h;
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double bump = 0.37 * std::cos(two_pi * g.coord(i, 0) / g.length(0));
    if (g.dims() == 2) bump += 0.23 * std::sin(two_pi * g.coord(i, 1) / g.length(1));
    probe.S[i] += h.hbar * bump;
  }
  RealField shifted = transformed_nonlinearity(m, probe);

  double floor = 1.0;
  for (double v : base.v) floor = std::max(floor, std::abs(v));
  CanonicityCheck result;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = std::abs(shifted[i] - base[i]);
    if (d > result.max_dependence) {
      result.max_dependence = d;
      result.witness_site = i;
    }
  }
  result.canonical = result.max_dependence <= 1e-9 * floor;
  return result;
}

}  // namespace nlse
