// SPDX-License-Identifier: Apache-2.0
#include "expr.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "errors.hpp"

namespace nlse {

namespace {

ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

}  // namespace

ExprPtr Expr::constant(double v) {
  Expr e;
  e.kind = Kind::Const;
  e.value = v;
  return make(std::move(e));
}

ExprPtr Expr::slot(Sym s, int dx, int dy) {
  if (dx < 0 || dy < 0 || dx + dy > 2) {
    fail(ErrorCode::Model, "expression slot derivative order exceeds 2");
  }
  Expr e;
  e.kind = Kind::SlotRef;
  e.ref = Slot{s, dx, dy};
  return make(std::move(e));
}

ExprPtr Expr::add(std::vector<ExprPtr> kids) {
  std::vector<ExprPtr> flat;
  double c = 0.0;
  for (auto& k : kids) {
    if (k->kind == Kind::Const) {
      c += k->value;
    } else if (k->kind == Kind::Add) {
      for (auto& kk : k->kids) flat.push_back(kk);
    } else {
      flat.push_back(k);
    }
  }
  if (c != 0.0) flat.push_back(constant(c));
  if (flat.empty()) return constant(0.0);
  if (flat.size() == 1) return flat[0];
  Expr e;
  e.kind = Kind::Add;
  e.kids = std::move(flat);
  return make(std::move(e));
}

ExprPtr Expr::mul(std::vector<ExprPtr> kids) {
  std::vector<ExprPtr> flat;
  double c = 1.0;
  for (auto& k : kids) {
    if (k->kind == Kind::Const) {
      if (k->value == 0.0) return constant(0.0);
      c *= k->value;
    } else if (k->kind == Kind::Mul) {
      for (auto& kk : k->kids) flat.push_back(kk);
    } else {
      flat.push_back(k);
    }
  }
  if (flat.empty()) return constant(c);
  if (c != 1.0) flat.insert(flat.begin(), constant(c));
  if (flat.size() == 1) return flat[0];
  Expr e;
  e.kind = Kind::Mul;
  e.kids = std::move(flat);
  return make(std::move(e));
}

ExprPtr Expr::pow(ExprPtr base, int num, int den) {
  if (den == 0) fail(ErrorCode::Model, "expression power with zero denominator");
  if (den < 0) {
    den = -den;
    num = -num;
  }
  if (num == 0) return constant(1.0);
  if (num == den) return base;
  if (base->kind == Kind::Const) {
    return constant(std::pow(base->value, double(num) / double(den)));
  }
  if (base->kind == Kind::Pow) {
    return pow(base->kids[0], base->pnum * num, base->pden * den);
  }
  Expr e;
  e.kind = Kind::Pow;
  e.kids = {std::move(base)};
  e.pnum = num;
  e.pden = den;
  return make(std::move(e));
}

ExprPtr Expr::log(ExprPtr arg) {
  if (arg->kind == Kind::Const) return constant(std::log(arg->value));
  Expr e;
  e.kind = Kind::Log;
  e.kids = {std::move(arg)};
  return make(std::move(e));
}

ExprPtr Expr::neg(ExprPtr x) { return mul({constant(-1.0), std::move(x)}); }

ExprPtr Expr::sub(ExprPtr a, ExprPtr b) { return add({std::move(a), neg(std::move(b))}); }

ExprPtr Expr::div(ExprPtr a, ExprPtr b) {
  return mul({std::move(a), pow(std::move(b), -1, 1)});
}

ExprPtr d_slot(const ExprPtr& e, const Slot& s) {
  switch (e->kind) {
    case Expr::Kind::Const:
      return Expr::constant(0.0);
    case Expr::Kind::SlotRef:
      return Expr::constant(e->ref == s ? 1.0 : 0.0);
    case Expr::Kind::Add: {
      std::vector<ExprPtr> parts;
      for (auto& k : e->kids) {
        auto d = d_slot(k, s);
        if (!d->is_zero()) parts.push_back(d);
      }
      return Expr::add(std::move(parts));
    }
    case Expr::Kind::Mul: {
      std::vector<ExprPtr> terms;
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        auto d = d_slot(e->kids[i], s);
        if (d->is_zero()) continue;
        std::vector<ExprPtr> factors;
        for (std::size_t j = 0; j < e->kids.size(); ++j) {
          factors.push_back(i == j ? d : e->kids[j]);
        }
        terms.push_back(Expr::mul(std::move(factors)));
      }
      return Expr::add(std::move(terms));
    }
    case Expr::Kind::Pow: {
      auto d = d_slot(e->kids[0], s);
      if (d->is_zero()) return d;
      const double p = double(e->pnum) / double(e->pden);
      return Expr::mul({Expr::constant(p),
                        Expr::pow(e->kids[0], e->pnum - e->pden, e->pden),
                        std::move(d)});
    }
    case Expr::Kind::Log: {
      auto d = d_slot(e->kids[0], s);
      if (d->is_zero()) return d;
      return Expr::div(std::move(d), e->kids[0]);
    }
  }
  fail(ErrorCode::Runtime, "d_slot: unreachable");
}

namespace {

void collect_slots(const ExprPtr& e, std::set<Slot>& out) {
  if (e->kind == Expr::Kind::SlotRef) out.insert(e->ref);
  for (auto& k : e->kids) collect_slots(k, out);
}

}  // namespace

std::vector<Slot> slots_of(const ExprPtr& e) {
  std::set<Slot> s;
  collect_slots(e, s);
  return {s.begin(), s.end()};
}

bool references_sym(const ExprPtr& e, Sym s) {
  for (const Slot& sl : slots_of(e)) {
    if (sl.field == s) return true;
  }
  return false;
}

bool references_bare(const ExprPtr& e, Sym s) {
  for (const Slot& sl : slots_of(e)) {
    if (sl.field == s && sl.order() == 0) return true;
  }
  return false;
}

int max_order(const ExprPtr& e, Sym s) {
  int m = -1;
  for (const Slot& sl : slots_of(e)) {
    if (sl.field == s) m = std::max(m, sl.order());
  }
  return m;
}

const RealField* SlotTables::find(const Slot& s) const {
  auto it = tables_.find(s);
  return it == tables_.end() ? nullptr : &it->second;
}

double eval_at(const ExprPtr& e, const SlotTables& t, std::size_t site) {
  switch (e->kind) {
    case Expr::Kind::Const:
      return e->value;
    case Expr::Kind::SlotRef: {
      const RealField* f = t.find(e->ref);
      if (!f) fail(ErrorCode::Runtime, "expression evaluation: missing slot table");
      return (*f)[site];
    }
    case Expr::Kind::Add: {
      double s = 0.0;
      for (auto& k : e->kids) s += eval_at(k, t, site);
      return s;
    }
    case Expr::Kind::Mul: {
      double p = 1.0;
      for (auto& k : e->kids) p *= eval_at(k, t, site);
      return p;
    }
    case Expr::Kind::Pow: {
      const double b = eval_at(e->kids[0], t, site);
      if (e->pden == 1) {
        // Exact integer power, negative exponents included.
        double r = 1.0;
        int n = e->pnum < 0 ? -e->pnum : e->pnum;
        for (int i = 0; i < n; ++i) r *= b;
        return e->pnum < 0 ? 1.0 / r : r;
      }
      return std::pow(b, double(e->pnum) / double(e->pden));
    }
    case Expr::Kind::Log:
      return std::log(eval_at(e->kids[0], t, site));
  }
  fail(ErrorCode::Runtime, "eval_at: unreachable");
}

RealField eval(const ExprPtr& e, const SlotTables& t) {
  RealField out(t.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = eval_at(e, t, i);
  return out;
}

RealField slot_field(const Slot& s, const HydroFields& h) {
  if (s.field == Sym::Rho) {
    if (s.dx == 0 && s.dy == 0) return h.rho;
    return apply_derivs(h.rho, s.dx, s.dy);
  }
  // Phase slots respect the winding ramp.
  if (s.dx == 0 && s.dy == 0) return h.S;
  if (s.dx == 2) return deriv2_S(h, 0);
  if (s.dy == 2) return deriv2_S(h, 1);
  if (s.dx == 1 && s.dy == 1) return deriv(grad_S(h, 0), 1, 1);
  if (s.dx == 1) return grad_S(h, 0);
  return grad_S(h, 1);
}

SlotTables tables_for(const ExprPtr& e, const HydroFields& h) {
  SlotTables t(*h.rho.grid);
  for (const Slot& s : slots_of(e)) t.set(s, slot_field(s, h));
  return t;
}

SlotTables tables_from_psi(const ExprPtr& e, const ComplexField& psi,
                           double hbar, double floor_rel) {
  const Grid& g = *psi.grid;
  SlotTables t(g);
  const auto slots = slots_of(e);

  RealField rho(g);
  double rho_max = 0.0, rho_min = 1e300;
  for (std::size_t i = 0; i < g.size(); ++i) {
    rho[i] = std::norm(psi[i]);
    rho_max = std::max(rho_max, rho[i]);
    rho_min = std::min(rho_min, rho[i]);
  }

  bool wants_phase = false;
  for (const Slot& s : slots) {
    if (s.field == Sym::S && s.order() == 0) {
      fail(ErrorCode::Model,
           "expression references the bare phase; only phase derivatives are "
           "available without unwrapping");
    }
    wants_phase = wants_phase || s.field == Sym::S;
  }
  if (wants_phase && !(rho_min >= floor_rel * rho_max)) {
    fail(ErrorCode::Runtime, "node formation: density fell below its floor");
  }

  // Phase gradients on demand, then higher phase slots by differentiating
  // those periodic fields.
  std::array<RealField, 2> ds{};
  auto grad_axis = [&](int a) -> const RealField& {
    if (ds[a].grid == nullptr) {
      ComplexField dpsi = deriv(psi, a, 1);
      ds[a] = RealField(g);
      for (std::size_t i = 0; i < g.size(); ++i) {
        ds[a][i] = hbar * std::imag(std::conj(psi[i]) * dpsi[i]) / rho[i];
      }
    }
    return ds[a];
  };

  for (const Slot& s : slots) {
    if (s.field == Sym::Rho) {
      t.set(s, s.order() == 0 ? rho : apply_derivs(rho, s.dx, s.dy));
      continue;
    }
    if (s.dx >= 1) {
      t.set(s, apply_derivs(grad_axis(0), s.dx - 1, s.dy));
    } else {
      t.set(s, apply_derivs(grad_axis(1), s.dx, s.dy - 1));
    }
  }
  return t;
}

RealField apply_derivs(const RealField& f, int dx, int dy) {
  RealField out = f;
  if (dx == 2) {
    out = deriv(out, 0, 2);
  } else if (dx == 1) {
    out = deriv(out, 0, 1);
  }
  if (dy == 2) {
    out = deriv(out, 1, 2);
  } else if (dy == 1) {
    out = deriv(out, 1, 1);
  }
  return out;
}

}  // namespace nlse
