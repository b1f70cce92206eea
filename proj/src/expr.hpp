// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <map>
#include <memory>
#include <vector>

#include "fields.hpp"
#include "grid.hpp"

namespace nlse {

enum class Sym { Rho, S };

// One field-derivative slot, e.g. {S,1,0} is d_x S. Slots are the variables
// a density is differentiated against; dx+dy <= 2 everywhere.
struct Slot {
  Sym field = Sym::Rho;
  int dx = 0;
  int dy = 0;
  auto operator<=>(const Slot&) const = default;
  int order() const { return dx + dy; }
};

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression tree over slots with rational powers and logarithms.
// Factories fold constants and flatten nested sums/products, which keeps the
// trees produced by symbolic differentiation small.
class Expr {
 public:
  enum class Kind { Const, SlotRef, Add, Mul, Pow, Log };

  static ExprPtr constant(double v);
  static ExprPtr slot(Sym s, int dx = 0, int dy = 0);
  static ExprPtr add(std::vector<ExprPtr> kids);
  static ExprPtr mul(std::vector<ExprPtr> kids);
  static ExprPtr pow(ExprPtr base, int num, int den = 1);
  static ExprPtr log(ExprPtr arg);
  static ExprPtr neg(ExprPtr x);
  static ExprPtr sub(ExprPtr a, ExprPtr b);
  static ExprPtr div(ExprPtr a, ExprPtr b);

  Kind kind = Kind::Const;
  double value = 0.0;         // Const
  Slot ref{};                 // SlotRef
  std::vector<ExprPtr> kids;  // Add/Mul, or the single child of Pow/Log
  int pnum = 1, pden = 1;     // Pow exponent num/den

  bool is_zero() const { return kind == Kind::Const && value == 0.0; }
};

// Symbolic partial derivative with respect to one slot.
ExprPtr d_slot(const ExprPtr& e, const Slot& s);

// Every distinct slot referenced, sorted.
std::vector<Slot> slots_of(const ExprPtr& e);

bool references_sym(const ExprPtr& e, Sym s);   // any slot of the symbol
bool references_bare(const ExprPtr& e, Sym s);  // the underived slot itself
int max_order(const ExprPtr& e, Sym s);

// Field values for each slot on a grid.
class SlotTables {
 public:
  explicit SlotTables(const Grid& g) : grid_(&g) {}
  void set(const Slot& s, RealField f) { tables_[s] = std::move(f); }
  const RealField* find(const Slot& s) const;
  const Grid& grid() const { return *grid_; }

 private:
  const Grid* grid_ = nullptr;
  std::map<Slot, RealField> tables_;
};

// Pointwise evaluation. Missing slots are an internal error.
RealField eval(const ExprPtr& e, const SlotTables& t);
double eval_at(const ExprPtr& e, const SlotTables& t, std::size_t site);

// Tables holding exactly the slots `e` references, derived from hydro fields
// (phase derivatives are winding-aware).
SlotTables tables_for(const ExprPtr& e, const HydroFields& h);
RealField slot_field(const Slot& s, const HydroFields& h);

// Tables taken from psi without phase unwrapping: phase derivatives are
// bilinear, grad S = hbar Im(psi* grad psi) / rho. Bare-S slots throw, and
// any phase slot requires rho >= floor_rel * max(rho) everywhere.
SlotTables tables_from_psi(const ExprPtr& e, const ComplexField& psi,
                           double hbar, double floor_rel);

// Spectral multi-derivative of an evaluated (periodic) field.
RealField apply_derivs(const RealField& f, int dx, int dy);

}  // namespace nlse
