// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "diagnostics.hpp"
#include "errors.hpp"
#include "evolve.hpp"
#include "expr.hpp"
#include "gauge.hpp"
#include "varcalc.hpp"

namespace nlse {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;
using std::numbers::pi;

// --- small utilities ---------------------------------------------------------

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fnv1a64_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string base64_encode(const unsigned char* p, std::size_t n) {
  static const char* tbl =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((n + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= n; i += 3) {
    const unsigned v = (p[i] << 16) | (p[i + 1] << 8) | p[i + 2];
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += tbl[(v >> 6) & 63];
    out += tbl[v & 63];
  }
  if (i + 1 == n) {
    const unsigned v = p[i] << 16;
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == n) {
    const unsigned v = (p[i] << 16) | (p[i + 1] << 8);
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += tbl[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

double max_abs(const RealField& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
  return m;
}

double rel_gap(const RealField& a, const RealField& b) {
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
  }
  return num / std::max(1.0, max_abs(b));
}

// Write-then-rename so readers never observe a partial artifact.
void atomic_write(const fs::path& dir, const std::string& name,
                  const std::string& content) {
  const fs::path tmp = dir / (name + ".tmp");
  const fs::path dst = dir / name;
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorCode::Runtime, "cannot open " + tmp.string() + " for writing");
    f.write(content.data(), std::streamsize(content.size()));
    if (!f.good()) fail(ErrorCode::Runtime, "short write on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, dst, ec);
  if (ec) fail(ErrorCode::Runtime, "cannot move " + tmp.string() + " into place");
}

// --- strict JSON access --------------------------------------------------------

[[noreturn]] void bad(const std::string& msg) { fail(ErrorCode::Config, "config: " + msg); }

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) bad(where + " must be a JSON object");
}

void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (item.key() == a) {
        ok = true;
        break;
      }
    }
    if (!ok) bad("unknown key \"" + item.key() + "\" in " + where);
  }
}

const json& need(const json& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) bad(where + " needs \"" + key + "\"");
  return *it;
}

double as_num(const json& j, const std::string& what) {
  if (!j.is_number()) bad(what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(what + " must be finite");
  return v;
}

double need_num(const json& obj, const std::string& where, const char* key) {
  return as_num(need(obj, where, key), where + "." + key);
}

double opt_num(const json& obj, const std::string& where, const char* key, double def) {
  auto it = obj.find(key);
  return it == obj.end() ? def : as_num(*it, where + "." + key);
}

long long as_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) bad(what + " must be an integer");
  return j.get<long long>();
}

long long opt_int(const json& obj, const std::string& where, const char* key,
                  long long def) {
  auto it = obj.find(key);
  return it == obj.end() ? def : as_int(*it, where + "." + key);
}

bool opt_bool(const json& obj, const std::string& where, const char* key, bool def) {
  auto it = obj.find(key);
  if (it == obj.end()) return def;
  if (!it->is_boolean()) bad(where + "." + key + " must be a boolean");
  return it->get<bool>();
}

std::string need_str(const json& obj, const std::string& where, const char* key) {
  const json& j = need(obj, where, key);
  if (!j.is_string()) bad(where + "." + key + " must be a string");
  return j.get<std::string>();
}

// --- expression documents ------------------------------------------------------

ExprPtr parse_expr(const json& j, const std::string& where);

std::vector<ExprPtr> parse_args(const json& obj, const std::string& where,
                                std::size_t min_n, std::size_t max_n) {
  const json& a = need(obj, where, "args");
  if (!a.is_array() || a.size() < min_n || a.size() > max_n) {
    bad(where + ".args must be an array of " + std::to_string(min_n) +
        (min_n == max_n ? "" : ".." + std::to_string(max_n)) + " expressions");
  }
  std::vector<ExprPtr> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.push_back(parse_expr(a[i], where + ".args[" + std::to_string(i) + "]"));
  }
  return out;
}

ExprPtr parse_expr(const json& j, const std::string& where) {
  if (j.is_number()) return Expr::constant(j.get<double>());
  expect_object(j, where);
  if (j.contains("slot")) {
    expect_keys(j, where, {"slot", "dx", "dy"});
    const std::string s = need_str(j, where, "slot");
    Sym sym;
    if (s == "rho") {
      sym = Sym::Rho;
    } else if (s == "S") {
      sym = Sym::S;
    } else {
      bad(where + ".slot must be \"rho\" or \"S\"");
    }
    const long long dx = opt_int(j, where, "dx", 0);
    const long long dy = opt_int(j, where, "dy", 0);
    if (dx < 0 || dy < 0 || dx + dy > 2) {
      bad(where + ": derivative orders must satisfy dx, dy >= 0 and dx + dy <= 2");
    }
    return Expr::slot(sym, int(dx), int(dy));
  }
  if (!j.contains("op")) bad(where + " must be a number, a slot, or an op node");
  const std::string op = need_str(j, where, "op");
  if (op == "add" || op == "mul") {
    expect_keys(j, where, {"op", "args"});
    auto args = parse_args(j, where, 1, 64);
    return op == "add" ? Expr::add(std::move(args)) : Expr::mul(std::move(args));
  }
  if (op == "sub" || op == "div") {
    expect_keys(j, where, {"op", "args"});
    auto args = parse_args(j, where, 2, 2);
    return op == "sub" ? Expr::sub(args[0], args[1]) : Expr::div(args[0], args[1]);
  }
  if (op == "neg" || op == "log") {
    expect_keys(j, where, {"op", "args"});
    auto args = parse_args(j, where, 1, 1);
    return op == "neg" ? Expr::neg(args[0]) : Expr::log(args[0]);
  }
  if (op == "pow") {
    expect_keys(j, where, {"op", "base", "num", "den"});
    ExprPtr base = parse_expr(need(j, where, "base"), where + ".base");
    const long long num = as_int(need(j, where, "num"), where + ".num");
    const long long den = opt_int(j, where, "den", 1);
    if (den == 0) bad(where + ".den must be nonzero");
    return Expr::pow(std::move(base), int(num), int(den));
  }
  bad(where + ".op \"" + op + "\" is not one of add/mul/sub/div/neg/log/pow");
}

// --- model documents -----------------------------------------------------------

struct KindRow {
  ModelKind kind;
  const char* id;
};

constexpr KindRow kKindRows[] = {
    {ModelKind::Free, "free"},
    {ModelKind::LogDriftCubic, "log_drift_cubic"},
    {ModelKind::ChenLeeLiu, "chen_lee_liu"},
    {ModelKind::JackiwAglietti, "jackiw_aglietti"},
    {ModelKind::EIP, "eip"},
    {ModelKind::DGSub, "dg_sub"},
    {ModelKind::DGGeneral, "dg_general"},
    {ModelKind::DerivFamily, "deriv_family"},
    {ModelKind::Eckhaus, "eckhaus"},
    {ModelKind::Generic, "generic"},
};

std::string kind_id(ModelKind k) {
  for (const KindRow& r : kKindRows) {
    if (r.kind == k) return r.id;
  }
  return "?";
}

ModelSpec parse_model(const json& obj, const std::string& where, bool allow_constants) {
  expect_object(obj, where);
  const std::string id = need_str(obj, where, "kind");
  const KindRow* row = nullptr;
  for (const KindRow& r : kKindRows) {
    if (id == r.id) {
      row = &r;
      break;
    }
  }
  if (!row) {
    std::string ids;
    for (const KindRow& r : kKindRows) ids += std::string(ids.empty() ? "" : ", ") + r.id;
    bad(where + ".kind \"" + id + "\" is not one of: " + ids);
  }

  ModelSpec m;
  m.kind = row->kind;
  std::vector<const char*> keys = {"kind"};
  if (allow_constants) {
    keys.push_back("hbar");
    keys.push_back("mass");
  }
  auto check_keys = [&](std::initializer_list<const char*> params) {
    for (const char* p : params) keys.push_back(p);
    for (const auto& item : obj.items()) {
      bool ok = false;
      for (const char* a : keys) {
        if (item.key() == a) {
          ok = true;
          break;
        }
      }
      if (!ok) bad("unknown key \"" + item.key() + "\" in " + where);
    }
  };

  switch (m.kind) {
    case ModelKind::Free:
      check_keys({});
      break;
    case ModelKind::LogDriftCubic: {
      check_keys({"alpha", "beta"});
      m.beta = need_num(obj, where, "beta");
      const json& a = need(obj, where, "alpha");
      if (a.is_number()) {
        const double v = as_num(a, where + ".alpha");
        m.alpha_vec = {v, v};
      } else if (a.is_array() && a.size() >= 1 && a.size() <= 2) {
        m.alpha_vec = {as_num(a[0], where + ".alpha[0]"),
                       a.size() > 1 ? as_num(a[1], where + ".alpha[1]") : 0.0};
      } else {
        bad(where + ".alpha must be a number or an array of 1..2 numbers");
      }
      break;
    }
    case ModelKind::ChenLeeLiu:
      check_keys({"alpha"});
      m.alpha = need_num(obj, where, "alpha");
      break;
    case ModelKind::JackiwAglietti:
      check_keys({"lambda"});
      m.lambda = need_num(obj, where, "lambda");
      break;
    case ModelKind::EIP:
      check_keys({"kappa"});
      m.kappa = need_num(obj, where, "kappa");
      break;
    case ModelKind::DGSub:
      check_keys({"alpha", "beta"});
      m.alpha = need_num(obj, where, "alpha");
      m.beta = need_num(obj, where, "beta");
      break;
    case ModelKind::DGGeneral: {
      check_keys({"D", "Dprime", "c"});
      m.D = need_num(obj, where, "D");
      m.Dprime = need_num(obj, where, "Dprime");
      const json& c = need(obj, where, "c");
      if (!c.is_array() || c.size() != 5) bad(where + ".c must be an array of 5 numbers");
      for (int i = 0; i < 5; ++i) {
        m.c[i] = as_num(c[i], where + ".c[" + std::to_string(i) + "]");
      }
      break;
    }
    case ModelKind::DerivFamily:
      check_keys({"alpha", "q"});
      m.alpha = need_num(obj, where, "alpha");
      m.q = need_num(obj, where, "q");
      break;
    case ModelKind::Eckhaus:
      check_keys({"alpha", "beta"});
      m.alpha = need_num(obj, where, "alpha");
      m.beta = need_num(obj, where, "beta");
      break;
    case ModelKind::Generic: {
      check_keys({"canonical", "potential", "W", "F", "sigma_rho"});
      GenericSpec gs;
      auto it = obj.find("canonical");
      if (it == obj.end() || !it->is_boolean()) {
        bad(where + " needs a boolean \"canonical\"");
      }
      gs.canonical = it->get<bool>();
      if (obj.contains("potential")) {
        gs.potential = parse_expr(obj.at("potential"), where + ".potential");
      }
      if (obj.contains("W")) gs.W = parse_expr(obj.at("W"), where + ".W");
      if (obj.contains("F")) {
        const json& F = obj.at("F");
        if (!F.is_array() || F.empty() || F.size() > 2) {
          bad(where + ".F must be an array of 1..2 expressions");
        }
        for (std::size_t a = 0; a < F.size(); ++a) {
          gs.F[a] = parse_expr(F[a], where + ".F[" + std::to_string(a) + "]");
        }
      }
      if (obj.contains("sigma_rho")) {
        gs.sigma_rho = parse_expr(obj.at("sigma_rho"), where + ".sigma_rho");
      }
      m.generic = std::move(gs);
      break;
    }
  }
  if (allow_constants) {
    m.hbar = opt_num(obj, where, "hbar", 1.0);
    m.mass = opt_num(obj, where, "mass", 1.0);
  }
  validate_model(m);
  return m;
}

// --- grid documents ------------------------------------------------------------

Grid parse_grid(const json& obj, const std::string& where) {
  expect_object(obj, where);
  expect_keys(obj, where, {"dims", "lengths", "points"});
  const long long dims = as_int(need(obj, where, "dims"), where + ".dims");
  if (dims != 1 && dims != 2) bad(where + ".dims must be 1 or 2");
  const json& L = need(obj, where, "lengths");
  const json& N = need(obj, where, "points");
  if (!L.is_array() || L.size() != std::size_t(dims)) {
    bad(where + ".lengths must be an array of dims numbers");
  }
  if (!N.is_array() || N.size() != std::size_t(dims)) {
    bad(where + ".points must be an array of dims integers");
  }
  std::array<double, 2> lengths{0.0, 0.0};
  std::array<int, 2> points{1, 1};
  for (int a = 0; a < dims; ++a) {
    lengths[a] = as_num(L[a], where + ".lengths[" + std::to_string(a) + "]");
    points[a] = int(as_int(N[a], where + ".points[" + std::to_string(a) + "]"));
  }
  return Grid(int(dims), lengths, points);
}

// --- initial-condition documents -------------------------------------------------

std::array<int, 2> parse_winding(const json& obj, const std::string& where, int dims) {
  auto it = obj.find("winding");
  if (it == obj.end()) return {0, 0};
  if (it->is_number_integer()) return {int(it->get<long long>()), 0};
  if (it->is_array() && it->size() >= 1 && it->size() <= std::size_t(dims)) {
    std::array<int, 2> w{0, 0};
    for (std::size_t a = 0; a < it->size(); ++a) {
      w[a] = int(as_int((*it)[a], where + ".winding[" + std::to_string(a) + "]"));
    }
    return w;
  }
  bad(where + ".winding must be an integer or an array of up to dims integers");
}

std::array<double, 2> parse_per_axis(const json& obj, const std::string& where,
                                     const char* key, int dims, double def0,
                                     double def1) {
  auto it = obj.find(key);
  if (it == obj.end()) return {def0, def1};
  const std::string what = where + "." + key;
  if (it->is_number()) {
    const double v = as_num(*it, what);
    return {v, v};
  }
  if (it->is_array() && it->size() == std::size_t(dims)) {
    std::array<double, 2> out{def0, def1};
    for (int a = 0; a < dims; ++a) out[a] = as_num((*it)[a], what);
    return out;
  }
  bad(what + " must be a number or an array of dims numbers");
}

ComplexField build_initial(const Grid& g, const json& obj, const std::string& where,
                           json* normalized) {
  expect_object(obj, where);
  const std::string type = need_str(obj, where, "type");
  const int d = g.dims();
  const double A = opt_num(obj, where, "amplitude", 1.0);
  if (A <= 0.0) bad(where + ".amplitude must be positive");
  const std::array<int, 2> w = parse_winding(obj, where, d);

  json norm = obj;
  norm["amplitude"] = A;
  norm["winding"] = d == 2 ? json::array({w[0], w[1]}) : json(w[0]);

  ComplexField psi(g);
  auto carrier = [&](std::size_t i) {
    double ph = 0.0;
    for (int a = 0; a < d; ++a) {
      ph += 2.0 * pi * w[a] * g.coord(i, a) / g.length(a);
    }
    return ph;
  };

  if (type == "plane_wave") {
    expect_keys(obj, where, {"type", "amplitude", "winding"});
    for (std::size_t i = 0; i < g.size(); ++i) psi[i] = std::polar(A, carrier(i));
  } else if (type == "gaussian") {
    expect_keys(obj, where, {"type", "amplitude", "winding", "width", "center"});
    if (!obj.contains("width")) bad(where + " needs \"width\"");
    const std::array<double, 2> width =
        parse_per_axis(obj, where, "width", d, 1.0, 1.0);
    const std::array<double, 2> center = parse_per_axis(
        obj, where, "center", d, 0.5 * g.length(0), d == 2 ? 0.5 * g.length(1) : 0.0);
    for (int a = 0; a < d; ++a) {
      if (width[a] <= 0.0) bad(where + ".width must be positive");
    }
    norm["width"] = d == 2 ? json::array({width[0], width[1]}) : json(width[0]);
    norm["center"] = d == 2 ? json::array({center[0], center[1]}) : json(center[0]);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double amp = A;
      for (int a = 0; a < d; ++a) {
        const double L = g.length(a);
        double s = 0.0;
        for (int im = -4; im <= 4; ++im) {
          const double u = g.coord(i, a) - center[a] + im * L;
          s += std::exp(-u * u / (2.0 * width[a] * width[a]));
        }
        amp *= s;
      }
      psi[i] = std::polar(amp, carrier(i));
    }
  } else if (type == "modulated") {
    expect_keys(obj, where, {"type", "amplitude", "winding", "depth"});
    const double depth = opt_num(obj, where, "depth", 0.5);
    if (!(std::abs(depth) < 1.0)) {
      bad(where + ".depth must lie in (-1, 1) to keep the state nodeless");
    }
    norm["depth"] = depth;
    for (std::size_t i = 0; i < g.size(); ++i) {
      double amp = A;
      for (int a = 0; a < d; ++a) {
        amp *= 1.0 + depth * std::cos(2.0 * pi * g.coord(i, a) / g.length(a));
      }
      psi[i] = std::polar(amp, carrier(i));
    }
  } else {
    bad(where + ".type \"" + type + "\" is not one of plane_wave/gaussian/modulated");
  }
  if (normalized) *normalized = std::move(norm);
  return psi;
}

// --- full config ----------------------------------------------------------------

json deep_merge(json base, const json& over) {
  if (!base.is_object() || !over.is_object()) return over;
  for (const auto& item : over.items()) {
    if (base.contains(item.key())) {
      base[item.key()] = deep_merge(base.at(item.key()), item.value());
    } else {
      base[item.key()] = item.value();
    }
  }
  return base;
}

json desk_defaults() {
  return json{
      {"grid", {{"dims", 1}, {"lengths", {32.0}}, {"points", {256}}}},
      {"initial",
       {{"type", "modulated"}, {"amplitude", 1.0}, {"winding", 1}, {"depth", 0.3}}},
      {"evolution",
       {{"T", 1.0}, {"dt", 1e-3}, {"sample_every", 10}, {"which", "original"}}},
      {"constants", {{"hbar", 1.0}, {"mass", 1.0}}},
      {"rho_min", 1e-12},
      {"output", {{"snapshots", true}}},
  };
}

enum class Sel { Original, Transformed, Both };

// The grid lives behind a stable pointer: `initial.grid` references it, and
// the struct must stay valid across moves.
struct ParsedConfig {
  ModelSpec model;
  std::unique_ptr<Grid> grid;
  ComplexField initial;
  EvolveConfig evo;
  Sel which = Sel::Original;
  bool snapshots = true;
  json normalized;
};

ParsedConfig parse_config(const std::string& text, bool desk_preset) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("parse error: ") + e.what());
  }
  expect_object(user, "the document");
  const json cfg = desk_preset ? deep_merge(desk_defaults(), user) : user;
  expect_keys(cfg, "the document",
              {"model", "grid", "initial", "evolution", "constants", "rho_min", "output"});

  const json& mobj = need(cfg, "the document", "model");
  ModelSpec model = parse_model(mobj, "model", /*allow_constants=*/false);
  if (cfg.contains("constants")) {
    const json& c = cfg.at("constants");
    expect_object(c, "constants");
    expect_keys(c, "constants", {"hbar", "mass"});
    model.hbar = opt_num(c, "constants", "hbar", 1.0);
    model.mass = opt_num(c, "constants", "mass", 1.0);
  }
  if (model.hbar <= 0.0 || model.mass <= 0.0) bad("constants must be positive");

  auto grid = std::make_unique<Grid>(
      parse_grid(need(cfg, "the document", "grid"), "grid"));
  const auto dims_ok = supported_dims(model);
  if (std::find(dims_ok.begin(), dims_ok.end(), grid->dims()) == dims_ok.end()) {
    fail(ErrorCode::Model, kind_name(model.kind) + ": dynamics unsupported on a " +
                               std::to_string(grid->dims()) + "D grid");
  }

  json norm_initial;
  ComplexField initial = build_initial(*grid, need(cfg, "the document", "initial"),
                                       "initial", &norm_initial);

  EvolveConfig evo;
  Sel which = Sel::Original;
  json evo_norm{{"T", evo.T}, {"dt", evo.dt}, {"sample_every", 10}, {"which", "original"}};
  evo.sample_every = 10;
  if (cfg.contains("evolution")) {
    const json& e = cfg.at("evolution");
    expect_object(e, "evolution");
    expect_keys(e, "evolution", {"T", "dt", "sample_every", "which"});
    evo.T = opt_num(e, "evolution", "T", evo.T);
    evo.dt = opt_num(e, "evolution", "dt", evo.dt);
    evo.sample_every = int(opt_int(e, "evolution", "sample_every", evo.sample_every));
    if (evo.sample_every < 0) bad("evolution.sample_every must be >= 0");
    std::string sel = "original";
    if (e.contains("which")) {
      if (!e.at("which").is_string()) bad("evolution.which must be a string");
      sel = e.at("which").get<std::string>();
    }
    if (sel == "original") {
      which = Sel::Original;
    } else if (sel == "transformed") {
      which = Sel::Transformed;
    } else if (sel == "both") {
      which = Sel::Both;
    } else {
      bad("evolution.which must be original, transformed, or both");
    }
    evo_norm = {{"T", evo.T},
                {"dt", evo.dt},
                {"sample_every", evo.sample_every},
                {"which", sel}};
  }
  evo.rho_min_rel = opt_num(cfg, "the document", "rho_min", 1e-12);
  if (evo.rho_min_rel < 0.0 || evo.rho_min_rel >= 1.0) {
    bad("rho_min must lie in [0, 1)");
  }

  bool snapshots = true;
  if (cfg.contains("output")) {
    const json& o = cfg.at("output");
    expect_object(o, "output");
    expect_keys(o, "output", {"snapshots"});
    snapshots = opt_bool(o, "output", "snapshots", true);
  }

  json normalized = cfg;
  normalized["initial"] = norm_initial;
  normalized["evolution"] = evo_norm;
  normalized["constants"] = {{"hbar", model.hbar}, {"mass", model.mass}};
  normalized["rho_min"] = evo.rho_min_rel;
  normalized["output"] = {{"snapshots", snapshots}};

  return ParsedConfig{std::move(model), std::move(grid), std::move(initial),
                      evo,              which,           snapshots,
                      std::move(normalized)};
}

json meta_block(const json& normalized) {
  return json{{"version", kVersionString},
              {"config_fnv1a64", fnv1a64_hex(normalized.dump())}};
}

// --- artifact assembly ------------------------------------------------------------

std::string csv_cell(const std::optional<double>& v) {
  return v ? fmt_double(*v) : std::string();
}

std::string diagnostics_csv(const std::vector<DiagnosticsRow>& rows) {
  const auto& cols = diagnostics_columns();
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out += (i ? "," : "") + cols[i];
  }
  out += "\n";
  for (const DiagnosticsRow& r : rows) {
    std::vector<std::optional<double>> cells = {
        r.t,           r.N,           r.E,           r.P[0],
        r.P[1],        r.xc[0],       r.xc[1],       r.G[0],
        r.G[1],        r.continuity_residual,        r.ehrenfest[0],
        r.ehrenfest[1], r.galilei[0], r.galilei[1],  r.T00_int,
        r.T0x_int,     r.T0y_int,     r.stress_continuity_residual};
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out += (i ? "," : "") + csv_cell(cells[i]);
    }
    out += "\n";
  }
  return out;
}

double relative_drift(const std::vector<DiagnosticsRow>& rows,
                      double (*get)(const DiagnosticsRow&)) {
  const double ref = get(rows.front());
  double d = 0.0;
  for (const DiagnosticsRow& r : rows) d = std::max(d, std::abs(get(r) - ref));
  return d / std::max(1.0, std::abs(ref));
}

json equation_summary(const std::vector<DiagnosticsRow>& rows, int dims, int steps) {
  json out;
  out["steps"] = steps;
  out["samples"] = rows.size();
  out["mass"] = rows.front().N;
  out["mass_drift"] = relative_drift(rows, [](const DiagnosticsRow& r) { return r.N; });
  if (rows.front().E) {
    out["energy"] = *rows.front().E;
    double ref = *rows.front().E, d = 0.0;
    for (const auto& r : rows) d = std::max(d, std::abs(*r.E - ref));
    out["energy_drift"] = d / std::max(1.0, std::abs(ref));
  } else {
    out["energy"] = nullptr;
    out["energy_drift"] = nullptr;
  }
  json mom = json::array(), momd = json::array(), boost = json::array();
  for (int a = 0; a < dims; ++a) {
    mom.push_back(*rows.front().P[a]);
    const double ref = *rows.front().P[a];
    double d = 0.0;
    for (const auto& r : rows) d = std::max(d, std::abs(*r.P[a] - ref));
    momd.push_back(d / std::max(1.0, std::abs(ref)));
    boost.push_back(*rows.back().galilei[a]);
  }
  out["momentum"] = mom;
  out["momentum_drift"] = momd;
  out["boost_rate_final"] = boost;
  auto max_opt = [&](const std::optional<double> DiagnosticsRow::*field) -> json {
    double v = 0.0;
    bool any = false;
    for (const auto& r : rows) {
      if (r.*field) {
        v = std::max(v, *(r.*field));
        any = true;
      }
    }
    return any ? json(v) : json(nullptr);
  };
  out["continuity_residual_max"] = max_opt(&DiagnosticsRow::continuity_residual);
  out["stress_continuity_max"] = max_opt(&DiagnosticsRow::stress_continuity_residual);
  json ehr = json::array();
  for (int a = 0; a < dims; ++a) {
    double v = 0.0;
    bool any = false;
    for (const auto& r : rows) {
      if (r.ehrenfest[a]) {
        v = std::max(v, *r.ehrenfest[a]);
        any = true;
      }
    }
    ehr.push_back(any ? json(v) : json(nullptr));
  }
  out["ehrenfest_max"] = ehr;
  return out;
}

void append_snapshots(std::string& text, const EvolveResult& r, const Grid& g,
                      const char* which) {
  json grid_lengths = json::array(), grid_points = json::array();
  for (int a = 0; a < g.dims(); ++a) {
    grid_lengths.push_back(g.length(a));
    grid_points.push_back(g.points(a));
  }
  for (const Sample& s : r.samples) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(s.psi.v.data());
    json line{{"t", s.t},
              {"which", which},
              {"dims", g.dims()},
              {"lengths", grid_lengths},
              {"points", grid_points},
              {"data", base64_encode(bytes, s.psi.v.size() * sizeof(cplx))}};
    text += line.dump();
    text += "\n";
  }
}

// Shared by transform/derive: the generator and its gradient-consistency gap.
json sigma_report(const ModelSpec& m, const HydroFields& h) {
  const Grid& g = *h.rho.grid;
  json out;
  try {
    GaugeGenerator gen = compute_sigma(m, h);
    out["available"] = true;
    json kap = json::array(), comp = json::array();
    for (int a = 0; a < g.dims(); ++a) {
      kap.push_back(gen.kappa[a]);
      comp.push_back(gen.compatible[a]);
    }
    out["kappa"] = kap;
    out["kappa_lattice_compatible"] = comp;
    out["sigma_periodic_max"] = max_abs(gen.periodic);

    std::array<RealField, 2> F = current_F(m, h);
    double num = 0.0, scale = 0.0;
    for (int a = 0; a < g.dims(); ++a) {
      RealField ds = deriv(gen.periodic, a, 1);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double target = -m.mass * F[a][i] / h.rho[i];
        num = std::max(num, std::abs(ds[i] + gen.kappa[a] - target));
        scale = std::max(scale, std::abs(target));
      }
    }
    out["grad_residual"] = num / std::max(1.0, scale);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Gauge) throw;
    out["available"] = false;
    out["reason"] = e.what();
  }
  return out;
}

}  // namespace

// --- public parsers ---------------------------------------------------------------

ModelSpec model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("parse error: ") + e.what());
  }
  return parse_model(j, "model", /*allow_constants=*/true);
}

Grid grid_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("parse error: ") + e.what());
  }
  return parse_grid(j, "grid");
}

ComplexField initial_from_json(const Grid& g, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("parse error: ") + e.what());
  }
  return build_initial(g, j, "initial", nullptr);
}

std::string catalog_json() {
  json models = json::array();
  for (const KindRow& r : kKindRows) {
    ModelSpec probe;
    probe.kind = r.kind;
    if (r.kind == ModelKind::Generic) {
      probe.generic = GenericSpec{};
      probe.generic->canonical = true;
      probe.generic->potential = Expr::constant(0.0);
    }
    json row;
    row["id"] = r.id;
    switch (r.kind) {
      case ModelKind::Free: row["params"] = json::array(); break;
      case ModelKind::LogDriftCubic: row["params"] = {"alpha", "beta"}; break;
      case ModelKind::ChenLeeLiu: row["params"] = {"alpha"}; break;
      case ModelKind::JackiwAglietti: row["params"] = {"lambda"}; break;
      case ModelKind::EIP: row["params"] = {"kappa"}; break;
      case ModelKind::DGSub: row["params"] = {"alpha", "beta"}; break;
      case ModelKind::DGGeneral: row["params"] = {"D", "Dprime", "c"}; break;
      case ModelKind::DerivFamily: row["params"] = {"alpha", "q"}; break;
      case ModelKind::Eckhaus: row["params"] = {"alpha", "beta"}; break;
      case ModelKind::Generic:
        row["params"] = {"canonical", "potential", "W", "F", "sigma_rho"};
        break;
    }
    row["dims"] = supported_dims(probe);
    row["canonical"] = is_canonical(probe);
    row["transformed_potential"] = has_transformed_potential(probe);
    switch (r.kind) {
      case ModelKind::Free:
        row["notes"] = "linear flow; the map is the identity";
        break;
      case ModelKind::LogDriftCubic:
        row["notes"] =
            "cubic nonlinearity with a constant drift current; the phase map "
            "is a plane wave, single-valued when alpha_a L_a / (2 pi hbar) is "
            "an integer";
        break;
      case ModelKind::ChenLeeLiu:
        row["notes"] = "derivative coupling rho dS; the q = 0 member of deriv_family";
        break;
      case ModelKind::JackiwAglietti:
        row["notes"] =
            "matches deriv_family at q = -1 under alpha -> hbar lambda / (2 m)";
        break;
      case ModelKind::EIP:
        row["notes"] =
            "intensity-dependent momentum coupling; the drift current is "
            "rotational in 2D, so the map exists only on a line";
        break;
      case ModelKind::DGSub:
        row["notes"] =
            "diffusive subfamily; transformed dynamics is a pure density "
            "functional with strength m alpha^2 - 2 beta hbar^2 / m";
        break;
      case ModelKind::DGGeneral:
        row["notes"] =
            "five-coefficient diffusive family; the map remaps c -> c-tilde";
        break;
      case ModelKind::DerivFamily:
        row["notes"] =
            "one-parameter derivative family; q = 1/2 is the Kaup-Newell "
            "point, q = 1 transforms to a density-only form";
        break;
      case ModelKind::Eckhaus:
        row["notes"] =
            "density-squared nonlinearity; linearizes at beta = -m alpha^2 / "
            "(2 hbar^2)";
        break;
      case ModelKind::Generic:
        row["notes"] =
            "user expressions: potential (canonical) or W and F "
            "(noncanonical); sigma_rho opts into the transformed dynamics";
        break;
    }
    models.push_back(row);
  }
  json out{{"version", kVersionString}, {"models", models}};
  return out.dump(2) + "\n";
}

// --- subcommands ------------------------------------------------------------------

void cmd_run(const std::string& config_text, const std::string& out_dir,
             bool desk_preset) {
  ParsedConfig pc = parse_config(config_text, desk_preset);
  const Grid& g = *pc.grid;
  fs::create_directories(out_dir);

  json summary;
  summary["meta"] = meta_block(pc.normalized);
  summary["config"] = pc.normalized;

  const bool has_o = pc.which != Sel::Transformed;
  const bool has_t = pc.which != Sel::Original;
  std::string snapshots_text;

  std::optional<EvolveResult> ro, rt;
  std::vector<DiagnosticsRow> rows_o, rows_t;

  if (has_o) {
    ro = run(pc.initial, pc.model, Which::Original, pc.evo);
    rows_o = compute_diagnostics(pc.model, Which::Original, *ro);
    summary["equations"]["original"] = equation_summary(rows_o, g.dims(), ro->steps);
    if (pc.snapshots) append_snapshots(snapshots_text, *ro, g, "original");
  }

  std::optional<ComplexField> phi0;
  if (has_t) {
    HydroFields h0 = decompose(pc.initial, pc.model.hbar, pc.evo.rho_min_rel);
    GaugeGenerator gen = compute_sigma(pc.model, h0);
    json kap = json::array(), comp = json::array();
    for (int a = 0; a < g.dims(); ++a) {
      kap.push_back(gen.kappa[a]);
      comp.push_back(gen.compatible[a]);
    }
    summary["gauge"] = {{"kappa", kap},
                        {"lattice_compatible", comp},
                        {"sigma_periodic_max", max_abs(gen.periodic)}};
    phi0 = apply_gauge(pc.initial, gen);
    rt = run(*phi0, pc.model, Which::Transformed, pc.evo);
    rows_t = compute_diagnostics(pc.model, Which::Transformed, *rt);
    summary["equations"]["transformed"] = equation_summary(rows_t, g.dims(), rt->steps);
    if (pc.snapshots) append_snapshots(snapshots_text, *rt, g, "transformed");
  }

  if (has_o && has_t) {
    // The two runs integrate different equations from gauge-matched states;
    // density and current must agree wherever both are sampled.
    double dgap = 0.0, cgap = 0.0, rho_scale = 0.0, j_scale = 0.0;
    for (std::size_t k = 0; k < ro->samples.size(); ++k) {
      const ComplexField& a = ro->samples[k].psi;
      const ComplexField& b = rt->samples[k].psi;
      for (std::size_t i = 0; i < g.size(); ++i) {
        dgap = std::max(dgap, std::abs(std::norm(a[i]) - std::norm(b[i])));
        rho_scale = std::max(rho_scale, std::norm(a[i]));
      }
      HydroFields ha = decompose(a, pc.model.hbar, pc.evo.rho_min_rel);
      std::array<RealField, 2> ja = model_current(pc.model, ha);
      std::array<RealField, 2> jb = bilinear_current(b, pc.model.hbar, pc.model.mass);
      for (int ax = 0; ax < g.dims(); ++ax) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          cgap = std::max(cgap, std::abs(ja[ax][i] - jb[ax][i]));
          j_scale = std::max(j_scale, std::abs(ja[ax][i]));
        }
      }
    }
    summary["equivalence"] = {{"density_gap", dgap / std::max(1.0, rho_scale)},
                              {"current_gap", cgap / std::max(1.0, j_scale)}};
  }

  if (has_t && pc.model.kind == ModelKind::Eckhaus) {
    const double lin =
        pc.model.beta + pc.model.mass * pc.model.alpha * pc.model.alpha /
                            (2.0 * pc.model.hbar * pc.model.hbar);
    if (std::abs(lin) <= 1e-12 * std::max(1.0, std::abs(pc.model.beta))) {
      ComplexField exact = *phi0;
      apply_spectral_exp_ksq(
          exact, cplx(0.0, -pc.model.hbar * pc.evo.T / (2.0 * pc.model.mass)));
      const ComplexField& got = rt->samples.back().psi;
      double gap = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        gap = std::max(gap, std::abs(got[i] - exact[i]));
      }
      summary["linearization_gap"] = gap;
    }
  }

  if (has_o) atomic_write(out_dir, "diagnostics.csv", diagnostics_csv(rows_o));
  if (has_t) {
    atomic_write(out_dir,
                 has_o ? "diagnostics_transformed.csv" : "diagnostics.csv",
                 diagnostics_csv(rows_t));
  }
  if (pc.snapshots) atomic_write(out_dir, "snapshots.jsonl", snapshots_text);
  atomic_write(out_dir, "summary.json", summary.dump(2) + "\n");
}

void cmd_transform(const std::string& config_text, const std::string& out_dir,
                   bool desk_preset) {
  ParsedConfig pc = parse_config(config_text, desk_preset);
  const Grid& g = *pc.grid;
  fs::create_directories(out_dir);

  HydroFields h = decompose(pc.initial, pc.model.hbar, pc.evo.rho_min_rel);
  json out;
  out["meta"] = meta_block(pc.normalized);
  out["model"] = kind_id(pc.model.kind);

  const RotCheck rc = check_rot_condition(pc.model, h);
  out["rot_residual"] = rc.residual;
  out["rot_vacuous"] = rc.vacuous;

  json sig = sigma_report(pc.model, h);
  const bool available = sig.at("available").get<bool>();
  out["available"] = available;
  if (!available) {
    out["reason"] = sig.at("reason");
  } else {
    out["kappa"] = sig.at("kappa");
    out["kappa_lattice_compatible"] = sig.at("kappa_lattice_compatible");
    out["sigma_periodic_max"] = sig.at("sigma_periodic_max");
    out["sigma_grad_residual"] = sig.at("grad_residual");

    const CanonicityCheck cc = check_canonicity_transformed(pc.model, h);
    out["transformed_canonical"] = cc.canonical;
    out["transformed_phase_dependence"] = cc.max_dependence;

    GaugeGenerator gen = compute_sigma(pc.model, h);
    if (gen.all_compatible(g.dims())) {
      ComplexField phi = apply_gauge(pc.initial, gen);
      std::array<RealField, 2> jm = model_current(pc.model, h);
      std::array<RealField, 2> jb = bilinear_current(phi, pc.model.hbar, pc.model.mass);
      double cgap = 0.0, jscale = 0.0, dgap = 0.0, rscale = 0.0;
      for (int a = 0; a < g.dims(); ++a) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          cgap = std::max(cgap, std::abs(jm[a][i] - jb[a][i]));
          jscale = std::max(jscale, std::abs(jm[a][i]));
        }
      }
      for (std::size_t i = 0; i < g.size(); ++i) {
        dgap = std::max(dgap,
                        std::abs(std::norm(phi[i]) - std::norm(pc.initial[i])));
        rscale = std::max(rscale, std::norm(pc.initial[i]));
      }
      out["current_reduction_gap"] = cgap / std::max(1.0, jscale);
      out["density_gap"] = dgap / std::max(1.0, rscale);
    } else {
      out["current_reduction_gap"] = nullptr;
      out["density_gap"] = nullptr;
      out["note"] =
          "ramp slope off the momentum lattice: sigma exists but the periodic "
          "phase map does not on this box";
    }
  }
  atomic_write(out_dir, "transform.json", out.dump(2) + "\n");
}

void cmd_derive(const std::string& config_text, const std::string& out_dir,
                bool desk_preset) {
  ParsedConfig pc = parse_config(config_text, desk_preset);
  const Grid& g = *pc.grid;
  fs::create_directories(out_dir);

  HydroFields h = decompose(pc.initial, pc.model.hbar, pc.evo.rho_min_rel);
  json out;
  out["meta"] = meta_block(pc.normalized);
  out["model"] = kind_id(pc.model.kind);
  out["canonical"] = is_canonical(pc.model);

  if (is_canonical(pc.model)) {
    const ExprPtr u = u_expression(pc.model, g.dims());
    const Nonlinearity nl = eval_nonlinearity(pc.model, h);
    const std::array<RealField, 2> F = current_F(pc.model, h);
    const double fd_eps = 1e-6;

    json var;
    {
      RealField w_var = euler_lagrange(u, Target::Rho, h);
      RealField w_fd = fd_oracle(u, Target::Rho, h, fd_eps);
      var["W"] = {{"closed_vs_variational", rel_gap(nl.W, w_var)},
                  {"variational_vs_fd", rel_gap(w_var, w_fd)}};
    }
    {
      RealField el = euler_lagrange(u, Target::S, h);
      RealField el_fd = fd_oracle(u, Target::S, h, fd_eps);
      RealField wc_var(g, 0.0), wc_fd(g, 0.0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        wc_var[i] = 0.5 * pc.model.hbar * el[i] / h.rho[i];
        wc_fd[i] = 0.5 * pc.model.hbar * el_fd[i] / h.rho[i];
      }
      var["Wcal"] = {{"closed_vs_variational", rel_gap(nl.Wcal, wc_var)},
                     {"variational_vs_fd", rel_gap(wc_var, wc_fd)}};
    }
    {
      json per_axis = json::array();
      for (int a = 0; a < g.dims(); ++a) {
        const Target t = a == 0 ? Target::DSx : Target::DSy;
        RealField f_var = euler_lagrange(u, t, h);
        RealField f_fd = fd_oracle(u, t, h, fd_eps);
        for (std::size_t i = 0; i < g.size(); ++i) {
          f_var[i] = -f_var[i];
          f_fd[i] = -f_fd[i];
        }
        per_axis.push_back({{"closed_vs_variational", rel_gap(F[a], f_var)},
                            {"variational_vs_fd", rel_gap(f_var, f_fd)}});
      }
      var["F"] = per_axis;
    }
    out["fd_eps"] = fd_eps;
    out["variational"] = var;
  } else {
    out["variational"] = nullptr;
  }

  const RotCheck rc = check_rot_condition(pc.model, h);
  out["rot_residual"] = rc.residual;
  out["rot_vacuous"] = rc.vacuous;
  out["sigma"] = sigma_report(pc.model, h);

  atomic_write(out_dir, "derive.json", out.dump(2) + "\n");
}

bool cmd_check(const std::string& config_text, const std::string& out_dir,
               bool desk_preset) {
  ParsedConfig pc = parse_config(config_text, desk_preset);
  const Grid& g = *pc.grid;
  const ModelSpec& m = pc.model;
  fs::create_directories(out_dir);

  HydroFields h = decompose(pc.initial, m.hbar, pc.evo.rho_min_rel);

  json checks = json::array();
  bool all_pass = true;
  auto add = [&](const std::string& name, double value, double tol,
                 const std::string& note = "") {
    const bool pass = value <= tol;
    all_pass = all_pass && pass;
    json row{{"name", name}, {"pass", pass}, {"value", value}, {"tolerance", tol}};
    if (!note.empty()) row["note"] = note;
    checks.push_back(row);
  };

  const Nonlinearity nl = eval_nonlinearity(m, h);
  const std::array<RealField, 2> F = current_F(m, h);

  // The imaginary nonlinearity must be a pure divergence: total mass rate 0,
  // and pointwise it equals div F / (2 rho / hbar).
  RealField defect(g, 0.0), divF(g, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    defect[i] = 2.0 * h.rho[i] * nl.Wcal[i] / m.hbar;
  }
  for (int a = 0; a < g.dims(); ++a) {
    RealField da = deriv(F[a], a, 1);
    for (std::size_t i = 0; i < g.size(); ++i) divF[i] += da[i];
  }
  add("mass_defect_rate_zero", std::abs(integrate(defect)),
      1e-10 * std::max(1.0, integrate(h.rho)));
  add("defect_matches_div_F", rel_gap(defect, divF), 1e-8);

  if (is_canonical(m)) {
    const RotCheck rc = check_rot_condition(m, h);
    add("canonical_drift_irrotational", rc.residual, 1e-8,
        rc.vacuous ? "vacuous in 1D" : "");
    if (g.size() <= 16384) {
      const ExprPtr u = u_expression(m, g.dims());
      RealField w_var = euler_lagrange(u, Target::Rho, h);
      RealField w_fd = fd_oracle(u, Target::Rho, h, 1e-6);
      add("variational_matches_fd", rel_gap(w_var, w_fd), 1e-6);
    }
  }

  bool sigma_ok = false, compatible = false;
  try {
    GaugeGenerator gen = compute_sigma(m, h);
    sigma_ok = true;
    compatible = gen.all_compatible(g.dims());
    std::array<RealField, 2> Fc = current_F(m, h);
    double num = 0.0, scale = 0.0;
    for (int a = 0; a < g.dims(); ++a) {
      RealField ds = deriv(gen.periodic, a, 1);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double target = -m.mass * Fc[a][i] / h.rho[i];
        num = std::max(num, std::abs(ds[i] + gen.kappa[a] - target));
        scale = std::max(scale, std::abs(target));
      }
    }
    add("sigma_gradient_consistency", num / std::max(1.0, scale), 1e-8);

    if (compatible) {
      ComplexField phi = apply_gauge(pc.initial, gen);
      std::array<RealField, 2> jm = model_current(m, h);
      std::array<RealField, 2> jb = bilinear_current(phi, m.hbar, m.mass);
      double cgap = 0.0, jscale = 0.0;
      for (int a = 0; a < g.dims(); ++a) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          cgap = std::max(cgap, std::abs(jm[a][i] - jb[a][i]));
          jscale = std::max(jscale, std::abs(jm[a][i]));
        }
      }
      add("current_reduction", cgap / std::max(1.0, jscale), 1e-9);

      // Short dual evolution: both equations must transport the density
      // identically when started from gauge-matched states.
      EvolveConfig evo;
      evo.dt = pc.evo.dt;
      evo.T = 16.0 * pc.evo.dt;
      evo.sample_every = 0;
      evo.rho_min_rel = pc.evo.rho_min_rel;
      EvolveResult a = run(pc.initial, m, Which::Original, evo);
      EvolveResult b = run(phi, m, Which::Transformed, evo);
      double dgap = 0.0, rscale = 0.0;
      const ComplexField& fa = a.samples.back().psi;
      const ComplexField& fb = b.samples.back().psi;
      for (std::size_t i = 0; i < g.size(); ++i) {
        dgap = std::max(dgap, std::abs(std::norm(fa[i]) - std::norm(fb[i])));
        rscale = std::max(rscale, std::norm(fa[i]));
      }
      add("dual_evolution_density", dgap / std::max(1.0, rscale), 1e-6,
          "16 steps of dt");
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Gauge) throw;
  }

  // Transformed canonicity expectations are pinned for catalog kinds whose
  // closed forms decide them; generic and five-coefficient models are probed
  // by cmd_transform instead.
  if (m.kind != ModelKind::Generic && m.kind != ModelKind::DGGeneral) {
    const bool expected = has_transformed_potential(m);
    const CanonicityCheck cc = check_canonicity_transformed(m, h);
    json row{{"name", "transformed_canonicity_matches_closed_form"},
             {"pass", cc.canonical == expected},
             {"value", cc.max_dependence},
             {"expected_canonical", expected}};
    all_pass = all_pass && cc.canonical == expected;
    checks.push_back(row);
  }

  json out;
  out["meta"] = meta_block(pc.normalized);
  out["model"] = kind_id(m.kind);
  out["sigma_available"] = sigma_ok;
  out["kappa_lattice_compatible_all"] = compatible;
  out["checks"] = checks;
  out["all_pass"] = all_pass;
  atomic_write(out_dir, "check.json", out.dump(2) + "\n");
  return all_pass;
}

}  // namespace nlse
