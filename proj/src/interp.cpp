#include "uscc/interp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "uscc/builtins.hpp"

namespace uscc {

// ---- values ----------------------------------------------------------------

Value Value::boolean(bool b) {
  Value v;
  v.kind = Kind::Bool;
  v.i[0] = b ? 1 : 0;
  return v;
}

Value Value::integer(std::int64_t x) {
  Value v;
  v.kind = Kind::Int;
  v.i[0] = x;
  return v;
}

Value Value::real(double x) {
  Value v;
  v.kind = Kind::Float;
  v.f[0] = x;
  return v;
}

Value Value::float_vec(std::array<double, 4> c, int n) {
  Value v;
  v.kind = n == 1 ? Kind::Float : Kind::FloatVec;
  v.n = n;
  v.f = c;
  return v;
}

Value Value::int_vec(std::array<std::int64_t, 4> c, int n) {
  Value v;
  v.kind = n == 1 ? Kind::Int : Kind::IntVec;
  v.n = n;
  v.i = c;
  return v;
}

Value Value::resource_ref(std::string path) {
  Value v;
  v.kind = Kind::Resource;
  v.resource = std::move(path);
  return v;
}

double Value::as_float(int c) const { return is_float() ? f[c] : static_cast<double>(i[c]); }

std::int64_t Value::as_int(int c) const {
  if (!is_float()) return i[c];
  double x = f[c];
  if (!std::isfinite(x)) return 0;
  if (x >= 9.2e18) return std::numeric_limits<std::int64_t>::max();
  if (x <= -9.2e18) return std::numeric_limits<std::int64_t>::min();
  return static_cast<std::int64_t>(x);
}

bool Value::truthy() const { return is_float() ? f[0] != 0.0 : i[0] != 0; }

std::string Value::to_string() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind) {
    case Kind::Bool:
      return i[0] ? "true" : "false";
    case Kind::Resource:
      return "<" + resource + ">";
    case Kind::Int:
      return std::to_string(i[0]);
    case Kind::Float:
      out << f[0];
      return out.str();
    default:
      out << (kind == Kind::FloatVec ? "float" : "int") << n << "(";
      for (int c = 0; c < n; ++c) {
        if (c) out << ", ";
        if (kind == Kind::FloatVec) {
          out << f[c];
        } else {
          out << i[c];
        }
      }
      out << ")";
      return out.str();
  }
}

static bool floats_close(double a, double b, double tol) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  if (a == b) return true;
  if (std::isinf(a) || std::isinf(b)) return false;
  return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b));
}

bool values_close(const Value& a, const Value& b, double rel_tol) {
  if (a.kind != b.kind || a.n != b.n) return false;
  if (a.kind == Value::Kind::Resource) return a.resource == b.resource;
  for (int c = 0; c < a.n; ++c) {
    if (a.is_float()) {
      if (!floats_close(a.f[c], b.f[c], rel_tol)) return false;
    } else if (a.i[c] != b.i[c]) {
      return false;
    }
  }
  return true;
}

namespace {

// ---- types -----------------------------------------------------------------

struct Shape {
  Value::Kind kind = Value::Kind::Int;
  int n = 1;
  bool is_void = false;
};

Shape shape_of(const TypeRef& t) {
  Shape s;
  if (t.name == "void") {
    s.is_void = true;
    return s;
  }
  if (t.name == "Texture2D" || t.name == "RWTexture2D" || t.name == "SamplerState") {
    s.kind = Value::Kind::Resource;
    return s;
  }
  std::string base = t.name;
  if (!base.empty() && base.back() >= '2' && base.back() <= '4') {
    s.n = base.back() - '0';
    base.pop_back();
  }
  if (base == "float" || base == "half" || base == "double") {
    s.kind = s.n == 1 ? Value::Kind::Float : Value::Kind::FloatVec;
  } else if (base == "int" || base == "uint") {
    s.kind = s.n == 1 ? Value::Kind::Int : Value::Kind::IntVec;
  } else if (base == "bool" && s.n == 1) {
    s.kind = Value::Kind::Bool;
  } else {
    throw InterpError("TypeError", "type '" + t.spelling() + "' is not supported by the interpreter");
  }
  return s;
}

Value convert(const Value& v, const Shape& s) {
  if (s.kind == Value::Kind::Resource) {
    if (v.kind != Value::Kind::Resource) throw InterpError("TypeError", "expected a resource");
    return v;
  }
  if (v.kind == Value::Kind::Resource) throw InterpError("TypeError", "resource used as a value");
  if (s.n == 1) {
    switch (s.kind) {
      case Value::Kind::Float:
        return Value::real(v.as_float());
      case Value::Kind::Bool:
        return Value::boolean(v.truthy());
      default:
        return Value::integer(v.as_int());
    }
  }
  if (v.n != 1 && v.n < s.n) throw InterpError("TypeError", "cannot widen " + v.to_string());
  auto comp = [&](int c) { return v.n == 1 ? 0 : c; };
  if (s.kind == Value::Kind::FloatVec) {
    std::array<double, 4> out{};
    for (int c = 0; c < s.n; ++c) out[c] = v.as_float(comp(c));
    return Value::float_vec(out, s.n);
  }
  std::array<std::int64_t, 4> out{};
  for (int c = 0; c < s.n; ++c) out[c] = v.as_int(comp(c));
  return Value::int_vec(out, s.n);
}

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

Value arithmetic(const std::string& op, const Value& a, const Value& b) {
  if (a.kind == Value::Kind::Resource || b.kind == Value::Kind::Resource)
    throw InterpError("TypeError", "arithmetic on a resource");
  if (a.n != b.n && a.n != 1 && b.n != 1)
    throw InterpError("TypeError", "mismatched vector sizes in '" + op + "'");
  const int n = std::max(a.n, b.n);
  auto ca = [&](int c) { return a.n == 1 ? 0 : c; };
  auto cb = [&](int c) { return b.n == 1 ? 0 : c; };

  const bool is_compare = op == "<" || op == "<=" || op == ">" || op == ">=" || op == "==" || op == "!=";
  if (is_compare) {
    if (n != 1) throw InterpError("TypeError", "vector comparison is not supported");
    bool r;
    if (a.is_float() || b.is_float()) {
      double x = a.as_float(), y = b.as_float();
      r = op == "<" ? x < y : op == "<=" ? x <= y : op == ">" ? x > y : op == ">=" ? x >= y : op == "==" ? x == y : x != y;
    } else {
      auto x = a.as_int(), y = b.as_int();
      r = op == "<" ? x < y : op == "<=" ? x <= y : op == ">" ? x > y : op == ">=" ? x >= y : op == "==" ? x == y : x != y;
    }
    return Value::boolean(r);
  }

  if (a.is_float() || b.is_float()) {
    std::array<double, 4> out{};
    for (int c = 0; c < n; ++c) {
      double x = a.as_float(ca(c)), y = b.as_float(cb(c));
      if (op == "+") {
        out[c] = x + y;
      } else if (op == "-") {
        out[c] = x - y;
      } else if (op == "*") {
        out[c] = x * y;
      } else if (op == "/") {
        out[c] = x / y;
      } else if (op == "%") {
        out[c] = std::fmod(x, y);
      } else {
        throw InterpError("TypeError", "unsupported operator '" + op + "'");
      }
    }
    return Value::float_vec(out, n);
  }
  std::array<std::int64_t, 4> out{};
  for (int c = 0; c < n; ++c) {
    auto x = a.as_int(ca(c)), y = b.as_int(cb(c));
    if (op == "+") {
      out[c] = wrap_add(x, y);
    } else if (op == "-") {
      out[c] = wrap_sub(x, y);
    } else if (op == "*") {
      out[c] = wrap_mul(x, y);
    } else if (op == "/" || op == "%") {
      if (y == 0) throw InterpError("DivisionByZero", "integer division by zero");
      if (y == -1) {
        out[c] = op == "/" ? wrap_sub(0, x) : 0;
      } else {
        out[c] = op == "/" ? x / y : x % y;
      }
    } else {
      throw InterpError("TypeError", "unsupported operator '" + op + "'");
    }
  }
  return Value::int_vec(out, n);
}

Value swizzle(const Value& v, const std::string& sel) {
  if (v.kind == Value::Kind::Resource) throw InterpError("TypeError", "swizzle on a resource");
  std::array<int, 4> idx{};
  for (std::size_t k = 0; k < sel.size(); ++k) {
    auto pos = std::string("xyzw").find(sel[k]);
    if (pos == std::string::npos) pos = std::string("rgba").find(sel[k]);
    if (pos == std::string::npos || static_cast<int>(pos) >= v.n)
      throw InterpError("TypeError", "invalid swizzle '." + sel + "' on " + v.to_string());
    idx[k] = static_cast<int>(pos);
  }
  const int n = static_cast<int>(sel.size());
  if (v.is_float()) {
    std::array<double, 4> out{};
    for (int k = 0; k < n; ++k) out[k] = v.f[idx[k]];
    return Value::float_vec(out, n);
  }
  if (v.kind == Value::Kind::Bool) return v;
  std::array<std::int64_t, 4> out{};
  for (int k = 0; k < n; ++k) out[k] = v.i[idx[k]];
  return Value::int_vec(out, n);
}

Value texel_value(const Texel& t) { return Value::float_vec(t, 4); }

// Component-wise intrinsic over broadcast arguments.
template <typename Fn>
Value map_float(const std::vector<Value>& args, Fn fn) {
  int n = 1;
  for (const auto& a : args) {
    if (a.n != 1 && n != 1 && a.n != n) throw InterpError("TypeError", "mismatched vector sizes");
    n = std::max(n, a.n);
  }
  std::array<double, 4> out{};
  std::array<double, 3> x{};
  for (int c = 0; c < n; ++c) {
    for (std::size_t k = 0; k < args.size(); ++k) x[k] = args[k].as_float(args[k].n == 1 ? 0 : c);
    out[c] = fn(x);
  }
  return Value::float_vec(out, n);
}

template <typename Fn>
Value map_int(const std::vector<Value>& args, Fn fn) {
  int n = 1;
  for (const auto& a : args) {
    if (a.n != 1 && n != 1 && a.n != n) throw InterpError("TypeError", "mismatched vector sizes");
    n = std::max(n, a.n);
  }
  std::array<std::int64_t, 4> out{};
  std::array<std::int64_t, 3> x{};
  for (int c = 0; c < n; ++c) {
    for (std::size_t k = 0; k < args.size(); ++k) x[k] = args[k].as_int(args[k].n == 1 ? 0 : c);
    out[c] = fn(x);
  }
  return Value::int_vec(out, n);
}

Value intrinsic(const std::string& name, const std::vector<Value>& args) {
  for (const auto& a : args)
    if (a.kind == Value::Kind::Resource) throw InterpError("TypeError", "resource passed to '" + name + "'");
  const bool all_int = std::none_of(args.begin(), args.end(), [](const Value& a) { return a.is_float(); });
  if (all_int) {
    if (name == "abs") return map_int(args, [](auto x) { return x[0] < 0 ? wrap_sub(0, x[0]) : x[0]; });
    if (name == "min") return map_int(args, [](auto x) { return std::min(x[0], x[1]); });
    if (name == "max") return map_int(args, [](auto x) { return std::max(x[0], x[1]); });
    if (name == "clamp") return map_int(args, [](auto x) { return std::min(std::max(x[0], x[1]), x[2]); });
  }
  if (name == "abs") return map_float(args, [](auto x) { return std::fabs(x[0]); });
  if (name == "min") return map_float(args, [](auto x) { return std::fmin(x[0], x[1]); });
  if (name == "max") return map_float(args, [](auto x) { return std::fmax(x[0], x[1]); });
  if (name == "clamp") return map_float(args, [](auto x) { return std::fmin(std::fmax(x[0], x[1]), x[2]); });
  if (name == "saturate") return map_float(args, [](auto x) { return std::fmin(std::fmax(x[0], 0.0), 1.0); });
  if (name == "lerp") return map_float(args, [](auto x) { return x[0] + (x[1] - x[0]) * x[2]; });
  if (name == "sqrt") return map_float(args, [](auto x) { return std::sqrt(x[0]); });
  if (name == "exp") return map_float(args, [](auto x) { return std::exp(x[0]); });
  if (name == "pow") return map_float(args, [](auto x) { return std::pow(x[0], x[1]); });
  if (name == "floor") return map_float(args, [](auto x) { return std::floor(x[0]); });
  if (name == "frac") return map_float(args, [](auto x) { return x[0] - std::floor(x[0]); });
  if (name == "sin") return map_float(args, [](auto x) { return std::sin(x[0]); });
  if (name == "cos") return map_float(args, [](auto x) { return std::cos(x[0]); });
  if (name == "step") return map_float(args, [](auto x) { return x[1] >= x[0] ? 1.0 : 0.0; });
  if (name == "dot" || name == "length") {
    const Value& a = args[0];
    const Value& b = name == "dot" ? args[1] : args[0];
    if (a.n != b.n) throw InterpError("TypeError", "mismatched vector sizes in '" + name + "'");
    if (name == "dot" && !a.is_float() && !b.is_float()) {
      std::int64_t s = 0;
      for (int c = 0; c < a.n; ++c) s = wrap_add(s, wrap_mul(a.i[c], b.i[c]));
      return Value::integer(s);
    }
    double s = 0;
    for (int c = 0; c < a.n; ++c) s += a.as_float(c) * b.as_float(c);
    return Value::real(name == "dot" ? s : std::sqrt(s));
  }
  throw InterpError("UnknownName", "unknown intrinsic '" + name + "'");
}

Value construct(const std::string& name, const std::vector<Value>& args) {
  Shape s = shape_of(TypeRef{name, {}, false});
  if (s.n == 1) {
    if (args.size() != 1) throw InterpError("TypeError", "'" + name + "' takes one argument");
    return convert(args[0], s);
  }
  std::vector<Value> comps;
  for (const auto& a : args) {
    if (a.kind == Value::Kind::Resource) throw InterpError("TypeError", "resource in constructor");
    for (int c = 0; c < a.n; ++c) comps.push_back(a.is_float() ? Value::real(a.f[c]) : Value::integer(a.i[c]));
  }
  if (comps.size() == 1) return convert(comps[0], s);
  if (static_cast<int>(comps.size()) != s.n)
    throw InterpError("TypeError", "'" + name + "' needs " + std::to_string(s.n) + " components");
  if (s.kind == Value::Kind::FloatVec) {
    std::array<double, 4> out{};
    for (int c = 0; c < s.n; ++c) out[c] = comps[c].as_float();
    return Value::float_vec(out, s.n);
  }
  std::array<std::int64_t, 4> out{};
  for (int c = 0; c < s.n; ++c) out[c] = comps[c].as_int();
  return Value::int_vec(out, s.n);
}

std::string join_path(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}

// ---- machine ---------------------------------------------------------------

struct Self {
  std::string path;
  std::string cls;  // empty outside a ShaderClass
};

struct Slot {
  Value value;
  Shape shape;
};

struct Frame {
  std::vector<std::map<std::string, Slot>> scopes;
  Self self;
  Value ret;
  bool returned = false;
};

constexpr int kMaxCallDepth = 256;

class Machine {
 public:
  explicit Machine(const InvocationInput& in) : in_(in), res_(in.resources) {}
  virtual ~Machine() = default;

  ResourceModel take_resources() { return std::move(res_); }

 protected:
  virtual std::optional<Value> read_name(const std::string& name) = 0;
  virtual std::optional<Value> read_member(const Expr& member) = 0;
  virtual std::optional<Value> call_user(const Expr& call, const std::vector<Value>& args) = 0;

  Frame& frame() { return frames_.back(); }

  Value invoke(const AstMethod& decl, const std::vector<Value>& args, Self self) {
    if (frames_.size() >= kMaxCallDepth) throw InterpError("RecursionLimit", "call depth limit exceeded");
    if (!decl.body) throw InterpError("AbstractCall", "'" + decl.name + "' has no body");
    if (args.size() != decl.params.size())
      throw InterpError("TypeError", "'" + decl.name + "' called with the wrong number of arguments");
    Frame f;
    f.self = std::move(self);
    f.scopes.emplace_back();
    for (std::size_t k = 0; k < args.size(); ++k) {
      Shape s = shape_of(decl.params[k].type);
      f.scopes.back()[decl.params[k].name] = Slot{convert(args[k], s), s};
    }
    frames_.push_back(std::move(f));
    exec(*decl.body);
    Frame done = std::move(frames_.back());
    frames_.pop_back();
    Shape rs = shape_of(decl.return_type);
    if (rs.is_void) return Value{};
    if (!done.returned) throw InterpError("MissingReturn", "'" + decl.name + "' ended without returning a value");
    return convert(done.ret, rs);
  }

  Value uniform_value(const std::string& path, const TypeRef& type) {
    Shape s = shape_of(type);
    if (s.kind == Value::Kind::Resource) return Value::resource_ref(path);
    auto it = in_.uniforms.find(path);
    if (it == in_.uniforms.end()) throw InterpError("UnboundUniform", "no value for uniform '" + path + "'");
    return convert(it->second, s);
  }

  std::vector<Value> entry_args(const AstMethod& decl) {
    std::vector<Value> args;
    for (const auto& p : decl.params) {
      const Attribute* sv = nullptr;
      for (const auto& a : p.attributes)
        if (a.name.rfind("SV_", 0) == 0) sv = &a;
      if (!sv) throw InterpError("TypeError", "entry parameter '" + p.name + "' has no semantic");
      auto it = in_.varyings.find(sv->name);
      if (it == in_.varyings.end()) throw InterpError("UnboundVarying", "no value for " + sv->name);
      args.push_back(it->second);
    }
    return args;
  }

 private:
  Slot* find_local(const std::string& name) {
    auto& scopes = frame().scopes;
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  void exec(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Empty:
        return;
      case StmtKind::Passthrough:
        throw InterpError("Passthrough", "verbatim GPU text cannot be interpreted");
      case StmtKind::VarDecl: {
        Shape sh = shape_of(s.type);
        Value v = s.exprs.empty() ? convert(Value::integer(0), sh) : convert(eval(s.exprs[0]), sh);
        frame().scopes.back()[s.name] = Slot{v, sh};
        return;
      }
      case StmtKind::Assign: {
        Value rhs = eval(s.exprs[1]);
        if (s.op != "=") rhs = arithmetic(s.op.substr(0, s.op.size() - 1), eval(s.exprs[0]), rhs);
        assign(s.exprs[0], rhs);
        return;
      }
      case StmtKind::Increment:
        assign(s.exprs[0], arithmetic(s.op == "++" ? "+" : "-", eval(s.exprs[0]), Value::integer(1)));
        return;
      case StmtKind::ExprStmt:
        eval(s.exprs[0]);
        return;
      case StmtKind::Return:
        frame().ret = s.exprs.empty() ? Value{} : eval(s.exprs[0]);
        frame().returned = true;
        return;
      case StmtKind::Block:
        frame().scopes.emplace_back();
        for (const auto& c : s.children) {
          exec(c);
          if (frame().returned) break;
        }
        frame().scopes.pop_back();
        return;
      case StmtKind::If: {
        bool cond = eval(s.exprs[0]).truthy();
        frame().scopes.emplace_back();
        exec(cond ? s.children[0] : s.children[1]);
        frame().scopes.pop_back();
        return;
      }
      case StmtKind::For: {
        frame().scopes.emplace_back();
        exec(s.children[0]);
        std::uint64_t iterations = 0;
        while (s.exprs.empty() || eval(s.exprs[0]).truthy()) {
          if (++iterations > kLoopLimit) throw InterpError("LoopLimit", "loop exceeded the iteration limit");
          frame().scopes.emplace_back();
          exec(s.children[2]);
          frame().scopes.pop_back();
          if (frame().returned) break;
          exec(s.children[1]);
        }
        frame().scopes.pop_back();
        return;
      }
    }
  }

  void assign(const Expr& target, const Value& v) {
    switch (target.kind) {
      case ExprKind::Identifier: {
        Slot* slot = find_local(target.text);
        if (!slot) throw InterpError("TypeError", "'" + target.text + "' is not assignable");
        slot->value = convert(v, slot->shape);
        return;
      }
      case ExprKind::Member: {
        // Swizzle store into a local vector.
        Value base = eval(target.operands[0]);
        if (!base.is_vector()) throw InterpError("TypeError", "swizzle store into a non-vector");
        const std::string& sel = target.text;
        Value src = convert(v, Shape{base.is_float() ? Value::Kind::FloatVec : Value::Kind::IntVec,
                                     static_cast<int>(sel.size()), false});
        if (sel.size() == 1) src = v.n == 1 ? v : swizzle(v, "x");
        for (std::size_t k = 0; k < sel.size(); ++k) {
          auto pos = std::string("xyzw").find(sel[k]);
          if (pos == std::string::npos) pos = std::string("rgba").find(sel[k]);
          const int c = static_cast<int>(pos);
          if (base.is_float()) {
            base.f[c] = sel.size() == 1 ? src.as_float() : src.f[k];
          } else {
            base.i[c] = sel.size() == 1 ? src.as_int() : src.i[k];
          }
        }
        assign(target.operands[0], base);
        return;
      }
      case ExprKind::Index: {
        Value base = eval(target.operands[0]);
        Value idx = eval(target.operands[1]);
        if (base.kind != Value::Kind::Resource) throw InterpError("TypeError", "indexed store into a non-resource");
        auto it = res_.targets.find(base.resource);
        if (it == res_.targets.end())
          throw InterpError("TypeError", "'" + base.resource + "' is not a writable target");
        auto [x, y] = coords(idx);
        Grid& g = it->second;
        if (x < 0 || y < 0 || x >= g.width || y >= g.height)
          throw InterpError("OutOfBounds", "store to " + base.resource + "[" + std::to_string(x) + ", " +
                                               std::to_string(y) + "] is out of bounds");
        Value t = convert(v, Shape{Value::Kind::FloatVec, 4, false});
        g.at(static_cast<int>(x), static_cast<int>(y)) = t.f;
        res_.stores.push_back({base.resource, static_cast<int>(x), static_cast<int>(y), t.f});
        return;
      }
      default:
        throw InterpError("TypeError", "expression is not assignable");
    }
  }

  static std::pair<std::int64_t, std::int64_t> coords(const Value& idx) {
    if (idx.n < 2) throw InterpError("TypeError", "texture index needs two components");
    return {idx.as_int(0), idx.as_int(1)};
  }

  const Grid& grid_of(const std::string& path) const {
    if (auto it = res_.textures.find(path); it != res_.textures.end()) return it->second;
    if (auto it = res_.targets.find(path); it != res_.targets.end()) return it->second;
    throw InterpError("UnboundUniform", "no texture bound to '" + path + "'");
  }

  Value load(const std::string& path, std::int64_t x, std::int64_t y) const {
    const Grid& g = grid_of(path);
    if (x < 0 || y < 0 || x >= g.width || y >= g.height) return texel_value(Texel{});
    return texel_value(g.at(static_cast<int>(x), static_cast<int>(y)));
  }

  Value sample(const std::string& path, const Value& uv) const {
    const Grid& g = grid_of(path);
    if (uv.n < 2) throw InterpError("TypeError", "texture coordinates need two components");
    auto pick = [](double u, int size) {
      double t = std::floor(u * size);
      if (!(t >= 0)) t = 0;
      return static_cast<int>(std::min<double>(t, size - 1));
    };
    return texel_value(g.at(pick(uv.as_float(0), g.width), pick(uv.as_float(1), g.height)));
  }

  Value eval(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLiteral:
        return Value::integer(e.int_value());
      case ExprKind::FloatLiteral:
        return Value::real(e.float_value());
      case ExprKind::BoolLiteral:
        return Value::boolean(e.bool_value());
      case ExprKind::Identifier: {
        if (Slot* s = find_local(e.text)) return s->value;
        if (auto v = read_name(e.text)) return *v;
        throw InterpError("UnknownName", "unknown name '" + e.text + "'");
      }
      case ExprKind::Member: {
        if (auto v = read_member(e)) return *v;
        return swizzle(eval(e.operands[0]), e.text);
      }
      case ExprKind::Index: {
        Value base = eval(e.operands[0]);
        Value idx = eval(e.operands[1]);
        if (base.kind == Value::Kind::Resource) {
          auto [x, y] = coords(idx);
          return load(base.resource, x, y);
        }
        if (!base.is_vector()) throw InterpError("TypeError", "indexing a scalar");
        auto c = idx.as_int();
        if (c < 0 || c >= base.n) throw InterpError("OutOfBounds", "vector index out of range");
        return swizzle(base, std::string(1, "xyzw"[c]));
      }
      case ExprKind::Binary: {
        if (e.text == "&&" || e.text == "||") {
          bool lhs = eval(e.operands[0]).truthy();
          if (e.text == "&&" && !lhs) return Value::boolean(false);
          if (e.text == "||" && lhs) return Value::boolean(true);
          return Value::boolean(eval(e.operands[1]).truthy());
        }
        Value a = eval(e.operands[0]);
        Value b = eval(e.operands[1]);
        return arithmetic(e.text, a, b);
      }
      case ExprKind::Unary: {
        Value v = eval(e.operands[0]);
        if (e.text == "!") return Value::boolean(!v.truthy());
        if (e.text == "-") {
          Value zero = v.is_float() ? Value::real(0.0) : Value::integer(0);
          if (v.kind == Value::Kind::Bool) v = Value::integer(v.i[0]);
          return arithmetic("-", zero, v);
        }
        throw InterpError("TypeError", "unsupported unary '" + e.text + "'");
      }
      case ExprKind::Call:
        return call(e);
    }
    throw InterpError("TypeError", "unsupported expression");
  }

  Value call(const Expr& e) {
    std::vector<Value> args;
    for (std::size_t k = 1; k < e.operands.size(); ++k) args.push_back(eval(e.operands[k]));
    if (auto v = call_user(e, args)) return *v;
    const Expr& callee = e.operands[0];
    if (callee.kind == ExprKind::Identifier) {
      if (constructor_arity(callee.text)) return construct(callee.text, args);
      if (intrinsic_arity(callee.text)) return intrinsic(callee.text, args);
      throw InterpError("UnknownName", "unknown function '" + callee.text + "'");
    }
    if (callee.kind == ExprKind::Member) {
      Value base = eval(callee.operands[0]);
      if (base.kind == Value::Kind::Resource) {
        if ((callee.text == "Sample" && args.size() == 2) || (callee.text == "SampleLevel" && args.size() == 3))
          return sample(base.resource, args[1]);
        if (callee.text == "Load" && args.size() == 1) {
          auto [x, y] = coords(args[0]);
          return load(base.resource, x, y);
        }
      }
      throw InterpError("UnknownName", "unknown method '" + callee.text + "'");
    }
    throw InterpError("TypeError", "expression is not callable");
  }

 protected:
  const InvocationInput& in_;

 private:
  ResourceModel res_;
  std::vector<Frame> frames_;
};

// Dynamic dispatch over the unified source: instances are (path, runtime
// class) pairs taken from the spec assignments.
class DynamicMachine : public Machine {
 public:
  DynamicMachine(const InvocationInput& in, const Registry& reg) : Machine(in), reg_(reg) {}

  std::vector<DispatchRecord> run(const std::string& entry_class) {
    const ShaderClassInfo& entry = reg_.get_class(entry_class);
    const MethodInfo* em = entry.entry_method();
    if (!em) throw InterpError("NoEntryPoint", "'" + entry_class + "' has no entry point");
    check_passthrough(entry_class);
    for (const auto& [path, v] : in_.spec)
      if (v.kind == ParamValue::Kind::Type) check_passthrough(v.type_name);
    invoke(em->decl, entry_args(em->decl), Self{"", entry_class});
    return std::move(trace_);
  }

 protected:
  std::optional<Value> read_name(const std::string& name) override {
    const Self& self = frame().self;
    if (!self.cls.empty()) {
      if (auto m = reg_.lookup_member(self.cls, name)) {
        if (m->kind == MemberRef::Kind::Uniform) return uniform_value(join_path(self.path, name), m->uniform->gpu_type);
        if (m->kind == MemberRef::Kind::SpecParam) {
          if (m->spec->kind == SpecKind::ShaderClassRef)
            throw InterpError("TypeError", "ShaderClass parameter '" + name + "' used as a value");
          return spec_value(join_path(self.path, name));
        }
      }
    }
    if (auto v = reg_.find_enumerator(name)) return Value::integer(*v);
    return std::nullopt;
  }

  std::optional<Value> read_member(const Expr& e) override {
    auto child = through_param(e);
    if (!child) return std::nullopt;
    const auto& [path, cls] = *child;
    auto m = reg_.lookup_member(cls, e.text);
    if (m && m->kind == MemberRef::Kind::Uniform) return uniform_value(join_path(path, e.text), m->uniform->gpu_type);
    if (m && m->kind == MemberRef::Kind::SpecParam && m->spec->kind != SpecKind::ShaderClassRef)
      return spec_value(join_path(path, e.text));
    throw InterpError("TypeError", "cannot read '" + e.text + "' through '" + path + "'");
  }

  std::optional<Value> call_user(const Expr& call, const std::vector<Value>& args) override {
    const Expr& callee = call.operands[0];
    const Self self = frame().self;
    if (callee.kind == ExprKind::Identifier) {
      if (!self.cls.empty()) {
        auto m = reg_.lookup_member(self.cls, callee.text);
        if (m && m->kind == MemberRef::Kind::Method) return dispatch(self.path, self.cls, callee.text, args);
      }
      if (auto f = reg_.gpu_functions.find(callee.text); f != reg_.gpu_functions.end())
        return invoke(f->second.decl, args, Self{});
      return std::nullopt;
    }
    if (callee.kind == ExprKind::Member) {
      if (auto child = through_param(callee)) return dispatch(child->first, child->second, callee.text, args);
    }
    return std::nullopt;
  }

 private:
  void check_passthrough(const std::string& cls) const {
    for (const auto* c : reg_.chain(cls))
      if (!c->passthrough_blocks.empty())
        throw InterpError("Passthrough", "'" + c->name + "' contains verbatim GPU text");
  }

  Value spec_value(const std::string& path) const {
    auto it = in_.spec.find(path);
    if (it == in_.spec.end()) throw InterpError("UnboundParam", "no value for parameter '" + path + "'");
    if (it->second.kind == ParamValue::Kind::Bool) return Value::boolean(it->second.value != 0);
    if (it->second.kind == ParamValue::Kind::Type)
      throw InterpError("TypeError", "ShaderClass parameter '" + path + "' used as a value");
    return Value::integer(it->second.value);
  }

  // (path, runtime class) of `p` in `p->x` when p is a ShaderClass parameter.
  std::optional<std::pair<std::string, std::string>> through_param(const Expr& e) {
    const Expr& base = e.operands[0];
    const Self& self = frame().self;
    if (base.kind != ExprKind::Identifier || self.cls.empty()) return std::nullopt;
    auto m = reg_.lookup_member(self.cls, base.text);
    if (!m || m->kind != MemberRef::Kind::SpecParam || m->spec->kind != SpecKind::ShaderClassRef) return std::nullopt;
    const std::string path = join_path(self.path, base.text);
    auto it = in_.spec.find(path);
    if (it == in_.spec.end() || it->second.kind != ParamValue::Kind::Type)
      throw InterpError("UnboundParam", "no class bound to '" + path + "'");
    return std::make_pair(path, it->second.type_name);
  }

  Value dispatch(const std::string& path, const std::string& cls, const std::string& method,
                 const std::vector<Value>& args) {
    const MethodInfo* target = nullptr;
    try {
      target = &resolve_override(cls, method, reg_);
    } catch (const SemanticError& err) {
      throw InterpError(err.code(), err.what());
    }
    trace_.push_back({path, cls, method, target->declaring_class});
    return invoke(target->decl, args, Self{path, cls});
  }

  const Registry& reg_;
  std::vector<DispatchRecord> trace_;
};

class SpecializedMachine : public Machine {
 public:
  SpecializedMachine(const InvocationInput& in, const SpecializedProgram& prog) : Machine(in), prog_(prog) {}

  void run() {
    auto it = prog_.functions.find(prog_.entry_function);
    if (it == prog_.functions.end()) throw InterpError("NoEntryPoint", "program has no entry function");
    invoke(it->second.decl, entry_args(it->second.decl), Self{});
  }

 protected:
  std::optional<Value> read_name(const std::string& name) override {
    if (const auto* u = prog_.find_uniform(name)) return uniform_value(u->path, u->type);
    return std::nullopt;
  }

  std::optional<Value> read_member(const Expr&) override { return std::nullopt; }

  std::optional<Value> call_user(const Expr& call, const std::vector<Value>& args) override {
    const Expr& callee = call.operands[0];
    if (callee.kind != ExprKind::Identifier) return std::nullopt;
    auto it = prog_.functions.find(callee.text);
    if (it == prog_.functions.end()) return std::nullopt;
    return invoke(it->second.decl, args, Self{});
  }

 private:
  const SpecializedProgram& prog_;
};

}  // namespace

DynamicResult eval_dynamic(const std::string& entry_class, const InvocationInput& input, const Registry& registry) {
  DynamicMachine m(input, registry);
  DynamicResult r;
  r.trace = m.run(entry_class);
  r.resources = m.take_resources();
  return r;
}

ResourceModel eval_specialized(const SpecializedProgram& program, const InvocationInput& input) {
  SpecializedMachine m(input, program);
  m.run();
  return m.take_resources();
}

ResourceModel eval_specialized(const SpecSpace& space, const VariantDefineSet& variant, const InvocationInput& input,
                               const Registry& registry) {
  return eval_specialized(specialize_ast(space, variant, registry), input);
}

std::map<std::string, ParamValue> assignments_for(const SpecSpace& space, const VariantDefineSet& variant) {
  std::map<std::string, ParamValue> out;
  const auto& impl = space.impl_classes.at(static_cast<std::size_t>(variant.impl_id));
  for (const auto& b : impl.bindings) out[b.path] = ParamValue::TypeV(b.class_name);
  for (const auto& v : variant.values) {
    const PathParam* p = space.find_param(v.path);
    SpecKind kind = p ? p->param.kind : SpecKind::SparseInt;
    out[v.path] = kind == SpecKind::Bool   ? ParamValue::BoolV(v.value != 0)
                  : kind == SpecKind::Enum ? ParamValue::EnumV(v.value)
                                           : ParamValue::IntV(v.value);
  }
  return out;
}

// ---- equivalence -----------------------------------------------------------

namespace {

bool has_passthrough_stmt(const Stmt& s) {
  bool found = false;
  for_each_stmt(s, [&](const Stmt& x) { found = found || x.kind == StmtKind::Passthrough; });
  return found;
}

bool uses_passthrough(const std::string& cls, const Registry& reg) {
  for (const auto* c : reg.chain(cls)) {
    if (!c->passthrough_blocks.empty()) return true;
    for (const auto& m : c->methods)
      if (m.decl.body && has_passthrough_stmt(*m.decl.body)) return true;
  }
  return false;
}

Value random_value(const Shape& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> real(-1.0, 1.0);
  std::uniform_int_distribution<std::int64_t> small(0, 7);
  if (s.kind == Value::Kind::Bool) return Value::boolean(small(rng) % 2 == 0);
  if (s.kind == Value::Kind::Float || s.kind == Value::Kind::FloatVec) {
    std::array<double, 4> c{};
    for (int k = 0; k < s.n; ++k) c[k] = real(rng);
    return Value::float_vec(c, s.n);
  }
  std::array<std::int64_t, 4> c{};
  for (int k = 0; k < s.n; ++k) c[k] = small(rng);
  return Value::int_vec(c, s.n);
}

Grid random_grid(int size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Grid g(size, size);
  for (auto& t : g.texels)
    for (auto& c : t) c = unit(rng);
  return g;
}

InvocationInput random_input(const SpecSpace& space, const VariantDefineSet& variant, const Registry& reg,
                             int grid_size, std::mt19937_64& rng) {
  InvocationInput in;
  const MethodInfo* em = reg.get_class(space.entry_class).entry_method();
  std::uniform_int_distribution<std::int64_t> coord(0, grid_size - 1);
  for (const auto& p : em->decl.params) {
    for (const auto& a : p.attributes) {
      if (a.name == "SV_GroupIndex") {
        in.varyings[a.name] = Value::integer(std::uniform_int_distribution<std::int64_t>(0, 63)(rng));
      } else if (a.name.rfind("SV_", 0) == 0) {
        in.varyings[a.name] = Value::int_vec({coord(rng), coord(rng), 0, 0}, 3);
      }
    }
  }
  for (const auto& u : space.uniforms) {
    const TypeRef& t = u.uniform.gpu_type;
    if (t.name == "SamplerState") continue;
    if (t.name == "Texture2D") {
      in.resources.textures[u.path] = random_grid(grid_size, rng);
    } else if (t.name == "RWTexture2D") {
      in.resources.targets[u.path] = random_grid(grid_size, rng);
    } else {
      in.uniforms[u.path] = random_value(shape_of(t), rng);
    }
  }
  in.spec = assignments_for(space, variant);
  return in;
}

std::string describe_input(const InvocationInput& in) {
  std::string out;
  for (const auto& [k, v] : in.varyings) out += k + "=" + v.to_string() + " ";
  for (const auto& [k, v] : in.uniforms) out += k + "=" + v.to_string() + " ";
  for (const auto& [k, v] : in.spec)
    out += k + "=" + (v.kind == ParamValue::Kind::Type ? v.type_name : std::to_string(v.value)) + " ";
  if (!out.empty()) out.pop_back();
  return out;
}

// Empty when equal; otherwise the first difference.
std::string compare_targets(const ResourceModel& a, const ResourceModel& b, double tol) {
  if (a.targets.size() != b.targets.size()) return "different sets of writable targets";
  for (const auto& [name, ga] : a.targets) {
    auto it = b.targets.find(name);
    if (it == b.targets.end()) return "target '" + name + "' missing";
    const Grid& gb = it->second;
    if (ga.width != gb.width || ga.height != gb.height) return "target '" + name + "' changed size";
    for (int y = 0; y < ga.height; ++y) {
      for (int x = 0; x < ga.width; ++x) {
        Value va = texel_value(ga.at(x, y));
        Value vb = texel_value(gb.at(x, y));
        if (!values_close(va, vb, tol))
          return name + "[" + std::to_string(x) + ", " + std::to_string(y) + "]: dynamic " + va.to_string() +
                 ", specialized " + vb.to_string();
      }
    }
  }
  return "";
}

struct Outcome {
  std::optional<ResourceModel> resources;
  std::string error_code;
  std::string error;
};

template <typename Fn>
Outcome run_guarded(Fn fn) {
  Outcome o;
  try {
    o.resources = fn();
  } catch (const InterpError& e) {
    o.error_code = e.code();
    o.error = e.what();
  } catch (const SemanticError& e) {
    o.error_code = e.code();
    o.error = e.what();
  }
  return o;
}

}  // namespace

bool EquivalenceReport::passed() const { return failures() == 0; }

std::size_t EquivalenceReport::failures() const {
  return static_cast<std::size_t>(std::count_if(variants.begin(), variants.end(), [](const VariantCheck& v) {
    return v.status == VariantCheck::Status::Fail;
  }));
}

static const char* status_name(VariantCheck::Status s) {
  switch (s) {
    case VariantCheck::Status::Pass:
      return "pass";
    case VariantCheck::Status::Fail:
      return "FAIL";
  }
  return "";
}

std::string EquivalenceReport::to_text() const {
  std::string out = "equivalence " + entry_class + ": " + std::to_string(variants.size()) + " variant(s), " +
                    std::to_string(trials) + " trial(s) each, seed " + std::to_string(seed) + "\n";
  for (const auto& v : variants) {
    out += "  variant " + std::to_string(v.variant_id) + ": " + status_name(v.status);
    if (v.failing_trial) out += " at trial " + std::to_string(*v.failing_trial);
    if (!v.detail.empty()) out += ": " + v.detail;
    out += "\n";
  }
  out += "  result: " + std::string(passed() ? "pass" : "FAIL") + " (" + std::to_string(failures()) +
         " failing variant(s))\n";
  return out;
}

std::string EquivalenceReport::to_json() const {
  nlohmann::ordered_json j;
  j["entry_class"] = entry_class;
  j["trials"] = trials;
  j["seed"] = seed;
  j["passed"] = passed();
  j["variants"] = nlohmann::ordered_json::array();
  for (const auto& v : variants) {
    nlohmann::ordered_json e;
    e["variant_id"] = v.variant_id;
    e["status"] = v.status == VariantCheck::Status::Fail ? "fail" : status_name(v.status);
    e["trials_run"] = v.trials_run;
    if (v.failing_trial) e["failing_trial"] = *v.failing_trial;
    if (!v.detail.empty()) e["detail"] = v.detail;
    j["variants"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

EquivalenceReport equivalence_check(const std::string& entry_class, const Registry& registry, std::size_t trials,
                                    std::uint64_t seed, const EquivalenceOptions& options) {
  EquivalenceReport report;
  report.entry_class = entry_class;
  report.trials = trials;
  report.seed = seed;
  if (trials == 0) return report;

  const SpecSpace space = enumerate_variants(entry_class, registry, options.max_variants);
  std::set<std::string> classes{entry_class};
  for (const auto& impl : space.impl_classes)
    for (const auto& b : impl.bindings) classes.insert(b.class_name);
  for (const auto& cls : classes)
    if (uses_passthrough(cls, registry))
      throw InterpError("Passthrough", "'" + cls + "' contains verbatim GPU text, which the interpreter cannot evaluate");
  for (const auto& variant : space.variants) {
    VariantCheck check;
    check.variant_id = variant.variant_id;

    std::optional<SpecializedProgram> program;
    try {
      program = specialize_ast(space, variant, registry, options.resolver);
    } catch (const SemanticError& e) {
      check.status = VariantCheck::Status::Fail;
      check.detail = std::string("specialization failed: ") + e.what();
      report.variants.push_back(std::move(check));
      continue;
    }

    for (std::size_t t = 0; t < trials; ++t) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(variant.variant_id), static_cast<std::uint32_t>(t)};
      std::mt19937_64 rng(seq);
      InvocationInput input = random_input(space, variant, registry, options.grid_size, rng);
      Outcome dyn = run_guarded([&] { return eval_dynamic(entry_class, input, registry).resources; });
      Outcome spec = run_guarded([&] { return eval_specialized(*program, input); });
      ++check.trials_run;

      std::string mismatch;
      if (dyn.resources && spec.resources) {
        mismatch = compare_targets(*dyn.resources, *spec.resources, options.rel_tol);
      } else if (dyn.error_code != spec.error_code) {
        mismatch = "dynamic " + (dyn.resources ? std::string("succeeded") : "failed with " + dyn.error) +
                   "; specialized " + (spec.resources ? std::string("succeeded") : "failed with " + spec.error);
      }
      if (!mismatch.empty()) {
        check.status = VariantCheck::Status::Fail;
        check.failing_trial = t;
        check.detail = mismatch + " | input: " + describe_input(input);
        break;
      }
    }
    report.variants.push_back(std::move(check));
  }
  return report;
}

}  // namespace uscc
