#include "uscc/validate.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "uscc/builtins.hpp"
#include "uscc/parser.hpp"

namespace uscc {
namespace {

struct Local {
  TypeRef type;
  bool is_const = false;
};

struct Name {
  enum class Kind {
    Local,
    Uniform,
    SpecBasic,
    SpecClass,
    Method,
    HostField,
    ClassField,  // ShaderClass-typed field that is not a parameter; R1 covers it
    HostMethod,
    GpuFunction,
    Enumerator,
    Constructor,
    Intrinsic,
    HostFunction,
    Unknown,
  };
  Kind kind = Kind::Unknown;
  const Local* local = nullptr;
  const UniformParam* uniform = nullptr;
  const SpecParam* spec = nullptr;
  const MethodInfo* method = nullptr;
};

bool is_swizzle(const std::string& s) {
  if (s.empty() || s.size() > 4) return false;
  bool xyzw = s.find_first_not_of("xyzw") == std::string::npos;
  bool rgba = s.find_first_not_of("rgba") == std::string::npos;
  return xyzw || rgba;
}

class BodyChecker {
 public:
  BodyChecker(const Registry& reg, const ShaderClassInfo* cls, std::vector<Diagnostic>& out)
      : reg_(reg), cls_(cls), out_(out) {}

  void check(const AstMethod& m) {
    scopes_.assign(1, {});
    for (const auto& p : m.params) scopes_.back()[p.name] = Local{p.type, false};
    if (m.body) stmt(*m.body);
  }

 private:
  void error(std::string code, std::string msg, const SourceSpan& span) {
    out_.push_back({std::move(code), std::move(msg), span});
  }

  Name resolve(const std::string& name) const {
    Name n;
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) {
        n.kind = Name::Kind::Local;
        n.local = &f->second;
        return n;
      }
    }
    if (cls_) {
      if (auto m = reg_.lookup_member(cls_->name, name)) return from_member(*m);
    }
    if (auto f = reg_.gpu_functions.find(name); f != reg_.gpu_functions.end()) {
      n.kind = Name::Kind::GpuFunction;
      n.method = &f->second;
      return n;
    }
    if (reg_.find_enumerator(name)) {
      n.kind = Name::Kind::Enumerator;
      return n;
    }
    if (constructor_arity(name)) {
      n.kind = Name::Kind::Constructor;
      return n;
    }
    if (intrinsic_arity(name)) {
      n.kind = Name::Kind::Intrinsic;
      return n;
    }
    if (reg_.host_functions.count(name)) n.kind = Name::Kind::HostFunction;
    return n;
  }

  Name from_member(const MemberRef& m) const {
    Name n;
    switch (m.kind) {
      case MemberRef::Kind::Uniform:
        n.kind = Name::Kind::Uniform;
        n.uniform = m.uniform;
        break;
      case MemberRef::Kind::SpecParam:
        n.kind = m.spec->kind == SpecKind::ShaderClassRef ? Name::Kind::SpecClass : Name::Kind::SpecBasic;
        n.spec = m.spec;
        break;
      case MemberRef::Kind::Method:
        n.kind = Name::Kind::Method;
        n.method = m.method;
        break;
      case MemberRef::Kind::HostField:
        n.kind = m.field && reg_.find_class(m.field->type.name) ? Name::Kind::ClassField : Name::Kind::HostField;
        break;
      case MemberRef::Kind::HostMethod:
        n.kind = Name::Kind::HostMethod;
        break;
    }
    return n;
  }

  // Resolves `p->member` where p is a ShaderClass parameter.
  std::optional<Name> member_through_param(const Expr& member) const {
    const Expr& base = member.operands[0];
    if (base.kind != ExprKind::Identifier) return std::nullopt;
    Name b = resolve(base.text);
    if (b.kind != Name::Kind::SpecClass) return std::nullopt;
    if (!reg_.find_class(b.spec->type_name)) return Name{};
    auto m = reg_.lookup_member(b.spec->type_name, member.text);
    return m ? from_member(*m) : Name{};
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Empty:
      case StmtKind::Passthrough:
        break;
      case StmtKind::VarDecl:
        if (!s.exprs.empty()) expr(s.exprs[0]);
        if (scopes_.back().count(s.name))
          error("DuplicateLocal", "'" + s.name + "' is already declared in this scope", s.span);
        scopes_.back()[s.name] = Local{s.type, s.is_const};
        break;
      case StmtKind::Assign:
        lvalue(s.exprs[0]);
        expr(s.exprs[1]);
        break;
      case StmtKind::Increment:
        lvalue(s.exprs[0]);
        break;
      case StmtKind::ExprStmt:
      case StmtKind::Return:
        for (const auto& e : s.exprs) expr(e);
        break;
      case StmtKind::For:
        scopes_.emplace_back();
        stmt(s.children[0]);
        for (const auto& e : s.exprs) expr(e);
        stmt(s.children[1]);
        stmt(s.children[2]);
        scopes_.pop_back();
        break;
      case StmtKind::If:
        expr(s.exprs[0]);
        for (const auto& c : s.children) {
          scopes_.emplace_back();
          stmt(c);
          scopes_.pop_back();
        }
        break;
      case StmtKind::Block:
        scopes_.emplace_back();
        for (const auto& c : s.children) stmt(c);
        scopes_.pop_back();
        break;
    }
  }

  bool rooted_in_class_field(const Expr& e) {
    const Expr* root = &e;
    while (!root->operands.empty() && root->kind != ExprKind::Binary && root->kind != ExprKind::Unary)
      root = &root->operands[0];
    return root->kind == ExprKind::Identifier && resolve(root->text).kind == Name::Kind::ClassField;
  }

  void lvalue(const Expr& e) {
    if (rooted_in_class_field(e)) return;
    switch (e.kind) {
      case ExprKind::Identifier: {
        Name n = resolve(e.text);
        switch (n.kind) {
          case Name::Kind::Local:
            if (n.local->is_const) error("AssignToConst", "cannot assign to const '" + e.text + "'", e.span);
            return;
          case Name::Kind::Uniform:
            error("R4", "GPU code assigns to uniform parameter '" + e.text + "'", e.span);
            return;
          case Name::Kind::SpecBasic:
          case Name::Kind::SpecClass:
            error("R4", "GPU code assigns to specialization parameter '" + e.text + "'", e.span);
            return;
          case Name::Kind::HostField:
            error("HostMemberInGpuCode", "'" + e.text + "' is host data", e.span);
            return;
          case Name::Kind::Unknown:
            error("UnknownIdentifier", "unknown identifier '" + e.text + "'", e.span);
            return;
          default:
            error("NotAssignable", "'" + e.text + "' is not assignable", e.span);
            return;
        }
      }
      case ExprKind::Member:
        if (auto through = member_through_param(e)) {
          if (through->kind == Name::Kind::Uniform || through->kind == Name::Kind::SpecBasic ||
              through->kind == Name::Kind::SpecClass)
            error("R4", "GPU code assigns to parameter '" + e.text + "' of another ShaderClass", e.span);
          else
            error("NotAssignable", "'" + e.text + "' is not assignable", e.span);
          return;
        }
        if (!is_swizzle(e.text) || e.arrow) {
          error("UnknownMember", "no member '" + e.text + "'", e.span);
          return;
        }
        lvalue(e.operands[0]);
        return;
      case ExprKind::Index: {
        expr(e.operands[1]);
        const Expr& base = e.operands[0];
        if (base.kind == ExprKind::Identifier) {
          Name n = resolve(base.text);
          if (n.kind == Name::Kind::Uniform) {
            if (!is_writable_resource_type(n.uniform->gpu_type))
              error("R4", "GPU code writes to read-only uniform '" + base.text + "'", e.span);
            return;
          }
        }
        error("NotAssignable", "indexed store requires a RWTexture2D uniform", e.span);
        return;
      }
      default:
        error("NotAssignable", "expression is not assignable", e.span);
        return;
    }
  }

  void expr(const Expr& e) {
    if (rooted_in_class_field(e)) {
      for (std::size_t k = 1; k < e.operands.size(); ++k) expr(e.operands[k]);
      return;
    }
    switch (e.kind) {
      case ExprKind::IntLiteral:
      case ExprKind::FloatLiteral:
      case ExprKind::BoolLiteral:
        return;
      case ExprKind::Identifier:
        value_name(e);
        return;
      case ExprKind::Member:
        member(e);
        return;
      case ExprKind::Index:
        expr(e.operands[0]);
        expr(e.operands[1]);
        return;
      case ExprKind::Call:
        call(e);
        return;
      case ExprKind::Binary:
        expr(e.operands[0]);
        expr(e.operands[1]);
        return;
      case ExprKind::Unary:
        if (e.text == "&") {
          address_of(e);
          return;
        }
        expr(e.operands[0]);
        return;
    }
  }

  void value_name(const Expr& e) {
    Name n = resolve(e.text);
    switch (n.kind) {
      case Name::Kind::Local:
      case Name::Kind::Uniform:
      case Name::Kind::SpecBasic:
      case Name::Kind::Enumerator:
        return;
      case Name::Kind::SpecClass:
        error("R9", "ShaderClass parameter '" + e.text + "' may only be used to call methods or read members",
              e.span);
        return;
      case Name::Kind::HostField:
      case Name::Kind::HostFunction:
      case Name::Kind::HostMethod:
        error("HostMemberInGpuCode", "'" + e.text + "' is host code and cannot be used in GPU code", e.span);
        return;
      case Name::Kind::Unknown:
        error("UnknownIdentifier", "unknown identifier '" + e.text + "'", e.span);
        return;
      default:
        error("NotAValue", "'" + e.text + "' names a function, not a value", e.span);
        return;
    }
  }

  void member(const Expr& e) {
    if (auto through = member_through_param(e)) {
      if (!e.arrow) error("UnsupportedOperator", "use '->' to access members of '" + e.operands[0].text + "'", e.span);
      switch (through->kind) {
        case Name::Kind::Uniform:
        case Name::Kind::SpecBasic:
          return;
        case Name::Kind::SpecClass:
          error("UnsupportedExpression", "nested ShaderClass parameters cannot be accessed from outside their class",
                e.span);
          return;
        case Name::Kind::Method:
          error("NotAValue", "'" + e.text + "' names a method, not a value", e.span);
          return;
        case Name::Kind::HostField:
        case Name::Kind::HostMethod:
          error("HostMemberInGpuCode", "'" + e.text + "' is host data", e.span);
          return;
        default:
          error("UnknownMember", "'" + e.operands[0].text + "' has no member '" + e.text + "'", e.span);
          return;
      }
    }
    expr(e.operands[0]);
    if (e.arrow) {
      error("UnsupportedOperator", "'->' only applies to ShaderClass parameters", e.span);
    } else if (!is_swizzle(e.text)) {
      error("UnknownMember", "no member '" + e.text + "'", e.span);
    }
  }

  void address_of(const Expr& e) {
    const Expr& target = e.operands[0];
    bool spec = false;
    if (target.kind == ExprKind::Identifier) {
      auto k = resolve(target.text).kind;
      spec = k == Name::Kind::SpecBasic || k == Name::Kind::SpecClass;
    } else if (target.kind == ExprKind::Member) {
      if (auto through = member_through_param(target))
        spec = through->kind == Name::Kind::SpecBasic || through->kind == Name::Kind::SpecClass;
    }
    if (spec) {
      error("R9", "specialization parameters cannot have their address taken", e.span);
      return;
    }
    error("UnsupportedOperator", "unary '&' is not supported in GPU code", e.span);
  }

  void check_arity(const std::string& name, std::size_t got, std::size_t want, const SourceSpan& span) {
    if (got != want)
      error("ArityMismatch",
            "'" + name + "' expects " + std::to_string(want) + " argument(s), got " + std::to_string(got), span);
  }

  void callable_method(const MethodInfo& m, std::size_t argc, const SourceSpan& span) {
    if (m.is_entry) {
      error("R10", "entry point '" + m.name + "' cannot be called from GPU code", span);
      return;
    }
    if (!m.is_gpu) {
      error("R3", "'" + m.name + "' is not a [[gpu]] function", span);
      return;
    }
    check_arity(m.name, argc, m.decl.params.size(), span);
  }

  void call(const Expr& e) {
    const Expr& callee = e.operands[0];
    const std::size_t argc = e.operands.size() - 1;
    for (std::size_t i = 1; i < e.operands.size(); ++i) expr(e.operands[i]);

    if (callee.kind == ExprKind::Identifier) {
      Name n = resolve(callee.text);
      switch (n.kind) {
        case Name::Kind::Method:
        case Name::Kind::GpuFunction:
          callable_method(*n.method, argc, e.span);
          return;
        case Name::Kind::Constructor: {
          int max = *constructor_arity(callee.text);
          if (argc < 1 || argc > static_cast<std::size_t>(max))
            error("ArityMismatch", "'" + callee.text + "' takes 1 to " + std::to_string(max) + " arguments", e.span);
          return;
        }
        case Name::Kind::Intrinsic:
          check_arity(callee.text, argc, *intrinsic_arity(callee.text), e.span);
          return;
        case Name::Kind::HostFunction:
        case Name::Kind::HostMethod:
          error("R3", "GPU code calls '" + callee.text + "', which is not annotated [[gpu]]", e.span);
          return;
        case Name::Kind::Unknown:
          error("R10", "call to unknown function '" + callee.text + "'", e.span);
          return;
        default:
          error("R10", "'" + callee.text + "' is not callable", e.span);
          return;
      }
    }

    if (callee.kind == ExprKind::Member) {
      if (auto through = member_through_param(callee)) {
        if (!callee.arrow)
          error("UnsupportedOperator", "use '->' to call through '" + callee.operands[0].text + "'", callee.span);
        if (through->kind == Name::Kind::Method) {
          callable_method(*through->method, argc, e.span);
        } else if (through->kind == Name::Kind::HostMethod) {
          error("R3", "GPU code calls host method '" + callee.text + "'", e.span);
        } else {
          error("R10", "'" + callee.operands[0].text + "' has no GPU method '" + callee.text + "'", e.span);
        }
        return;
      }
      const Expr& base = callee.operands[0];
      if (base.kind == ExprKind::Identifier) {
        Name n = resolve(base.text);
        const TypeRef* type = nullptr;
        if (n.kind == Name::Kind::Uniform) type = &n.uniform->gpu_type;
        if (n.kind == Name::Kind::Local) type = &n.local->type;
        if (type && type->name == "Texture2D" && !callee.arrow) {
          if (auto arity = texture_method_arity(callee.text)) {
            check_arity(callee.text, argc, *arity, e.span);
            return;
          }
        }
      }
      expr(base);
      error("R10", "call to unknown method '" + callee.text + "'", e.span);
      return;
    }
    expr(callee);
    error("R10", "expression is not callable", e.span);
  }

  const Registry& reg_;
  const ShaderClassInfo* cls_;
  std::vector<Diagnostic>& out_;
  std::vector<std::map<std::string, Local>> scopes_;
};

void check_class_rules(const Registry& reg, const ShaderClassInfo& c, std::vector<Diagnostic>& out) {
  for (const auto& f : c.fields) {
    if (!reg.find_class(f.type.name)) continue;
    if (!has_attribute(f.attributes, "specialization_ShaderClass"))
      out.push_back({"R1", "ShaderClass-typed member '" + f.name + "' must be a [[specialization_ShaderClass]] parameter",
                     f.span});
  }
  int entries = 0;
  for (const auto& m : c.methods) {
    if (m.is_gpu && !m.is_const())
      out.push_back({"R2", "GPU method '" + c.name + "::" + m.name + "' must be declared const", m.decl.span});
    if (!m.is_entry) continue;
    if (++entries > 1)
      out.push_back({"R5", "'" + c.name + "' declares more than one entry point", m.decl.span});
    for (const auto& p : m.decl.params) {
      auto n = std::count_if(p.attributes.begin(), p.attributes.end(),
                             [](const Attribute& a) { return is_varying_attribute(a.name); });
      if (n != 1)
        out.push_back({"R6", "entry parameter '" + p.name + "' needs exactly one SV_ semantic", p.span});
    }
  }
  for (const auto& p : c.spec_params) {
    if (p.kind == SpecKind::ShaderClassRef && p.options.empty() && reg.find_class(p.type_name))
      out.push_back({"R7", "'" + p.type_name + "' has no concrete subtype to bind '" + p.name + "' to", p.span});
  }
}

// Edges C -> S for every ShaderClass parameter of C (own or inherited) and
// every candidate S. A back edge means enumeration would never terminate.
void check_recursion(const Registry& reg, std::vector<Diagnostic>& out) {
  std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
  std::set<std::pair<FileId, std::pair<int, int>>> reported;
  auto report = [&](const SpecParam& p) {
    auto key = std::make_pair(p.span.file, std::make_pair(p.span.start_line, p.span.start_col));
    if (!reported.insert(key).second) return;
    out.push_back({"R8", "ShaderClass parameter '" + p.declaring_class + "::" + p.name +
                             "' makes its class reachable from itself",
                   p.span});
  };
  std::function<void(const std::string&)> visit = [&](const std::string& name) {
    state[name] = 1;
    for (const auto* c : reg.chain(name)) {
      for (const auto& p : c->spec_params) {
        if (p.kind != SpecKind::ShaderClassRef) continue;
        for (const auto& o : p.options) {
          int s = state[o.label];
          if (s == 1) {
            report(p);
          } else if (s == 0) {
            visit(o.label);
          }
        }
      }
    }
    state[name] = 2;
  };
  for (const auto& [name, _] : reg.classes)
    if (state[name] == 0) visit(name);
}

}  // namespace

std::vector<Diagnostic> validate(const Registry& registry) {
  std::vector<Diagnostic> out;
  for (const auto& [name, c] : registry.classes) {
    check_class_rules(registry, c, out);
    for (const auto& m : c.methods) {
      if (!m.is_gpu) continue;
      BodyChecker(registry, &c, out).check(m.decl);
    }
  }
  for (const auto& [name, f] : registry.gpu_functions) BodyChecker(registry, nullptr, out).check(f.decl);
  check_recursion(registry, out);
  sort_diagnostics(out);
  return out;
}

}  // namespace uscc
