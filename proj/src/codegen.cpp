#include "uscc/codegen.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include "uscc/printer.hpp"

namespace uscc {

// ---- Mangler ---------------------------------------------------------------

Mangler::Mangler(const SpecSpace& space, const Registry& registry) : entry_class_(space.entry_class) {
  if (const auto* e = registry.get_class(entry_class_).entry_method()) entry_method_ = e->name;
  paths_of_[entry_class_].insert("");
  for (const auto& impl : space.impl_classes)
    for (const auto& b : impl.bindings) paths_of_[b.class_name].insert(b.path);
}

std::string Mangler::flatten(std::string_view path) {
  std::string out(path);
  std::replace(out.begin(), out.end(), '.', '_');
  return out;
}

std::string Mangler::uniform(std::string_view path, std::string_view member) const {
  if (path.empty()) return std::string(member);
  return flatten(path) + "_" + std::string(member);
}

std::string Mangler::function(std::string_view path, std::string_view cls, std::string_view method) const {
  if (path.empty() && cls == entry_class_ && method == entry_method_) return std::string(method);
  auto it = paths_of_.find(std::string(cls));
  bool shared = it != paths_of_.end() && it->second.size() > 1;
  if (shared && !path.empty()) return flatten(path) + "_" + std::string(cls) + "_" + std::string(method);
  return std::string(cls) + "_" + std::string(method);
}

std::string Mangler::alias(std::string_view path, std::string_view method) const {
  return flatten(path) + "_" + std::string(method);
}

const FlatUniform* SpecializedProgram::find_uniform(std::string_view name) const {
  for (const auto& u : uniforms)
    if (u.name == name) return &u;
  return nullptr;
}

namespace {

std::string join_path(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}

enum class Mode { Variant, Text };

struct Instance {
  std::string path;
  const ShaderClassInfo* cls = nullptr;  // null for free functions
};

// Rewrites one body for one instance. In Variant mode calls through
// parameters go straight to the bound implementation and parameter reads
// become literals; in Text mode they become path aliases and SPEC_* names.
class Rewriter {
 public:
  Rewriter(const Registry& reg, const Mangler& mangler, Mode mode, const ImplClassBinding* impl,
           const VariantDefineSet* variant, Instance inst)
      : reg_(reg), mangler_(mangler), mode_(mode), impl_(impl), variant_(variant), inst_(std::move(inst)) {}

  AstMethod rewrite(const AstMethod& m, std::string new_name) {
    AstMethod out = m;
    out.name = std::move(new_name);
    out.is_virtual = out.is_override = out.is_pure = false;
    scopes_.assign(1, {});
    for (const auto& p : m.params) declare(p.name);
    if (m.body) out.body = stmt(*m.body);
    return out;
  }

  const std::set<std::string>& callees() const { return callees_; }
  const std::set<std::string>& locals() const { return locals_; }

 private:
  void declare(const std::string& name) {
    scopes_.back().insert(name);
    locals_.insert(name);
  }

  bool is_local(const std::string& name) const {
    for (const auto& s : scopes_)
      if (s.count(name)) return true;
    return false;
  }

  std::optional<MemberRef> member(const std::string& name) const {
    if (!inst_.cls || is_local(name)) return std::nullopt;
    return reg_.lookup_member(inst_.cls->name, name);
  }

  Expr spec_value(const std::string& path, const SpecParam& p, const SourceSpan& span) const {
    if (mode_ == Mode::Text) return Expr::identifier(define_name(path), span);
    auto v = variant_->value_of(path);
    if (!v) throw SemanticError("UnboundParam", "variant has no value for '" + path + "'");
    if (p.kind == SpecKind::Bool) return Expr::bool_literal(*v != 0, span);
    return Expr::int_literal(*v, span);
  }

  std::string bound_class(const std::string& path) const {
    const Binding* b = impl_ ? impl_->find(path) : nullptr;
    if (!b) throw SemanticError("UnboundParam", "ImplClass has no binding for '" + path + "'");
    return b->class_name;
  }

  // `p->X` where p is a ShaderClass parameter of the current instance.
  std::optional<std::pair<std::string, const SpecParam*>> through_param(const Expr& e) const {
    const Expr& base = e.operands[0];
    if (base.kind != ExprKind::Identifier) return std::nullopt;
    auto m = member(base.text);
    if (!m || m->kind != MemberRef::Kind::SpecParam || m->spec->kind != SpecKind::ShaderClassRef)
      return std::nullopt;
    return std::make_pair(join_path(inst_.path, base.text), m->spec);
  }

  Stmt stmt(const Stmt& s) {
    Stmt out = s;
    switch (s.kind) {
      case StmtKind::VarDecl:
        for (auto& e : out.exprs) e = expr(e);
        declare(s.name);
        return out;
      case StmtKind::For:
        scopes_.emplace_back();
        out.children[0] = stmt(s.children[0]);
        for (auto& e : out.exprs) e = expr(e);
        out.children[1] = stmt(s.children[1]);
        out.children[2] = stmt(s.children[2]);
        scopes_.pop_back();
        return out;
      case StmtKind::If:
      case StmtKind::Block:
        for (auto& e : out.exprs) e = expr(e);
        for (auto& c : out.children) {
          scopes_.emplace_back();
          c = stmt(c);
          scopes_.pop_back();
        }
        return out;
      default:
        for (auto& e : out.exprs) e = expr(e);
        for (auto& c : out.children) c = stmt(c);
        return out;
    }
  }

  Expr expr(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Identifier:
        return identifier(e);
      case ExprKind::Member:
        if (auto t = through_param(e)) {
          const auto& [path, param] = *t;
          auto m = reg_.lookup_member(param->type_name, e.text);
          if (m && m->kind == MemberRef::Kind::Uniform)
            return Expr::identifier(mangler_.uniform(path, e.text), e.span);
          if (m && m->kind == MemberRef::Kind::SpecParam) return spec_value(join_path(path, e.text), *m->spec, e.span);
          throw SemanticError("UnsupportedExpression", "cannot access '" + e.text + "' through '" + path + "'");
        }
        break;
      case ExprKind::Call:
        return call(e);
      default:
        break;
    }
    Expr out = e;
    for (auto& op : out.operands) op = expr(op);
    return out;
  }

  Expr identifier(const Expr& e) const {
    if (is_local(e.text)) return e;
    if (auto m = member(e.text)) {
      if (m->kind == MemberRef::Kind::Uniform) return Expr::identifier(mangler_.uniform(inst_.path, e.text), e.span);
      if (m->kind == MemberRef::Kind::SpecParam) {
        if (m->spec->kind == SpecKind::ShaderClassRef)
          throw SemanticError("UnsupportedExpression", "ShaderClass parameter '" + e.text + "' used as a value");
        return spec_value(join_path(inst_.path, e.text), *m->spec, e.span);
      }
      return e;
    }
    if (auto v = reg_.find_enumerator(e.text)) return Expr::int_literal(*v, e.span);
    return e;
  }

  Expr call(const Expr& e) {
    Expr out = e;
    for (std::size_t i = 1; i < out.operands.size(); ++i) out.operands[i] = expr(out.operands[i]);
    const Expr& callee = e.operands[0];
    if (callee.kind == ExprKind::Identifier) {
      auto m = member(callee.text);
      if (m && m->kind == MemberRef::Kind::Method) {
        auto name = mangler_.function(inst_.path, inst_.cls->name, callee.text);
        callees_.insert(name);
        out.operands[0] = Expr::identifier(std::move(name), callee.span);
      } else if (!is_local(callee.text) && reg_.gpu_functions.count(callee.text)) {
        callees_.insert(callee.text);
      }
      return out;
    }
    if (callee.kind == ExprKind::Member) {
      if (auto t = through_param(callee)) {
        const std::string& path = t->first;
        std::string name;
        if (mode_ == Mode::Text) {
          name = mangler_.alias(path, callee.text);
        } else {
          name = mangler_.function(path, bound_class(path), callee.text);
          callees_.insert(name);
        }
        out.operands[0] = Expr::identifier(std::move(name), callee.span);
        return out;
      }
      out.operands[0] = expr(callee);
      return out;
    }
    out.operands[0] = expr(callee);
    return out;
  }

  const Registry& reg_;
  const Mangler& mangler_;
  Mode mode_;
  const ImplClassBinding* impl_;
  const VariantDefineSet* variant_;
  Instance inst_;
  std::vector<std::set<std::string>> scopes_;
  std::set<std::string> callees_;
  std::set<std::string> locals_;
};

const MethodInfo& resolve_with(const OverrideResolver& resolver, const std::string& cls, const std::string& method,
                               const Registry& reg) {
  if (resolver) return resolver(cls, method);
  return resolve_override(cls, method, reg);
}

// Names of the GPU methods an instance of `cls` provides, base-declared first.
std::vector<std::string> gpu_method_names(const std::string& cls, const Registry& reg) {
  std::vector<std::string> names;
  auto chain = reg.chain(cls);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    for (const auto& m : (*it)->methods)
      if (m.is_gpu && !m.is_entry && std::find(names.begin(), names.end(), m.name) == names.end())
        names.push_back(m.name);
  return names;
}

struct EmittedFunction {
  std::string name;
  AstMethod decl;
  std::set<std::string> callees;
  std::set<std::string> locals;
};

std::vector<EmittedFunction> instance_functions(const Instance& inst, Mode mode, const ImplClassBinding* impl,
                                                const VariantDefineSet* variant, const Mangler& mangler,
                                                const Registry& reg, const OverrideResolver& resolver) {
  std::vector<EmittedFunction> out;
  auto emit = [&](const MethodInfo& m, std::string name) {
    Rewriter rw(reg, mangler, mode, impl, variant, inst);
    EmittedFunction f;
    f.decl = rw.rewrite(m.decl, name);
    f.name = std::move(name);
    f.callees = rw.callees();
    f.locals = rw.locals();
    out.push_back(std::move(f));
  };
  for (const auto& name : gpu_method_names(inst.cls->name, reg)) {
    const MethodInfo& m = resolve_with(resolver, inst.cls->name, name, reg);
    emit(m, mangler.function(inst.path, inst.cls->name, name));
  }
  if (inst.path.empty()) {
    if (const auto* e = inst.cls->entry_method()) emit(*e, e->name);
  }
  return out;
}

std::vector<EmittedFunction> free_functions(Mode mode, const Mangler& mangler, const Registry& reg) {
  std::vector<EmittedFunction> out;
  for (const auto& [name, f] : reg.gpu_functions) {
    Rewriter rw(reg, mangler, mode, nullptr, nullptr, Instance{});
    EmittedFunction ef;
    ef.decl = rw.rewrite(f.decl, name);
    ef.name = name;
    ef.callees = rw.callees();
    ef.locals = rw.locals();
    out.push_back(std::move(ef));
  }
  return out;
}

std::vector<FlatUniform> flat_uniforms(const std::string& cls, const std::string& path, const Mangler& mangler,
                                       const Registry& reg) {
  std::vector<FlatUniform> out;
  for (const auto& u : reachable_params(cls, reg).uniforms)
    out.push_back({mangler.uniform(path, u.name), join_path(path, u.name), u.gpu_type});
  return out;
}

// Callees before callers; ties keep the given order.
std::vector<const EmittedFunction*> topo_sort(const std::vector<EmittedFunction>& fns) {
  std::map<std::string, const EmittedFunction*> by_name;
  for (const auto& f : fns) by_name[f.name] = &f;
  std::map<std::string, int> state;
  std::vector<const EmittedFunction*> out;
  std::function<void(const EmittedFunction&)> visit = [&](const EmittedFunction& f) {
    int& s = state[f.name];
    if (s == 2) return;
    if (s == 1) throw SemanticError("RecursionUnsupported", "GPU function '" + f.name + "' is recursive");
    s = 1;
    for (const auto& c : f.callees) {
      auto it = by_name.find(c);
      if (it != by_name.end()) visit(*it->second);
    }
    state[f.name] = 2;
    out.push_back(&f);
  };
  for (const auto& f : fns) visit(f);
  return out;
}

void print_function(const AstMethod& m, std::string& out) {
  out += m.return_type.spelling() + " " + m.name + "(";
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    if (i) out += ", ";
    const auto& p = m.params[i];
    out += p.type.spelling() + " " + p.name;
    for (const auto& a : p.attributes)
      if (a.name.rfind("SV_", 0) == 0) out += " : " + a.name;
  }
  out += ")\n";
  print_stmt(*m.body, 0, out);
}

class NameTable {
 public:
  // `generated` marks names the compiler invented, which a local variable
  // must not shadow.
  void add(const std::string& name, const std::string& origin, bool generated = true) {
    auto [it, fresh] = names_.emplace(name, Entry{origin, generated});
    if (!fresh && it->second.origin != origin)
      throw SemanticError("MangleCollision", "generated name '" + name + "' is used by both " + it->second.origin +
                                                 " and " + origin);
  }
  void check_local(const std::string& name, const std::string& where) const {
    auto it = names_.find(name);
    if (it != names_.end() && it->second.generated)
      throw SemanticError("MangleCollision",
                          "local '" + name + "' in " + where + " collides with the name generated for " +
                              it->second.origin);
  }

 private:
  struct Entry {
    std::string origin;
    bool generated;
  };
  std::map<std::string, Entry> names_;
};

struct Region {
  std::string path;
  std::string cls;
  int tag = 0;
  std::string condition;
};

std::vector<Region> regions_of(const SpecSpace& space, const Registry& reg) {
  std::map<std::pair<std::string, std::string>, std::vector<const ImplClassBinding*>> users;
  for (const auto& impl : space.impl_classes)
    for (const auto& b : impl.bindings) users[{b.path, b.class_name}].push_back(&impl);

  std::vector<Region> out;
  for (const auto& [key, impls] : users) {
    Region r;
    r.path = key.first;
    r.cls = key.second;
    r.tag = reg.type_tags.at(r.cls);
    std::vector<std::string> terms;
    for (std::size_t dot = r.path.find('.'); dot != std::string::npos; dot = r.path.find('.', dot + 1)) {
      const std::string prefix = r.path.substr(0, dot);
      std::set<int> tags;
      for (const auto* impl : impls) tags.insert(reg.type_tags.at(impl->find(prefix)->class_name));
      std::string term;
      for (int t : tags) term += (term.empty() ? "" : " || ") + type_define_name(prefix) + " == " + std::to_string(t);
      terms.push_back(tags.size() > 1 ? "(" + term + ")" : term);
    }
    terms.push_back(type_define_name(r.path) + " == " + std::to_string(r.tag));
    for (const auto& t : terms) r.condition += (r.condition.empty() ? "" : " && ") + t;
    out.push_back(std::move(r));
  }
  auto depth = [](const std::string& p) { return std::count(p.begin(), p.end(), '.'); };
  std::stable_sort(out.begin(), out.end(), [&](const Region& a, const Region& b) {
    if (depth(a.path) != depth(b.path)) return depth(a.path) > depth(b.path);
    if (a.path != b.path) return a.path < b.path;
    return a.tag < b.tag;
  });
  return out;
}

void print_passthrough(const ShaderClassInfo& cls, const Registry& reg, std::string& out) {
  auto chain = reg.chain(cls.name);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    for (const auto& p : (*it)->passthrough_blocks) out += p.text + "\n";
}

}  // namespace

SpecializedProgram specialize_ast(const SpecSpace& space, const VariantDefineSet& variant, const Registry& registry,
                                  const OverrideResolver& resolver) {
  const ImplClassBinding& impl = space.impl_classes.at(static_cast<std::size_t>(variant.impl_id));
  Mangler mangler(space, registry);
  const ShaderClassInfo& entry = registry.get_class(space.entry_class);

  SpecializedProgram prog;
  prog.entry_class = entry.name;
  prog.variant_id = variant.variant_id;
  if (const auto* e = entry.entry_method()) {
    prog.entry_function = e->name;
    prog.group_size = e->entry_group_size.value_or(std::array<int, 3>{1, 1, 1});
  }

  std::vector<Instance> instances{{"", &entry}};
  for (const auto& b : impl.bindings) instances.push_back({b.path, &registry.get_class(b.class_name)});

  auto add = [&](std::vector<EmittedFunction> fns) {
    for (auto& f : fns) prog.functions[f.name] = SpecializedFunction{f.name, std::move(f.decl)};
  };
  add(free_functions(Mode::Variant, mangler, registry));
  for (const auto& inst : instances) {
    add(instance_functions(inst, Mode::Variant, &impl, &variant, mangler, registry, resolver));
    auto us = flat_uniforms(inst.cls->name, inst.path, mangler, registry);
    prog.uniforms.insert(prog.uniforms.end(), us.begin(), us.end());
  }
  return prog;
}

ShaderArtifact emit_shader(const SpecSpace& space, const Registry& registry) {
  const ShaderClassInfo& entry = registry.get_class(space.entry_class);
  const MethodInfo* entry_method = entry.entry_method();
  if (!entry_method) throw SemanticError("NoEntryPoint", "'" + entry.name + "' has no entry point");
  Mangler mangler(space, registry);

  ShaderArtifact art;
  art.entry_class = entry.name;
  art.file_name = entry.name + ".hlsl";
  for (const auto& v : space.variants) art.per_variant_defines.push_back(v.defines);
  for (const auto& p : space.params) art.spec_param_names.insert(p.param.name);

  NameTable names;
  for (const auto& p : space.params) {
    auto d = p.param.kind == SpecKind::ShaderClassRef ? type_define_name(p.path) : define_name(p.path);
    names.add(d, "define of '" + p.path + "'");
  }

  // Entry-class functions and uniforms.
  Instance entry_inst{"", &entry};
  auto entry_fns = instance_functions(entry_inst, Mode::Text, nullptr, nullptr, mangler, registry, {});
  auto entry_uniforms = flat_uniforms(entry.name, "", mangler, registry);
  for (const auto& u : entry_uniforms) names.add(u.name, "uniform '" + u.path + "'", false);

  // Guarded regions, one per (path, bound class).
  struct RegionText {
    Region region;
    std::vector<FlatUniform> uniforms;
    std::vector<EmittedFunction> functions;
    std::vector<std::pair<std::string, std::string>> aliases;
  };
  std::vector<RegionText> regions;
  for (auto& r : regions_of(space, registry)) {
    RegionText rt;
    const ShaderClassInfo& cls = registry.get_class(r.cls);
    Instance inst{r.path, &cls};
    rt.uniforms = flat_uniforms(cls.name, r.path, mangler, registry);
    rt.functions = instance_functions(inst, Mode::Text, nullptr, nullptr, mangler, registry, {});
    for (const auto& m : gpu_method_names(cls.name, registry))
      rt.aliases.emplace_back(mangler.alias(r.path, m), mangler.function(r.path, cls.name, m));
    for (const auto& u : rt.uniforms) names.add(u.name, "uniform '" + u.path + "'");
    for (const auto& [a, f] : rt.aliases) names.add(a, "calls through '" + r.path + "'");
    rt.region = std::move(r);
    regions.push_back(std::move(rt));
  }
  for (const auto& f : entry_fns) names.add(f.name, "method '" + f.name + "'", f.name != entry_method->name);
  for (const auto& rt : regions)
    for (const auto& f : rt.functions) names.add(f.name, "method of '" + rt.region.cls + "' at '" + rt.region.path + "'");

  // Free functions actually used, directly or through other free functions.
  auto all_free = free_functions(Mode::Text, mangler, registry);
  std::set<std::string> used;
  std::vector<std::string> work;
  auto note_callees = [&](const std::vector<EmittedFunction>& fns) {
    for (const auto& f : fns)
      for (const auto& c : f.callees)
        if (registry.gpu_functions.count(c) && used.insert(c).second) work.push_back(c);
  };
  note_callees(entry_fns);
  for (const auto& rt : regions) note_callees(rt.functions);
  while (!work.empty()) {
    auto name = work.back();
    work.pop_back();
    for (const auto& f : all_free)
      if (f.name == name) note_callees({f});
  }
  std::vector<EmittedFunction> free_used;
  for (auto& f : all_free)
    if (used.count(f.name)) free_used.push_back(std::move(f));
  for (const auto& f : free_used) names.add(f.name, "function '" + f.name + "'", false);

  auto check_locals = [&](const std::vector<EmittedFunction>& fns) {
    for (const auto& f : fns)
      for (const auto& l : f.locals) names.check_local(l, "'" + f.name + "'");
  };
  check_locals(free_used);
  check_locals(entry_fns);
  for (const auto& rt : regions) check_locals(rt.functions);

  // Text.
  std::string out;
  out += "// Generated by uscc " + std::string(kToolVersion) + "\n";
  out += "// Entry class: " + entry.name + "\n";

  auto print_uniforms = [&](const std::vector<FlatUniform>& us) {
    for (const auto& u : us) out += u.type.spelling() + " " + u.name + ";\n";
  };
  auto print_functions = [&](const std::vector<EmittedFunction>& fns) {
    for (const auto* f : topo_sort(fns)) {
      out += "\n";
      print_function(f->decl, out);
    }
  };

  if (!entry_uniforms.empty()) {
    out += "\n";
    print_uniforms(entry_uniforms);
  }
  if (!entry.passthrough_blocks.empty() || entry.base) {
    std::string raw;
    print_passthrough(entry, registry, raw);
    if (!raw.empty()) out += "\n" + raw;
  }
  print_functions(free_used);

  for (const auto& rt : regions) {
    out += "\n#if " + rt.region.condition + "\n";
    out += "// " + rt.region.cls + " bound to '" + rt.region.path + "'\n";
    print_uniforms(rt.uniforms);
    print_passthrough(registry.get_class(rt.region.cls), registry, out);
    print_functions(rt.functions);
    if (!rt.aliases.empty()) out += "\n";
    for (const auto& [a, f] : rt.aliases) out += "#define " + a + " " + f + "\n";
    out += "#endif\n";
  }

  std::vector<EmittedFunction> entry_helpers;
  const EmittedFunction* entry_fn = nullptr;
  for (auto& f : entry_fns) {
    if (f.name == entry_method->name) {
      entry_fn = &f;
    } else {
      entry_helpers.push_back(f);
    }
  }
  print_functions(entry_helpers);
  const auto& gs = entry_method->entry_group_size.value_or(std::array<int, 3>{1, 1, 1});
  out += "\n[numthreads(" + std::to_string(gs[0]) + ", " + std::to_string(gs[1]) + ", " + std::to_string(gs[2]) +
         ")]\n";
  print_function(entry_fn->decl, out);
  art.text = std::move(out);
  return art;
}

bool devirtualization_audit(const ShaderArtifact& artifact) {
  std::set<std::string> guard_names;
  for (const auto& defs : artifact.per_variant_defines)
    for (const auto& d : defs) guard_names.insert(d.name);

  static const std::regex kIdent("[A-Za-z_][A-Za-z0-9_]*");
  std::istringstream in(artifact.text);
  std::string line;
  while (std::getline(in, line)) {
    std::string code = line.substr(0, line.find("//"));
    std::size_t first = code.find_first_not_of(" \t");
    bool directive = first != std::string::npos && code[first] == '#';
    if (code.find("->") != std::string::npos) return false;
    for (auto it = std::sregex_iterator(code.begin(), code.end(), kIdent); it != std::sregex_iterator(); ++it) {
      const std::string word = it->str();
      if (word == "virtual") return false;
      if (directive) {
        bool is_if = code.compare(first, 3, "#if") == 0 || code.compare(first, 5, "#elif") == 0;
        if (is_if && word.rfind("SPEC_", 0) == 0 && !guard_names.count(word)) return false;
        continue;
      }
      if (artifact.spec_param_names.count(word)) return false;
    }
  }
  return true;
}

}  // namespace uscc
