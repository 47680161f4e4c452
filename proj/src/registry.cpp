#include "uscc/registry.hpp"

#include <algorithm>
#include <set>

#include "uscc/parser.hpp"

namespace uscc {

std::string_view to_string(SpecKind kind) {
  switch (kind) {
    case SpecKind::Bool:
      return "bool";
    case SpecKind::SparseInt:
      return "sparse_int";
    case SpecKind::Enum:
      return "enum";
    case SpecKind::ShaderClassRef:
      return "shader_class";
  }
  return "";
}

std::optional<SpecKind> spec_kind_from_string(std::string_view s) {
  for (auto k : {SpecKind::Bool, SpecKind::SparseInt, SpecKind::Enum, SpecKind::ShaderClassRef})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

const MethodInfo* ShaderClassInfo::find_method(std::string_view n) const {
  for (const auto& m : methods)
    if (m.name == n) return &m;
  return nullptr;
}

const MethodInfo* ShaderClassInfo::entry_method() const {
  for (const auto& m : methods)
    if (m.is_entry) return &m;
  return nullptr;
}

const UniformParam* ShaderClassInfo::find_uniform(std::string_view n) const {
  for (const auto& u : uniforms)
    if (u.name == n) return &u;
  return nullptr;
}

const SpecParam* ShaderClassInfo::find_spec_param(std::string_view n) const {
  for (const auto& p : spec_params)
    if (p.name == n) return &p;
  return nullptr;
}

const ShaderClassInfo* Registry::find_class(std::string_view name) const {
  auto it = classes.find(std::string(name));
  return it == classes.end() ? nullptr : &it->second;
}

const ShaderClassInfo& Registry::get_class(std::string_view name) const {
  const auto* c = find_class(name);
  if (!c) throw SemanticError("UnknownClass", "unknown ShaderClass '" + std::string(name) + "'");
  return *c;
}

std::vector<const ShaderClassInfo*> Registry::chain(std::string_view name) const {
  std::vector<const ShaderClassInfo*> out;
  const ShaderClassInfo* cur = find_class(name);
  while (cur && out.size() <= classes.size()) {
    out.push_back(cur);
    cur = cur->base ? find_class(*cur->base) : nullptr;
  }
  return out;
}

bool Registry::derives_from(std::string_view derived, std::string_view base) const {
  for (const auto* c : chain(derived))
    if (c->name == base) return true;
  return false;
}

std::optional<MemberRef> Registry::lookup_member(std::string_view cls, std::string_view name) const {
  for (const auto* c : chain(cls)) {
    if (const auto* u = c->find_uniform(name)) return MemberRef{MemberRef::Kind::Uniform, c, u};
    if (const auto* p = c->find_spec_param(name)) return MemberRef{MemberRef::Kind::SpecParam, c, nullptr, p};
    if (const auto* m = c->find_method(name)) return MemberRef{MemberRef::Kind::Method, c, nullptr, nullptr, m};
    for (const auto& f : c->fields)
      if (f.name == name) return MemberRef{MemberRef::Kind::HostField, c, nullptr, nullptr, nullptr, &f};
    for (const auto& h : c->host_methods)
      if (h == name) return MemberRef{MemberRef::Kind::HostMethod, c};
  }
  return std::nullopt;
}

std::optional<std::int64_t> Registry::find_enumerator(std::string_view spelling) const {
  auto sep = spelling.rfind("::");
  if (sep != std::string_view::npos) {
    auto it = enums.find(std::string(spelling.substr(0, sep)));
    if (it == enums.end()) return std::nullopt;
    auto member = spelling.substr(sep + 2);
    for (const auto& [n, v] : it->second.enumerators)
      if (n == member) return v;
    return std::nullopt;
  }
  std::optional<std::int64_t> found;
  int hits = 0;
  for (const auto& [_, e] : enums)
    for (const auto& [n, v] : e.enumerators)
      if (n == spelling) {
        found = v;
        ++hits;
      }
  return hits == 1 ? found : std::nullopt;
}

bool is_resource_type(const TypeRef& t) {
  return t.name == "Texture2D" || t.name == "RWTexture2D" || t.name == "SamplerState";
}

bool is_writable_resource_type(const TypeRef& t) { return t.name == "RWTexture2D"; }

bool is_supported_uniform_type(const TypeRef& t) {
  if (t.is_pointer) return false;
  if (t.name == "Texture2D") return t.template_args.size() <= 1;
  if (t.name == "RWTexture2D") return t.template_args.size() == 1;
  if (!t.template_args.empty()) return false;
  static const std::set<std::string> kValueTypes = {
      "SamplerState", "bool", "int", "uint", "float", "float2", "float3", "float4",
      "int2", "int3", "int4", "uint2", "uint3", "uint4",
  };
  return kValueTypes.count(t.name) > 0;
}

const MethodInfo& resolve_override(std::string_view class_name, std::string_view method, const Registry& registry) {
  for (const auto* c : registry.chain(class_name)) {
    if (const auto* m = c->find_method(method)) {
      if (m->is_pure())
        throw SemanticError("AbstractCall", std::string(class_name) + "::" + std::string(method) +
                                                " resolves to a pure virtual method");
      return *m;
    }
  }
  throw SemanticError("UnknownMethod",
                      "no method '" + std::string(method) + "' in '" + std::string(class_name) + "' or its bases");
}

namespace {

bool same_signature(const AstMethod& a, const AstMethod& b) {
  if (!(a.return_type == b.return_type) || a.is_const != b.is_const || a.params.size() != b.params.size())
    return false;
  for (std::size_t i = 0; i < a.params.size(); ++i)
    if (!(a.params[i].type == b.params[i].type)) return false;
  return true;
}

class RegistryBuilder {
 public:
  RegistryResult run(const std::vector<TranslationUnit>& units) {
    collect(units);
    link_hierarchy();
    classify_members();
    bind_overrides();
    compute_subtypes();
    fill_class_options();
    sort_diagnostics(diags_);
    return {std::move(reg_), std::move(diags_)};
  }

 private:
  void error(std::string code, std::string message, const SourceSpan& span) {
    diags_.push_back({std::move(code), std::move(message), span});
  }

  void collect(const std::vector<TranslationUnit>& units) {
    // Sort by location so duplicate handling is independent of unit order.
    std::vector<const AstClass*> classes;
    std::vector<const AstEnum*> enums;
    std::vector<const AstMethod*> functions;
    for (const auto& u : units) {
      for (const auto& c : u.classes) classes.push_back(&c);
      for (const auto& e : u.enums) enums.push_back(&e);
      for (const auto& f : u.free_gpu_functions) functions.push_back(&f);
      for (const auto& h : u.host_functions) reg_.host_functions.emplace(h.name, h.span);
    }
    auto by_span = [](const auto* a, const auto* b) {
      return std::tie(a->span.file, a->span.start_line, a->span.start_col) <
             std::tie(b->span.file, b->span.start_line, b->span.start_col);
    };
    std::stable_sort(classes.begin(), classes.end(), by_span);
    std::stable_sort(enums.begin(), enums.end(), by_span);
    std::stable_sort(functions.begin(), functions.end(), by_span);

    for (const auto* e : enums) {
      if (reg_.enums.count(e->name)) {
        error("DuplicateEnum", "enum '" + e->name + "' is declared more than once", e->span);
        continue;
      }
      reg_.enums[e->name] = EnumInfo{e->name, e->enumerators, e->span};
    }
    for (const auto* c : classes) {
      if (reg_.classes.count(c->name)) {
        error("DuplicateClass", "ShaderClass '" + c->name + "' is declared more than once", c->span);
        continue;
      }
      ShaderClassInfo info;
      info.name = c->name;
      info.base = c->base_name;
      info.fields = c->fields;
      info.host_methods = c->host_methods;
      info.passthrough_blocks = c->passthrough_blocks;
      info.span = c->span;
      reg_.classes.emplace(c->name, std::move(info));
      asts_[c->name] = c;
    }
    for (const auto* f : functions) {
      if (reg_.gpu_functions.count(f->name)) {
        error("DuplicateFunction", "GPU function '" + f->name + "' is declared more than once", f->span);
        continue;
      }
      MethodInfo m;
      m.name = f->name;
      m.decl = *f;
      m.is_gpu = true;
      reg_.gpu_functions.emplace(f->name, std::move(m));
    }
  }

  void link_hierarchy() {
    for (auto& [name, info] : reg_.classes) {
      if (info.base && !reg_.classes.count(*info.base)) {
        error("UnknownBase", "base class '" + *info.base + "' of '" + name + "' is not a ShaderClass", info.span);
        info.base.reset();
      }
    }
    std::set<std::string> cyclic;
    for (const auto& [name, info] : reg_.classes) {
      std::set<std::string> seen{name};
      const ShaderClassInfo* cur = &info;
      while (cur->base) {
        if (*cur->base == name) {
          cyclic.insert(name);
          break;
        }
        if (!seen.insert(*cur->base).second) break;
        cur = &reg_.classes.at(*cur->base);
      }
    }
    // One diagnostic per cycle, at its lexicographically first member.
    std::set<std::string> reported;
    for (const auto& name : cyclic) {
      if (reported.count(name)) continue;
      std::string path = name;
      for (std::string cur = *reg_.classes.at(name).base; cur != name; cur = *reg_.classes.at(cur).base) {
        reported.insert(cur);
        path += " -> " + cur;
      }
      error("InheritanceCycle", "inheritance cycle: " + path + " -> " + name, reg_.classes.at(name).span);
    }
    for (const auto& name : cyclic) reg_.classes.at(name).base.reset();
  }

  void classify_members() {
    for (auto& [name, info] : reg_.classes) {
      const AstClass& ast = *asts_.at(name);
      for (const auto& f : ast.fields) classify_field(info, f);
      for (const auto& m : ast.methods) classify_method(info, m);
    }
  }

  void classify_field(ShaderClassInfo& info, const AstField& f) {
    std::vector<const Attribute*> spec_attrs;
    const Attribute* uniform = nullptr;
    for (const auto& a : f.attributes) {
      if (is_specialization_attribute(a.name)) {
        spec_attrs.push_back(&a);
      } else if (a.name == "uniform") {
        uniform = &a;
      } else {
        error("MisplacedAttribute", "attribute '" + a.name + "' is not allowed on a data member", a.span);
      }
    }
    if (spec_attrs.size() + (uniform ? 1 : 0) > 1) {
      error("ConflictingAttributes", "member '" + f.name + "' carries more than one parameter attribute", f.span);
      return;
    }
    bool class_typed = reg_.classes.count(f.type.name) > 0;
    if (uniform) {
      // ShaderClass-typed uniforms are reported by validation (R1).
      if (class_typed) return;
      if (!is_supported_uniform_type(f.type)) {
        error("UnsupportedUniformType", "unsupported uniform type '" + f.type.spelling() + "'", f.span);
        return;
      }
      info.uniforms.push_back({f.name, f.type, info.name, f.span});
      return;
    }
    if (spec_attrs.empty()) return;
    const Attribute& a = *spec_attrs.front();
    SpecParam p;
    p.name = f.name;
    p.declaring_class = info.name;
    p.span = f.span;
    if (a.name == "specialization_Bool") {
      p.kind = SpecKind::Bool;
      if (f.type.name != "bool" || f.type.is_pointer) {
        error("SpecTypeMismatch", "specialization_Bool requires a bool member", f.span);
        return;
      }
      p.options = {{0, "false"}, {1, "true"}};
    } else if (a.name == "specialization_SparseInt") {
      p.kind = SpecKind::SparseInt;
      if ((f.type.name != "int" && f.type.name != "uint") || f.type.is_pointer) {
        error("SpecTypeMismatch", "specialization_SparseInt requires an int or uint member", f.span);
        return;
      }
      for (const auto& arg : a.args) {
        auto v = arg.int_value();
        p.options.push_back({v, std::to_string(v)});
      }
    } else if (a.name == "specialization_Enum") {
      p.kind = SpecKind::Enum;
      p.type_name = f.type.name;
      auto it = reg_.enums.find(f.type.name);
      if (it == reg_.enums.end()) {
        error("UnknownEnum", "'" + f.type.name + "' is not a known enum", f.span);
        return;
      }
      std::set<std::int64_t> seen;
      for (const auto& [n, v] : it->second.enumerators) {
        if (!seen.insert(v).second) {
          error("EnumDuplicateValue", "enum '" + f.type.name + "' repeats value " + std::to_string(v), f.span);
          return;
        }
        p.options.push_back({v, n});
      }
      if (p.options.empty()) {
        error("EmptyOptions", "enum '" + f.type.name + "' has no enumerators", f.span);
        return;
      }
    } else {
      p.kind = SpecKind::ShaderClassRef;
      p.type_name = f.type.name;
      if (!class_typed) {
        error("UnknownClass", "'" + f.type.name + "' is not a ShaderClass", f.span);
        return;
      }
      if (!f.type.is_pointer) {
        error("SpecTypeMismatch", "ShaderClass members must be declared as pointers", f.span);
        return;
      }
      // Options are filled once the hierarchy is known.
    }
    info.spec_params.push_back(std::move(p));
  }

  void classify_method(ShaderClassInfo& info, const AstMethod& m) {
    MethodInfo mi;
    mi.name = m.name;
    mi.declaring_class = info.name;
    mi.decl = m;
    for (const auto& a : m.attributes) {
      if (a.name == "gpu") {
        mi.is_gpu = true;
      } else if (a.name == "entry_ComputeShader") {
        mi.is_entry = true;
        mi.is_gpu = true;
        mi.entry_group_size = std::array<int, 3>{static_cast<int>(a.args[0].int_value()),
                                                 static_cast<int>(a.args[1].int_value()),
                                                 static_cast<int>(a.args[2].int_value())};
      } else {
        error("MisplacedAttribute", "attribute '" + a.name + "' is not allowed on a method", a.span);
      }
    }
    if (!mi.is_entry) {
      for (const auto& p : m.params)
        for (const auto& a : p.attributes)
          error("MisplacedAttribute", "attribute '" + a.name + "' is only allowed on entry point parameters",
                a.span);
    } else {
      for (const auto& p : m.params)
        for (const auto& a : p.attributes)
          if (!is_varying_attribute(a.name))
            error("MisplacedAttribute", "attribute '" + a.name + "' is not a varying semantic", a.span);
      if (m.is_virtual) error("VirtualEntry", "entry point '" + m.name + "' must not be virtual", m.span);
      if (m.return_type.name != "void" || m.return_type.is_pointer)
        error("EntryReturnType", "entry point '" + m.name + "' must return void", m.span);
    }
    if (mi.is_entry) info.has_entry = true;
    info.methods.push_back(std::move(mi));
  }

  void bind_overrides() {
    for (auto& [name, info] : reg_.classes) {
      for (auto& m : info.methods) {
        const MethodInfo* overridden = nullptr;
        auto chain = reg_.chain(name);
        for (std::size_t i = 1; i < chain.size() && !overridden; ++i)
          overridden = chain[i]->find_method(m.name);
        if (!overridden) {
          if (m.decl.is_override)
            error("OverrideWithoutVirtual", "'" + name + "::" + m.name + "' is marked override but overrides nothing",
                  m.decl.span);
          continue;
        }
        if (!overridden->is_virtual()) {
          error(m.decl.is_override ? "OverrideWithoutVirtual" : "HiddenMethod",
                "'" + name + "::" + m.name + "' redeclares non-virtual '" + overridden->declaring_class +
                    "::" + m.name + "'",
                m.decl.span);
          continue;
        }
        if (!same_signature(m.decl, overridden->decl)) {
          error("SignatureMismatch",
                "'" + name + "::" + m.name + "' does not match the signature of '" + overridden->declaring_class +
                    "::" + m.name + "'",
                m.decl.span);
          continue;
        }
        if (overridden->is_entry || m.is_entry) {
          error("VirtualEntry", "entry point '" + m.name + "' cannot override or be overridden", m.decl.span);
          continue;
        }
        if (overridden->is_gpu != m.is_gpu) {
          error("SignatureMismatch",
                "'" + name + "::" + m.name + "' must match the [[gpu]] annotation of the method it overrides",
                m.decl.span);
          continue;
        }
        m.decl.is_virtual = true;
        m.overrides = overridden->declaring_class;
      }
    }
  }

  void compute_subtypes() {
    for (auto& [name, info] : reg_.classes) {
      std::set<std::string> virtuals;
      for (const auto* c : reg_.chain(name))
        for (const auto& m : c->methods)
          if (m.is_virtual()) virtuals.insert(m.name);
      for (const auto& v : virtuals) {
        for (const auto* c : reg_.chain(name)) {
          if (const auto* m = c->find_method(v)) {
            if (m->is_pure()) info.is_abstract = true;
            break;
          }
        }
      }
    }
    for (const auto& [name, info] : reg_.classes) reg_.subtype_index[name];
    for (const auto& [name, info] : reg_.classes) {
      if (info.is_abstract) continue;
      for (const auto* c : reg_.chain(name)) reg_.subtype_index[c->name].push_back(name);
    }
    // Map iteration is lexicographic, so every list is already sorted.
    for (const auto& [name, info] : reg_.classes) {
      if (info.is_abstract) continue;
      const auto chain = reg_.chain(name);
      const auto& family = reg_.subtype_index.at(chain.back()->name);
      auto it = std::find(family.begin(), family.end(), name);
      reg_.type_tags[name] = static_cast<int>(it - family.begin());
    }
  }

  void fill_class_options() {
    for (auto& [name, info] : reg_.classes) {
      for (auto& p : info.spec_params) {
        if (p.kind != SpecKind::ShaderClassRef) continue;
        for (const auto& s : reg_.subtype_index.at(p.type_name)) p.options.push_back({reg_.type_tags.at(s), s});
      }
    }
  }

  Registry reg_;
  std::map<std::string, const AstClass*> asts_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

RegistryResult build_registry(const std::vector<TranslationUnit>& units) { return RegistryBuilder().run(units); }

}  // namespace uscc
