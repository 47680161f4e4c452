#include "brute_force.hpp"

#include <set>

namespace uscc::testing {

namespace {

std::vector<const ShaderClassInfo*> root_first(const std::string& cls, const Registry& reg) {
  std::vector<const ShaderClassInfo*> out;
  for (const ShaderClassInfo* c = &reg.classes.at(cls);;) {
    out.insert(out.begin(), c);
    if (!c->base) break;
    c = &reg.classes.at(*c->base);
  }
  return out;
}

bool concrete(const std::string& cls, const Registry& reg) {
  std::set<std::string> names;
  for (const auto* c : root_first(cls, reg))
    for (const auto& m : c->methods) names.insert(m.name);
  for (const auto& n : names) {
    const MethodInfo* m = brute_force_override(cls, n, reg);
    if (!m) return false;
  }
  return true;
}

std::vector<Assignment> expand(const std::string& cls, const std::string& prefix, const Registry& reg) {
  std::vector<Assignment> partial{{}};
  for (const auto* c : root_first(cls, reg)) {
    for (const auto& p : c->spec_params) {
      const std::string path = prefix + p.name;
      std::vector<Assignment> next;
      for (const auto& a : partial) {
        if (p.kind == SpecKind::ShaderClassRef) {
          for (const auto& sub : brute_force_subtypes(p.type_name, reg)) {
            for (const auto& inner : expand(sub, path + ".", reg)) {
              Assignment b = a;
              b[path] = sub;
              b.insert(inner.begin(), inner.end());
              next.push_back(std::move(b));
            }
          }
        } else if (p.kind == SpecKind::Bool) {
          for (const char* v : {"0", "1"}) {
            Assignment b = a;
            b[path] = v;
            next.push_back(std::move(b));
          }
        } else if (p.kind == SpecKind::Enum) {
          std::set<std::int64_t> values;
          for (const auto& [name, v] : reg.enums.at(p.type_name).enumerators) values.insert(v);
          for (auto v : values) {
            Assignment b = a;
            b[path] = std::to_string(v);
            next.push_back(std::move(b));
          }
        } else {
          std::set<std::int64_t> values;
          for (const auto& o : p.options) values.insert(o.value);
          for (auto v : values) {
            Assignment b = a;
            b[path] = std::to_string(v);
            next.push_back(std::move(b));
          }
        }
      }
      partial = std::move(next);
    }
  }
  return partial;
}

}  // namespace

const MethodInfo* brute_force_override(const std::string& cls, const std::string& method, const Registry& reg) {
  auto chain = root_first(cls, reg);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    for (const auto& m : (*it)->methods)
      if (m.name == method) return m.decl.body ? &m : nullptr;
  return nullptr;
}

std::vector<std::string> brute_force_subtypes(const std::string& base, const Registry& reg) {
  std::vector<std::string> out;
  for (const auto& [name, info] : reg.classes) {
    bool derives = false;
    for (const auto* c : root_first(name, reg)) derives = derives || c->name == base;
    if (derives && concrete(name, reg)) out.push_back(name);
  }
  return out;
}

std::vector<Assignment> brute_force_assignments(const std::string& entry, const Registry& reg) {
  return expand(entry, "", reg);
}

}  // namespace uscc::testing
