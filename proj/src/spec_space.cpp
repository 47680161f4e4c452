#include "uscc/spec_space.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace uscc {

const Binding* ImplClassBinding::find(std::string_view path) const {
  for (const auto& b : bindings)
    if (b.path == path) return &b;
  return nullptr;
}

std::optional<std::int64_t> VariantDefineSet::value_of(std::string_view path) const {
  for (const auto& v : values)
    if (v.path == path) return v.value;
  return std::nullopt;
}

const PathParam* SpecSpace::find_param(std::string_view path) const {
  for (const auto& p : params)
    if (p.path == path) return &p;
  return nullptr;
}

ReachableParams reachable_params(std::string_view class_name, const Registry& registry) {
  ReachableParams out;
  auto chain = registry.chain(class_name);
  std::set<std::string> seen;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    for (const auto& u : (*it)->uniforms)
      if (seen.insert(u.name).second) out.uniforms.push_back(u);
    for (const auto& p : (*it)->spec_params)
      if (seen.insert(p.name).second) out.spec_params.push_back(p);
  }
  return out;
}

std::string define_name(std::string_view path) {
  std::string out = "SPEC_";
  for (char c : path) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string type_define_name(std::string_view path) { return define_name(path) + "_TYPE"; }

std::vector<Define> encode_defines(const std::vector<Binding>& bindings, const std::vector<ValueAssignment>& values,
                                   const std::map<std::string, int>& type_tags) {
  std::vector<Define> out;
  out.reserve(bindings.size() + values.size());
  for (const auto& b : bindings) {
    auto it = type_tags.find(b.class_name);
    if (it == type_tags.end())
      throw SemanticError("UnknownClass", "no type tag for '" + b.class_name + "'");
    out.push_back({type_define_name(b.path), it->second});
  }
  for (const auto& v : values) out.push_back({define_name(v.path), v.value});
  return out;
}

namespace {

std::string join_path(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}

// Nesting deeper than this can only come from an unvalidated cycle.
constexpr int kMaxDepth = 64;

void check_depth(int depth) {
  if (depth > kMaxDepth)
    throw SemanticError("SpecializationCycle", "ShaderClass parameters nest without terminating");
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw SemanticError("CountOverflow", "specialization space too large to count");
  return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw SemanticError("CountOverflow", "specialization space too large to count");
  return r;
}

SpaceCounts counts_of(const std::string& cls, const Registry& reg, int depth) {
  check_depth(depth);
  SpaceCounts c;
  for (const auto& p : reachable_params(cls, reg).spec_params) {
    if (p.kind != SpecKind::ShaderClassRef) {
      c.variant_count = checked_mul(c.variant_count, p.options.size());
      continue;
    }
    SpaceCounts sum{0, 0};
    for (const auto& o : p.options) {
      auto sub = counts_of(o.label, reg, depth + 1);
      sum.impl_count = checked_add(sum.impl_count, sub.impl_count);
      sum.variant_count = checked_add(sum.variant_count, sub.variant_count);
    }
    c.impl_count = checked_mul(c.impl_count, sum.impl_count);
    c.variant_count = checked_mul(c.variant_count, sum.variant_count);
  }
  return c;
}

std::vector<std::vector<Binding>> expand(const std::string& cls, const std::string& prefix, const Registry& reg,
                                         int depth) {
  check_depth(depth);
  std::vector<std::vector<Binding>> result(1);
  for (const auto& p : reachable_params(cls, reg).spec_params) {
    if (p.kind != SpecKind::ShaderClassRef) continue;
    const std::string path = join_path(prefix, p.name);
    std::vector<std::vector<Binding>> alternatives;
    for (const auto& o : p.options) {
      for (auto& inner : expand(o.label, path, reg, depth + 1)) {
        std::vector<Binding> alt{{path, o.label}};
        alt.insert(alt.end(), inner.begin(), inner.end());
        alternatives.push_back(std::move(alt));
      }
    }
    std::vector<std::vector<Binding>> next;
    next.reserve(result.size() * alternatives.size());
    for (const auto& r : result) {
      for (const auto& a : alternatives) {
        auto combined = r;
        combined.insert(combined.end(), a.begin(), a.end());
        next.push_back(std::move(combined));
      }
    }
    result = std::move(next);
  }
  return result;
}

const ShaderClassInfo& require_entry(std::string_view entry_class, const Registry& reg) {
  const auto& c = reg.get_class(entry_class);
  if (!c.has_entry) throw SemanticError("NoEntryPoint", "'" + c.name + "' has no entry point");
  return c;
}

void guard_size(std::string_view entry_class, const Registry& reg, std::uint64_t max_variants) {
  std::uint64_t n = 0;
  try {
    n = count_closed_form(entry_class, reg).variant_count;
  } catch (const SemanticError& e) {
    if (e.code() != "CountOverflow") throw;
    n = UINT64_MAX;
  }
  if (n > max_variants)
    throw SemanticError("VariantExplosion", "'" + std::string(entry_class) + "' has " +
                                                (n == UINT64_MAX ? std::string("too many") : std::to_string(n)) +
                                                " variants, more than the limit of " + std::to_string(max_variants));
}

// Basic parameters of one ImplClass paired with their paths.
std::vector<PathParam> basic_params(const std::string& entry, const ImplClassBinding& impl, const Registry& reg) {
  std::vector<PathParam> out;
  auto add = [&](const std::string& cls, const std::string& prefix) {
    for (const auto& p : reachable_params(cls, reg).spec_params)
      if (p.kind != SpecKind::ShaderClassRef) out.push_back({join_path(prefix, p.name), p});
  };
  add(entry, "");
  for (const auto& b : impl.bindings) add(b.class_name, b.path);
  return out;
}

std::vector<PathParam> class_params(const std::string& entry, const ImplClassBinding& impl, const Registry& reg) {
  std::vector<PathParam> out;
  auto add = [&](const std::string& cls, const std::string& prefix) {
    for (const auto& p : reachable_params(cls, reg).spec_params)
      if (p.kind == SpecKind::ShaderClassRef) out.push_back({join_path(prefix, p.name), p});
  };
  add(entry, "");
  for (const auto& b : impl.bindings) add(b.class_name, b.path);
  return out;
}

}  // namespace

SpaceCounts count_closed_form(std::string_view entry_class, const Registry& registry) {
  return counts_of(std::string(entry_class), registry, 0);
}

std::uint64_t variant_count_closed_form(std::string_view entry_class, const Registry& registry) {
  return count_closed_form(entry_class, registry).variant_count;
}

std::vector<ImplClassBinding> enumerate_impl_classes(std::string_view entry_class, const Registry& registry,
                                                     std::uint64_t max_variants) {
  const auto& entry = require_entry(entry_class, registry);
  guard_size(entry_class, registry, max_variants);
  std::vector<ImplClassBinding> out;
  for (auto& bindings : expand(entry.name, "", registry, 0)) {
    ImplClassBinding impl;
    impl.entry_class = entry.name;
    impl.impl_id = static_cast<int>(out.size());
    impl.bindings = std::move(bindings);
    out.push_back(std::move(impl));
  }
  return out;
}

SpecSpace enumerate_variants(std::string_view entry_class, const Registry& registry, std::uint64_t max_variants) {
  SpecSpace space;
  space.entry_class = std::string(entry_class);
  space.impl_classes = enumerate_impl_classes(entry_class, registry, max_variants);

  std::set<std::string> seen_params;
  std::vector<PathParam> value_params;
  std::set<std::string> seen_uniforms;
  auto add_uniforms = [&](const std::string& cls, const std::string& prefix) {
    for (const auto& u : reachable_params(cls, registry).uniforms) {
      auto path = join_path(prefix, u.name);
      if (seen_uniforms.insert(path).second) space.uniforms.push_back({path, u});
    }
  };
  add_uniforms(space.entry_class, "");

  for (const auto& impl : space.impl_classes) {
    for (auto& p : class_params(space.entry_class, impl, registry))
      if (seen_params.insert(p.path).second) space.params.push_back(std::move(p));
    for (const auto& b : impl.bindings) add_uniforms(b.class_name, b.path);

    auto basics = basic_params(space.entry_class, impl, registry);
    for (const auto& p : basics)
      if (seen_params.insert(p.path).second) value_params.push_back(p);

    // Odometer over the option lists; the first parameter varies slowest.
    std::vector<std::size_t> digit(basics.size(), 0);
    auto advance = [&] {
      for (std::size_t i = basics.size(); i-- > 0;) {
        if (++digit[i] < basics[i].param.options.size()) return true;
        digit[i] = 0;
      }
      return false;
    };
    do {
      VariantDefineSet v;
      v.variant_id = static_cast<int>(space.variants.size());
      v.impl_id = impl.impl_id;
      for (std::size_t i = 0; i < basics.size(); ++i)
        v.values.push_back({basics[i].path, basics[i].param.options[digit[i]].value});
      v.defines = encode_defines(impl.bindings, v.values, registry.type_tags);
      space.variants.push_back(std::move(v));
    } while (advance());
  }
  space.params.insert(space.params.end(), value_params.begin(), value_params.end());

  std::map<std::string, std::string> names;
  for (const auto& p : space.params) {
    auto name = p.param.kind == SpecKind::ShaderClassRef ? type_define_name(p.path) : define_name(p.path);
    auto [it, fresh] = names.emplace(name, p.path);
    if (!fresh)
      throw SemanticError("DefineCollision",
                          "parameters '" + it->second + "' and '" + p.path + "' both encode to " + name);
  }
  return space;
}

std::vector<std::string> entry_classes(const Registry& registry) {
  std::vector<std::string> out;
  for (const auto& [name, c] : registry.classes)
    if (c.has_entry) out.push_back(name);
  return out;
}

}  // namespace uscc
