#include "uscc/runtime.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <set>

namespace uscc {

std::string_view to_string(RuntimeErrorCode code) {
  switch (code) {
    case RuntimeErrorCode::UnknownParam:
      return "UnknownParam";
    case RuntimeErrorCode::ValueNotEnumerated:
      return "ValueNotEnumerated";
    case RuntimeErrorCode::WrongKind:
      return "WrongKind";
    case RuntimeErrorCode::ParentUnbound:
      return "ParentUnbound";
    case RuntimeErrorCode::Unassigned:
      return "Unassigned";
    case RuntimeErrorCode::UnknownEntry:
      return "UnknownEntry";
    case RuntimeErrorCode::UnknownUniform:
      return "UnknownUniform";
  }
  return "";
}

namespace {

[[noreturn]] void fail(const ShaderInstance& inst, RuntimeErrorCode code, const std::string& message,
                       std::vector<std::string> paths = {}) {
  if (inst.abort_on_error) {
    std::fprintf(stderr, "uscc runtime: %s: %s\n", std::string(to_string(code)).c_str(), message.c_str());
    std::abort();
  }
  throw RuntimeError(code, message, std::move(paths));
}

const EntryPoint& entry_of(const ShaderInstance& inst, const Manifest& m) {
  const auto* ep = m.find_entry(inst.entry_class);
  if (!ep) fail(inst, RuntimeErrorCode::UnknownEntry, "manifest has no entry class '" + inst.entry_class + "'");
  return *ep;
}

// Proper prefixes of a dotted path, outermost first.
std::vector<std::string> ancestors(const std::string& path) {
  std::vector<std::string> out;
  for (auto dot = path.find('.'); dot != std::string::npos; dot = path.find('.', dot + 1))
    out.push_back(path.substr(0, dot));
  return out;
}

bool impl_has_path(const EntryPoint& ep, const ImplClassBinding& impl, const std::string& path) {
  if (impl.find(path)) return true;
  for (const auto& v : ep.variants)
    if (v.impl_id == impl.impl_id) return v.value_of(path).has_value();
  return false;
}

// Whether `path` exists given the classes bound to its ancestors. Every
// ancestor must already be assigned.
bool exists_under(const ShaderInstance& inst, const EntryPoint& ep, const std::string& path) {
  const auto anc = ancestors(path);
  for (const auto& impl : ep.impl_classes) {
    bool match = std::all_of(anc.begin(), anc.end(), [&](const std::string& a) {
      const Binding* b = impl.find(a);
      return b && b->class_name == inst.assignments.at(a).type_name;
    });
    if (match && impl_has_path(ep, impl, path)) return true;
  }
  return false;
}

bool ancestors_assigned(const ShaderInstance& inst, const std::string& path) {
  for (const auto& a : ancestors(path))
    if (!inst.assignments.count(a)) return false;
  return true;
}

ParamValue::Kind expected_kind(SpecKind k) {
  switch (k) {
    case SpecKind::Bool:
      return ParamValue::Kind::Bool;
    case SpecKind::SparseInt:
      return ParamValue::Kind::Int;
    case SpecKind::Enum:
      return ParamValue::Kind::Enum;
    case SpecKind::ShaderClassRef:
      return ParamValue::Kind::Type;
  }
  return ParamValue::Kind::Int;
}

std::vector<std::string> missing_params(const ShaderInstance& inst, const EntryPoint& ep) {
  std::vector<std::string> out;
  for (const auto& p : ep.spec_params)
    if (ancestors_assigned(inst, p.path) && exists_under(inst, ep, p.path) && !inst.assignments.count(p.path))
      out.push_back(p.path);
  return out;
}

void require_complete(const ShaderInstance& inst, const EntryPoint& ep) {
  auto missing = missing_params(inst, ep);
  if (missing.empty()) return;
  std::string list;
  for (const auto& p : missing) list += (list.empty() ? "" : ", ") + p;
  fail(inst, RuntimeErrorCode::Unassigned, "unassigned specialization parameter(s): " + list, missing);
}

}  // namespace

ShaderInstance make_instance(const Manifest& manifest, const std::string& entry_class) {
  ShaderInstance inst;
  inst.entry_class = entry_class;
  entry_of(inst, manifest);
  return inst;
}

ShaderInstance& set_param(ShaderInstance& inst, const Manifest& manifest, const std::string& path,
                          const ParamValue& value) {
  const EntryPoint& ep = entry_of(inst, manifest);
  const ManifestSpecParam* param = ep.find_param(path);
  if (!param) fail(inst, RuntimeErrorCode::UnknownParam, "'" + ep.entry_class + "' has no parameter '" + path + "'");
  for (const auto& a : ancestors(path))
    if (!inst.assignments.count(a))
      fail(inst, RuntimeErrorCode::ParentUnbound, "assign '" + a + "' before '" + path + "'");
  if (!exists_under(inst, ep, path))
    fail(inst, RuntimeErrorCode::UnknownParam, "'" + path + "' does not exist for the bound classes");
  if (value.kind != expected_kind(param->kind))
    fail(inst, RuntimeErrorCode::WrongKind,
         "'" + path + "' is a " + std::string(to_string(param->kind)) + " parameter");

  bool listed = std::any_of(param->options.begin(), param->options.end(), [&](const SpecOption& o) {
    return value.kind == ParamValue::Kind::Type ? o.label == value.type_name : o.value == value.value;
  });
  if (!listed) {
    std::string shown = value.kind == ParamValue::Kind::Type ? value.type_name : std::to_string(value.value);
    fail(inst, RuntimeErrorCode::ValueNotEnumerated, shown + " is not an enumerated option of '" + path + "'");
  }

  if (value.kind == ParamValue::Kind::Type) {
    const std::string prefix = path + ".";
    for (auto it = inst.assignments.begin(); it != inst.assignments.end();) {
      if (it->first.compare(0, prefix.size(), prefix) == 0) {
        it = inst.assignments.erase(it);
      } else {
        ++it;
      }
    }
  }
  inst.assignments[path] = value;
  return inst;
}

ShaderInstance& bind_uniform(ShaderInstance& inst, const Manifest& manifest, const std::string& path,
                             std::uint64_t handle) {
  const EntryPoint& ep = entry_of(inst, manifest);
  bool known = std::any_of(ep.uniforms.begin(), ep.uniforms.end(), [&](const auto& u) { return u.path == path; });
  if (!known) fail(inst, RuntimeErrorCode::UnknownUniform, "'" + ep.entry_class + "' has no uniform '" + path + "'");
  inst.uniform_bindings[path] = handle;
  return inst;
}

std::vector<std::string> active_params(const ShaderInstance& inst, const Manifest& manifest) {
  const EntryPoint& ep = entry_of(inst, manifest);
  std::vector<std::string> out;
  for (const auto& p : ep.spec_params)
    if (ancestors_assigned(inst, p.path) && exists_under(inst, ep, p.path)) out.push_back(p.path);
  return out;
}

VariantKey variant_key(const ShaderInstance& inst, const Manifest& manifest) {
  const EntryPoint& ep = entry_of(inst, manifest);
  require_complete(inst, ep);
  VariantKey key;
  for (const auto& path : active_params(inst, manifest)) {
    const ParamValue& v = inst.assignments.at(path);
    key.emplace_back(path, v.kind == ParamValue::Kind::Type ? ep.type_tags.at(v.type_name) : v.value);
  }
  return key;
}

Selection select_variant(const ShaderInstance& inst, const Manifest& manifest) {
  const EntryPoint& ep = entry_of(inst, manifest);
  require_complete(inst, ep);
  const auto active = active_params(inst, manifest);
  std::size_t n_class = 0;
  for (const auto& path : active)
    if (inst.assignments.at(path).kind == ParamValue::Kind::Type) ++n_class;
  const std::size_t n_basic = active.size() - n_class;

  for (const auto& v : ep.variants) {
    const auto& impl = ep.impl_classes.at(static_cast<std::size_t>(v.impl_id));
    if (impl.bindings.size() != n_class || v.values.size() != n_basic) continue;
    bool match = std::all_of(impl.bindings.begin(), impl.bindings.end(), [&](const Binding& b) {
      auto it = inst.assignments.find(b.path);
      return it != inst.assignments.end() && it->second.type_name == b.class_name;
    });
    match = match && std::all_of(v.values.begin(), v.values.end(), [&](const ValueAssignment& a) {
      auto it = inst.assignments.find(a.path);
      return it != inst.assignments.end() && it->second.value == a.value;
    });
    if (match) return {v.variant_id, v.defines, ep.shader_file};
  }
  // Unreachable for a manifest that passed load_manifest: every assignable
  // combination was enumerated.
  throw std::logic_error("no variant of '" + ep.entry_class + "' matches a complete, validated assignment");
}

}  // namespace uscc
