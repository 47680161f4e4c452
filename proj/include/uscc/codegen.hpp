#pragma once

#include <array>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "uscc/registry.hpp"
#include "uscc/spec_space.hpp"

namespace uscc {

inline constexpr const char* kToolVersion = "0.1.0";

/// Flat names for everything a generated shader declares. Built once per
/// SpecSpace so the shader text and the per-variant programs agree.
class Mangler {
 public:
  Mangler(const SpecSpace& space, const Registry& registry);

  static std::string flatten(std::string_view path);  // dots become underscores

  std::string uniform(std::string_view path, std::string_view member) const;
  /// The function implementing `method` for the instance of `cls` at `path`
  /// (empty path = the entry class).
  std::string function(std::string_view path, std::string_view cls, std::string_view method) const;
  /// Name used by call sites that only know the path; defined per guard
  /// region as a macro for the bound implementation.
  std::string alias(std::string_view path, std::string_view method) const;

 private:
  std::string entry_class_;
  std::string entry_method_;
  std::map<std::string, std::set<std::string>> paths_of_;  // class -> instance paths
};

/// Picks the implementation a call dispatches to; tests swap it to inject
/// faults.
using OverrideResolver = std::function<const MethodInfo&(std::string_view cls, std::string_view method)>;

struct FlatUniform {
  std::string name;  // mangled
  std::string path;  // dotted, as in the manifest
  TypeRef type;
};

struct SpecializedFunction {
  std::string name;
  AstMethod decl;  // renamed, body rewritten
};

/// One variant after devirtualization: plain functions over flat uniforms,
/// with every specialization parameter replaced by its literal value.
struct SpecializedProgram {
  std::string entry_class;
  int variant_id = 0;
  std::string entry_function;
  std::array<int, 3> group_size{1, 1, 1};
  std::map<std::string, SpecializedFunction> functions;
  std::vector<FlatUniform> uniforms;

  const FlatUniform* find_uniform(std::string_view name) const;
};

SpecializedProgram specialize_ast(const SpecSpace& space, const VariantDefineSet& variant, const Registry& registry,
                                  const OverrideResolver& resolver = {});

struct ShaderArtifact {
  std::string entry_class;
  std::string file_name;
  std::string text;
  std::vector<std::vector<Define>> per_variant_defines;  // indexed by variant_id
  std::set<std::string> spec_param_names;               // as written in the source
};

/// Throws SemanticError with code MangleCollision or RecursionUnsupported.
ShaderArtifact emit_shader(const SpecSpace& space, const Registry& registry);

/// True iff the text has no dynamic-dispatch construct, no specialization
/// parameter identifier outside `#define` lines, and guards only on defines
/// the space produces.
bool devirtualization_audit(const ShaderArtifact& artifact);

}  // namespace uscc
