#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "uscc/ast.hpp"
#include "uscc/diagnostics.hpp"

namespace uscc {

enum class SpecKind { Bool, SparseInt, Enum, ShaderClassRef };

/// Manifest spelling: bool, sparse_int, enum, shader_class.
std::string_view to_string(SpecKind kind);
std::optional<SpecKind> spec_kind_from_string(std::string_view s);

/// One statically enumerated value. For ShaderClassRef options `value` is the
/// class's type tag and `label` its name; for enums the label is the
/// enumerator.
struct SpecOption {
  std::int64_t value = 0;
  std::string label;
  friend bool operator==(const SpecOption&, const SpecOption&) = default;
};

struct SpecParam {
  std::string name;
  SpecKind kind = SpecKind::Bool;
  std::string type_name;  // declared enum or base class for Enum / ShaderClassRef
  std::vector<SpecOption> options;
  std::string declaring_class;
  SourceSpan span;
};

struct UniformParam {
  std::string name;
  TypeRef gpu_type;
  std::string declaring_class;
  SourceSpan span;
};

struct MethodInfo {
  std::string name;
  std::string declaring_class;  // empty for free functions
  AstMethod decl;
  bool is_gpu = false;
  bool is_entry = false;
  std::optional<std::array<int, 3>> entry_group_size;
  std::optional<std::string> overrides;  // class declaring the overridden method

  bool is_virtual() const { return decl.is_virtual; }
  bool is_pure() const { return decl.is_pure; }
  bool is_const() const { return decl.is_const; }
};

struct ShaderClassInfo {
  std::string name;
  std::optional<std::string> base;
  std::vector<UniformParam> uniforms;
  std::vector<SpecParam> spec_params;
  std::vector<MethodInfo> methods;
  std::vector<AstField> fields;  // every data member as written
  std::vector<std::string> host_methods;
  std::vector<PassthroughBlock> passthrough_blocks;
  bool is_abstract = false;
  bool has_entry = false;
  SourceSpan span;

  const MethodInfo* find_method(std::string_view name) const;
  const MethodInfo* entry_method() const;
  const UniformParam* find_uniform(std::string_view name) const;
  const SpecParam* find_spec_param(std::string_view name) const;
};

struct EnumInfo {
  std::string name;
  std::vector<std::pair<std::string, std::int64_t>> enumerators;
  SourceSpan span;
};

/// What a member name refers to, found by walking a class's ancestor chain
/// from the class itself upward.
struct MemberRef {
  enum class Kind { Uniform, SpecParam, Method, HostField, HostMethod };
  Kind kind;
  const ShaderClassInfo* owner = nullptr;
  const UniformParam* uniform = nullptr;
  const SpecParam* spec = nullptr;
  const MethodInfo* method = nullptr;
  const AstField* field = nullptr;
};

struct Registry {
  std::map<std::string, ShaderClassInfo> classes;
  std::map<std::string, EnumInfo> enums;
  std::map<std::string, MethodInfo> gpu_functions;
  std::map<std::string, SourceSpan> host_functions;
  std::map<std::string, std::vector<std::string>> subtype_index;  // class -> concrete descendants (incl. self)
  std::map<std::string, int> type_tags;                           // concrete class -> dense tag

  const ShaderClassInfo* find_class(std::string_view name) const;
  const ShaderClassInfo& get_class(std::string_view name) const;

  /// The class followed by its ancestors, most derived first.
  std::vector<const ShaderClassInfo*> chain(std::string_view name) const;
  bool derives_from(std::string_view derived, std::string_view base) const;
  std::optional<MemberRef> lookup_member(std::string_view cls, std::string_view name) const;

  /// `Quality::High` or an unambiguous bare `High`.
  std::optional<std::int64_t> find_enumerator(std::string_view spelling) const;
};

/// Raised by registry queries whose preconditions fail at runtime.
class SemanticError : public std::runtime_error {
 public:
  SemanticError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

struct RegistryResult {
  Registry registry;
  std::vector<Diagnostic> diagnostics;
};

/// Links every ShaderClass across translation units. The result does not
/// depend on the order of `units`.
RegistryResult build_registry(const std::vector<TranslationUnit>& units);

/// The most-derived implementation of `method` at or above `class_name`.
/// Throws SemanticError("UnknownMethod") or SemanticError("AbstractCall").
const MethodInfo& resolve_override(std::string_view class_name, std::string_view method, const Registry& registry);

bool is_resource_type(const TypeRef& type);
bool is_writable_resource_type(const TypeRef& type);
bool is_supported_uniform_type(const TypeRef& type);

}  // namespace uscc
