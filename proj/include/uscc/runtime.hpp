#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "uscc/manifest.hpp"

namespace uscc {

struct ParamValue {
  enum class Kind { Bool, Int, Enum, Type };
  Kind kind = Kind::Bool;
  std::int64_t value = 0;
  std::string type_name;  // Kind::Type only

  static ParamValue BoolV(bool b) { return {Kind::Bool, b ? 1 : 0, {}}; }
  static ParamValue IntV(std::int64_t i) { return {Kind::Int, i, {}}; }
  static ParamValue EnumV(std::int64_t i) { return {Kind::Enum, i, {}}; }
  static ParamValue TypeV(std::string cls) { return {Kind::Type, 0, std::move(cls)}; }

  friend bool operator==(const ParamValue&, const ParamValue&) = default;
};

enum class RuntimeErrorCode { UnknownParam, ValueNotEnumerated, WrongKind, ParentUnbound, Unassigned, UnknownEntry, UnknownUniform };

std::string_view to_string(RuntimeErrorCode code);

class RuntimeError : public std::runtime_error {
 public:
  RuntimeError(RuntimeErrorCode code, const std::string& message, std::vector<std::string> paths = {})
      : std::runtime_error(message), code_(code), paths_(std::move(paths)) {}
  RuntimeErrorCode code() const { return code_; }
  /// For Unassigned: every parameter still missing, in manifest order.
  const std::vector<std::string>& paths() const { return paths_; }

 private:
  RuntimeErrorCode code_;
  std::vector<std::string> paths_;
};

struct ShaderInstance {
  std::string entry_class;
  std::map<std::string, ParamValue> assignments;
  std::map<std::string, std::uint64_t> uniform_bindings;  // opaque handles
  bool abort_on_error = false;  // print and abort instead of throwing
};

using VariantKey = std::vector<std::pair<std::string, std::int64_t>>;

struct Selection {
  int variant_id = 0;
  std::vector<Define> defines;
  std::string shader_file;
};

/// Throws RuntimeError(UnknownEntry) if the manifest lacks the class.
ShaderInstance make_instance(const Manifest& manifest, const std::string& entry_class);

/// Stores `value` at `path`. Reassigning a ShaderClass parameter drops the
/// assignments of parameters nested under it.
ShaderInstance& set_param(ShaderInstance& instance, const Manifest& manifest, const std::string& path,
                          const ParamValue& value);
ShaderInstance& bind_uniform(ShaderInstance& instance, const Manifest& manifest, const std::string& path,
                             std::uint64_t handle);

/// Parameters that exist under the current assignments, in manifest order.
std::vector<std::string> active_params(const ShaderInstance& instance, const Manifest& manifest);

VariantKey variant_key(const ShaderInstance& instance, const Manifest& manifest);
Selection select_variant(const ShaderInstance& instance, const Manifest& manifest);

}  // namespace uscc
