#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "uscc/registry.hpp"
#include "uscc/spec_space.hpp"

namespace uscc {

inline constexpr int kSchemaVersion = 1;

struct ManifestUniform {
  std::string path;
  std::string gpu_type;
  std::string declaring_class;
  friend bool operator==(const ManifestUniform&, const ManifestUniform&) = default;
};

struct ManifestSpecParam {
  std::string path;
  SpecKind kind = SpecKind::Bool;
  std::string declaring_class;
  std::vector<SpecOption> options;
  friend bool operator==(const ManifestSpecParam&, const ManifestSpecParam&) = default;
};

struct EntryPoint {
  std::string entry_class;
  std::string shader_file;
  std::array<int, 3> group_size{1, 1, 1};
  std::vector<ManifestUniform> uniforms;
  std::vector<ManifestSpecParam> spec_params;
  std::map<std::string, int> type_tags;
  std::vector<ImplClassBinding> impl_classes;
  std::vector<VariantDefineSet> variants;

  const ManifestSpecParam* find_param(std::string_view path) const;
  friend bool operator==(const EntryPoint&, const EntryPoint&) = default;
};

struct Manifest {
  int schema_version = kSchemaVersion;
  std::string tool_version;
  std::vector<EntryPoint> entry_points;

  const EntryPoint* find_entry(std::string_view entry_class) const;
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// A manifest that does not conform; `path()` names the offending element,
/// e.g. `entry_points[0].type_tags`.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

Manifest emit_manifest(const std::vector<SpecSpace>& spaces, const Registry& registry);

/// Canonical JSON text: fixed key order, two-space indent, trailing newline.
std::string serialize_manifest(const Manifest& manifest);

/// Parses and checks a manifest, including that every variant's defines
/// recompute from its bindings, values and type tags.
Manifest load_manifest(const std::string& text);

}  // namespace uscc
