#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uscc/registry.hpp"

namespace uscc {

inline constexpr std::uint64_t kDefaultMaxVariants = 4096;

struct ReachableParams {
  std::vector<UniformParam> uniforms;
  std::vector<SpecParam> spec_params;
};

/// Own and inherited parameters, base class first, each in declaration order.
ReachableParams reachable_params(std::string_view class_name, const Registry& registry);

/// A ShaderClass parameter at a dotted path bound to a concrete class.
struct Binding {
  std::string path;
  std::string class_name;
  friend bool operator==(const Binding&, const Binding&) = default;
};

struct ImplClassBinding {
  std::string entry_class;
  int impl_id = 0;
  std::vector<Binding> bindings;  // outer before inner, declaration order

  const Binding* find(std::string_view path) const;
  friend bool operator==(const ImplClassBinding&, const ImplClassBinding&) = default;
};

/// A basic parameter's value in canonical integer form (bools are 0/1,
/// enums their enumerator value).
struct ValueAssignment {
  std::string path;
  std::int64_t value = 0;
  friend bool operator==(const ValueAssignment&, const ValueAssignment&) = default;
};

struct Define {
  std::string name;
  std::int64_t value = 0;
  friend bool operator==(const Define&, const Define&) = default;
};

struct VariantDefineSet {
  int variant_id = 0;
  int impl_id = 0;
  std::vector<ValueAssignment> values;
  std::vector<Define> defines;

  std::optional<std::int64_t> value_of(std::string_view path) const;
  friend bool operator==(const VariantDefineSet&, const VariantDefineSet&) = default;
};

/// A parameter as seen from the entry class, keyed by its path.
struct PathParam {
  std::string path;
  SpecParam param;
};

struct PathUniform {
  std::string path;
  UniformParam uniform;
};

struct SpecSpace {
  std::string entry_class;
  std::vector<ImplClassBinding> impl_classes;
  std::vector<VariantDefineSet> variants;
  // Every parameter that occurs in some ImplClass: binding paths first, then
  // basic parameters, each in order of first appearance.
  std::vector<PathParam> params;
  std::vector<PathUniform> uniforms;

  std::size_t impl_count() const { return impl_classes.size(); }
  std::size_t variant_count() const { return variants.size(); }
  const PathParam* find_param(std::string_view path) const;
};

/// `SPEC_<PATH>` with the path uppercased and dots replaced by underscores.
std::string define_name(std::string_view path);
std::string type_define_name(std::string_view path);

/// The normative define list: binding defines, then value defines.
std::vector<Define> encode_defines(const std::vector<Binding>& bindings, const std::vector<ValueAssignment>& values,
                                   const std::map<std::string, int>& type_tags);

struct SpaceCounts {
  std::uint64_t impl_count = 1;
  std::uint64_t variant_count = 1;
};

/// Counts the space without building it. Throws SemanticError("CountOverflow")
/// when a count does not fit in 64 bits.
SpaceCounts count_closed_form(std::string_view entry_class, const Registry& registry);
std::uint64_t variant_count_closed_form(std::string_view entry_class, const Registry& registry);

/// Both throw SemanticError with code VariantExplosion when the space holds
/// more than `max_variants` variants, NoEntryPoint for non-entry classes and
/// DefineCollision when two paths encode to the same define name.
std::vector<ImplClassBinding> enumerate_impl_classes(std::string_view entry_class, const Registry& registry,
                                                     std::uint64_t max_variants = kDefaultMaxVariants);
SpecSpace enumerate_variants(std::string_view entry_class, const Registry& registry,
                             std::uint64_t max_variants = kDefaultMaxVariants);

/// Classes with an entry point, lexicographic.
std::vector<std::string> entry_classes(const Registry& registry);

}  // namespace uscc
