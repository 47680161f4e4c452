#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uscc/codegen.hpp"
#include "uscc/registry.hpp"
#include "uscc/runtime.hpp"
#include "uscc/spec_space.hpp"

namespace uscc {

struct Value {
  enum class Kind { Bool, Int, Float, IntVec, FloatVec, Resource };
  Kind kind = Kind::Int;
  int n = 1;  // component count
  std::array<double, 4> f{};
  std::array<std::int64_t, 4> i{};
  std::string resource;  // uniform path of the bound resource

  static Value boolean(bool b);
  static Value integer(std::int64_t v);
  static Value real(double v);
  static Value float_vec(std::array<double, 4> v, int n);
  static Value int_vec(std::array<std::int64_t, 4> v, int n);
  static Value resource_ref(std::string path);

  bool is_float() const { return kind == Kind::Float || kind == Kind::FloatVec; }
  bool is_vector() const { return kind == Kind::IntVec || kind == Kind::FloatVec; }
  double as_float(int c = 0) const;
  std::int64_t as_int(int c = 0) const;
  bool truthy() const;
  std::string to_string() const;
};

/// Exact for Int/Bool, relative tolerance for floats.
bool values_close(const Value& a, const Value& b, double rel_tol = 1e-6);

using Texel = std::array<double, 4>;

struct Grid {
  int width = 0;
  int height = 0;
  std::vector<Texel> texels;  // row-major

  Grid() = default;
  Grid(int w, int h) : width(w), height(h), texels(static_cast<std::size_t>(w * h), Texel{}) {}
  Texel& at(int x, int y) { return texels[static_cast<std::size_t>(y * width + x)]; }
  const Texel& at(int x, int y) const { return texels[static_cast<std::size_t>(y * width + x)]; }
  friend bool operator==(const Grid&, const Grid&) = default;
};

struct Store {
  std::string target;
  int x = 0;
  int y = 0;
  Texel value{};
};

/// Textures and writable targets keyed by uniform path. Samplers carry no
/// state and are not listed.
struct ResourceModel {
  std::map<std::string, Grid> textures;
  std::map<std::string, Grid> targets;
  std::vector<Store> stores;  // program order
};

struct InvocationInput {
  std::map<std::string, Value> varyings;       // by semantic, e.g. SV_DispatchThreadID
  std::map<std::string, Value> uniforms;       // non-resource uniforms by path
  std::map<std::string, ParamValue> spec;      // dynamic mode only
  ResourceModel resources;
};

class InterpError : public std::runtime_error {
 public:
  InterpError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

struct DispatchRecord {
  std::string path;           // instance the call went through
  std::string runtime_class;  // its bound class
  std::string method;
  std::string resolved_class;  // class whose body ran
};

struct DynamicResult {
  ResourceModel resources;
  std::vector<DispatchRecord> trace;
};

inline constexpr std::uint64_t kLoopLimit = std::uint64_t{1} << 20;

/// Runs the entry point over the unified source with virtual dispatch.
DynamicResult eval_dynamic(const std::string& entry_class, const InvocationInput& input, const Registry& registry);

/// Runs a devirtualized program; `input.spec` is ignored.
ResourceModel eval_specialized(const SpecializedProgram& program, const InvocationInput& input);
ResourceModel eval_specialized(const SpecSpace& space, const VariantDefineSet& variant, const InvocationInput& input,
                               const Registry& registry);

/// Spec assignments that select `variant`.
std::map<std::string, ParamValue> assignments_for(const SpecSpace& space, const VariantDefineSet& variant);

struct EquivalenceOptions {
  std::uint64_t max_variants = kDefaultMaxVariants;
  int grid_size = 8;
  double rel_tol = 1e-6;
  OverrideResolver resolver;  // replaces resolve_override in the specializer
};

struct VariantCheck {
  enum class Status { Pass, Fail };
  int variant_id = 0;
  Status status = Status::Pass;
  std::size_t trials_run = 0;
  std::string detail;  // first counterexample
  std::optional<std::size_t> failing_trial;
};

struct EquivalenceReport {
  std::string entry_class;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<VariantCheck> variants;

  bool passed() const;
  std::size_t failures() const;
  std::string to_text() const;
  std::string to_json() const;
};

/// Compares eval_dynamic and eval_specialized on `trials` seeded random
/// inputs for every variant. Throws InterpError("Passthrough") when any
/// reachable class carries verbatim GPU text.
EquivalenceReport equivalence_check(const std::string& entry_class, const Registry& registry, std::size_t trials,
                                    std::uint64_t seed, const EquivalenceOptions& options = {});

}  // namespace uscc
