#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "uscc/pipeline.hpp"

namespace uscc::testing {

struct GenLimits {
  int max_depth = 4;     // ShaderClass parameter nesting below the entry
  int max_subtypes = 5;  // concrete options per ShaderClass parameter
  int max_basic = 2;     // basic parameters per class
  std::uint64_t max_variants = 2048;
};

/// A random well-formed USL program: one entry class, ShaderClass
/// parameters nested up to `max_depth`, partial overrides and inheritance
/// chains among subtypes. The expected counts come from the generator's
/// own model of what it wrote.
struct GeneratedProgram {
  std::vector<NamedSource> files;  // one class (or the enum) per file
  std::string entry_class;
  std::uint64_t expected_impls = 1;
  std::uint64_t expected_variants = 1;
  int depth = 0;
  std::vector<std::string> sparse_params;  // dotted paths reachable in every ImplClass
};

GeneratedProgram generate_program(std::mt19937_64& rng, const GenLimits& limits = {});

}  // namespace uscc::testing
