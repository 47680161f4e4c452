#pragma once

#include <vector>

#include "uscc/diagnostics.hpp"
#include "uscc/registry.hpp"

namespace uscc {

/// Checks the ShaderClass rules (codes R1..R10) and the well-formedness of
/// every GPU body. Empty iff the registry can be specialized.
std::vector<Diagnostic> validate(const Registry& registry);

}  // namespace uscc
