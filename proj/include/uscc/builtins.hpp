#pragma once

#include <optional>
#include <string_view>

namespace uscc {

/// Vector/scalar constructor such as `float4`; returns the component count
/// (1 for scalars).
std::optional<int> constructor_arity(std::string_view name);

/// Number of arguments an HLSL intrinsic takes, if `name` is one we know.
std::optional<int> intrinsic_arity(std::string_view name);

/// Argument count of a Texture2D method such as `Sample`.
std::optional<int> texture_method_arity(std::string_view name);

}  // namespace uscc
