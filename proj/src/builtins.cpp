#include "uscc/builtins.hpp"

#include <map>
#include <string>

namespace uscc {

std::optional<int> constructor_arity(std::string_view name) {
  static const std::map<std::string, int, std::less<>> kTable = {
      {"float", 1},  {"int", 1},  {"uint", 1},  {"bool", 1},  {"float2", 2}, {"float3", 3},
      {"float4", 4}, {"int2", 2}, {"int3", 3},  {"int4", 4},  {"uint2", 2},  {"uint3", 3},
      {"uint4", 4},
  };
  auto it = kTable.find(name);
  if (it == kTable.end()) return std::nullopt;
  return it->second;
}

std::optional<int> intrinsic_arity(std::string_view name) {
  static const std::map<std::string, int, std::less<>> kTable = {
      {"abs", 1},  {"min", 2},  {"max", 2},   {"clamp", 3}, {"saturate", 1}, {"lerp", 3},
      {"dot", 2},  {"sqrt", 1}, {"exp", 1},   {"pow", 2},   {"floor", 1},    {"frac", 1},
      {"sin", 1},  {"cos", 1},  {"length", 1}, {"step", 2},
  };
  auto it = kTable.find(name);
  if (it == kTable.end()) return std::nullopt;
  return it->second;
}

std::optional<int> texture_method_arity(std::string_view name) {
  if (name == "Sample") return 2;
  if (name == "SampleLevel") return 3;
  if (name == "Load") return 1;
  return std::nullopt;
}

}  // namespace uscc
