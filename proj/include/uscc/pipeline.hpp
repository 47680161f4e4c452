#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uscc/codegen.hpp"
#include "uscc/diagnostics.hpp"
#include "uscc/manifest.hpp"
#include "uscc/registry.hpp"
#include "uscc/spec_space.hpp"

namespace uscc {

struct NamedSource {
  std::string name;
  std::string text;
};

/// Reads each path; throws std::runtime_error naming the first unreadable file.
std::vector<NamedSource> read_sources(const std::vector<std::string>& paths);

/// Parse, link and validate. Diagnostics come back sorted.
struct Analysis {
  SourceFiles files;
  std::vector<TranslationUnit> units;
  Registry registry;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
  std::string report() const { return format_all(diagnostics, files); }
};

Analysis analyze(const std::vector<NamedSource>& sources);

struct BuildResult {
  std::vector<SpecSpace> spaces;
  std::vector<ShaderArtifact> shaders;
  Manifest manifest;
  std::vector<Diagnostic> diagnostics;  // located at the entry class

  bool ok() const { return diagnostics.empty(); }
};

/// Enumerates, emits and audits every entry class of a clean analysis.
BuildResult build_all(const Analysis& analysis, std::uint64_t max_variants = kDefaultMaxVariants);

}  // namespace uscc
