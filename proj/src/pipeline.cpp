#include "uscc/pipeline.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "uscc/parser.hpp"
#include "uscc/validate.hpp"

namespace uscc {

std::vector<NamedSource> read_sources(const std::vector<std::string>& paths) {
  std::vector<NamedSource> out;
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + p + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    out.push_back({p, ss.str()});
  }
  return out;
}

Analysis analyze(const std::vector<NamedSource>& sources) {
  Analysis a;
  std::vector<SourceText> texts;
  for (const auto& s : sources) texts.push_back({a.files.add(s.name, s.text), s.text});
  for (auto& r : parse_many(texts)) {
    a.units.push_back(std::move(r.unit));
    a.diagnostics.insert(a.diagnostics.end(), r.diagnostics.begin(), r.diagnostics.end());
  }
  RegistryResult reg = build_registry(a.units);
  a.registry = std::move(reg.registry);
  a.diagnostics.insert(a.diagnostics.end(), reg.diagnostics.begin(), reg.diagnostics.end());
  if (a.diagnostics.empty()) {
    auto v = validate(a.registry);
    a.diagnostics.insert(a.diagnostics.end(), v.begin(), v.end());
  }
  sort_diagnostics(a.diagnostics);
  return a;
}

BuildResult build_all(const Analysis& analysis, std::uint64_t max_variants) {
  BuildResult out;
  const Registry& reg = analysis.registry;
  for (const auto& entry : entry_classes(reg)) {
    const SourceSpan span = reg.get_class(entry).span;
    try {
      SpecSpace space = enumerate_variants(entry, reg, max_variants);
      ShaderArtifact shader = emit_shader(space, reg);
      if (!devirtualization_audit(shader)) {
        out.diagnostics.push_back({"AuditFailed", "generated shader for '" + entry + "' failed the devirtualization audit",
                                   span});
        continue;
      }
      out.spaces.push_back(std::move(space));
      out.shaders.push_back(std::move(shader));
    } catch (const SemanticError& e) {
      out.diagnostics.push_back({e.code(), e.what(), span});
    }
  }
  sort_diagnostics(out.diagnostics);
  if (out.ok()) out.manifest = emit_manifest(out.spaces, reg);
  return out;
}

}  // namespace uscc
