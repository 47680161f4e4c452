#include "fixtures.hpp"

#include <algorithm>
#include <filesystem>

namespace uscc::testing {

namespace fs = std::filesystem;

std::string fixture_root() { return USCC_FIXTURE_DIR; }

std::vector<std::string> fixture_files(const std::string& name) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(fs::path(fixture_root()) / name))
    if (e.path().extension() == ".usl") out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

Analysis load_fixture(const std::string& name) { return analyze(read_sources(fixture_files(name))); }

Analysis analyze_text(const std::string& text, const std::string& file_name) {
  return analyze({{file_name, text}});
}

Analysis analyze_texts(const std::vector<NamedSource>& sources) { return analyze(sources); }

std::vector<std::string> codes_of(const std::vector<Diagnostic>& diags) {
  std::vector<std::string> out;
  for (const auto& d : diags) out.push_back(d.code);
  return out;
}

const std::vector<std::string>& clean_fixtures() {
  static const std::vector<std::string> names = {"filter", "reduction", "temporal", "nested", "passthrough"};
  return names;
}

const std::vector<std::string>& interpretable_fixtures() {
  static const std::vector<std::string> names = {"filter", "reduction", "temporal", "nested"};
  return names;
}

}  // namespace uscc::testing
