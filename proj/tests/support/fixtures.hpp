#pragma once

#include <string>
#include <vector>

#include "uscc/pipeline.hpp"

namespace uscc::testing {

std::string fixture_root();

/// Every .usl file under tests/fixtures/<name>, sorted by file name.
std::vector<std::string> fixture_files(const std::string& name);

Analysis load_fixture(const std::string& name);
Analysis analyze_text(const std::string& text, const std::string& file_name = "test.usl");
Analysis analyze_texts(const std::vector<NamedSource>& sources);

std::vector<std::string> codes_of(const std::vector<Diagnostic>& diags);

/// The fixtures that compile cleanly.
const std::vector<std::string>& clean_fixtures();

/// Clean fixtures without passthrough text, usable with the interpreter.
const std::vector<std::string>& interpretable_fixtures();

}  // namespace uscc::testing
