#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uscc/ast.hpp"
#include "uscc/diagnostics.hpp"
#include "uscc/lexer.hpp"

namespace uscc {

/// Attribute names understood by the compiler. Anything else is rejected.
bool is_known_attribute(std::string_view name);
bool is_varying_attribute(std::string_view name);
bool is_specialization_attribute(std::string_view name);

struct ParseResult {
  TranslationUnit unit;
  std::vector<Diagnostic> diagnostics;
};

/// Parses one file's tokens. Only `[[ShaderClass]]` classes, `[[gpu]]` free
/// functions and enums are retained; other top-level code is skipped.
ParseResult parse_translation_unit(std::vector<Token> tokens, FileId file);

/// tokenize + parse_translation_unit.
ParseResult parse_source(std::string_view text, FileId file);

struct SourceText {
  FileId file;
  std::string text;
};

/// One result per input, in input order. Files are parsed concurrently.
std::vector<ParseResult> parse_many(const std::vector<SourceText>& files);

// Snippet entry points; used to re-parse slices of a file.
std::optional<Expr> parse_expression(std::string_view text, FileId file, std::vector<Diagnostic>& diags);
std::optional<Stmt> parse_statement(std::string_view text, FileId file, std::vector<Diagnostic>& diags);

}  // namespace uscc
