#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "uscc/diagnostics.hpp"

namespace uscc {

enum class TokenKind {
  Identifier,
  Keyword,
  IntLiteral,
  FloatLiteral,
  BoolLiteral,
  StringLiteral,  // "..." and '...'
  RawString,      // R"delim( ... )delim"; text holds the bytes between the parentheses
  AttrOpen,       // [[
  AttrClose,      // ]]
  Punct,
  EndOfFile,
};

struct Token {
  TokenKind kind = TokenKind::EndOfFile;
  std::string text;
  SourceSpan span;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool is_punct(std::string_view t) const { return is(TokenKind::Punct, t); }
  bool is_keyword(std::string_view t) const { return is(TokenKind::Keyword, t); }
};

struct LexResult {
  std::vector<Token> tokens;
  std::vector<Diagnostic> diagnostics;
};

bool is_keyword(std::string_view word);

/// Splits USL source into tokens. Comments and preprocessor lines are
/// dropped. Lexing stops at the first unterminated comment or string.
LexResult tokenize(std::string_view source, FileId file);

}  // namespace uscc
