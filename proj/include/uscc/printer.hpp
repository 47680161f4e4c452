#pragma once

#include <string>

#include "uscc/ast.hpp"

namespace uscc {

/// HLSL spelling of an expression, parenthesized only where precedence
/// requires it.
std::string print_expr(const Expr& e);

/// Prints `s` at the given indent (four spaces per level). Passthrough
/// statements are written verbatim on their own line.
void print_stmt(const Stmt& s, int indent, std::string& out);

/// Readable outline of a parsed file: enums, classes with their members and
/// method bodies, free functions.
std::string dump_unit(const TranslationUnit& tu);

}  // namespace uscc
