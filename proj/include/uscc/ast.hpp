#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uscc/diagnostics.hpp"

namespace uscc {

/// A type as written: `float4`, `RWTexture2D<float4>`, `FilterMethod*`.
struct TypeRef {
  std::string name;
  std::vector<std::string> template_args;
  bool is_pointer = false;

  std::string spelling() const;  // without the pointer marker
  friend bool operator==(const TypeRef&, const TypeRef&) = default;
};

enum class ExprKind {
  IntLiteral,
  FloatLiteral,
  BoolLiteral,
  Identifier,  // text may be qualified, e.g. `Quality::High`
  Member,      // operands[0].text ; arrow selects `->`
  Index,       // operands[0][operands[1]]
  Call,        // operands[0](operands[1..])
  Binary,      // operands[0] text operands[1]
  Unary,       // text operands[0]; text is one of - ! &
};

/// Uniform expression node. Children live in `operands`, so trees are plain
/// values that copy and compare without ownership plumbing.
struct Expr {
  ExprKind kind = ExprKind::IntLiteral;
  std::string text;  // identifier, member name, operator or literal spelling
  bool arrow = false;
  std::vector<Expr> operands;
  SourceSpan span;

  std::int64_t int_value() const;
  double float_value() const;
  bool bool_value() const { return text == "true"; }

  static Expr int_literal(std::int64_t v, SourceSpan span = {});
  static Expr bool_literal(bool v, SourceSpan span = {});
  static Expr identifier(std::string name, SourceSpan span = {});
};

enum class StmtKind {
  Empty,
  VarDecl,      // type name [= exprs[0]]
  Assign,       // exprs[0] op exprs[1]; op is = += -= *= /= %=
  Increment,    // exprs[0] op; op is ++ or --
  ExprStmt,     // exprs[0]
  For,          // children: init, step, body; exprs[0] = condition (optional)
  If,           // exprs[0] = condition; children: then, else (Empty when absent)
  Return,       // exprs[0] optional
  Block,        // children
  Passthrough,  // raw GPU text copied verbatim
};

struct Stmt {
  StmtKind kind = StmtKind::Empty;
  TypeRef type;
  std::string name;
  std::string op;
  bool is_const = false;
  std::vector<Expr> exprs;
  std::vector<Stmt> children;
  std::string raw;
  SourceSpan span;

  static Stmt block(std::vector<Stmt> stmts, SourceSpan span = {});
};

struct Attribute {
  std::string name;
  std::vector<Expr> args;
  SourceSpan span;
};

struct AstParam {
  std::string name;
  TypeRef type;
  std::vector<Attribute> attributes;
  SourceSpan span;
};

struct AstField {
  std::string name;
  TypeRef type;
  std::vector<Attribute> attributes;
  std::optional<Expr> initializer;
  SourceSpan span;
};

struct AstMethod {
  std::string name;
  TypeRef return_type;
  std::vector<AstParam> params;
  bool is_virtual = false;
  bool is_override = false;
  bool is_pure = false;
  bool is_const = false;
  std::vector<Attribute> attributes;
  std::optional<Stmt> body;  // a Block; absent iff pure
  SourceSpan span;
};

struct PassthroughBlock {
  std::string text;
  SourceSpan span;
  std::size_t member_index = 0;  // position among the class members
};

struct AstClass {
  std::string name;
  std::optional<std::string> base_name;
  std::vector<Attribute> attributes;
  std::vector<AstField> fields;
  std::vector<AstMethod> methods;
  std::vector<PassthroughBlock> passthrough_blocks;
  std::vector<std::string> host_methods;  // unattributed methods, names only
  SourceSpan span;
};

struct AstEnum {
  std::string name;
  std::vector<std::pair<std::string, std::int64_t>> enumerators;
  SourceSpan span;
};

struct HostFunction {
  std::string name;
  SourceSpan span;
};

struct TranslationUnit {
  FileId file;
  std::vector<AstClass> classes;
  std::vector<AstMethod> free_gpu_functions;
  std::vector<AstEnum> enums;
  std::vector<HostFunction> host_functions;  // unattributed free functions, names only
};

const Attribute* find_attribute(const std::vector<Attribute>& attrs, std::string_view name);
bool has_attribute(const std::vector<Attribute>& attrs, std::string_view name);

// Structural comparison; spans are ignored.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Stmt& a, const Stmt& b);
bool structurally_equal(const AstMethod& a, const AstMethod& b);
bool structurally_equal(const AstClass& a, const AstClass& b);
bool structurally_equal(const TranslationUnit& a, const TranslationUnit& b);

/// Calls `fn` on every expression in `stmt`, children before parents.
template <typename Fn>
void for_each_expr(const Expr& e, Fn&& fn) {
  for (const auto& op : e.operands) for_each_expr(op, fn);
  fn(e);
}

template <typename Fn>
void for_each_expr(const Stmt& s, Fn&& fn) {
  for (const auto& e : s.exprs) for_each_expr(e, fn);
  for (const auto& c : s.children) for_each_expr(c, fn);
}

template <typename Fn>
void for_each_stmt(const Stmt& s, Fn&& fn) {
  fn(s);
  for (const auto& c : s.children) for_each_stmt(c, fn);
}

}  // namespace uscc
