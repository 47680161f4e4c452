#include "uscc/ast.hpp"

#include <algorithm>
#include <cstdlib>

namespace uscc {

std::string TypeRef::spelling() const {
  std::string out = name;
  if (!template_args.empty()) {
    out += '<';
    for (std::size_t i = 0; i < template_args.size(); ++i) {
      if (i) out += ", ";
      out += template_args[i];
    }
    out += '>';
  }
  return out;
}

std::int64_t Expr::int_value() const {
  std::string digits;
  for (char c : text)
    if (c != 'u' && c != 'U' && c != 'l' && c != 'L') digits += c;
  return std::strtoll(digits.c_str(), nullptr, 0);
}

double Expr::float_value() const {
  std::string digits = text;
  while (!digits.empty() && (digits.back() == 'f' || digits.back() == 'F' || digits.back() == 'h' ||
                             digits.back() == 'H'))
    digits.pop_back();
  return std::strtod(digits.c_str(), nullptr);
}

Expr Expr::int_literal(std::int64_t v, SourceSpan span) {
  Expr e;
  e.kind = ExprKind::IntLiteral;
  e.text = std::to_string(v);
  e.span = span;
  return e;
}

Expr Expr::bool_literal(bool v, SourceSpan span) {
  Expr e;
  e.kind = ExprKind::BoolLiteral;
  e.text = v ? "true" : "false";
  e.span = span;
  return e;
}

Expr Expr::identifier(std::string name, SourceSpan span) {
  Expr e;
  e.kind = ExprKind::Identifier;
  e.text = std::move(name);
  e.span = span;
  return e;
}

Stmt Stmt::block(std::vector<Stmt> stmts, SourceSpan span) {
  Stmt s;
  s.kind = StmtKind::Block;
  s.children = std::move(stmts);
  s.span = span;
  return s;
}

const Attribute* find_attribute(const std::vector<Attribute>& attrs, std::string_view name) {
  for (const auto& a : attrs)
    if (a.name == name) return &a;
  return nullptr;
}

bool has_attribute(const std::vector<Attribute>& attrs, std::string_view name) {
  return find_attribute(attrs, name) != nullptr;
}

static bool structurally_equal(const Attribute& a, const Attribute& b);
static bool structurally_equal(const AstParam& a, const AstParam& b);
static bool structurally_equal(const AstField& a, const AstField& b);
static bool structurally_equal(const PassthroughBlock& a, const PassthroughBlock& b);
static bool structurally_equal(const AstEnum& a, const AstEnum& b);
static bool structurally_equal(const HostFunction& a, const HostFunction& b);

template <typename T>
static bool all_equal(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](const T& x, const T& y) { return structurally_equal(x, y); });
}

static bool structurally_equal(const Attribute& a, const Attribute& b) {
  return a.name == b.name && all_equal(a.args, b.args);
}

static bool structurally_equal(const AstParam& a, const AstParam& b) {
  return a.name == b.name && a.type == b.type && all_equal(a.attributes, b.attributes);
}

static bool structurally_equal(const AstField& a, const AstField& b) {
  if (a.name != b.name || !(a.type == b.type) || !all_equal(a.attributes, b.attributes)) return false;
  if (a.initializer.has_value() != b.initializer.has_value()) return false;
  return !a.initializer || structurally_equal(*a.initializer, *b.initializer);
}

static bool structurally_equal(const PassthroughBlock& a, const PassthroughBlock& b) {
  return a.text == b.text && a.member_index == b.member_index;
}

static bool structurally_equal(const AstEnum& a, const AstEnum& b) {
  return a.name == b.name && a.enumerators == b.enumerators;
}

static bool structurally_equal(const HostFunction& a, const HostFunction& b) { return a.name == b.name; }

bool structurally_equal(const Expr& a, const Expr& b) {
  return a.kind == b.kind && a.text == b.text && a.arrow == b.arrow && all_equal(a.operands, b.operands);
}

bool structurally_equal(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.type == b.type && a.name == b.name && a.op == b.op && a.is_const == b.is_const &&
         a.raw == b.raw && all_equal(a.exprs, b.exprs) && all_equal(a.children, b.children);
}

bool structurally_equal(const AstMethod& a, const AstMethod& b) {
  if (a.name != b.name || !(a.return_type == b.return_type) || a.is_virtual != b.is_virtual ||
      a.is_override != b.is_override || a.is_pure != b.is_pure || a.is_const != b.is_const)
    return false;
  if (!all_equal(a.params, b.params) || !all_equal(a.attributes, b.attributes)) return false;
  if (a.body.has_value() != b.body.has_value()) return false;
  return !a.body || structurally_equal(*a.body, *b.body);
}

bool structurally_equal(const AstClass& a, const AstClass& b) {
  return a.name == b.name && a.base_name == b.base_name && all_equal(a.attributes, b.attributes) &&
         all_equal(a.fields, b.fields) && all_equal(a.methods, b.methods) &&
         all_equal(a.passthrough_blocks, b.passthrough_blocks) && a.host_methods == b.host_methods;
}

bool structurally_equal(const TranslationUnit& a, const TranslationUnit& b) {
  return all_equal(a.classes, b.classes) && all_equal(a.free_gpu_functions, b.free_gpu_functions) &&
         all_equal(a.enums, b.enums) && all_equal(a.host_functions, b.host_functions);
}

}  // namespace uscc
