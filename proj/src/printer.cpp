#include "uscc/printer.hpp"

#include <map>

namespace uscc {
namespace {

constexpr int kUnaryPrec = 7;
constexpr int kPostfixPrec = 8;

int binary_prec(const std::string& op) {
  static const std::map<std::string, int> kPrec = {
      {"||", 1}, {"&&", 2}, {"==", 3}, {"!=", 3}, {"<", 4}, {"<=", 4}, {">", 4}, {">=", 4},
      {"+", 5},  {"-", 5},  {"*", 6},  {"/", 6},  {"%", 6},
  };
  auto it = kPrec.find(op);
  return it == kPrec.end() ? 0 : it->second;
}

int prec_of(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Binary:
      return binary_prec(e.text);
    case ExprKind::Unary:
      return kUnaryPrec;
    case ExprKind::IntLiteral:
    case ExprKind::FloatLiteral:
      // A negative literal behaves like a unary minus.
      return !e.text.empty() && e.text[0] == '-' ? kUnaryPrec : kPostfixPrec + 1;
    default:
      return kPostfixPrec + 1;
  }
}

std::string wrap(const Expr& e, int min_prec) {
  std::string s = print_expr(e);
  return prec_of(e) < min_prec ? "(" + s + ")" : s;
}

std::string indent_str(int indent) { return std::string(static_cast<std::size_t>(indent) * 4, ' '); }

// Statement text without indentation or trailing semicolon.
std::string simple(const Stmt& s) {
  switch (s.kind) {
    case StmtKind::VarDecl: {
      std::string out = s.is_const ? "const " : "";
      out += s.type.spelling() + " " + s.name;
      if (!s.exprs.empty()) out += " = " + print_expr(s.exprs[0]);
      return out;
    }
    case StmtKind::Assign:
      return print_expr(s.exprs[0]) + " " + s.op + " " + print_expr(s.exprs[1]);
    case StmtKind::Increment:
      return s.op + print_expr(s.exprs[0]);
    case StmtKind::ExprStmt:
      return print_expr(s.exprs[0]);
    default:
      return "";
  }
}

void print_body(const Stmt& s, int indent, std::string& out) {
  if (s.kind == StmtKind::Block) {
    print_stmt(s, indent, out);
  } else {
    out += indent_str(indent) + "{\n";
    print_stmt(s, indent + 1, out);
    out += indent_str(indent) + "}\n";
  }
}

}  // namespace

std::string print_expr(const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLiteral:
    case ExprKind::FloatLiteral:
    case ExprKind::BoolLiteral:
    case ExprKind::Identifier:
      return e.text;
    case ExprKind::Member:
      return wrap(e.operands[0], kPostfixPrec) + (e.arrow ? "->" : ".") + e.text;
    case ExprKind::Index:
      return wrap(e.operands[0], kPostfixPrec) + "[" + print_expr(e.operands[1]) + "]";
    case ExprKind::Call: {
      std::string out = wrap(e.operands[0], kPostfixPrec) + "(";
      for (std::size_t i = 1; i < e.operands.size(); ++i) {
        if (i > 1) out += ", ";
        out += print_expr(e.operands[i]);
      }
      return out + ")";
    }
    case ExprKind::Binary: {
      int p = binary_prec(e.text);
      return wrap(e.operands[0], p) + " " + e.text + " " + wrap(e.operands[1], p + 1);
    }
    case ExprKind::Unary: {
      std::string inner = wrap(e.operands[0], kUnaryPrec);
      // Keep `- -x` from printing as a decrement.
      if (!inner.empty() && inner[0] == e.text[0] && e.text != "!") inner = "(" + inner + ")";
      return e.text + inner;
    }
  }
  return "";
}

void print_stmt(const Stmt& s, int indent, std::string& out) {
  const std::string pad = indent_str(indent);
  switch (s.kind) {
    case StmtKind::Empty:
      out += pad + ";\n";
      return;
    case StmtKind::Passthrough:
      out += s.raw + "\n";
      return;
    case StmtKind::VarDecl:
    case StmtKind::Assign:
    case StmtKind::Increment:
    case StmtKind::ExprStmt:
      out += pad + simple(s) + ";\n";
      return;
    case StmtKind::Return:
      out += pad + "return" + (s.exprs.empty() ? "" : " " + print_expr(s.exprs[0])) + ";\n";
      return;
    case StmtKind::Block:
      out += pad + "{\n";
      for (const auto& c : s.children) print_stmt(c, indent + 1, out);
      out += pad + "}\n";
      return;
    case StmtKind::For:
      out += pad + "for (" + simple(s.children[0]) + ";" + (s.exprs.empty() ? "" : " " + print_expr(s.exprs[0])) +
             ";" + (s.children[1].kind == StmtKind::Empty ? "" : " " + simple(s.children[1])) + ")\n";
      print_body(s.children[2], indent, out);
      return;
    case StmtKind::If: {
      out += pad + "if (" + print_expr(s.exprs[0]) + ")\n";
      print_body(s.children[0], indent, out);
      const Stmt& alt = s.children[1];
      if (alt.kind == StmtKind::Empty) return;
      if (alt.kind == StmtKind::If) {
        out += pad + "else\n";
        out += pad + "{\n";
        print_stmt(alt, indent + 1, out);
        out += pad + "}\n";
        return;
      }
      out += pad + "else\n";
      print_body(alt, indent, out);
      return;
    }
  }
}

static std::string attrs_text(const std::vector<Attribute>& attrs) {
  std::string out;
  for (const auto& a : attrs) {
    out += "[[" + a.name;
    if (!a.args.empty()) {
      out += "(";
      for (std::size_t k = 0; k < a.args.size(); ++k) out += (k ? ", " : "") + print_expr(a.args[k]);
      out += ")";
    }
    out += "]] ";
  }
  return out;
}

static void dump_method(const AstMethod& m, const std::string& indent, std::string& out) {
  out += indent + "method " + attrs_text(m.attributes);
  if (m.is_virtual) out += "virtual ";
  out += m.return_type.spelling() + " " + m.name + "(";
  for (std::size_t k = 0; k < m.params.size(); ++k) {
    const auto& p = m.params[k];
    out += (k ? ", " : "") + attrs_text(p.attributes) + p.type.spelling() + " " + p.name;
  }
  out += ")";
  if (m.is_const) out += " const";
  if (m.is_override) out += " override";
  if (m.is_pure) out += " = 0";
  out += "\n";
  if (m.body) print_stmt(*m.body, static_cast<int>(indent.size() / 4) + 1, out);
}

std::string dump_unit(const TranslationUnit& tu) {
  std::string out;
  for (const auto& e : tu.enums) {
    out += "enum " + e.name + " {";
    for (std::size_t k = 0; k < e.enumerators.size(); ++k)
      out += (k ? ", " : " ") + e.enumerators[k].first + " = " + std::to_string(e.enumerators[k].second);
    out += " }\n";
  }
  for (const auto& c : tu.classes) {
    out += "class " + attrs_text(c.attributes) + c.name;
    if (c.base_name) out += " : " + *c.base_name;
    out += "\n";
    for (const auto& f : c.fields) {
      out += "    field " + attrs_text(f.attributes) + f.type.spelling() + (f.type.is_pointer ? "* " : " ") + f.name;
      if (f.initializer) out += " = " + print_expr(*f.initializer);
      out += "\n";
    }
    for (const auto& m : c.methods) dump_method(m, "    ", out);
    for (const auto& h : c.host_methods) out += "    host method " + h + "\n";
    for (const auto& p : c.passthrough_blocks)
      out += "    passthrough at member " + std::to_string(p.member_index) + " (" + std::to_string(p.text.size()) +
             " bytes)\n";
  }
  for (const auto& f : tu.free_gpu_functions) dump_method(f, "", out);
  for (const auto& h : tu.host_functions) out += "host function " + h.name + "\n";
  return out;
}

}  // namespace uscc
