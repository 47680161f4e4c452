#include "uscc/parser.hpp"

#include <array>
#include <future>
#include <set>

namespace uscc {

namespace {

constexpr std::array kVaryingAttributes = {
    std::string_view("SV_DispatchThreadID"),
    std::string_view("SV_GroupID"),
    std::string_view("SV_GroupThreadID"),
    std::string_view("SV_GroupIndex"),
};

constexpr std::array kSpecializationAttributes = {
    std::string_view("specialization_Bool"),
    std::string_view("specialization_SparseInt"),
    std::string_view("specialization_Enum"),
    std::string_view("specialization_ShaderClass"),
};

constexpr std::array kOtherAttributes = {
    std::string_view("ShaderClass"),
    std::string_view("uniform"),
    std::string_view("gpu"),
    std::string_view("entry_ComputeShader"),
    std::string_view("hlsl_raw"),
};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& arr, std::string_view name) {
  for (auto a : arr)
    if (a == name) return true;
  return false;
}

constexpr std::array kAssignOps = {
    std::string_view("="),  std::string_view("+="), std::string_view("-="),
    std::string_view("*="), std::string_view("/="), std::string_view("%="),
};

struct ParseFailure {};

class Parser {
 public:
  Parser(std::vector<Token> tokens, FileId file) : tokens_(std::move(tokens)), file_(file) {
    Token eof;
    eof.kind = TokenKind::EndOfFile;
    if (!tokens_.empty()) {
      const auto& last = tokens_.back().span;
      eof.span = SourceSpan{file_, last.end_line, last.end_col, last.end_line, last.end_col};
    } else {
      eof.span = SourceSpan{file_, 1, 1, 1, 1};
    }
    tokens_.push_back(std::move(eof));
  }

  ParseResult parse_unit() {
    ParseResult out;
    out.unit.file = file_;
    unit_ = &out.unit;
    while (!at_end()) {
      std::size_t start = pos_;
      try {
        parse_top_level();
      } catch (const ParseFailure&) {
        pos_ = start;
        skip_declaration(false);
      }
      if (pos_ == start) advance();
    }
    out.diagnostics = std::move(diags_);
    return out;
  }

  std::optional<Expr> parse_lone_expression(std::vector<Diagnostic>& diags) {
    try {
      Expr e = parse_expr();
      if (!at_end()) fail("expected end of expression");
      diags = std::move(diags_);
      return e;
    } catch (const ParseFailure&) {
      diags = std::move(diags_);
      return std::nullopt;
    }
  }

  // Also accepts a simple statement without its `;`, as found in for-clauses.
  std::optional<Stmt> parse_lone_statement(std::vector<Diagnostic>& diags) {
    try {
      Stmt s = parse_statement();
      if (!at_end()) fail("expected end of statement");
      diags = std::move(diags_);
      return s;
    } catch (const ParseFailure&) {
    }
    std::vector<Diagnostic> first = std::move(diags_);
    diags_.clear();
    pos_ = 0;
    try {
      Stmt s = parse_simple_statement();
      if (!at_end()) fail("expected end of statement");
      diags = std::move(diags_);
      return s;
    } catch (const ParseFailure&) {
      diags = std::move(first);
      return std::nullopt;
    }
  }

 private:
  // ---- token helpers -------------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }
  bool at_end() const { return peek().kind == TokenKind::EndOfFile; }

  const Token& advance() {
    const Token& t = tokens_[pos_];
    last_span_ = t.span;
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }

  bool accept_punct(std::string_view p) {
    if (peek().is_punct(p)) {
      advance();
      return true;
    }
    return false;
  }

  bool accept_keyword(std::string_view k) {
    if (peek().is_keyword(k)) {
      advance();
      return true;
    }
    return false;
  }

  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail("expected '" + std::string(p) + "'");
  }

  // `]]` is lexed as one token; inside expressions it may close two brackets.
  void expect_close_bracket() {
    if (accept_punct("]")) return;
    if (peek().kind == TokenKind::AttrClose) {
      Token& t = tokens_[pos_];
      last_span_ = SourceSpan{file_, t.span.start_line, t.span.start_col, t.span.start_line, t.span.start_col + 1};
      t.kind = TokenKind::Punct;
      t.text = "]";
      t.span.start_col += 1;
      return;
    }
    fail("expected ']'");
  }

  std::string expect_identifier(std::string_view what) {
    if (peek().kind != TokenKind::Identifier) fail("expected " + std::string(what));
    return advance().text;
  }

  [[noreturn]] void fail(const std::string& message) {
    std::string found = at_end() ? "end of file" : "'" + peek().text + "'";
    error("SyntaxError", message + ", found " + found, peek().span);
    throw ParseFailure{};
  }

  void error(std::string code, std::string message, const SourceSpan& span) {
    diags_.push_back({std::move(code), std::move(message), span});
  }

  SourceSpan span_since(const SourceSpan& start) const { return SourceSpan::cover(start, last_span_); }

  /// Skips one declaration (or class member): up to and including a `;` at
  /// nesting depth zero, or a balanced `{...}` block plus an optional `;`.
  void skip_declaration(bool inside_class) {
    int depth = 0;
    while (!at_end()) {
      const Token& t = peek();
      if (t.is_punct("(") || t.is_punct("{") || t.is_punct("[")) {
        ++depth;
      } else if (t.is_punct(")") || t.is_punct("]")) {
        if (depth > 0) --depth;
      } else if (t.is_punct("}")) {
        if (depth == 0) {
          if (!inside_class) advance();
          return;
        }
        --depth;
        advance();
        if (depth == 0) {
          accept_punct(";");
          return;
        }
        continue;
      } else if (t.is_punct(";") && depth == 0) {
        advance();
        return;
      }
      advance();
    }
  }

  // ---- attributes ----------------------------------------------------------

  std::vector<Attribute> parse_attribute_lists() {
    std::vector<Attribute> attrs;
    while (peek().kind == TokenKind::AttrOpen) {
      advance();
      do {
        if (peek().kind == TokenKind::AttrClose) break;
        Attribute a;
        const SourceSpan start = peek().span;
        a.name = expect_identifier("attribute name");
        if (accept_punct("(")) {
          if (!peek().is_punct(")")) {
            do {
              a.args.push_back(parse_expr());
            } while (accept_punct(","));
          }
          expect_punct(")");
        }
        a.span = span_since(start);
        if (check_attribute(a)) attrs.push_back(std::move(a));
      } while (accept_punct(","));
      if (peek().kind != TokenKind::AttrClose) fail("expected ']]'");
      advance();
    }
    return attrs;
  }

  static std::optional<std::int64_t> literal_int(const Expr& e) {
    if (e.kind == ExprKind::IntLiteral) return e.int_value();
    if (e.kind == ExprKind::Unary && e.text == "-" && e.operands[0].kind == ExprKind::IntLiteral)
      return -e.operands[0].int_value();
    return std::nullopt;
  }

  /// Returns false when the attribute should be dropped after diagnosing.
  bool check_attribute(Attribute& a) {
    if (!is_known_attribute(a.name)) {
      error("UnknownAttribute", "unknown attribute '" + a.name + "'", a.span);
      return false;
    }
    if (a.name == "specialization_SparseInt") {
      if (a.args.empty()) {
        error("SparseIntNeedsValues", "specialization_SparseInt requires at least one value", a.span);
        return false;
      }
      std::set<std::int64_t> seen;
      for (auto& arg : a.args) {
        auto v = literal_int(arg);
        if (!v) {
          error("AttributeArgument", "specialization_SparseInt values must be integer literals", arg.span);
          return false;
        }
        if (!seen.insert(*v).second) {
          error("SparseIntDuplicate", "duplicate specialization value " + std::to_string(*v), arg.span);
          return false;
        }
        arg = Expr::int_literal(*v, arg.span);
      }
      return true;
    }
    if (a.name == "entry_ComputeShader") {
      if (a.args.size() != 3) {
        error("BadGroupSize", "entry_ComputeShader requires exactly three thread group dimensions", a.span);
        return false;
      }
      for (const auto& arg : a.args) {
        auto v = literal_int(arg);
        if (!v || *v <= 0) {
          error("BadGroupSize", "thread group dimensions must be positive integer literals", arg.span);
          return false;
        }
      }
      return true;
    }
    if (!a.args.empty()) {
      error("AttributeArity", "attribute '" + a.name + "' takes no arguments", a.span);
      return false;
    }
    return true;
  }

  void reject_attributes(const std::vector<Attribute>& attrs, std::string_view where) {
    for (const auto& a : attrs)
      error("MisplacedAttribute", "attribute '" + a.name + "' is not allowed on " + std::string(where), a.span);
  }

  // ---- types ---------------------------------------------------------------

  bool looks_like_type_start() const {
    if (peek().kind == TokenKind::Identifier) return true;
    return peek().is_keyword("const") && peek(1).kind == TokenKind::Identifier;
  }

  TypeRef parse_type() {
    accept_keyword("const");
    TypeRef t;
    t.name = expect_identifier("type name");
    while (peek().is_punct("::") && peek(1).kind == TokenKind::Identifier) {
      advance();
      t.name += "::" + advance().text;
    }
    if (accept_punct("<")) {
      do {
        const Token& arg = peek();
        if (arg.kind == TokenKind::Identifier || arg.kind == TokenKind::IntLiteral) {
          t.template_args.push_back(advance().text);
        } else {
          fail("expected template argument");
        }
      } while (accept_punct(","));
      expect_punct(">");
    }
    if (accept_punct("*")) t.is_pointer = true;
    return t;
  }

  /// Speculative `Type name` match for declarations.
  bool at_declaration() {
    std::size_t save = pos_;
    auto save_diags = diags_.size();
    bool ok = false;
    try {
      if (looks_like_type_start()) {
        TypeRef t = parse_type();
        ok = !t.is_pointer && peek().kind == TokenKind::Identifier;
      }
    } catch (const ParseFailure&) {
      ok = false;
    }
    pos_ = save;
    diags_.resize(save_diags);
    return ok;
  }

  // ---- top level -----------------------------------------------------------

  void parse_top_level() {
    const Token& t = peek();
    if (t.is_keyword("template")) {
      parse_template();
    } else if (t.is_keyword("enum")) {
      unit_->enums.push_back(parse_enum());
    } else if ((t.is_keyword("class") || t.is_keyword("struct")) && peek(1).kind == TokenKind::AttrOpen) {
      parse_class();
    } else if (t.kind == TokenKind::AttrOpen) {
      parse_attributed_top_level();
    } else {
      record_host_function();
      skip_declaration(false);
    }
  }

  void parse_template() {
    const SourceSpan start = peek().span;
    advance();
    if (accept_punct("<")) {
      int depth = 1;
      while (!at_end() && depth > 0) {
        if (peek().is_punct("<")) ++depth;
        if (peek().is_punct(">")) --depth;
        advance();
      }
    }
    bool attributed = peek().kind == TokenKind::AttrOpen ||
                      ((peek().is_keyword("class") || peek().is_keyword("struct")) &&
                       peek(1).kind == TokenKind::AttrOpen);
    if (attributed)
      error("TemplateUnsupported", "templates are not supported on shader declarations", span_since(start));
    skip_declaration(false);
  }

  void record_host_function() {
    // [static] [const] Type [*] name (
    std::size_t i = 0;
    while (peek(i).is_keyword("static") || peek(i).is_keyword("const")) ++i;
    if (peek(i).kind != TokenKind::Identifier) return;
    ++i;
    if (peek(i).is_punct("<")) return;
    if (peek(i).is_punct("*") || peek(i).is_punct("&")) ++i;
    if (peek(i).kind == TokenKind::Identifier && peek(i + 1).is_punct("("))
      unit_->host_functions.push_back({peek(i).text, peek(i).span});
  }

  AstEnum parse_enum() {
    AstEnum e;
    const SourceSpan start = peek().span;
    advance();
    if (!accept_keyword("class")) accept_keyword("struct");
    e.name = expect_identifier("enum name");
    if (accept_punct(":")) parse_type();
    expect_punct("{");
    std::int64_t next = 0;
    while (!peek().is_punct("}")) {
      std::string name = expect_identifier("enumerator");
      if (accept_punct("=")) {
        Expr v = parse_expr();
        auto lit = literal_int(v);
        if (!lit) {
          error("SyntaxError", "enumerator values must be integer literals", v.span);
          throw ParseFailure{};
        }
        next = *lit;
      }
      e.enumerators.emplace_back(std::move(name), next++);
      if (!accept_punct(",")) break;
    }
    expect_punct("}");
    expect_punct(";");
    e.span = span_since(start);
    return e;
  }

  void parse_attributed_top_level() {
    const SourceSpan start = peek().span;
    auto attrs = parse_attribute_lists();
    if (has_attribute(attrs, "gpu")) {
      for (const auto& a : attrs)
        if (a.name != "gpu")
          error("MisplacedAttribute", "attribute '" + a.name + "' is not allowed on a free function", a.span);
      AstMethod m = parse_method_after_attributes(std::move(attrs), start, /*in_class=*/false);
      unit_->free_gpu_functions.push_back(std::move(m));
      return;
    }
    reject_attributes(attrs, "this top-level declaration");
    skip_declaration(false);
  }

  void parse_class() {
    AstClass cls;
    const SourceSpan start = peek().span;
    advance();  // class / struct
    auto attrs = parse_attribute_lists();
    bool shader_class = has_attribute(attrs, "ShaderClass");
    for (const auto& a : attrs)
      if (a.name != "ShaderClass")
        error("MisplacedAttribute", "attribute '" + a.name + "' is not allowed on a class", a.span);
    cls.name = expect_identifier("class name");
    accept_keyword("final");
    if (accept_punct(":")) {
      accept_keyword("public") || accept_keyword("protected") || accept_keyword("private");
      accept_keyword("virtual");
      cls.base_name = expect_identifier("base class name");
      if (peek().is_punct(",")) {
        error("MultipleInheritance", "shader classes support single inheritance only", peek().span);
        throw ParseFailure{};
      }
    }
    expect_punct("{");
    std::set<std::string> member_names;
    std::size_t member_index = 0;
    while (!peek().is_punct("}")) {
      if (at_end()) fail("expected '}' to close class");
      if ((peek().is_keyword("public") || peek().is_keyword("private") || peek().is_keyword("protected")) &&
          peek(1).is_punct(":")) {
        advance();
        advance();
        continue;
      }
      parse_member(cls, member_names, member_index);
    }
    expect_punct("}");
    expect_punct(";");
    cls.span = span_since(start);
    cls.attributes = std::move(attrs);
    if (shader_class) unit_->classes.push_back(std::move(cls));
  }

  void note_member(std::set<std::string>& names, const std::string& name, const SourceSpan& span) {
    if (!names.insert(name).second) error("DuplicateMember", "member '" + name + "' is declared twice", span);
  }

  void parse_member(AstClass& cls, std::set<std::string>& names, std::size_t& member_index) {
    const SourceSpan start = peek().span;
    if (peek().kind != TokenKind::AttrOpen) {
      parse_unattributed_member(cls, names, member_index);
      return;
    }
    auto attrs = parse_attribute_lists();
    if (has_attribute(attrs, "hlsl_raw")) {
      if (attrs.size() != 1) reject_attributes({attrs.begin() + 1, attrs.end()}, "a passthrough block");
      if (peek().kind != TokenKind::RawString) fail("expected raw string literal after [[hlsl_raw]]");
      const Token& raw = advance();
      cls.passthrough_blocks.push_back({raw.text, raw.span, member_index++});
      accept_punct(";");
      return;
    }
    bool is_virtual = accept_keyword("virtual");
    accept_keyword("static");
    if (!looks_like_type_start()) fail("expected member declaration");
    std::size_t decl_start = pos_;
    parse_type();
    std::string name = expect_identifier("member name");
    bool is_method = peek().is_punct("(");
    pos_ = decl_start;
    if (is_method) {
      AstMethod m = parse_method_after_attributes(std::move(attrs), start, /*in_class=*/true, is_virtual);
      note_member(names, m.name, m.span);
      cls.methods.push_back(std::move(m));
    } else {
      if (is_virtual) fail("'virtual' applies to methods only");
      AstField f = parse_field_rest(std::move(attrs), start);
      note_member(names, f.name, f.span);
      cls.fields.push_back(std::move(f));
    }
    ++member_index;
  }

  void parse_unattributed_member(AstClass& cls, std::set<std::string>& names, std::size_t& member_index) {
    const SourceSpan start = peek().span;
    // Plain data members are kept so that semantic checks can see them.
    std::size_t save = pos_;
    if (looks_like_type_start()) {
      bool field_like = false;
      auto save_diags = diags_.size();
      try {
        parse_type();
        field_like = peek().kind == TokenKind::Identifier && (peek(1).is_punct(";") || peek(1).is_punct("="));
      } catch (const ParseFailure&) {
      }
      diags_.resize(save_diags);
      pos_ = save;
      if (field_like) {
        AstField f = parse_field_rest({}, start);
        note_member(names, f.name, f.span);
        cls.fields.push_back(std::move(f));
        ++member_index;
        return;
      }
    }
    pos_ = save;
    std::size_t i = 0;
    while (peek(i).is_keyword("virtual") || peek(i).is_keyword("static") || peek(i).is_keyword("const")) ++i;
    while (peek(i).kind == TokenKind::Identifier || peek(i).is_punct("*") || peek(i).is_punct("&") ||
           peek(i).is_punct("<") || peek(i).is_punct(">") || peek(i).is_punct(",")) {
      if (peek(i).kind == TokenKind::Identifier && peek(i + 1).is_punct("(")) {
        cls.host_methods.push_back(peek(i).text);
        break;
      }
      ++i;
    }
    skip_declaration(true);
  }

  AstField parse_field_rest(std::vector<Attribute> attrs, const SourceSpan& start) {
    AstField f;
    f.attributes = std::move(attrs);
    f.type = parse_type();
    f.name = expect_identifier("field name");
    if (accept_punct("=")) f.initializer = parse_expr();
    expect_punct(";");
    f.span = span_since(start);
    return f;
  }

  AstMethod parse_method_after_attributes(std::vector<Attribute> attrs, const SourceSpan& start, bool in_class,
                                          bool is_virtual = false) {
    AstMethod m;
    m.attributes = std::move(attrs);
    m.is_virtual = is_virtual || accept_keyword("virtual");
    if (m.is_virtual && !in_class) fail("free functions cannot be virtual");
    accept_keyword("static");
    m.return_type = parse_type();
    m.name = expect_identifier("function name");
    expect_punct("(");
    if (peek().kind == TokenKind::Identifier && peek().text == "void" && peek(1).is_punct(")")) advance();
    if (!peek().is_punct(")")) {
      do {
        m.params.push_back(parse_param());
      } while (accept_punct(","));
    }
    expect_punct(")");
    while (true) {
      if (accept_keyword("const")) {
        m.is_const = true;
      } else if (accept_keyword("override")) {
        m.is_override = true;
      } else if (accept_keyword("final")) {
      } else {
        break;
      }
    }
    if (accept_punct("=")) {
      if (peek().kind != TokenKind::IntLiteral || peek().text != "0") fail("expected '0' in pure specifier");
      advance();
      if (!m.is_virtual) fail("pure specifier requires a virtual method");
      m.is_pure = true;
      expect_punct(";");
    } else if (peek().is_punct("{")) {
      m.body = parse_block();
    } else {
      expect_punct(";");
      error("MissingBody", "GPU function '" + m.name + "' must have a body unless it is pure virtual",
            span_since(start));
    }
    m.span = span_since(start);
    return m;
  }

  AstParam parse_param() {
    AstParam p;
    const SourceSpan start = peek().span;
    p.attributes = parse_attribute_lists();
    p.type = parse_type();
    accept_punct("&");
    p.name = expect_identifier("parameter name");
    p.span = span_since(start);
    return p;
  }

  // ---- statements ----------------------------------------------------------

  Stmt parse_block() {
    const SourceSpan start = peek().span;
    expect_punct("{");
    std::vector<Stmt> stmts;
    while (!peek().is_punct("}")) {
      if (at_end()) fail("expected '}'");
      stmts.push_back(parse_statement());
    }
    expect_punct("}");
    return Stmt::block(std::move(stmts), span_since(start));
  }

  Stmt parse_statement() {
    const SourceSpan start = peek().span;
    const Token& t = peek();
    if (t.is_punct("{")) return parse_block();
    if (t.is_punct(";")) {
      advance();
      Stmt s;
      s.span = span_since(start);
      return s;
    }
    if (t.kind == TokenKind::AttrOpen) {
      auto attrs = parse_attribute_lists();
      if (!has_attribute(attrs, "hlsl_raw")) {
        reject_attributes(attrs, "a statement");
        return parse_statement();
      }
      if (peek().kind != TokenKind::RawString) fail("expected raw string literal after [[hlsl_raw]]");
      Stmt s;
      s.kind = StmtKind::Passthrough;
      s.raw = advance().text;
      accept_punct(";");
      s.span = span_since(start);
      return s;
    }
    if (t.is_keyword("for")) return parse_for();
    if (t.is_keyword("if")) {
      advance();
      Stmt s;
      s.kind = StmtKind::If;
      expect_punct("(");
      s.exprs.push_back(parse_expr());
      expect_punct(")");
      s.children.push_back(parse_statement());
      if (accept_keyword("else")) {
        s.children.push_back(parse_statement());
      } else {
        s.children.emplace_back();
      }
      s.span = span_since(start);
      return s;
    }
    if (t.is_keyword("return")) {
      advance();
      Stmt s;
      s.kind = StmtKind::Return;
      if (!peek().is_punct(";")) s.exprs.push_back(parse_expr());
      expect_punct(";");
      s.span = span_since(start);
      return s;
    }
    Stmt s = parse_simple_statement();
    expect_punct(";");
    s.span = span_since(start);
    return s;
  }

  Stmt parse_for() {
    const SourceSpan start = peek().span;
    advance();
    Stmt s;
    s.kind = StmtKind::For;
    expect_punct("(");
    Stmt init;
    if (!peek().is_punct(";")) {
      const SourceSpan init_start = peek().span;
      init = parse_simple_statement();
      init.span = span_since(init_start);
    }
    expect_punct(";");
    if (!peek().is_punct(";")) s.exprs.push_back(parse_expr());
    expect_punct(";");
    Stmt step;
    if (!peek().is_punct(")")) {
      const SourceSpan step_start = peek().span;
      step = parse_simple_statement();
      if (step.kind == StmtKind::VarDecl) fail("declaration not allowed in for-step");
      step.span = span_since(step_start);
    }
    expect_punct(")");
    s.children.push_back(std::move(init));
    s.children.push_back(std::move(step));
    s.children.push_back(parse_statement());
    s.span = span_since(start);
    return s;
  }

  /// Declaration, assignment, increment or expression; no trailing `;`.
  Stmt parse_simple_statement() {
    const SourceSpan start = peek().span;
    Stmt s;
    if (at_declaration()) {
      s.kind = StmtKind::VarDecl;
      s.is_const = peek().is_keyword("const");
      s.type = parse_type();
      s.name = expect_identifier("variable name");
      if (accept_punct("=")) s.exprs.push_back(parse_expr());
      s.span = span_since(start);
      return s;
    }
    if (peek().is_punct("++") || peek().is_punct("--")) {
      s.kind = StmtKind::Increment;
      s.op = advance().text;
      s.exprs.push_back(parse_postfix());
      s.span = span_since(start);
      return s;
    }
    Expr target = parse_expr();
    for (auto op : kAssignOps) {
      if (peek().is_punct(op)) {
        advance();
        s.kind = StmtKind::Assign;
        s.op = std::string(op);
        s.exprs.push_back(std::move(target));
        s.exprs.push_back(parse_expr());
        s.span = span_since(start);
        return s;
      }
    }
    if (peek().is_punct("++") || peek().is_punct("--")) {
      s.kind = StmtKind::Increment;
      s.op = advance().text;
      s.exprs.push_back(std::move(target));
      s.span = span_since(start);
      return s;
    }
    s.kind = StmtKind::ExprStmt;
    s.exprs.push_back(std::move(target));
    s.span = span_since(start);
    return s;
  }

  // ---- expressions ---------------------------------------------------------

  Expr binary(Expr lhs, std::string op, Expr rhs) {
    Expr e;
    e.kind = ExprKind::Binary;
    e.text = std::move(op);
    e.span = SourceSpan::cover(lhs.span, rhs.span);
    e.operands.push_back(std::move(lhs));
    e.operands.push_back(std::move(rhs));
    return e;
  }

  template <typename Next>
  Expr parse_left_assoc(std::initializer_list<std::string_view> ops, Next next) {
    Expr lhs = (this->*next)();
    while (true) {
      bool matched = false;
      for (auto op : ops) {
        if (peek().is_punct(op)) {
          advance();
          Expr rhs = (this->*next)();
          lhs = binary(std::move(lhs), std::string(op), std::move(rhs));
          matched = true;
          break;
        }
      }
      if (!matched) return lhs;
    }
  }

  Expr parse_expr() { return parse_or(); }
  Expr parse_or() { return parse_left_assoc({"||"}, &Parser::parse_and); }
  Expr parse_and() { return parse_left_assoc({"&&"}, &Parser::parse_equality); }
  Expr parse_equality() { return parse_left_assoc({"==", "!="}, &Parser::parse_relational); }
  Expr parse_relational() { return parse_left_assoc({"<=", ">=", "<", ">"}, &Parser::parse_additive); }
  Expr parse_additive() { return parse_left_assoc({"+", "-"}, &Parser::parse_multiplicative); }
  Expr parse_multiplicative() { return parse_left_assoc({"*", "/", "%"}, &Parser::parse_unary); }

  Expr parse_unary() {
    if (peek().is_punct("-") || peek().is_punct("!") || peek().is_punct("&")) {
      const SourceSpan start = peek().span;
      Expr e;
      e.kind = ExprKind::Unary;
      e.text = advance().text;
      e.operands.push_back(parse_unary());
      e.span = span_since(start);
      return e;
    }
    return parse_postfix();
  }

  Expr parse_postfix() {
    Expr e = parse_primary();
    while (true) {
      if (accept_punct("(")) {
        Expr call;
        call.kind = ExprKind::Call;
        call.operands.push_back(std::move(e));
        if (!peek().is_punct(")")) {
          do {
            call.operands.push_back(parse_expr());
          } while (accept_punct(","));
        }
        expect_punct(")");
        call.span = span_since(call.operands.front().span);
        e = std::move(call);
      } else if (peek().is_punct(".") || peek().is_punct("->")) {
        Expr m;
        m.kind = ExprKind::Member;
        m.arrow = advance().text == "->";
        m.text = expect_identifier("member name");
        m.operands.push_back(std::move(e));
        m.span = span_since(m.operands.front().span);
        e = std::move(m);
      } else if (accept_punct("[")) {
        Expr idx;
        idx.kind = ExprKind::Index;
        idx.operands.push_back(std::move(e));
        idx.operands.push_back(parse_expr());
        expect_close_bracket();
        idx.span = span_since(idx.operands.front().span);
        e = std::move(idx);
      } else {
        return e;
      }
    }
  }

  Expr parse_primary() {
    const Token& t = peek();
    const SourceSpan start = t.span;
    Expr e;
    e.span = t.span;
    switch (t.kind) {
      case TokenKind::IntLiteral:
        e.kind = ExprKind::IntLiteral;
        e.text = advance().text;
        return e;
      case TokenKind::FloatLiteral:
        e.kind = ExprKind::FloatLiteral;
        e.text = advance().text;
        return e;
      case TokenKind::BoolLiteral:
        e.kind = ExprKind::BoolLiteral;
        e.text = advance().text;
        return e;
      case TokenKind::Identifier: {
        e.kind = ExprKind::Identifier;
        e.text = advance().text;
        while (peek().is_punct("::") && peek(1).kind == TokenKind::Identifier) {
          advance();
          e.text += "::" + advance().text;
        }
        e.span = span_since(start);
        return e;
      }
      default:
        break;
    }
    if (t.is_punct("(")) {
      advance();
      Expr inner = parse_expr();
      expect_punct(")");
      inner.span = span_since(start);
      return inner;
    }
    fail("expected expression");
  }

  std::vector<Token> tokens_;
  FileId file_;
  std::size_t pos_ = 0;
  SourceSpan last_span_;
  std::vector<Diagnostic> diags_;
  TranslationUnit* unit_ = nullptr;
};

}  // namespace

bool is_varying_attribute(std::string_view name) { return contains(kVaryingAttributes, name); }
bool is_specialization_attribute(std::string_view name) { return contains(kSpecializationAttributes, name); }
bool is_known_attribute(std::string_view name) {
  return is_varying_attribute(name) || is_specialization_attribute(name) || contains(kOtherAttributes, name);
}

ParseResult parse_translation_unit(std::vector<Token> tokens, FileId file) {
  return Parser(std::move(tokens), file).parse_unit();
}

ParseResult parse_source(std::string_view text, FileId file) {
  LexResult lexed = tokenize(text, file);
  if (!lexed.diagnostics.empty()) {
    ParseResult out;
    out.unit.file = file;
    // Illegal characters are recoverable; unterminated constructs are not.
    bool fatal = has_code(lexed.diagnostics, "UnterminatedComment") ||
                 has_code(lexed.diagnostics, "UnterminatedString");
    if (!fatal) out = parse_translation_unit(std::move(lexed.tokens), file);
    out.diagnostics.insert(out.diagnostics.begin(), lexed.diagnostics.begin(), lexed.diagnostics.end());
    sort_diagnostics(out.diagnostics);
    return out;
  }
  ParseResult out = parse_translation_unit(std::move(lexed.tokens), file);
  sort_diagnostics(out.diagnostics);
  return out;
}

std::vector<ParseResult> parse_many(const std::vector<SourceText>& files) {
  std::vector<std::future<ParseResult>> jobs;
  jobs.reserve(files.size());
  for (const auto& f : files)
    jobs.push_back(std::async(std::launch::async, [&f] { return parse_source(f.text, f.file); }));
  std::vector<ParseResult> out;
  out.reserve(files.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::optional<Expr> parse_expression(std::string_view text, FileId file, std::vector<Diagnostic>& diags) {
  LexResult lexed = tokenize(text, file);
  if (!lexed.diagnostics.empty()) {
    diags = std::move(lexed.diagnostics);
    return std::nullopt;
  }
  return Parser(std::move(lexed.tokens), file).parse_lone_expression(diags);
}

std::optional<Stmt> parse_statement(std::string_view text, FileId file, std::vector<Diagnostic>& diags) {
  LexResult lexed = tokenize(text, file);
  if (!lexed.diagnostics.empty()) {
    diags = std::move(lexed.diagnostics);
    return std::nullopt;
  }
  return Parser(std::move(lexed.tokens), file).parse_lone_statement(diags);
}

}  // namespace uscc
