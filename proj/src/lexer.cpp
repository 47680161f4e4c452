#include "uscc/lexer.hpp"

#include <array>
#include <cctype>

namespace uscc {

namespace {

constexpr std::array kKeywords = {
    std::string_view("class"),    std::string_view("struct"),  std::string_view("public"),
    std::string_view("private"),  std::string_view("protected"), std::string_view("virtual"),
    std::string_view("override"), std::string_view("final"),   std::string_view("const"),
    std::string_view("for"),      std::string_view("if"),      std::string_view("else"),
    std::string_view("return"),   std::string_view("new"),     std::string_view("enum"),
    std::string_view("template"), std::string_view("static"),  std::string_view("using"),
    std::string_view("namespace"), std::string_view("typedef"),
};

// Longest first so that greedy matching works.
constexpr std::array kPunct = {
    std::string_view("->"), std::string_view("::"), std::string_view("<="), std::string_view(">="),
    std::string_view("=="), std::string_view("!="), std::string_view("&&"), std::string_view("||"),
    std::string_view("+="), std::string_view("-="), std::string_view("*="), std::string_view("/="),
    std::string_view("%="), std::string_view("++"), std::string_view("--"), std::string_view("{"),
    std::string_view("}"),  std::string_view("("),  std::string_view(")"),  std::string_view("["),
    std::string_view("]"),  std::string_view(";"),  std::string_view(","),  std::string_view(":"),
    std::string_view("."),  std::string_view("<"),  std::string_view(">"),  std::string_view("="),
    std::string_view("+"),  std::string_view("-"),  std::string_view("*"),  std::string_view("/"),
    std::string_view("%"),  std::string_view("!"),  std::string_view("&"),  std::string_view("|"),
    std::string_view("^"),  std::string_view("~"),  std::string_view("?"),
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Lexer {
 public:
  Lexer(std::string_view src, FileId file) : src_(src), file_(file) {}

  LexResult run() {
    LexResult out;
    while (true) {
      skip_trivia(out);
      if (failed_) break;
      if (pos_ >= src_.size()) break;
      if (!lex_token(out)) break;
    }
    return out;
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
      at_line_start_ = true;
    } else {
      ++col_;
      if (!std::isspace(static_cast<unsigned char>(src_[pos_]))) at_line_start_ = false;
    }
    ++pos_;
  }

  SourceSpan span_from(std::uint32_t line, std::uint32_t col) const {
    return SourceSpan{file_, line, col, line_, col_};
  }

  void error(LexResult& out, std::string code, std::string message, std::uint32_t line, std::uint32_t col) {
    out.diagnostics.push_back({std::move(code), std::move(message), span_from(line, col)});
  }

  void skip_trivia(LexResult& out) {
    while (pos_ < src_.size()) {
      char c = peek();
      if (c == '#' && at_line_start_) {
        // Preprocessor line, honouring backslash continuations.
        while (pos_ < src_.size() && peek() != '\n') {
          if (peek() == '\\' && peek(1) == '\n') advance();
          advance();
        }
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        auto line = line_, col = col_;
        advance();
        advance();
        bool closed = false;
        while (pos_ < src_.size()) {
          if (peek() == '*' && peek(1) == '/') {
            advance();
            advance();
            closed = true;
            break;
          }
          advance();
        }
        if (!closed) {
          error(out, "UnterminatedComment", "comment is not closed before end of file", line, col);
          failed_ = true;
          return;
        }
      } else {
        return;
      }
    }
  }

  bool lex_token(LexResult& out) {
    auto line = line_, col = col_;
    auto start = pos_;
    char c = peek();
    Token tok;

    if (c == 'R' && peek(1) == '"') return lex_raw_string(out);

    if (ident_start(c)) {
      while (ident_char(peek())) advance();
      tok.text = std::string(src_.substr(start, pos_ - start));
      if (tok.text == "true" || tok.text == "false") {
        tok.kind = TokenKind::BoolLiteral;
      } else if (is_keyword(tok.text)) {
        tok.kind = TokenKind::Keyword;
      } else {
        tok.kind = TokenKind::Identifier;
      }
    } else if (digit(c) || (c == '.' && digit(peek(1)))) {
      lex_number(tok);
    } else if (c == '"' || c == '\'') {
      advance();
      bool closed = false;
      while (pos_ < src_.size() && peek() != '\n') {
        if (peek() == '\\') {
          advance();
          if (pos_ < src_.size()) advance();
          continue;
        }
        if (peek() == c) {
          advance();
          closed = true;
          break;
        }
        advance();
      }
      if (!closed) {
        error(out, "UnterminatedString", "string literal is not closed", line, col);
        failed_ = true;
        return false;
      }
      tok.kind = TokenKind::StringLiteral;
      tok.text = std::string(src_.substr(start, pos_ - start));
    } else if (c == '[' && peek(1) == '[') {
      advance();
      advance();
      tok.kind = TokenKind::AttrOpen;
      tok.text = "[[";
    } else if (c == ']' && peek(1) == ']') {
      advance();
      advance();
      tok.kind = TokenKind::AttrClose;
      tok.text = "]]";
    } else {
      bool matched = false;
      for (auto p : kPunct) {
        if (src_.substr(pos_, p.size()) == p) {
          for (std::size_t i = 0; i < p.size(); ++i) advance();
          tok.kind = TokenKind::Punct;
          tok.text = std::string(p);
          matched = true;
          break;
        }
      }
      if (!matched) {
        advance();
        // Swallow the remaining bytes of a multi-byte UTF-8 sequence.
        while (pos_ < src_.size() && (static_cast<unsigned char>(peek()) & 0xC0) == 0x80) advance();
        std::string shown(src_.substr(start, pos_ - start));
        error(out, "IllegalCharacter", "unexpected character '" + shown + "'", line, col);
        return true;
      }
    }
    tok.span = span_from(line, col);
    out.tokens.push_back(std::move(tok));
    return true;
  }

  void lex_number(Token& tok) {
    auto start = pos_;
    bool is_float = false;
    if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      advance();
      advance();
      while (std::isxdigit(static_cast<unsigned char>(peek()))) advance();
    } else {
      while (digit(peek())) advance();
      if (peek() == '.') {
        is_float = true;
        advance();
        while (digit(peek())) advance();
      }
      if (peek() == 'e' || peek() == 'E') {
        std::size_t ahead = 1;
        if (peek(1) == '+' || peek(1) == '-') ahead = 2;
        if (digit(peek(ahead))) {
          is_float = true;
          for (std::size_t i = 0; i < ahead; ++i) advance();
          while (digit(peek())) advance();
        }
      }
    }
    if (peek() == 'f' || peek() == 'F' || peek() == 'h' || peek() == 'H') {
      is_float = true;
      advance();
    } else {
      while (peek() == 'u' || peek() == 'U' || peek() == 'l' || peek() == 'L') advance();
    }
    tok.kind = is_float ? TokenKind::FloatLiteral : TokenKind::IntLiteral;
    tok.text = std::string(src_.substr(start, pos_ - start));
  }

  bool lex_raw_string(LexResult& out) {
    auto line = line_, col = col_;
    advance();  // R
    advance();  // "
    std::string delim;
    while (pos_ < src_.size() && peek() != '(' && peek() != '\n' && peek() != '"' && delim.size() <= 16) {
      delim += peek();
      advance();
    }
    if (peek() != '(') {
      error(out, "UnterminatedString", "malformed raw string delimiter", line, col);
      failed_ = true;
      return false;
    }
    advance();
    std::string terminator = ")" + delim + "\"";
    auto body_start = pos_;
    auto end = src_.find(terminator, pos_);
    if (end == std::string_view::npos) {
      while (pos_ < src_.size()) advance();
      error(out, "UnterminatedString", "raw string is not closed", line, col);
      failed_ = true;
      return false;
    }
    while (pos_ < end) advance();
    Token tok;
    tok.kind = TokenKind::RawString;
    tok.text = std::string(src_.substr(body_start, end - body_start));
    for (std::size_t i = 0; i < terminator.size(); ++i) advance();
    tok.span = span_from(line, col);
    out.tokens.push_back(std::move(tok));
    return true;
  }

  std::string_view src_;
  FileId file_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t col_ = 1;
  bool at_line_start_ = true;
  bool failed_ = false;
};

}  // namespace

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords)
    if (k == word) return true;
  return false;
}

LexResult tokenize(std::string_view source, FileId file) { return Lexer(source, file).run(); }

}  // namespace uscc
