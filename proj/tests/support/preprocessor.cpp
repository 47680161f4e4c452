#include "preprocessor.hpp"

#include <cctype>
#include <sstream>
#include <vector>

namespace uscc::testing {

namespace {

class CondParser {
 public:
  CondParser(const std::string& s, const std::map<std::string, std::int64_t>& defs) : s_(s), defs_(defs) {}

  std::int64_t parse() {
    std::int64_t v = logical_or();
    skip();
    if (pos_ != s_.size()) throw PreprocessError("trailing text in condition: " + s_);
    return v;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(const std::string& tok) {
    skip();
    if (s_.compare(pos_, tok.size(), tok) != 0) return false;
    // Keep `<` from matching the start of `<=`, and so on.
    if (tok.size() == 1 && pos_ + 1 < s_.size()) {
      char next = s_[pos_ + 1];
      if ((tok == "<" || tok == ">" || tok == "!" || tok == "=") && next == '=') return false;
      if ((tok == "&" && next == '&') || (tok == "|" && next == '|')) return false;
    }
    pos_ += tok.size();
    return true;
  }

  std::int64_t logical_or() {
    std::int64_t v = logical_and();
    while (eat("||")) {
      std::int64_t r = logical_and();
      v = (v || r) ? 1 : 0;
    }
    return v;
  }

  std::int64_t logical_and() {
    std::int64_t v = equality();
    while (eat("&&")) {
      std::int64_t r = equality();
      v = (v && r) ? 1 : 0;
    }
    return v;
  }

  std::int64_t equality() {
    std::int64_t v = relational();
    for (;;) {
      if (eat("==")) {
        v = v == relational();
      } else if (eat("!=")) {
        v = v != relational();
      } else {
        return v;
      }
    }
  }

  std::int64_t relational() {
    std::int64_t v = additive();
    for (;;) {
      if (eat("<=")) {
        v = v <= additive();
      } else if (eat(">=")) {
        v = v >= additive();
      } else if (eat("<")) {
        v = v < additive();
      } else if (eat(">")) {
        v = v > additive();
      } else {
        return v;
      }
    }
  }

  std::int64_t additive() {
    std::int64_t v = multiplicative();
    for (;;) {
      if (eat("+")) {
        v += multiplicative();
      } else if (eat("-")) {
        v -= multiplicative();
      } else {
        return v;
      }
    }
  }

  std::int64_t multiplicative() {
    std::int64_t v = unary();
    for (;;) {
      if (eat("*")) {
        v *= unary();
      } else if (eat("/") || eat("%")) {
        char op = s_[pos_ - 1];
        std::int64_t r = unary();
        if (r == 0) throw PreprocessError("division by zero in condition");
        v = op == '/' ? v / r : v % r;
      } else {
        return v;
      }
    }
  }

  std::int64_t unary() {
    if (eat("!")) return !unary();
    if (eat("-")) return -unary();
    if (eat("+")) return unary();
    return primary();
  }

  std::int64_t primary() {
    skip();
    if (eat("(")) {
      std::int64_t v = logical_or();
      if (!eat(")")) throw PreprocessError("missing ')' in condition: " + s_);
      return v;
    }
    if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      return std::stoll(s_.substr(start, pos_ - start));
    }
    std::string id = ident();
    if (id == "defined") {
      bool paren = eat("(");
      std::string name = ident();
      if (paren && !eat(")")) throw PreprocessError("missing ')' after defined");
      return defs_.count(name) ? 1 : 0;
    }
    auto it = defs_.find(id);
    return it == defs_.end() ? 0 : it->second;
  }

  std::string ident() {
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (start == pos_) throw PreprocessError("expected identifier in condition: " + s_);
    return s_.substr(start, pos_ - start);
  }

  const std::string& s_;
  const std::map<std::string, std::int64_t>& defs_;
  std::size_t pos_ = 0;
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Level {
  bool parent_active;
  bool taken;   // some branch of this #if already matched
  bool active;  // current branch is live
};

}  // namespace

std::int64_t eval_condition(const std::string& expr, const std::map<std::string, std::int64_t>& defines) {
  return CondParser(expr, defines).parse();
}

std::string preprocess(const std::string& text, std::map<std::string, std::int64_t> defines) {
  std::istringstream in(text);
  std::string line;
  std::string out;
  std::vector<Level> stack;
  auto live = [&] { return stack.empty() || stack.back().active; };

  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] != '#') {
      if (live()) out += line + "\n";
      continue;
    }
    std::string body = trim(t.substr(1));
    std::string word = body.substr(0, body.find_first_of(" \t("));
    std::string rest = trim(body.substr(word.size()));
    if (word == "if" || word == "ifdef" || word == "ifndef") {
      bool parent = live();
      bool cond = false;
      if (parent) {
        if (word == "if") cond = eval_condition(rest, defines) != 0;
        if (word == "ifdef") cond = defines.count(rest) > 0;
        if (word == "ifndef") cond = defines.count(rest) == 0;
      }
      stack.push_back({parent, cond, parent && cond});
    } else if (word == "elif") {
      if (stack.empty()) throw PreprocessError("#elif without #if");
      Level& l = stack.back();
      bool cond = l.parent_active && !l.taken && eval_condition(rest, defines) != 0;
      l.active = cond;
      l.taken = l.taken || cond;
    } else if (word == "else") {
      if (stack.empty()) throw PreprocessError("#else without #if");
      Level& l = stack.back();
      l.active = l.parent_active && !l.taken;
      l.taken = true;
    } else if (word == "endif") {
      if (stack.empty()) throw PreprocessError("#endif without #if");
      stack.pop_back();
    } else if (live()) {
      if (word == "define") {
        std::istringstream ds(rest);
        std::string name, value;
        ds >> name >> value;
        std::int64_t v = 0;
        if (!value.empty() && (std::isdigit(static_cast<unsigned char>(value[0])) || value[0] == '-')) {
          v = std::stoll(value);
        }
        defines[name] = v;
      }
      out += line + "\n";
    }
  }
  if (!stack.empty()) throw PreprocessError("unterminated #if");
  return out;
}

}  // namespace uscc::testing
