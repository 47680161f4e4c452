#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace uscc {

/// Opaque handle for a registered input file.
struct FileId {
  std::uint32_t value = 0;
  friend bool operator==(FileId, FileId) = default;
  friend auto operator<=>(FileId, FileId) = default;
};

/// 1-based source range. The end position is one past the last character.
struct SourceSpan {
  FileId file;
  std::uint32_t start_line = 1;
  std::uint32_t start_col = 1;
  std::uint32_t end_line = 1;
  std::uint32_t end_col = 1;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;

  /// Smallest span covering both `a` and `b` (same file assumed).
  static SourceSpan cover(const SourceSpan& a, const SourceSpan& b);
};

struct Diagnostic {
  std::string code;
  std::string message;
  SourceSpan span;
};

/// Table of input files; FileId indexes into it in registration order.
class SourceFiles {
 public:
  FileId add(std::string name, std::string text);

  const std::string& name(FileId id) const { return files_.at(id.value).name; }
  const std::string& text(FileId id) const { return files_.at(id.value).text; }
  std::size_t size() const { return files_.size(); }

  /// Returns the text covered by `span`, or an empty view if the span is
  /// out of range.
  std::string_view slice(const SourceSpan& span) const;

 private:
  struct Entry {
    std::string name;
    std::string text;
  };
  std::vector<Entry> files_;
};

/// Byte offset of a 1-based (line, col) position inside `text`, or npos.
std::size_t offset_of(std::string_view text, std::uint32_t line, std::uint32_t col);

/// `file:line:col: error[CODE]: message`
std::string format_diagnostic(const Diagnostic& d, std::string_view file_name);

/// Stable sort by file id, then start line and column.
void sort_diagnostics(std::vector<Diagnostic>& diags);

std::string format_all(const std::vector<Diagnostic>& diags, const SourceFiles& files);

bool has_code(const std::vector<Diagnostic>& diags, std::string_view code);

}  // namespace uscc
