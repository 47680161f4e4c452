#include "uscc/diagnostics.hpp"

#include <algorithm>
#include <tuple>

namespace uscc {

SourceSpan SourceSpan::cover(const SourceSpan& a, const SourceSpan& b) {
  SourceSpan out = a;
  if (std::tie(b.start_line, b.start_col) < std::tie(a.start_line, a.start_col)) {
    out.start_line = b.start_line;
    out.start_col = b.start_col;
  }
  if (std::tie(b.end_line, b.end_col) > std::tie(a.end_line, a.end_col)) {
    out.end_line = b.end_line;
    out.end_col = b.end_col;
  }
  return out;
}

FileId SourceFiles::add(std::string name, std::string text) {
  FileId id{static_cast<std::uint32_t>(files_.size())};
  files_.push_back({std::move(name), std::move(text)});
  return id;
}

std::size_t offset_of(std::string_view text, std::uint32_t line, std::uint32_t col) {
  std::uint32_t cur_line = 1;
  std::size_t pos = 0;
  while (cur_line < line) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) return std::string_view::npos;
    pos = nl + 1;
    ++cur_line;
  }
  std::size_t off = pos + (col - 1);
  if (off > text.size()) return std::string_view::npos;
  return off;
}

std::string_view SourceFiles::slice(const SourceSpan& span) const {
  if (span.file.value >= files_.size()) return {};
  std::string_view text = files_[span.file.value].text;
  auto begin = offset_of(text, span.start_line, span.start_col);
  auto end = offset_of(text, span.end_line, span.end_col);
  if (begin == std::string_view::npos || end == std::string_view::npos || end < begin) return {};
  return text.substr(begin, end - begin);
}

std::string format_diagnostic(const Diagnostic& d, std::string_view file_name) {
  std::string out;
  out.append(file_name);
  out += ':' + std::to_string(d.span.start_line) + ':' + std::to_string(d.span.start_col);
  out += ": error[" + d.code + "]: " + d.message;
  return out;
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
  std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.span.file, a.span.start_line, a.span.start_col) <
           std::tie(b.span.file, b.span.start_line, b.span.start_col);
  });
}

std::string format_all(const std::vector<Diagnostic>& diags, const SourceFiles& files) {
  std::string out;
  for (const auto& d : diags) {
    std::string_view name = d.span.file.value < files.size() ? std::string_view(files.name(d.span.file))
                                                              : std::string_view("<unknown>");
    out += format_diagnostic(d, name);
    out += '\n';
  }
  return out;
}

bool has_code(const std::vector<Diagnostic>& diags, std::string_view code) {
  return std::any_of(diags.begin(), diags.end(), [&](const Diagnostic& d) { return d.code == code; });
}

}  // namespace uscc
