#include "cfp/data/labels.hpp"

#include <charconv>
#include <cmath>

#include "cfp/data/fasta.hpp"
#include "cfp/errors.hpp"

namespace cfp::data {

int ss_class(char letter, std::size_t classes) {
  if (classes != 3 && classes != 8) throw ConfigError("secondary-structure classes must be 3 or 8");
  const char c = (letter == '-' || letter == 'L') ? 'C' : letter;
  const std::string_view alphabet = classes == 3 ? kQ3Letters : kQ8Letters;
  const auto pos = alphabet.find(c);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

namespace {

[[noreturn]] void fail(std::string_view origin, std::size_t line, const std::string& what) {
  throw FormatError(std::string(origin) + ":" + std::to_string(line) + ": " + what);
}

template <typename Fn>
void for_each_record(std::string_view text, std::string_view origin, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || line.find('\t', tab + 1) != std::string_view::npos) {
      fail(origin, line_no, "expected two tab-separated columns");
    }
    fn(std::string(line.substr(0, tab)), line.substr(tab + 1), line_no);
  }
}

}  // namespace

std::map<std::string, std::vector<int>> parse_ss_labels_text(std::string_view text, std::size_t classes,
                                                             std::string_view origin) {
  std::map<std::string, std::vector<int>> out;
  for_each_record(text, origin, [&](std::string id, std::string_view labels, std::size_t line) {
    std::vector<int> classes_of;
    classes_of.reserve(labels.size());
    for (char c : labels) {
      const int k = ss_class(c, classes);
      if (k < 0) fail(origin, line, std::string("unknown secondary-structure letter '") + c + "'");
      classes_of.push_back(k);
    }
    if (!out.emplace(id, std::move(classes_of)).second) fail(origin, line, "duplicate id '" + id + "'");
  });
  return out;
}

std::map<std::string, std::vector<int>> parse_ss_labels(const std::string& path, std::size_t classes) {
  return parse_ss_labels_text(read_text_file(path), classes, path);
}

std::map<std::string, double> parse_values_text(std::string_view text, std::string_view origin) {
  std::map<std::string, double> out;
  for_each_record(text, origin, [&](std::string id, std::string_view value, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v)) {
      fail(origin, line, "malformed value '" + std::string(value) + "'");
    }
    if (!out.emplace(id, v).second) fail(origin, line, "duplicate id '" + id + "'");
  });
  return out;
}

std::map<std::string, double> parse_values(const std::string& path) { return parse_values_text(read_text_file(path), path); }

}  // namespace cfp::data
