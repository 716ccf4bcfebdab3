#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cfp::data {

// Secondary-structure letters. Q3: H E C. Q8: H G I E B T S C. For either
// alphabet '-' and 'L' read as C (coil).
inline constexpr std::string_view kQ3Letters = "HEC";
inline constexpr std::string_view kQ8Letters = "HGIEBTSC";
int ss_class(char letter, std::size_t classes);

// "id<TAB>labels" lines, labels one letter per residue.
std::map<std::string, std::vector<int>> parse_ss_labels_text(std::string_view text, std::size_t classes,
                                                             std::string_view origin = "<labels>");
std::map<std::string, std::vector<int>> parse_ss_labels(const std::string& path, std::size_t classes);

// "id<TAB>value" lines.
std::map<std::string, double> parse_values_text(std::string_view text, std::string_view origin = "<values>");
std::map<std::string, double> parse_values(const std::string& path);

}  // namespace cfp::data
