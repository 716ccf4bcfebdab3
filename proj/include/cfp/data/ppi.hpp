#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cfp/data/fasta.hpp"

namespace cfp::data {

// Canonical undirected edge: first < second.
using EdgeKey = std::pair<std::string, std::string>;
EdgeKey canonical_edge(const std::string& a, const std::string& b);

struct SkipRecord {
  std::string file;
  std::size_t line = 0;
  std::string reason;
};

// Interaction graph. Labels are 1 bit (interaction) or 7 bits (types).
struct PPIGraph {
  std::map<std::string, std::string> nodes;  // id -> residues (empty until linked)
  std::map<EdgeKey, std::vector<std::uint8_t>> edges;
  std::size_t label_width = 1;

  [[nodiscard]] std::map<std::string, std::vector<std::string>> adjacency() const;
  [[nodiscard]] std::vector<std::string> largest_component() const;
};

struct PpiParse {
  PPIGraph graph;
  std::vector<SkipRecord> skipped;
};

// Tab-separated "id1 id2 label" or "id1 id2 l1..l7". Blank lines and lines
// starting with '#' are ignored. Self-loops are skipped and reported;
// duplicate edges merge by OR. FormatError (origin:line) for a column count
// other than 3 or 9, widths that change mid-file, or labels outside {0,1}.
PpiParse parse_ppi_text(std::string_view text, std::string_view origin = "<ppi>");
PpiParse parse_ppi_tsv(const std::string& path);

// Fills node residues from `sequences`; DataError naming the first endpoint
// that has no sequence.
void link_sequences(PPIGraph& graph, const SequenceTable& sequences);

std::string to_ppi_text(const PPIGraph& graph, const std::vector<EdgeKey>& edges);

enum class SplitMode { BFS, DFS };
std::string to_string(SplitMode mode);
SplitMode parse_split_mode(std::string_view text);

// Traversal split. Inside the largest connected component (ties: the one
// holding the smallest id) a root is drawn from `seed` unless given, and
// nodes are visited in BFS or DFS order with neighbours in sorted id order
// until ceil(fraction * component size) are selected. An edge is test when
// at least one endpoint is selected.
struct SplitSpec {
  SplitMode mode = SplitMode::BFS;
  std::uint64_t seed = 0;
  double fraction = 0.2;
  std::string root;
  std::vector<std::string> selected;  // traversal order
  std::vector<EdgeKey> train;         // canonical order
  std::vector<EdgeKey> test;
};

SplitSpec split_graph(const PPIGraph& graph, SplitMode mode, double fraction, std::uint64_t seed,
                      const std::optional<std::string>& root = std::nullopt);

}  // namespace cfp::data
