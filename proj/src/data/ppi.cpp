#include "cfp/data/ppi.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "cfp/config_text.hpp"
#include "cfp/errors.hpp"
#include "cfp/numerics/rng.hpp"

namespace cfp::data {

EdgeKey canonical_edge(const std::string& a, const std::string& b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

std::map<std::string, std::vector<std::string>> PPIGraph::adjacency() const {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& [id, residues] : nodes) adj[id];
  for (const auto& [key, labels] : edges) {
    adj[key.first].push_back(key.second);
    adj[key.second].push_back(key.first);
  }
  for (auto& [id, list] : adj) std::sort(list.begin(), list.end());
  return adj;
}

std::vector<std::string> PPIGraph::largest_component() const {
  const auto adj = adjacency();
  std::set<std::string> seen;
  std::vector<std::string> best;
  for (const auto& [start, unused] : adj) {
    if (seen.contains(start)) continue;
    std::vector<std::string> comp;
    std::vector<std::string> stack = {start};
    seen.insert(start);
    while (!stack.empty()) {
      std::string v = std::move(stack.back());
      stack.pop_back();
      for (const auto& w : adj.at(v)) {
        if (seen.insert(w).second) stack.push_back(w);
      }
      comp.push_back(std::move(v));
    }
    if (comp.size() > best.size()) best = std::move(comp);
  }
  std::sort(best.begin(), best.end());
  return best;
}

namespace {

[[noreturn]] void fail(std::string_view origin, std::size_t line, const std::string& what) {
  throw FormatError(std::string(origin) + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    cols.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return cols;
}

}  // namespace

PpiParse parse_ppi_text(std::string_view text, std::string_view origin) {
  PpiParse result;
  PPIGraph& g = result.graph;
  std::optional<std::size_t> width;
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
    const auto cols = split_tabs(line);
    if (cols.size() != 3 && cols.size() != 9) {
      fail(origin, line_no, "expected 3 or 9 tab-separated columns, found " + std::to_string(cols.size()));
    }
    const std::size_t w = cols.size() - 2;
    if (width && *width != w) fail(origin, line_no, "label width changes from " + std::to_string(*width));
    width = w;
    const std::string a(cols[0]);
    const std::string b(cols[1]);
    if (a.empty() || b.empty()) fail(origin, line_no, "empty protein id");
    std::vector<std::uint8_t> labels(w);
    for (std::size_t c = 0; c < w; ++c) {
      if (cols[c + 2] == "1") {
        labels[c] = 1;
      } else if (cols[c + 2] != "0") {
        fail(origin, line_no, "label '" + std::string(cols[c + 2]) + "' is not 0 or 1");
      }
    }
    if (a == b) {
      result.skipped.push_back({std::string(origin), line_no, "self-loop on '" + a + "'"});
      continue;
    }
    g.nodes.emplace(a, std::string{});
    g.nodes.emplace(b, std::string{});
    auto [it, inserted] = g.edges.emplace(canonical_edge(a, b), labels);
    if (!inserted) {
      for (std::size_t c = 0; c < w; ++c) it->second[c] |= labels[c];
    }
  }
  g.label_width = width.value_or(1);
  return result;
}

PpiParse parse_ppi_tsv(const std::string& path) { return parse_ppi_text(read_text_file(path), path); }

void link_sequences(PPIGraph& graph, const SequenceTable& sequences) {
  for (auto& [id, residues] : graph.nodes) {
    const auto it = sequences.find(id);
    if (it == sequences.end()) throw DataError("interaction endpoint '" + id + "' has no sequence");
    residues = it->second;
  }
}

std::string to_ppi_text(const PPIGraph& graph, const std::vector<EdgeKey>& edges) {
  std::string out;
  for (const EdgeKey& e : edges) {
    out += e.first + '\t' + e.second;
    for (std::uint8_t bit : graph.edges.at(e)) {
      out += '\t';
      out += bit ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

std::string to_string(SplitMode mode) { return mode == SplitMode::BFS ? "bfs" : "dfs"; }

SplitMode parse_split_mode(std::string_view text) {
  if (text == "bfs" || text == "BFS") return SplitMode::BFS;
  if (text == "dfs" || text == "DFS") return SplitMode::DFS;
  throw ConfigError("split mode must be bfs or dfs, got '" + std::string(text) + "'");
}

SplitSpec split_graph(const PPIGraph& graph, SplitMode mode, double fraction, std::uint64_t seed,
                      const std::optional<std::string>& root) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must lie in (0, 1)");
  const std::vector<std::string> comp = graph.largest_component();
  if (comp.empty()) throw ConfigError("cannot split an empty graph");
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(comp.size())));
  if (k >= comp.size()) {
    throw ConfigError("split fraction " + format_double(fraction) + " selects all " + std::to_string(comp.size()) +
                      " nodes of the largest component");
  }

  SplitSpec spec;
  spec.mode = mode;
  spec.seed = seed;
  spec.fraction = fraction;
  if (root) {
    if (!std::binary_search(comp.begin(), comp.end(), *root)) {
      throw ConfigError("split root '" + *root + "' is not in the largest component");
    }
    spec.root = *root;
  } else {
    numerics::Rng rng(seed);
    spec.root = comp[rng.below(comp.size())];
  }

  const auto adj = graph.adjacency();
  std::set<std::string> marked;
  if (mode == SplitMode::BFS) {
    std::deque<std::string> queue = {spec.root};
    marked.insert(spec.root);
    while (!queue.empty() && spec.selected.size() < k) {
      std::string v = std::move(queue.front());
      queue.pop_front();
      for (const auto& w : adj.at(v)) {
        if (marked.insert(w).second) queue.push_back(w);
      }
      spec.selected.push_back(std::move(v));
    }
  } else {
    std::vector<std::string> stack = {spec.root};
    while (!stack.empty() && spec.selected.size() < k) {
      std::string v = std::move(stack.back());
      stack.pop_back();
      if (!marked.insert(v).second) continue;
      const auto& nbrs = adj.at(v);
      for (auto it = nbrs.rbegin(); it != nbrs.rend(); ++it) {
        if (!marked.contains(*it)) stack.push_back(*it);
      }
      spec.selected.push_back(std::move(v));
    }
  }

  const std::set<std::string> chosen(spec.selected.begin(), spec.selected.end());
  for (const auto& [key, labels] : graph.edges) {
    if (chosen.contains(key.first) || chosen.contains(key.second)) {
      spec.test.push_back(key);
    } else {
      spec.train.push_back(key);
    }
  }
  return spec;
}

}  // namespace cfp::data
