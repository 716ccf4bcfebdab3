#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "cfp/data/contact_map.hpp"
#include "cfp/data/fasta.hpp"
#include "cfp/data/labels.hpp"
#include "cfp/data/pdb.hpp"
#include "cfp/data/ppi.hpp"
#include "cfp/errors.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

namespace {

using namespace cfp;
using namespace cfp::data;
using cfp::testing::atom_line;
using cfp::testing::fixture;

std::vector<EdgeKey> edges(std::initializer_list<std::pair<const char*, const char*>> list) {
  std::vector<EdgeKey> out;
  for (const auto& [a, b] : list) out.push_back(canonical_edge(a, b));
  std::sort(out.begin(), out.end());
  return out;
}

void expect_format_error_at(const std::function<void()>& f, const std::string& where) {
  try {
    f();
    FAIL() << "expected FormatError at " << where;
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(where), std::string::npos) << e.what();
  }
}

TEST(Fasta, SingleAndFoldedRecords) {
  EXPECT_EQ(parse_fasta_text(">p1\nACD\n"), (SequenceTable{{"p1", "ACD"}}));
  EXPECT_EQ(parse_fasta_text(">p1\nAC\nD\n"), (SequenceTable{{"p1", "ACD"}}));
  EXPECT_EQ(parse_fasta_text(">p1 some description\n  AC \n\nD\r\n>p2\nWY\n"),
            (SequenceTable{{"p1", "ACD"}, {"p2", "WY"}}));
}

TEST(Fasta, ErrorsCarryOriginAndLine) {
  expect_format_error_at([] { (void)parse_fasta_text("ACD\n>p1\nA\n", "x.fa"); }, "x.fa:1");
  try {
    (void)parse_fasta_text(">p1\nA\n>p1\nC\n", "dup.fa");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("p1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("dup.fa:3"), std::string::npos);
  }
  expect_format_error_at([] { (void)parse_fasta_text(">\nA\n", "e.fa"); }, "e.fa:1");
  EXPECT_THROW((void)parse_fasta("/nonexistent/file.fa"), DataError);
}

TEST(Fasta, WriteParseRoundTripAndToyCorpus) {
  const SequenceTable toy = parse_fasta(fixture("toy/proteins.fasta").string());
  EXPECT_EQ(toy.size(), 12u);
  EXPECT_EQ(parse_fasta_text(to_fasta(toy)), toy);
}

TEST(Ppi, SingleEdgeCanonicalisationAndSelfLoop) {
  PpiParse p = parse_ppi_text("a\tb\t1\n");
  ASSERT_EQ(p.graph.edges.size(), 1u);
  EXPECT_EQ(p.graph.edges.begin()->first, canonical_edge("a", "b"));
  EXPECT_EQ(p.graph.edges.begin()->second, (std::vector<std::uint8_t>{1}));

  p = parse_ppi_text("b\ta\t1\na\tb\t1\n");
  EXPECT_EQ(p.graph.edges.size(), 1u);
  EXPECT_EQ(p.graph.edges.begin()->first, (EdgeKey{"a", "b"}));

  p = parse_ppi_text("a\ta\t1\nb\tc\t1\n", "loops.tsv");
  EXPECT_EQ(p.graph.edges.size(), 1u);
  ASSERT_EQ(p.skipped.size(), 1u);
  EXPECT_EQ(p.skipped[0].file, "loops.tsv");
  EXPECT_EQ(p.skipped[0].line, 1u);
  EXPECT_FALSE(p.graph.nodes.contains("a") && p.graph.adjacency().contains("a") &&
               !p.graph.adjacency().at("a").empty());
}

TEST(Ppi, SevenBitLabelsMergeByOr) {
  const PpiParse p = parse_ppi_text("# header\nx\ty\t1\t0\t0\t0\t0\t0\t1\n\ny\tx\t0\t1\t0\t0\t0\t0\t1\n");
  EXPECT_EQ(p.graph.label_width, 7u);
  EXPECT_EQ(p.graph.edges.at(canonical_edge("x", "y")), (std::vector<std::uint8_t>{1, 1, 0, 0, 0, 0, 1}));
}

TEST(Ppi, MalformedLinesAreFormatErrors) {
  expect_format_error_at([] { (void)parse_ppi_text("a\tb\n", "f.tsv"); }, "f.tsv:1");
  expect_format_error_at([] { (void)parse_ppi_text("a\tb\t1\nc\td\t1\t0\t0\t0\t0\t0\t0\n", "f.tsv"); }, "f.tsv:2");
  expect_format_error_at([] { (void)parse_ppi_text("a\tb\t2\n", "f.tsv"); }, "f.tsv:1");
}

TEST(Ppi, LinkSequencesAndSerialise) {
  PpiParse p = parse_ppi_text("a\tb\t1\nb\tc\t1\n");
  EXPECT_THROW(link_sequences(p.graph, {{"a", "AC"}, {"b", "DE"}}), DataError);
  link_sequences(p.graph, {{"a", "AC"}, {"b", "DE"}, {"c", "FG"}, {"z", "WW"}});
  EXPECT_EQ(p.graph.nodes.at("c"), "FG");
  const std::string text = to_ppi_text(p.graph, {canonical_edge("c", "b")});
  EXPECT_EQ(text, "b\tc\t1\n");
}

TEST(Ppi, LargestComponentTiesGoToSmallestId) {
  const PPIGraph g = parse_ppi_text("m\tn\t1\nc\td\t1\nx\ty\t1\ny\tz\t1\n").graph;
  EXPECT_EQ(g.largest_component(), (std::vector<std::string>{"x", "y", "z"}));
  const PPIGraph tie = parse_ppi_text("m\tn\t1\nc\td\t1\n").graph;
  EXPECT_EQ(tie.largest_component(), (std::vector<std::string>{"c", "d"}));
}

TEST(Split, CycleBfsHandTrace) {
  const PPIGraph g = parse_ppi_tsv(fixture("graphs/cycle4.tsv").string()).graph;
  const SplitSpec s = split_graph(g, SplitMode::BFS, 0.5, 1, std::string("a"));
  EXPECT_EQ(s.selected, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(s.test, edges({{"a", "b"}, {"a", "d"}, {"b", "c"}}));
  EXPECT_EQ(s.train, edges({{"c", "d"}}));
  const SplitSpec d = split_graph(g, SplitMode::DFS, 0.5, 1, std::string("a"));
  EXPECT_EQ(d.selected, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.test, s.test);
  EXPECT_EQ(d.train, s.train);
}

TEST(Split, TriangleWithTailSeparatesModes) {
  // a-b, a-d, b-d, b-c, c-e, e-f; root a, 3 of 6 nodes.
  const PPIGraph g = parse_ppi_tsv(fixture("graphs/triangle_tail.tsv").string()).graph;
  const SplitSpec bfs = split_graph(g, SplitMode::BFS, 0.5, 1, std::string("a"));
  EXPECT_EQ(bfs.selected, (std::vector<std::string>{"a", "b", "d"}));
  EXPECT_EQ(bfs.test, edges({{"a", "b"}, {"a", "d"}, {"b", "d"}, {"b", "c"}}));
  EXPECT_EQ(bfs.train, edges({{"c", "e"}, {"e", "f"}}));
  const SplitSpec dfs = split_graph(g, SplitMode::DFS, 0.5, 1, std::string("a"));
  EXPECT_EQ(dfs.selected, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(dfs.test, edges({{"a", "b"}, {"a", "d"}, {"b", "d"}, {"b", "c"}, {"c", "e"}}));
  EXPECT_EQ(dfs.train, edges({{"e", "f"}}));
}

TEST(Split, TinyFractionOnPathSelectsRootOnly) {
  const PPIGraph g = parse_ppi_text("a\tb\t1\nb\tc\t1\nc\td\t1\nd\te\t1\n").graph;
  const SplitSpec s = split_graph(g, SplitMode::BFS, 1e-9, 3, std::string("c"));
  EXPECT_EQ(s.selected, (std::vector<std::string>{"c"}));
  EXPECT_EQ(s.test, edges({{"b", "c"}, {"c", "d"}}));
}

TEST(Split, ConfigErrors) {
  const PPIGraph g = parse_ppi_tsv(fixture("graphs/cycle4.tsv").string()).graph;
  EXPECT_THROW((void)split_graph(g, SplitMode::BFS, 0.0, 1), ConfigError);
  EXPECT_THROW((void)split_graph(g, SplitMode::BFS, 1.0, 1), ConfigError);
  EXPECT_THROW((void)split_graph(g, SplitMode::BFS, 0.9, 1), ConfigError);
  EXPECT_THROW((void)split_graph(g, SplitMode::BFS, 0.5, 1, std::string("zz")), ConfigError);
  EXPECT_THROW((void)parse_split_mode("walk"), ConfigError);
  EXPECT_EQ(parse_split_mode("dfs"), SplitMode::DFS);
}

TEST(Split, RandomGraphsDeterministicDisjointCoveringConnected) {
  numerics::Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    std::string text;
    const std::size_t n = 5 + rng.below(20);
    for (std::size_t i = 1; i < n; ++i)
      text += "v" + std::to_string(rng.below(i)) + "\tv" + std::to_string(i) + "\t1\n";
    for (std::size_t extra = rng.below(n); extra > 0; --extra) {
      const std::size_t a = rng.below(n), b = rng.below(n);
      if (a != b) text += "v" + std::to_string(a) + "\tv" + std::to_string(b) + "\t1\n";
    }
    const PPIGraph g = parse_ppi_text(text).graph;
    for (SplitMode mode : {SplitMode::BFS, SplitMode::DFS}) {
      const std::uint64_t seed = rng.next();
      const SplitSpec a = split_graph(g, mode, 0.3, seed);
      const SplitSpec b = split_graph(g, mode, 0.3, seed);
      EXPECT_EQ(a.root, b.root);
      EXPECT_EQ(a.selected, b.selected);
      EXPECT_EQ(a.test, b.test);
      EXPECT_EQ(a.train, b.train);
      std::set<EdgeKey> all(a.test.begin(), a.test.end());
      for (const auto& e : a.train) EXPECT_TRUE(all.insert(e).second) << "edge in both halves";
      EXPECT_EQ(all.size(), g.edges.size());
      EXPECT_EQ(a.selected.front(), a.root);
      EXPECT_TRUE(cfp::testing::connected(g, a.selected));
      EXPECT_EQ(a.selected.size(), static_cast<std::size_t>(std::ceil(0.3 * static_cast<double>(n))));
    }
  }
}

TEST(Pdb, TwoResidueFixtureEchoesCoordinates) {
  const PdbStructure s = parse_pdb(fixture("pdb/two_residue.pdb").string());
  ASSERT_EQ(s.chains.size(), 1u);
  const Chain& c = s.chains[0];
  EXPECT_EQ(c.id, 'A');
  ASSERT_EQ(c.residues.size(), 2u);
  EXPECT_EQ(c.residues[0].name, "ALA");
  EXPECT_EQ(c.residues[0].atom, AtomKind::CB);
  EXPECT_EQ(c.residues[0].xyz, (std::array<double, 3>{1.988, -0.773, -1.199}));
  EXPECT_EQ(c.residues[1].name, "GLY");
  EXPECT_EQ(c.residues[1].atom, AtomKind::CA);
  EXPECT_EQ(c.residues[1].xyz, (std::array<double, 3>{3.551, 1.412, 0.125}));
  EXPECT_EQ(c.sequence(), "AG");
  EXPECT_TRUE(s.skipped.empty());
}

TEST(Pdb, AltLocAndDuplicateAtoms) {
  const PdbStructure s = parse_pdb(fixture("pdb/altloc.pdb").string());
  ASSERT_EQ(s.chains.size(), 1u);
  const auto& r = s.chains[0].residues;
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].xyz, (std::array<double, 3>{1.0, 2.0, 3.0}));
  EXPECT_EQ(r[0].atom, AtomKind::CB);
  EXPECT_EQ(r[1].xyz, (std::array<double, 3>{4.5, 1.0, -0.5}));
}

TEST(Pdb, FirstModelChainsSkipsAndFallbacks) {
  const PdbStructure s = parse_pdb(fixture("pdb/multi.pdb").string());
  ASSERT_EQ(s.chains.size(), 2u);
  EXPECT_EQ(s.chains[0].id, 'A');
  EXPECT_EQ(s.chains[1].id, 'B');
  const auto& a = s.chains[0].residues;
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].index, 1);
  EXPECT_EQ(a[0].xyz, (std::array<double, 3>{0.5, 0.5, 0.5}));
  EXPECT_EQ(a[1].index, 3);
  EXPECT_EQ(a[1].atom, AtomKind::CA);
  EXPECT_EQ(a[1].xyz, (std::array<double, 3>{6.0, 0.0, 0.0}));
  EXPECT_EQ(s.chains[0].sequence(), "MV");
  const auto& b = s.chains[1].residues;
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].atom, AtomKind::CA);
  EXPECT_EQ(b[1].xyz, (std::array<double, 3>{14.2, 11.0, 10.5}));
  EXPECT_EQ(s.chains[1].sequence(), "GW");
  ASSERT_EQ(s.skipped.size(), 2u);
  EXPECT_NE(s.skipped[0].reason.find("LYS"), std::string::npos) << s.skipped[0].reason;
  EXPECT_EQ(s.skipped[0].line, 4u);
  EXPECT_EQ(s.skipped[1].line, 6u);
}

TEST(Pdb, MalformedAtomLinesNameTheLine) {
  const std::string good = atom_line(1, "CA", ' ', "ALA", 'A', 1, 1.0, 2.0, 3.0);
  EXPECT_EQ(parse_pdb_text(good).chains.at(0).residues.at(0).xyz, (std::array<double, 3>{1.0, 2.0, 3.0}));
  expect_format_error_at([&] { (void)parse_pdb_text(good + "ATOM      2  CA  GLY A   2       1.0\n", "bad.pdb"); },
                         "bad.pdb:2");
  std::string garbled = atom_line(2, "CA", ' ', "GLY", 'A', 2, 1.0, 2.0, 3.0);
  garbled.replace(32, 4, "x.yz");
  expect_format_error_at([&] { (void)parse_pdb_text(good + garbled, "bad.pdb"); }, "bad.pdb:2");
  const std::string backwards = atom_line(1, "CA", ' ', "ALA", 'A', 5, 0, 0, 0) +
                                atom_line(2, "CA", ' ', "GLY", 'A', 3, 0, 0, 0);
  expect_format_error_at([&] { (void)parse_pdb_text(backwards, "order.pdb"); }, "order.pdb:2");
}

TEST(Pdb, NeverCrashesOnRandomBytes) {
  numerics::Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::string text = atom_line(1, "CA", ' ', "ALA", 'A', 1, 1.0, 2.0, 3.0);
    const std::size_t flips = 1 + rng.below(6);
    for (std::size_t f = 0; f < flips; ++f) text[rng.below(text.size())] = static_cast<char>(32 + rng.below(95));
    try {
      (void)parse_pdb_text(text, "fuzz.pdb");
    } catch (const FormatError& e) {
      EXPECT_NE(std::string(e.what()).find("fuzz.pdb:"), std::string::npos);
    }
  }
}

TEST(Pdb, OneLetterCodes) {
  EXPECT_EQ(one_letter("TRP"), 'W');
  EXPECT_EQ(one_letter("MSE"), 'X');
}

TEST(ContactMap, ThresholdBoundary) {
  const std::vector<std::array<double, 3>> near = {{0, 0, 0}, {7.9, 0, 0}};
  const std::vector<std::array<double, 3>> far = {{0, 0, 0}, {8.1, 0, 0}};
  EXPECT_TRUE(build_contact_map(near)(0, 1));
  EXPECT_FALSE(build_contact_map(far)(0, 1));
  const std::vector<std::array<double, 3>> exact = {{0, 0, 0}, {8.0, 0, 0}};
  EXPECT_FALSE(build_contact_map(exact)(0, 1));
  EXPECT_FALSE(build_contact_map(near)(0, 0));
  EXPECT_THROW((void)build_contact_map(near, 0.0), ConfigError);
}

TEST(ContactMap, MatchesBruteForceOracle) {
  numerics::Rng rng(20);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<std::array<double, 3>> xyz(n);
    for (auto& p : xyz)
      for (double& v : p) v = 30.0 * rng.uniform();
    const double t = 4.0 + 8.0 * rng.uniform();
    const ContactMap m = build_contact_map(xyz, t, Conformation::Interaction);
    EXPECT_EQ(m.n, n);
    EXPECT_EQ(m.tag, Conformation::Interaction);
    EXPECT_EQ(m.bits, cfp::testing::brute_contacts(xyz, t));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(m(i, j), m(j, i));
  }
}

TEST(ContactMap, FromResiduesUsesChosenAtoms) {
  const PdbStructure s = parse_pdb(fixture("pdb/multi.pdb").string());
  const ContactMap m = build_contact_map(s.chains[0].residues, 6.0);
  EXPECT_EQ(m.n, 2u);
  // (0.5,0.5,0.5) to (6,0,0): sqrt(30.25 + 0.5) > 5.5 but < 6.
  EXPECT_TRUE(m(0, 1));
}

TEST(ContactMap, TextFormatAndRoundTrip) {
  const std::vector<std::array<double, 3>> one = {{1, 2, 3}};
  EXPECT_EQ(to_text(build_contact_map(one)), "n=1 threshold=8 tag=native\n0\n");
  numerics::Rng rng(21);
  std::vector<std::array<double, 3>> xyz(20);
  for (auto& p : xyz)
    for (double& v : p) v = 20.0 * rng.uniform();
  const ContactMap m = build_contact_map(xyz, 7.5, Conformation::Interaction);
  EXPECT_EQ(parse_contact_map_text(to_text(m)), m);
  cfp::testing::TempDir dir("cmap");
  write_contact_map(dir.str("x.cmap"), m);
  EXPECT_EQ(read_contact_map(dir.str("x.cmap")), m);
}

TEST(ContactMap, TamperedTextIsFormatError) {
  expect_format_error_at([] { (void)parse_contact_map_text("n=2 threshold=8 tag=native\n01\n1\n", "t.cmap"); },
                         "t.cmap:3");
  expect_format_error_at([] { (void)parse_contact_map_text("n=2 threshold=8 tag=native\n01\n", "t.cmap"); },
                         "t.cmap");
  expect_format_error_at([] { (void)parse_contact_map_text("n=2 threshold=8 tag=native\n02\n10\n", "t.cmap"); },
                         "t.cmap:2");
  expect_format_error_at([] { (void)parse_contact_map_text("n=2 threshold=8 tag=native\n11\n10\n", "t.cmap"); },
                         "t.cmap");
  expect_format_error_at([] { (void)parse_contact_map_text("size=2\n00\n00\n", "t.cmap"); }, "t.cmap:1");
}

TEST(Labels, SecondaryStructureAlphabets) {
  EXPECT_EQ(ss_class('H', 3), 0);
  EXPECT_EQ(ss_class('C', 3), 2);
  EXPECT_EQ(ss_class('-', 8), 7);
  EXPECT_EQ(ss_class('L', 3), 2);
  EXPECT_EQ(ss_class('G', 8), 1);
  EXPECT_EQ(ss_class('G', 3), -1);
  EXPECT_THROW((void)ss_class('H', 4), ConfigError);
  const auto labels = parse_ss_labels_text("p1\tHEC-\np2\tEE\n", 3);
  EXPECT_EQ(labels.at("p1"), (std::vector<int>{0, 1, 2, 2}));
  expect_format_error_at([] { (void)parse_ss_labels_text("p1\tHXC\n", 3, "ss.txt"); }, "ss.txt:1");
  expect_format_error_at([] { (void)parse_ss_labels_text("p1\tH\np1\tE\n", 3, "ss.txt"); }, "ss.txt:2");
}

TEST(Labels, Values) {
  const auto v = parse_values_text("a\t1.5\nb\t-2e-1\n");
  EXPECT_EQ(v.at("a"), 1.5);
  EXPECT_EQ(v.at("b"), -0.2);
  expect_format_error_at([] { (void)parse_values_text("a\tone\n", "v.tsv"); }, "v.tsv:1");
}

}  // namespace
