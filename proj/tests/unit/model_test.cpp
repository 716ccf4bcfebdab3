#include <gtest/gtest.h>

#include <cmath>

#include "cfp/errors.hpp"
#include "cfp/model/checkpoint.hpp"
#include "cfp/model/heads.hpp"
#include "gradient_suite.hpp"
#include "helpers.hpp"
#include "reference_encoder.hpp"

namespace {

using namespace cfp;
using namespace cfp::model;
using numerics::bitwise_equal;
using model::bitwise_equal;
using numerics::max_abs_diff;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;
using tokenizer::encode;
using tokenizer::encode_exact;
using cfp::testing::tiny_config;

// Frozen model used by the golden cases: d = 4, one layer, std 0.5, seed 7.
Model golden_model() {
  ModelConfig c;
  c.d = 4;
  c.heads = 2;
  c.layers = 1;
  c.max_len = 8;
  c.init_std = 0.5;
  c.prompts = {"Seq", "IC"};
  return Model::create(c, 7);
}

void expect_close(const Tensor& got, const std::vector<double>& want, double tol = 1e-14) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "element " << i;
}

Tensor encode_hidden(const Model& m, const tokenizer::TokenSequence& seq, const PromptSelection& sel,
                     const EncodeOptions& options = {}) {
  Tape tape;
  Binding b(tape, m);
  return encode(b, seq, sel, options).hidden.value();
}

Tensor rows_of(const Tensor& t, std::size_t begin, std::size_t count) {
  Tensor out({count, t.cols()});
  for (std::size_t r = 0; r < count; ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) out(r, c) = t(begin + r, c);
  return out;
}

TEST(ModelConfig, Validation) {
  ModelConfig c = tiny_config();
  EXPECT_NO_THROW(c.validate());
  c.heads = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny_config();
  c.prompts = {"Seq", "Seq"};
  EXPECT_THROW(c.validate(), ConfigError);
  c.prompts = {"<mask>"};
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny_config();
  c.ppi_labels = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny_config();
  c.frozen_prompts = {"Nope"};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(ModelConfig, MapRoundTrip) {
  ModelConfig c = tiny_config(16, {"Seq", "IC", "Extra"});
  c.mask_mode = MaskMode::Literal;
  c.frozen_prompts = {"Seq"};
  c.ppi_labels = 7;
  c.lambda = 0.25;
  c.alpha = {{"ppi", 0.5}, {"contact", 2.0}};
  ConfigMap map;
  c.write_to(map);
  ConfigMap again;
  ModelConfig::from_map(map).write_to(again);
  EXPECT_EQ(map, again);
  EXPECT_EQ(parse_mask_mode("literal"), MaskMode::Literal);
  EXPECT_THROW((void)parse_mask_mode("soft"), ConfigError);
}

TEST(Model, RegistrationOrderAndShapes) {
  const Model m = Model::create(tiny_config(8), 1);
  const auto& p = m.parameters();
  EXPECT_EQ(p[0].name, "embed.token");
  EXPECT_EQ(p[0].value.shape(), (numerics::Shape{25, 8}));
  EXPECT_EQ(p[1].name, "embed.position");
  EXPECT_EQ(p[2].name, "embed.segment");
  EXPECT_EQ(p[2].value.shape(), (numerics::Shape{1, 8}));
  EXPECT_EQ(m.value("layer1.ffn.in.w").shape(), (numerics::Shape{8, 32}));
  EXPECT_EQ(m.value("head.contact.w").shape(), (numerics::Shape{16, 1}));
  EXPECT_EQ(m.param("prompt.IC").group, ParamGroup::Prompt);
  EXPECT_EQ(m.value("layer0.ln1.gain"), Tensor({1, 8}, 1.0));
  EXPECT_EQ(m.value("layer0.attn.q.b"), Tensor({1, 8}, 0.0));
  EXPECT_THROW((void)m.param("nope"), LookupError);
}

TEST(Model, CreateIsDeterministicInSeed) {
  EXPECT_TRUE(bitwise_equal(snapshot(Model::create(tiny_config(), 5)), snapshot(Model::create(tiny_config(), 5))));
  EXPECT_FALSE(bitwise_equal(snapshot(Model::create(tiny_config(), 5)), snapshot(Model::create(tiny_config(), 6))));
}

TEST(Model, AddPromptRejectsCollision) {
  Model m = Model::create(tiny_config(), 1);
  EXPECT_THROW(m.add_prompt("IC", 3), ConfigError);
  m.add_prompt("New", 3);
  EXPECT_TRUE(m.has_prompt("New"));
  EXPECT_EQ(m.config().prompts.back(), "New");
  EXPECT_THROW(m.set_prompt("New", Tensor({1, 3})), ShapeError);
}

TEST(Embed, ZeroTablesGiveZeros) {
  const Model m = Model::skeleton(tiny_config());
  Tape tape;
  Binding b(tape, m);
  EXPECT_EQ(embed(b, encode("ACDK", 8)).value(), Tensor({8, 8}, 0.0));
}

TEST(Embed, OneHotTokenTableIsolatesTokenEmbedding) {
  ModelConfig c = tiny_config(28);
  c.heads = 4;
  Model m = Model::skeleton(c);
  Tensor& tok = m.param("embed.token").value;
  for (std::size_t id = 0; id < 25; ++id) tok(id, id) = 1.0;
  Tape tape;
  Binding b(tape, m);
  const auto seq = encode("WAY", 7);
  const Tensor out = embed(b, seq).value();
  for (std::size_t i = 0; i < seq.ids.size(); ++i) {
    for (std::size_t j = 0; j < 28; ++j) EXPECT_EQ(out(i, j), j == static_cast<std::size_t>(seq.ids[i]) ? 1.0 : 0.0);
  }
}

TEST(Embed, OutOfRangeIdIsLookupError) {
  const Model m = Model::create(tiny_config(), 1);
  Tape tape;
  Binding b(tape, m);
  auto seq = encode_exact("AC");
  seq.ids[1] = 30;
  EXPECT_THROW((void)embed(b, seq), LookupError);
}

TEST(Embed, FrozenGolden) {
  const Model m = golden_model();
  Tape tape;
  Binding b(tape, m);
  expect_close(embed(b, encode_exact("MKV")).value(),
               {0.59514900045273311,  0.96756704864456211,  -0.93807229308868301, 0.34684916508819852,
                0.082024746432584603, -0.17346765140813633, -1.5335916298339869,  0.8203091505200435,
                1.0203581207401879,   0.59958642839606968,  -0.18630902853586706, 0.38882956243140171,
                -0.22956737708823377, -0.50061331967735301, -1.3966989801246128,  0.95222360562367991,
                0.65918954375046002,  0.36514865644923944,  -1.0132946890992278,  1.6730718767379864});
}

TEST(AttachPrompts, LayoutAndRoundTrip) {
  Tape tape;
  const Tensor xin = cfp::testing::random_tensor({3, 4}, 1);
  const Var x = tape.constant(xin);
  EXPECT_EQ(attach_prompts(x, {}).id(), x.id());
  const std::vector<Var> prompts = {tape.constant(Tensor::row({1, 1, 1, 1})), tape.constant(Tensor::row({2, 2, 2, 2}))};
  const Var joined = attach_prompts(x, prompts);
  ASSERT_EQ(joined.value().rows(), 5u);
  EXPECT_EQ(joined.value()(0, 0), 1.0);
  EXPECT_EQ(joined.value()(1, 3), 2.0);
  EXPECT_TRUE(bitwise_equal(numerics::slice_rows(joined, 2, 3).value(), xin));
  const std::vector<Var> bad = {tape.constant(Tensor::row({1, 1, 1}))};
  EXPECT_THROW((void)attach_prompts(x, bad), ShapeError);
}

TEST(BuildMask, Enumerations) {
  EXPECT_EQ(build_mask(0, 3).as_tensor(), Tensor({3, 3}, 1.0));
  EXPECT_EQ(build_mask(1, 2).as_tensor(), Tensor::matrix({{1, 0, 0}, {1, 1, 1}, {1, 1, 1}}));
  EXPECT_EQ(build_mask(2, 2).as_tensor(), Tensor::matrix({{1, 0, 0, 0}, {0, 1, 0, 0}, {1, 1, 1, 1}, {1, 1, 1, 1}}));
  EXPECT_THROW((void)build_mask(2, 0), ConfigError);
}

TEST(BuildMask, MatchesDefinitionForAllSmallSizes) {
  for (std::size_t m = 0; m <= 4; ++m) {
    for (std::size_t n = 1; n <= 4; ++n) {
      const AttentionMask mask = build_mask(m, n);
      for (std::size_t i = 1; i <= m + n; ++i) {
        for (std::size_t j = 1; j <= m + n; ++j) {
          const bool zero = (i <= m && j > m) || (i <= m && j <= m && i != j);
          EXPECT_EQ(mask(i - 1, j - 1), !zero);
        }
      }
    }
  }
}

TEST(MaskedAttention, AllOnesMaskMakesModesIdentical) {
  ModelConfig c = tiny_config();
  const Model additive = Model::create(c, 3);
  c.mask_mode = MaskMode::Literal;
  Model literal = Model::skeleton(c);
  for (auto& p : literal.parameters()) p.value = additive.value(p.name);
  const auto seq = encode_exact("MKVLAT");
  EXPECT_TRUE(bitwise_equal(encode_hidden(additive, seq, {}), encode_hidden(literal, seq, {})));
}

TEST(MaskedAttention, LiteralPromptRowKeepsOnlySelfTerm) {
  ModelConfig c = tiny_config();
  c.mask_mode = MaskMode::Literal;
  const Model m = Model::create(c, 4);
  std::vector<AttentionTrace> traces;
  EncodeOptions opt;
  opt.traces = &traces;
  (void)encode_hidden(m, encode_exact("MKVLAT"), {"Seq", "IC"}, opt);
  ASSERT_EQ(traces.size(), 2u);
  for (const auto& t : traces) {
    for (std::size_t h = 0; h < t.weights.size(); ++h) {
      for (std::size_t i = 0; i < 2; ++i) {
        const double a_ii = t.raw_softmax[h](i, i);
        for (std::size_t c2 = 0; c2 < t.values[h].cols(); ++c2) {
          EXPECT_DOUBLE_EQ(t.context[h](i, c2), a_ii * t.values[h](i, c2));
        }
      }
    }
  }
}

TEST(MaskedAttention, AdditivePromptRowSelfWeightIsExactlyOne) {
  const Model m = Model::create(tiny_config(), 4);
  std::vector<AttentionTrace> traces;
  EncodeOptions opt;
  opt.traces = &traces;
  (void)encode_hidden(m, encode("MKVLAT", 12), {"Seq", "IC"}, opt);
  for (const auto& t : traces) {
    for (const Tensor& w : t.weights) {
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < w.cols(); ++j) EXPECT_EQ(w(i, j), i == j ? 1.0 : 0.0);
      }
    }
  }
}

TEST(MaskedAttention, RowMassLiteralBelowOneAdditiveExactlyNormalised) {
  ModelConfig c = tiny_config();
  const Model additive = Model::create(c, 8);
  c.mask_mode = MaskMode::Literal;
  Model literal = Model::skeleton(c);
  for (auto& p : literal.parameters()) p.value = additive.value(p.name);
  const auto seq = encode("MKVLATW", 12);
  for (const Model* m : std::vector<const Model*>{&additive, &literal}) {
    std::vector<AttentionTrace> traces;
    EncodeOptions opt;
    opt.traces = &traces;
    (void)encode_hidden(*m, seq, {"Seq", "IC"}, opt);
    for (const auto& t : traces) {
      for (std::size_t h = 0; h < t.weights.size(); ++h) {
        const Tensor& w = t.weights[h];
        for (std::size_t i = 0; i < w.rows(); ++i) {
          double mass = 0.0;
          for (std::size_t j = 0; j < w.cols(); ++j) mass += w(i, j);
          if (m == &literal && i < 2) {
            EXPECT_NEAR(mass, t.raw_softmax[h](i, i), 1e-15);
            EXPECT_LT(mass, 1.0);
          } else {
            EXPECT_NEAR(mass, 1.0, 1e-12);
          }
        }
        // PAD keys receive nothing in either mode.
        for (std::size_t i = 0; i < w.rows(); ++i)
          for (std::size_t j = 2 + seq.length; j < w.cols(); ++j) EXPECT_EQ(w(i, j), 0.0);
      }
    }
  }
}

TEST(Encode, NoPromptsEqualsPlainReferenceEncoderBitwise) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Model m = Model::create(tiny_config(8), seed);
    for (const auto& seq : {encode_exact("MKVLATWY"), encode("ACD", 10), encode("QQRSTP", 8)}) {
      const auto want = cfp::testing::reference_encode(m, seq);
      const Tensor got = encode_hidden(m, seq, {});
      ASSERT_EQ(got.rows(), want.size());
      bool identical = true;
      for (std::size_t i = 0; i < want.size(); ++i)
        for (std::size_t j = 0; j < want[i].size(); ++j)
          identical = identical && std::bit_cast<std::uint64_t>(got(i, j)) == std::bit_cast<std::uint64_t>(want[i][j]);
      EXPECT_TRUE(identical) << "seed " << seed << " max diff "
                             << max_abs_diff(got, [&] {
                                  Tensor t(got.shape());
                                  for (std::size_t i = 0; i < want.size(); ++i)
                                    for (std::size_t j = 0; j < want[i].size(); ++j) t(i, j) = want[i][j];
                                  return t;
                                }());
    }
  }
}

TEST(Encode, PerturbingInputsLeavesPromptRowsUnchanged) {
  Model m = Model::create(tiny_config(), 11);
  const auto seq = encode_exact("MKVLAT");
  const Tensor before = encode_hidden(m, seq, {"Seq", "IC"});
  for (double& v : m.param("embed.token").value.data()) v += 0.37;
  m.param("embed.position").value(3, 2) += 2.0;
  const Tensor after = encode_hidden(m, seq, {"Seq", "IC"});
  EXPECT_TRUE(bitwise_equal(rows_of(before, 0, 2), rows_of(after, 0, 2)));
  EXPECT_GT(max_abs_diff(rows_of(before, 2, seq.length), rows_of(after, 2, seq.length)), 1e-3);
  // A different input altogether.
  EXPECT_TRUE(bitwise_equal(rows_of(encode_hidden(m, encode_exact("WWWWWWWW"), {"Seq", "IC"}), 0, 2), rows_of(after, 0, 2)));
}

// Gradient of a weighted sum over `rows` of the output with respect to every
// encoder and prompt parameter.
std::map<std::string, Tensor> output_gradients(const Model& m, const tokenizer::TokenSequence& seq,
                                               const PromptSelection& sel, std::size_t begin, std::size_t count) {
  Tape tape;
  Binding b(tape, m, [](const Parameter&) { return true; });
  const EncoderOutput out = encode(b, seq, sel);
  tape.backward(cfp::testing::weighted_sum(numerics::slice_rows(out.hidden, begin, count), 5));
  std::map<std::string, Tensor> grads;
  for (const auto& [name, var] : b.bound()) grads[name] = var.grad();
  return grads;
}

bool all_zero(const Tensor& t) {
  for (double v : t.data())
    if (v != 0.0) return false;
  return true;
}

TEST(Encode, OneWayFlowGradientIsExactlyZeroAdditive) {
  const Model m = Model::create(tiny_config(), 12);
  const auto grads = output_gradients(m, encode("MKVLAT", 10), {"Seq", "IC"}, 0, 2);
  for (const char* name : {"embed.token", "embed.position", "embed.segment"}) EXPECT_TRUE(all_zero(grads.at(name))) << name;
  EXPECT_FALSE(all_zero(grads.at("prompt.Seq")));
  EXPECT_FALSE(all_zero(grads.at("layer1.attn.v.w")));
}

TEST(Encode, PromptIsolationGradientIsExactlyZeroAdditive) {
  const Model m = Model::create(tiny_config(8, {"Seq", "IC", "X3"}), 13);
  const auto seq = encode_exact("MKVLAT");
  for (std::size_t i = 0; i < 3; ++i) {
    const auto grads = output_gradients(m, seq, {"Seq", "IC", "X3"}, i, 1);
    const std::vector<std::string> names = {"prompt.Seq", "prompt.IC", "prompt.X3"};
    for (std::size_t j = 0; j < 3; ++j) {
      if (i == j) {
        EXPECT_FALSE(all_zero(grads.at(names[j])));
      } else {
        EXPECT_TRUE(all_zero(grads.at(names[j]))) << "row " << i << " depends on " << names[j];
      }
    }
  }
}

// The literal mask normalises prompt rows over every key before M is
// applied, so the surviving self weight depends on the inputs and on the
// other prompts. The additive mode is the one that isolates prompt rows.
TEST(Encode, LiteralModeLeaksThroughNormalisation) {
  ModelConfig c = tiny_config();
  c.mask_mode = MaskMode::Literal;
  const Model m = Model::create(c, 12);
  const auto grads = output_gradients(m, encode_exact("MKVLAT"), {"Seq", "IC"}, 0, 1);
  EXPECT_FALSE(all_zero(grads.at("embed.token")));
  EXPECT_FALSE(all_zero(grads.at("prompt.IC")));
}

TEST(Encode, LiteralAndAdditiveDivergeOnSameWeights) {
  ModelConfig c = tiny_config();
  const Model additive = Model::create(c, 21);
  c.mask_mode = MaskMode::Literal;
  Model literal = Model::skeleton(c);
  for (auto& p : literal.parameters()) p.value = additive.value(p.name);
  const auto seq = encode_exact("MKVLAT");
  const Tensor a = encode_hidden(additive, seq, {"Seq", "IC"});
  const Tensor l = encode_hidden(literal, seq, {"Seq", "IC"});
  EXPECT_GT(max_abs_diff(rows_of(a, 0, 2), rows_of(l, 0, 2)), 1e-3);
  EXPECT_GT(max_abs_diff(rows_of(a, 2, seq.length), rows_of(l, 2, seq.length)), 1e-6);
}

TEST(Encode, PromptOrderDoesNotChangeInputRows) {
  const Model m = Model::create(tiny_config(8, {"A1", "B2", "C3"}), 14);
  const auto seq = encode("MKVLATQ", 12);
  EncodeOptions keep;
  keep.keep_selection_order = true;
  const Tensor base = encode_hidden(m, seq, {"A1", "B2", "C3"}, keep);
  const std::vector<PromptSelection> orders = {{"C3", "A1", "B2"}, {"B2", "C3", "A1"}, {"C3", "B2", "A1"}};
  for (const auto& order : orders) {
    const Tensor other = encode_hidden(m, seq, order, keep);
    EXPECT_LE(max_abs_diff(rows_of(base, 3, seq.ids.size()), rows_of(other, 3, seq.ids.size())), 1e-12);
  }
}

TEST(Encode, SelectionIsCanonicalisedAndChecked) {
  const Model m = Model::create(tiny_config(), 15);
  EXPECT_EQ(canonical_selection(m, {"IC", "Seq"}), (PromptSelection{"Seq", "IC"}));
  EXPECT_THROW((void)canonical_selection(m, {"Nope"}), LookupError);
  const auto seq = encode_exact("MKV");
  EXPECT_TRUE(bitwise_equal(encode_hidden(m, seq, {"IC", "Seq"}), encode_hidden(m, seq, {"Seq", "IC"})));
}

TEST(Encode, AttachingPromptsChangesInputRows) {
  for (std::uint64_t seed = 30; seed < 40; ++seed) {
    const Model m = Model::create(tiny_config(), seed);
    const auto seq = encode_exact("MKVLAT");
    const Tensor plain = encode_hidden(m, seq, {});
    const Tensor with = encode_hidden(m, seq, {"IC"});
    EXPECT_GT(max_abs_diff(plain, rows_of(with, 1, seq.length)), 0.0);
  }
}

TEST(Encode, GradientsAreBitReproducible) {
  const Model m = Model::create(tiny_config(), 16);
  const auto seq = encode("MKVLAT", 10);
  const auto a = output_gradients(m, seq, {"Seq", "IC"}, 0, 10);
  const auto b = output_gradients(m, seq, {"Seq", "IC"}, 0, 10);
  EXPECT_TRUE(bitwise_equal(a, b));
}

EncoderOutput constant_output(Tape& tape, const Tensor& hidden, std::size_t m, std::size_t length) {
  return EncoderOutput{tape.constant(hidden), m, hidden.rows() - m, length, {}};
}

TEST(Pool, AveragesRealResiduesOnly) {
  Tape tape;
  // prompt, <cls>, v, -v, <eos>, <pad>
  const Tensor h = Tensor::matrix({{9, 9}, {5, 5}, {1, -2}, {-1, 2}, {7, 7}, {3, 3}});
  EXPECT_EQ(pool(constant_output(tape, h, 1, 4)).value(), Tensor::row({0, 0}));
  const Tensor single = Tensor::matrix({{5, 5}, {1.5, -2.5}, {7, 7}});
  EXPECT_EQ(pool(constant_output(tape, single, 0, 3)).value(), Tensor::row({1.5, -2.5}));
  const Tensor empty = Tensor::matrix({{5, 5}, {7, 7}});
  EXPECT_THROW((void)pool(constant_output(tape, empty, 0, 2)), ContractError);
}

TEST(Pool, FrozenGolden) {
  const Model m = golden_model();
  Tape tape;
  Binding b(tape, m);
  expect_close(pool(encode(b, encode_exact("MKV"), {"Seq", "IC"})).value(),
               {-0.31626402486941207, 0.30311750597176784, -1.3702510220665525, 1.3833975409641965});
}

TEST(PairScore, ZeroVectorGivesBias) {
  Model m = Model::create(tiny_config(), 17);
  m.param("head.ppi.b").value = Tensor::row({0.75});
  Tape tape;
  Binding b(tape, m);
  const Var zero = tape.constant(Tensor({1, 8}));
  const Var h = tape.constant(cfp::testing::random_tensor({1, 8}, 3));
  EXPECT_EQ(pair_score(b, zero, h).value(), Tensor::row({0.75}));
  EXPECT_THROW((void)pair_score(b, zero, tape.constant(Tensor({1, 4}))), ShapeError);
}

TEST(PairScore, SymmetricExactlySevenTypes) {
  ModelConfig c = tiny_config();
  c.ppi_labels = 7;
  const Model m = Model::create(c, 18);
  for (std::uint64_t s = 0; s < 20; ++s) {
    Tape tape;
    Binding b(tape, m);
    const Var p = tape.constant(cfp::testing::random_tensor({1, 8}, 100 + s));
    const Var q = tape.constant(cfp::testing::random_tensor({1, 8}, 200 + s));
    const Tensor pq = pair_score(b, p, q).value();
    EXPECT_EQ(pq.cols(), 7u);
    EXPECT_TRUE(bitwise_equal(pq, pair_score(b, q, p).value()));
  }
}

TEST(PairScore, FrozenGolden) {
  const Model m = golden_model();
  Tape tape;
  Binding b(tape, m);
  const Var p = pool(encode(b, encode_exact("MKV"), {}));
  const Var q = pool(encode(b, encode_exact("WY"), {"IC"}));
  expect_close(pair_score(b, p, q).value(), {0.73689514410193391});
}

TEST(ContactLogits, SymmetricAndCollapsesOnEqualRows) {
  const Model m = Model::create(tiny_config(), 19);
  Tape tape;
  Binding b(tape, m);
  const Tensor c = contact_logits(b, encode(b, encode_exact("MKVLATWY"), {"Seq"})).value();
  ASSERT_EQ(c.shape(), (numerics::Shape{8, 8}));
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(c(i, j), c(j, i));

  Tensor same({5, 8});
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t k = 0; k < 8; ++k) same(r, k) = 0.1 * static_cast<double>(k) - 0.3;
  const Tensor flat = contact_logits(b, constant_output(tape, same, 0, 5)).value();
  for (double v : flat.data()) EXPECT_EQ(v, flat[0]);
}

TEST(ContactLogits, FrozenGolden) {
  const Model m = golden_model();
  Tape tape;
  Binding b(tape, m);
  expect_close(contact_logits(b, encode(b, encode_exact("MKV"), {"Seq"})).value(),
               {-0.5519457876965006, -0.5363285200982425, -0.53151729141772741, -0.5363285200982425,
                -0.53984036648101663, -0.51953015613971765, -0.53151729141772741, -0.51953015613971765,
                -0.53830100295550487});
}

TEST(Heads, ZeroWeightsGiveBias) {
  Model m = Model::create(tiny_config(), 20);
  m.param("head.ss8.w").value.fill(0.0);
  m.param("head.ss8.b").value = Tensor::row({1, 2, 3, 4, 5, 6, 7, 8});
  m.param("head.regress.b").value = Tensor::scalar(-0.5);
  Tape tape;
  Binding b(tape, m);
  const Tensor logits = token_classify(b, encode(b, encode("MKV", 8), {"IC"}), 8).value();
  ASSERT_EQ(logits.shape(), (numerics::Shape{3, 8}));
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(logits(r, k), static_cast<double>(k + 1));
  EXPECT_EQ(sequence_regress(b, tape.constant(Tensor({1, 8}))).value().item(), -0.5);
  EXPECT_THROW((void)token_classify(b, encode(b, encode_exact("MKV"), {}), 5), ContractError);
}

TEST(Heads, FrozenGoldenTokenClassAndRegression) {
  const Model m = golden_model();
  Tape tape;
  Binding b(tape, m);
  expect_close(token_classify(b, encode(b, encode_exact("MKV"), {"Seq", "IC"}), 3).value(),
               {-0.93262280371660811, -0.95999350900507419, -1.4726996451848628, -0.95125560015176236,
                -1.0961158197573813, -1.4099053354143922, -0.90906330669651625, -0.9318007777200622,
                -1.5065691649020558});
  expect_close(sequence_regress(b, pool(encode(b, encode_exact("MKV"), {"IC"}))).value(), {0.4401962303801803});
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const Model m = Model::create(tiny_config(), 22);
  Checkpoint ckpt;
  ckpt.config_text = "model.d=8\n";
  ckpt.config_hash = fnv1a64(ckpt.config_text);
  ckpt.step = 12;
  append_model(ckpt, m);
  const std::string bytes = serialize_checkpoint(ckpt);
  EXPECT_EQ(bytes.substr(0, 4), "CFPT");
  const Checkpoint back = deserialize_checkpoint(bytes);
  EXPECT_EQ(back.config_text, ckpt.config_text);
  EXPECT_EQ(back.config_hash, ckpt.config_hash);
  EXPECT_EQ(back.step, 12u);
  ASSERT_EQ(back.tensors.size(), m.parameters().size());
  for (std::size_t i = 0; i < back.tensors.size(); ++i) {
    EXPECT_EQ(back.tensors[i].name, m.parameters()[i].name);
    EXPECT_TRUE(bitwise_equal(back.tensors[i].value, m.parameters()[i].value));
  }
  EXPECT_EQ(serialize_checkpoint(back), bytes);

  cfp::testing::TempDir dir("ckpt");
  write_checkpoint(dir.str("a.cfpt"), ckpt);
  EXPECT_EQ(cfp::testing::slurp(dir.path() / "a.cfpt"), bytes);
  EXPECT_EQ(serialize_checkpoint(read_checkpoint(dir.str("a.cfpt"))), bytes);
  EXPECT_THROW((void)read_checkpoint(dir.str("missing.cfpt")), DataError);
}

TEST(Checkpoint, CorruptInputIsFormatError) {
  const Model m = Model::create(tiny_config(), 23);
  Checkpoint ckpt;
  append_model(ckpt, m);
  const std::string bytes = serialize_checkpoint(ckpt);
  EXPECT_THROW((void)deserialize_checkpoint("XXXX" + bytes.substr(4)), FormatError);
  EXPECT_THROW((void)deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), FormatError);
  std::string wrong_version = bytes;
  wrong_version[4] = 9;
  EXPECT_THROW((void)deserialize_checkpoint(wrong_version), FormatError);
}

TEST(Checkpoint, LoadModelValidatesAgainstConfig) {
  const ModelConfig c = tiny_config();
  const Model m = Model::create(c, 24);
  Checkpoint ckpt;
  ConfigMap map;
  c.write_to(map);
  ckpt.config_text = to_config_text(map);
  append_model(ckpt, m);
  EXPECT_TRUE(bitwise_equal(snapshot(load_model(ckpt)), snapshot(m)));

  Checkpoint shape_bad = ckpt;
  shape_bad.tensors[0].value = Tensor({25, 4});
  EXPECT_THROW((void)load_model(shape_bad), FormatError);
  Checkpoint missing = ckpt;
  missing.tensors.pop_back();
  EXPECT_THROW((void)load_model(missing), FormatError);
}

TEST(GradientSuite, FullEncoderAdditive) {
  const auto c = cfp::testing::encoder_gradient_case(MaskMode::Additive);
  EXPECT_LT(c.result.max_rel_error, 1e-4) << "input " << c.result.worst_input << " index " << c.result.worst_index
                                          << " analytic " << c.result.analytic << " numeric " << c.result.numeric;
  EXPECT_GT(c.result.checked, 2000u);
}

TEST(GradientSuite, FullEncoderLiteral) {
  const auto c = cfp::testing::encoder_gradient_case(MaskMode::Literal);
  EXPECT_LT(c.result.max_rel_error, 1e-4) << "input " << c.result.worst_input << " index " << c.result.worst_index;
}

}  // namespace
