#include "doctest.h"

#include "gradcheck.hpp"
#include "simpdom/errors.hpp"
#include "simpdom/model.hpp"

using namespace simpdom;
using testing::tiny_config;
using testing::tiny_shape;
using testing::toy_batch;

namespace {

NodeFeatures sample_features() { return toy_batch()[0].first; }

}  // namespace

TEST_CASE("default dimensions") {
  TrainConfig config;
  nn::Rng rng(1);
  NodeTagger<double> model(config, {40, 30, 10, 4}, rng);
  NodeFeatures f = sample_features();
  CHECK(model.encode_node(f).size() == 684);
  CHECK(model.logits(f, false, nullptr).size() == 5);

  auto e_x = model.encode_text(f.node_word_ids, f.node_char_ids);
  CHECK(e_x.size() == 200);
  CHECK(model.encode_text({}, {}).isZero());
  CHECK(model.encode_text({}, {}).size() == 200);

  config.head = Head::kCross;
  NodeTagger<double> cross(config, {40, 30, 10, 4}, rng);
  CHECK(cross.logits(f, false, nullptr).size() == 5);
}

TEST_CASE("node and partner channels share the encoder") {
  nn::Rng rng(2);
  NodeTagger<double> model(tiny_config(Head::kIntra), tiny_shape(), rng);
  NodeFeatures f = sample_features();
  f.partner_word_ids = f.node_word_ids;
  f.partner_char_ids = f.node_char_ids;
  typename NodeTagger<double>::Pass pass;
  auto e_n = model.encode_node(f, &pass);
  const auto d = model.config().d_enc();
  CHECK(e_n.head(d) == e_n.segment(d, d));
}

TEST_CASE("cosine features") {
  nn::Rng rng(3);
  NodeTagger<double> model(tiny_config(Head::kIntra), tiny_shape(), rng);
  const auto M = tiny_shape().attributes;
  for (const auto& [f, label] : toy_batch()) {
    auto e_n = model.encode_node(f);
    auto cos = e_n.tail(M);
    CHECK((cos.array().abs() <= 1.0).all());
    if (f.partner_word_ids.empty()) CHECK(cos.isZero());
  }
}

TEST_CASE("inference is deterministic and normalized") {
  for (Head head : {Head::kIntra, Head::kCross}) {
    nn::Rng rng(4);
    NodeTagger<double> model(tiny_config(head), tiny_shape(), rng);
    auto f = sample_features();
    auto a = model.logits(f, false, nullptr);
    auto b = model.logits(f, false, nullptr);
    CHECK(a == b);
    auto p = nn::softmax(a);
    CHECK(std::abs(p.sum() - 1.0) < 1e-12);
    Eigen::Index arg_a = 0, arg_b = 0;
    p.maxCoeff(&arg_a);
    nn::softmax(nn::Vec<double>((a.array() + 5.0).matrix())).maxCoeff(&arg_b);
    CHECK(arg_a == arg_b);
  }
}

TEST_CASE("cross head is equivariant in the attribute rows") {
  nn::Rng rng(5);
  NodeTagger<double> model(tiny_config(Head::kCross), tiny_shape(), rng);
  auto f = sample_features();
  auto before = model.logits(f, false, nullptr);
  auto attr = model.params().at("attr_emb").mat();
  attr.row(0).swap(attr.row(2));
  auto after = model.logits(f, false, nullptr);
  CHECK(after(0) == doctest::Approx(before(2)).epsilon(1e-12));
  CHECK(after(2) == doctest::Approx(before(0)).epsilon(1e-12));
  CHECK(after(1) == doctest::Approx(before(1)).epsilon(1e-12));

  attr.row(1) = attr.row(0);
  auto same = model.logits(f, false, nullptr);
  CHECK(same(0) == same(1));
}

TEST_CASE("symmetric two-row cross head splits evenly") {
  nn::Rng rng(6);
  ModelShape shape = tiny_shape();
  shape.attributes = 1;
  NodeTagger<double> model(tiny_config(Head::kCross), shape, rng);
  auto attr = model.params().at("attr_emb").mat();
  attr.row(1) = attr.row(0);
  for (const char* name : {"head.0.weight", "head.0.bias", "head.1.weight", "head.1.bias"}) {
    auto& t = model.params().at(name);
    std::fill(t.value.begin(), t.value.end(), 0.0);
  }
  auto p = nn::softmax(model.logits(sample_features(), false, nullptr));
  CHECK(p(0) == 0.5);
  CHECK(p(1) == 0.5);
}

TEST_CASE("attribute table reset") {
  nn::Rng rng(7);
  NodeTagger<double> intra(tiny_config(Head::kIntra), tiny_shape(), rng);
  CHECK_THROWS_AS(intra.reset_attributes(2, rng), IncompatibleHeadError);

  NodeTagger<double> cross(tiny_config(Head::kCross), tiny_shape(), rng);
  const auto before = cross.params();
  cross.reset_attributes(2, rng);
  CHECK(cross.shape().attributes == 2);
  CHECK(cross.params().at("attr_emb").shape == std::vector<std::size_t>{3, 6});
  for (const auto& [name, t] : before.tensors()) {
    if (name == "attr_emb") continue;
    CHECK(cross.params().at(name).value == t.value);
  }
  CHECK(cross.logits(sample_features(), false, nullptr).size() == 3);
}

TEST_CASE("parameter validation") {
  nn::Rng rng(8);
  NodeTagger<double> model(tiny_config(Head::kIntra), tiny_shape(), rng);
  auto params = model.params();
  ModelShape other = tiny_shape();
  other.words = 11;
  CHECK_THROWS_AS(NodeTagger<double>(tiny_config(Head::kIntra), other, params), ConfigError);
  CHECK_NOTHROW(NodeTagger<double>(tiny_config(Head::kIntra), tiny_shape(), params));

  auto f = sample_features();
  f.node_word_ids[0] = 99;
  CHECK_THROWS_AS(model.logits(f, false, nullptr), IndexError);
  f = sample_features();
  f.position_bucket = 9;
  CHECK_THROWS_AS(model.logits(f, false, nullptr), IndexError);

  // Copies and moves keep working parameters.
  NodeTagger<double> copy = model;
  NodeTagger<double> moved = std::move(copy);
  CHECK(moved.logits(sample_features(), false, nullptr) ==
        model.logits(sample_features(), false, nullptr));
}

TEST_CASE("same seed, same initial parameters") {
  nn::Rng a(9), b(9);
  NodeTagger<float> x(tiny_config(Head::kIntra), tiny_shape(), a);
  NodeTagger<float> y(tiny_config(Head::kIntra), tiny_shape(), b);
  for (const auto& [name, t] : x.params().tensors()) CHECK(y.params().at(name).value == t.value);
  auto& pad = x.params().at("word_emb");
  CHECK(pad.mat().row(0).isZero());
  auto& fb = x.params().at("text_bilstm.fwd.bias");
  CHECK(fb.value[3] == 1.0f);  // forget gate block starts at H = 3
  CHECK(fb.value[0] == 0.0f);
}

TEST_CASE("end-to-end gradients") {
  for (Head head : {Head::kIntra, Head::kCross}) {
    for (bool fc : {true, false}) {
      auto rep = testing::grad_model(head, 11, {}, fc);
      INFO(to_string(head) << " fc=" << fc << " worst: " << rep.worst);
      CHECK(rep.checked > 100);
      CHECK(rep.max_error < 1e-3);
    }
  }
}
