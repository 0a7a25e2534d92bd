#include <doctest.h>

#include <cmath>
#include <random>

#include "fairstyle/core/error.hpp"
#include "fairstyle/synth/synthetic.hpp"
#include "fairstyle/synth/text_backend.hpp"
#include "fairstyle/textclip/textclip.hpp"
#include "support.hpp"

using namespace fairstyle;
using namespace fairstyle::textclip;

TEST_CASE("prompt pairs") {
  CHECK_THROWS_AS(PromptPair("", "b"), ConfigError);
  CHECK_THROWS_AS(PromptPair("a", ""), ConfigError);
  CHECK_THROWS_AS(PromptPair("a", "a"), ConfigError);
  const PromptPair p("a black person", "a white person");
  CHECK(p.swapped().positive() == "a white person");
  CHECK(p.swapped().negative() == "a black person");
}

TEST_CASE("cosine distance") {
  const std::vector<double> a{1, 0}, b{0.6, 0.8}, c{0, 1};
  CHECK(cosine_distance(a, b) == doctest::Approx(0.4));
  CHECK(cosine_distance(a, c) == doctest::Approx(1.0));
  CHECK(cosine_distance(a, a) == 0.0);
  CHECK_THROWS_AS(cosine_distance(a, std::vector<double>{1, 0, 0}), AdapterError);
  CHECK_THROWS_AS(cosine_distance(a, std::vector<double>{2, 0}), AdapterError);
}

TEST_CASE("clip label examples") {
  const std::vector<double> img{1, 0}, pos{0.6, 0.8}, neg{0, 1};
  const auto d = decide(img, pos, neg);
  CHECK(d.label);
  CHECK(d.positive_distance == doctest::Approx(0.4));
  CHECK(d.negative_distance == doctest::Approx(1.0));
  CHECK(decision_score(d.positive_distance, d.negative_distance) > 0.5);
  CHECK(decision_score(0.4, 1.0) == doctest::Approx(1.0 / (1.0 + std::exp(-0.6))));

  const auto same = decide(pos, pos, neg);
  CHECK(same.label);
  CHECK(same.positive_distance == 0.0);

  const double r = std::sqrt(0.5);
  const auto tie = decide(std::vector<double>{r, r}, std::vector<double>{1, 0}, std::vector<double>{0, 1});
  CHECK_FALSE(tie.label);
}

TEST_CASE("adapter over a mock backend") {
  auto backend = std::make_shared<const testing::MockBackend>(
      std::map<std::string, Embedding, std::less<>>{{"pos", {0.6, 0.8}}, {"neg", {0, 1}}, {"twin", {0.6, 0.8}}});
  const auto adapter = as_classifier_adapter(backend, PromptPair("pos", "neg"), "attr");
  const Image img{2, 1, {1.0f, 0.0f}};
  CHECK(adapter->score(img) > 0.5);
  CHECK(adapter->label(adapter->score(img)));
  CHECK(adapter->attribute() == "attr");
  CHECK(as_classifier_adapter(backend, PromptPair("pos", "neg"))->attribute() == "pos");

  // identical prompt embeddings: exactly one half, label 0
  const auto twin = as_classifier_adapter(backend, PromptPair("pos", "twin"));
  CHECK(twin->score(img) == 0.5);
  CHECK_FALSE(twin->label(twin->score(img)));

  CHECK_THROWS_AS(as_classifier_adapter(backend, PromptPair("pos", "missing")), AdapterError);
}

TEST_CASE("thresholded score reproduces the hard decision") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20000; ++i) {
    const std::size_t dim = 2 + i % 6;
    auto e_img = testing::random_unit(rng, dim);
    auto e_pos = testing::random_unit(rng, dim);
    auto e_neg = (i % 50 == 0) ? e_pos : testing::random_unit(rng, dim);
    const auto d = decide(e_img, e_pos, e_neg);
    const double s = decision_score(d.positive_distance, d.negative_distance);
    CHECK((s > 0.5) == d.label);
    const auto flipped = decide(e_img, e_neg, e_pos);
    if (d.positive_distance != d.negative_distance) CHECK(flipped.label != d.label);
  }
}

TEST_CASE("near ties keep their decision") {
  CHECK(decision_score(0.3, 0.3 + 1e-17) == 0.5);  // distances equal in double
  const double a = 0.3;
  const double b = std::nextafter(a, 1.0);
  CHECK(decision_score(a, b) > 0.5);
  CHECK(decision_score(b, a) < 0.5);
}

TEST_CASE("decision is rotation invariant") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> angle(0, 6.283185307179586);
  for (int i = 0; i < 2000; ++i) {
    auto img = testing::random_unit(rng, 3);
    auto pos = testing::random_unit(rng, 3);
    auto neg = testing::random_unit(rng, 3);
    const double t = angle(rng);
    auto rot = [&](const std::vector<double>& v) {
      return std::vector<double>{std::cos(t) * v[0] - std::sin(t) * v[1], std::sin(t) * v[0] + std::cos(t) * v[1], v[2]};
    };
    const auto d = decide(img, pos, neg);
    if (std::abs(d.positive_distance - d.negative_distance) < 1e-9) continue;
    CHECK(decide(rot(img), rot(pos), rot(neg)).label == d.label);
  }
}

TEST_CASE("synthetic text backend agrees with the planted classifier") {
  const auto model = synth::make_synthetic(synth::biased_single_spec(0.8));
  auto backend = std::make_shared<const synth::SyntheticTextBackend>(model);
  const auto& attr = model.spec.attributes[0];
  REQUIRE(attr.prompts.has_value());
  const auto clip = as_classifier_adapter(backend, PromptPair(attr.prompts->positive, attr.prompts->negative), "attr");
  const auto& planted = model.classifier("attr");
  const auto batch = generate_batch(*model.generator, 2000, nullptr, 3);
  std::size_t agree = 0;
  for (const auto& img : batch.images) {
    agree += clip->label(clip->score(img)) == planted.label(planted.score(img));
    const auto e = backend->embed_image(img);
    double norm = 0.0;
    for (double v : e) norm += v * v;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(agree == batch.images.size());
  CHECK_THROWS_AS(backend->embed_text("not a prompt"), AdapterError);
}
