#include <doctest.h>

#include "fairstyle/core/error.hpp"
#include "fairstyle/discovery/discovery.hpp"
#include "fairstyle/synth/synthetic.hpp"
#include "support.hpp"

using namespace fairstyle;
using namespace fairstyle::discovery;

namespace {

std::vector<ChannelId> ids(const std::vector<ChannelScore>& scores) {
  std::vector<ChannelId> out;
  for (const auto& s : scores) out.push_back(s.channel);
  return out;
}

}  // namespace

TEST_CASE("exclusion rules") {
  const StyleLayout layout(synth::stylegan_like_layout(7, 8));
  const ExclusionRules rules;
  CHECK(is_excluded(layout, {1, 0}, rules));   // tRGB
  CHECK(is_excluded(layout, {4, 0}, rules));   // tRGB of block 1
  CHECK_FALSE(is_excluded(layout, {2, 0}, rules));
  CHECK_FALSE(is_excluded(layout, {6, 7}, rules));  // block 2
  CHECK(is_excluded(layout, {8, 0}, rules));   // block 3, one of the last four
  CHECK(is_excluded(layout, {19, 0}, rules));
  // blocks 0..2 remain: conv layers 0, 2, 3, 5, 6
  CHECK(candidate_channels(layout, rules).size() == 5 * 8);
  CHECK(candidate_channels(layout, {false, 0}).size() == layout.total_channels());
  CHECK(candidate_channels(layout, {true, 0}).size() == (1 + 6 * 2) * 8);
  CHECK(candidate_channels(layout, {true, 7}).empty());
}

TEST_CASE("config validation") {
  DiscoveryConfig c;
  CHECK_NOTHROW(c.validate());
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.perturbation = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.exclusions.exclude_last_blocks = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("channel scores on the synthetic oracle") {
  const auto model = synth::make_synthetic(synth::biased_single_spec(0.5));
  const auto& gen = *model.generator;
  const auto& cls = model.classifier("attr");
  const auto codes = sample_codes(gen, 128, 1);

  const auto planted = score_channel(gen, cls, codes, {2, 5}, 10.0);
  CHECK(planted.score == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(score_channel(gen, cls, codes, {2, 0}, 10.0).score == 0.0);
  CHECK(score_channel(gen, cls, codes, {2, 5}, -10.0).score == planted.score);
  const auto spurious = score_channel(gen, cls, codes, {3, 1}, 10.0);
  CHECK(spurious.score > 0.0);
  CHECK(spurious.score < planted.score);

  CHECK_THROWS_AS(score_channel(gen, cls, codes, {1, 0}, 10.0), ConfigError);
  CHECK_THROWS_AS(score_channel(gen, cls, codes, {8, 0}, 10.0), ConfigError);
  CHECK_THROWS_AS(score_channel(gen, cls, std::span<const StyleCode>{}, {2, 5}, 10.0), ConfigError);
}

TEST_CASE("planted channel is found for every seed") {
  const auto model = synth::make_synthetic(synth::biased_single_spec(0.8));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    DiscoveryConfig c;
    c.seed = seed;
    const auto r = find_controlling_channel(*model.generator, model.classifier("attr"), c);
    CHECK(r.best == ChannelId{2, 5});
    CHECK(r.ranking.front().channel == r.best);
    const auto layout = model.generator->layout();
    for (const auto& s : r.ranking) {
      CHECK_FALSE(is_excluded(*layout, s.channel, c.exclusions));
      CHECK(s.score >= 0.0);
    }
    CHECK(r.ranking.size() == candidate_channels(*layout, c.exclusions).size());
  }
}

TEST_CASE("stronger planted channel ranks first") {
  auto spec = synth::biased_single_spec(0.5);
  spec.attributes[0].spurious = {{{3, 1}, 0.4}};
  const auto model = synth::make_synthetic(spec);
  const auto r = find_controlling_channel(*model.generator, model.classifier("attr"), {});
  CHECK(r.ranking[0].channel == ChannelId{2, 5});
  CHECK(r.ranking[1].channel == ChannelId{3, 1});
  CHECK(r.ranking[0].score > r.ranking[1].score);
}

TEST_CASE("positive score scaling keeps the ranking") {
  const auto model = synth::make_synthetic(synth::biased_single_spec(0.7));
  const auto& cls = model.classifier("attr");
  DiscoveryConfig c;
  c.seed = 3;
  const auto base = find_controlling_channel(*model.generator, cls, c);
  const testing::ScaledClassifier half(cls, 0.5);
  const auto scaled = find_controlling_channel(*model.generator, half, c);
  CHECK(ids(scaled.ranking) == ids(base.ranking));
  for (std::size_t i = 0; i < base.ranking.size(); ++i) CHECK(scaled.ranking[i].score == 0.5 * base.ranking[i].score);
  const testing::ScaledClassifier odd(cls, 0.3);
  const auto r = find_controlling_channel(*model.generator, odd, c);
  CHECK(r.best == base.best);
  CHECK(ids(r.ranking) == ids(base.ranking));
}

TEST_CASE("ties break by layer then channel") {
  std::vector<ChannelScore> s = {{{5, 2}, 0.5}, {{2, 9}, 0.5}, {{2, 3}, 0.5}, {{7, 0}, 0.9}, {{0, 1}, 0.1}};
  rank(s);
  CHECK(ids(s) == std::vector<ChannelId>{{7, 0}, {2, 3}, {2, 9}, {5, 2}, {0, 1}});

  // a classifier blind to every channel leaves all scores at zero
  const auto model = synth::make_synthetic(synth::biased_single_spec(0.5));
  const testing::LambdaClassifier flat("flat", [](const Image&) { return 0.25; });
  const auto r = find_controlling_channel(*model.generator, flat, {});
  CHECK(r.best == ChannelId{0, 0});
  CHECK(std::is_sorted(r.ranking.begin(), r.ranking.end(),
                       [](const ChannelScore& a, const ChannelScore& b) { return a.channel < b.channel; }));
}

TEST_CASE("all channels excluded") {
  const auto model = synth::make_synthetic(synth::biased_single_spec(0.5));
  DiscoveryConfig c;
  c.exclusions.exclude_last_blocks = 100;
  CHECK_THROWS_AS(find_controlling_channel(*model.generator, model.classifier("attr"), c), ConfigError);
}

TEST_CASE("parallel sweep equals the serial sweep") {
  const auto model = synth::make_synthetic(synth::random_discovery_spec(4));
  const auto& gen = *model.generator;
  const auto& cls = *model.classifiers[0];
  const auto codes = sample_codes(gen, 64, 2);
  const auto cands = candidate_channels(*gen.layout(), {});
  const auto par = sweep(gen, cls, codes, cands, 10.0);
  const auto ser = discovery::reference::sweep(gen, cls, codes, cands, 10.0);
  CHECK(par == ser);

  // a classifier that forbids concurrent calls takes the serial path
  const testing::LambdaClassifier serial("serial", [&](const Image& img) { return cls.score(img); }, false);
  CHECK(sweep(gen, serial, codes, cands, 10.0) == ser);
}

TEST_CASE("random specs recover the planted channel") {
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    const auto spec = synth::random_discovery_spec(seed);
    const auto model = synth::make_synthetic(spec);
    DiscoveryConfig c;
    c.seed = seed;
    const auto r = find_controlling_channel(*model.generator, *model.classifiers[0], c);
    CHECK(r.best == spec.attributes[0].causal);
  }
}

TEST_CASE("discovery json") {
  const auto model = synth::make_synthetic(synth::biased_single_spec(0.8));
  const auto r = find_controlling_channel(*model.generator, model.classifier("attr"), {});
  const auto j = to_json(r);
  CHECK(j["best"]["layer"] == 2);
  CHECK(j["best"]["channel"] == 5);
  CHECK(j["ranking"].size() == r.ranking.size());
  CHECK(j["ranking"][0]["score"].get<double>() == r.ranking[0].score);
}
