#include <doctest.h>

#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "fairstyle/audit/audit.hpp"
#include "fairstyle/core/error.hpp"
#include "fairstyle/debias/optimizer.hpp"
#include "fairstyle/synth/synthetic.hpp"
#include "support.hpp"

using namespace fairstyle;
using namespace fairstyle::synth;

namespace {

double label_rate(const SyntheticModel& model, std::size_t attribute, const FairStyleTensor* t, std::size_t n,
                  std::uint64_t seed) {
  const ClassifierAdapter* set[] = {model.classifiers[attribute].get()};
  const auto batch = generate_batch(*model.generator, n, t, seed);
  const auto labels = threshold_scores(set, score_batch(set, batch.images));
  double sum = 0.0;
  for (auto v : labels.values) sum += v;
  return sum / static_cast<double>(n);
}

std::vector<double> joint_rates(const SyntheticModel& model, const FairStyleTensor* t, std::size_t n, std::uint64_t seed) {
  const auto set = model.classifier_set();
  const auto batch = generate_batch(*model.generator, n, t, seed);
  const auto labels = audit::label_batch(set, batch.images);
  return audit::empirical_distribution(labels, labels.attributes).probabilities;
}

}  // namespace

TEST_CASE("planted base rate") {
  const auto model = make_synthetic(biased_single_spec(0.8));
  CHECK(model.oracle->base_rate(0) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(std::abs(label_rate(model, 0, nullptr, 100000, 1) - 0.8) < 0.004);
}

TEST_CASE("balancing offset matches the normal quantile") {
  // v = s(2,5) + 0.15 s(3,1) - 0.1 s(5,7) with unit normal channels
  const double sd = std::sqrt(1.0 + 0.15 * 0.15 + 0.1 * 0.1);
  const boost::math::normal_distribution<double> unit;
  for (double rate : {0.2, 0.5, 0.8, 0.95}) {
    const auto model = make_synthetic(biased_single_spec(rate));
    const double t = sd * boost::math::quantile(unit, 1.0 - rate);
    CHECK(model.oracle->readout_std(0) == doctest::Approx(sd).epsilon(1e-12));
    CHECK(model.oracle->threshold(0) == doctest::Approx(t).epsilon(1e-10));
    CHECK(model.oracle->balancing_offset(0) == doctest::Approx(t).epsilon(1e-10));
    CHECK(model.oracle->label_rate_with_offset(0, t) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("balancing offset balances the labels") {
  const auto model = make_synthetic(biased_single_spec(0.8));
  const FairStyleTensor t = ScalarBias{{2, 5}, model.oracle->balancing_offset(0)};
  const double rate = label_rate(model, 0, &t, 100000, 2);
  CHECK(std::abs(rate - 0.5) < 0.005);
  CHECK(audit::kl_to_uniform(std::vector{rate, 1 - rate}) < 1e-3);
}

TEST_CASE("independent attributes factorize") {
  const auto model = make_synthetic(independent_pair_spec(0.8, 0.7));
  const auto cells = model.oracle->joint_cells(0, 1);
  CHECK(cells[3] == doctest::Approx(0.8 * 0.7).epsilon(1e-9));
  CHECK(cells[0] == doctest::Approx(0.2 * 0.3).epsilon(1e-9));
  const auto p = joint_rates(model, nullptr, 50000, 3);
  for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(p[c] - cells[c]) < 0.01);
}

TEST_CASE("correlated pair reproduces the requested cells") {
  const std::array<double, 4> target = {0.45, 0.35, 0.15, 0.05};
  const auto model = make_synthetic(correlated_pair_spec(target));
  const auto cells = model.oracle->joint_cells(0, 1);
  for (std::size_t c = 0; c < 4; ++c) CHECK(cells[c] == doctest::Approx(target[c]).epsilon(1e-6));
  const auto p = joint_rates(model, nullptr, 50000, 4);
  for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(p[c] - target[c]) < 0.01);
  CHECK(model.oracle->base_rate(0) == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(model.oracle->base_rate(1) == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("oracle decorrelating tensor balances the joint") {
  const auto model = make_synthetic(correlated_pair_spec({0.45, 0.35, 0.15, 0.05}));
  const auto stats_a = debias::compute_channel_stats(*model.generator, {2, 5}, 1000, 9);
  const auto stats_b = debias::compute_channel_stats(*model.generator, {5, 11}, 1000, 9);
  const FairStyleTensor t = model.oracle->decorrelating_tensor(0, 1, stats_a, stats_b);
  const auto p = joint_rates(model, &t, 50000, 5);
  for (double v : p) CHECK(std::abs(v - 0.25) < 0.012);
}

TEST_CASE("oracle base rates match sampling for every preset") {
  const std::vector<SyntheticSpec> specs = {biased_single_spec(0.3), independent_pair_spec(0.6, 0.9),
                                            correlated_pair_spec({0.3, 0.2, 0.1, 0.4}), random_discovery_spec(7)};
  for (const auto& spec : specs) {
    const auto model = make_synthetic(spec);
    for (std::size_t a = 0; a < spec.attributes.size(); ++a) {
      const double p = model.oracle->base_rate(a);
      CHECK(p == doctest::Approx(spec.attributes[a].base_rate).epsilon(1e-9));
      const double se = std::sqrt(p * (1 - p) / 40000.0);
      CHECK(std::abs(label_rate(model, a, nullptr, 40000, 6 + a) - p) < 4.5 * se);
    }
  }
}

TEST_CASE("random discovery specs satisfy their constraints") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto spec = random_discovery_spec(seed);
    const StyleLayout layout(spec.layers);
    CHECK(layout.layer_count() >= 6);
    for (const auto& l : spec.layers) CHECK(l.width >= 64);
    const auto& a = spec.attributes.at(0);
    double largest = 0.0;
    for (const auto& s : a.spurious) largest = std::max(largest, std::abs(s.weight));
    CHECK(a.causal_weight >= 3.0 * largest);
    CHECK(layout.layer(a.causal.layer).kind == LayerKind::conv);
    CHECK(layout.layer(a.causal.layer).block <= layout.last_block() - 4);
  }
}

TEST_CASE("spec validation") {
  auto bad_rate = biased_single_spec(0.8);
  bad_rate.attributes[0].base_rate = 1.0;
  CHECK_THROWS_AS(make_synthetic(bad_rate), ConfigError);

  auto trgb = biased_single_spec(0.8);
  trgb.attributes[0].causal = {1, 0};
  CHECK_THROWS_AS(make_synthetic(trgb), ConfigError);

  auto late = biased_single_spec(0.8);
  late.attributes[0].causal = {9, 0};
  CHECK_THROWS_AS(make_synthetic(late), ConfigError);

  auto outside = biased_single_spec(0.8);
  outside.attributes[0].causal = {2, 999};
  CHECK_THROWS_AS(make_synthetic(outside), Error);

  auto coupling = independent_pair_spec(0.5, 0.5);
  coupling.attributes[1].couplings = {{"nope", 1.0}};
  CHECK_THROWS_AS(make_synthetic(coupling), ConfigError);

  auto dup = independent_pair_spec(0.5, 0.5);
  dup.attributes[1].name = dup.attributes[0].name;
  CHECK_THROWS_AS(make_synthetic(dup), ConfigError);
}

TEST_CASE("spec json round trip") {
  for (const auto& spec : {biased_single_spec(0.8), correlated_pair_spec({0.45, 0.35, 0.15, 0.05}),
                           random_discovery_spec(3)}) {
    const auto j = to_json(spec);
    const auto back = spec_from_json(j);
    CHECK(to_json(back) == j);
    const auto a = make_synthetic(spec);
    const auto b = make_synthetic(back);
    CHECK(a.generator->layout()->fingerprint() == b.generator->layout()->fingerprint());
    const auto code = a.generator->sample_style(17);
    CHECK(code == b.generator->sample_style(17));
    CHECK(a.generator->render(code) == b.generator->render(code));
  }
}

TEST_CASE("constant channels are degenerate") {
  auto spec = biased_single_spec(0.8);
  spec.channel_laws.push_back({{3, 3}, 2.5, 0.0});
  const auto model = make_synthetic(spec);
  CHECK(model.generator->sample_style(4).at({3, 3}) == 2.5);
  CHECK_THROWS_AS(debias::compute_channel_stats(*model.generator, {3, 3}, 100, 1), DegenerateChannelError);
}

TEST_CASE("images encode the probed channels") {
  const auto model = make_synthetic(biased_single_spec(0.8));
  const auto code = model.generator->sample_style(2);
  const auto img = model.generator->render(code);
  CHECK(img.width == 8);
  CHECK(img.height == 8);
  CHECK(img.pixels[model.generator->pixel_of({2, 5})] == static_cast<float>(code.at({2, 5})));
  auto edited = code;
  edited.at({2, 0}) += 1.0;  // not read by the classifier, still visible
  CHECK(model.generator->render(edited) != img);
  CHECK(model.classifier("attr").score(model.generator->render(edited)) == model.classifier("attr").score(img));
}
