#include <doctest.h>

#include <random>

#include "fairstyle/core/error.hpp"
#include "fairstyle/debias/coupling.hpp"
#include "fairstyle/synth/synthetic.hpp"
#include "support.hpp"

using namespace fairstyle;
using debias::PairParameters;

namespace {

std::shared_ptr<const StyleLayout> layout() {
  static const auto l = std::make_shared<const StyleLayout>(synth::stylegan_like_layout(7, 16));
  return l;
}

double bias_at(const SparseBias& b, const ChannelId& id) {
  double total = 0.0;
  for (const auto& [c, v] : b) {
    if (c == id) total += v;
  }
  return total;
}

}  // namespace

TEST_CASE("pair bias examples") {
  const ChannelId t1{2, 5}, t2{3, 7};
  const std::array<ChannelStats, 2> stats = {ChannelStats(t1, 0.5, 2.0, 1000), ChannelStats(t2, -1.0, 0.5, 1000)};
  auto code = StyleCode::zeros(layout());
  code.at(t1) = 1.3;
  code.at(t2) = 0.2;

  const auto zero = debias::pair_bias(code, {t1, t2}, {}, stats);
  CHECK(bias_at(zero, t1) == 0.0);
  CHECK(bias_at(zero, t2) == 0.0);

  code.at(t2) = -1.0;  // centered
  CHECK(bias_at(debias::pair_bias(code, {t1, t2}, {0, 0, 1, 0}, stats), t1) == 0.0);

  code.at(t2) = -1.0 + 0.5;  // one std above the mean
  const auto b = debias::pair_bias(code, {t1, t2}, {0, 0, 1, 0.5}, stats);
  CHECK(bias_at(b, t1) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(bias_at(b, t2) == 0.0);

  // cross-indexing: channel 2 is driven by channel 1
  code.at(t1) = 0.5 + 2.0 * 3.0;
  const auto c = debias::pair_bias(code, {t1, t2}, {2, 0.25, 0, 0}, stats);
  CHECK(bias_at(c, t2) == doctest::Approx(6.25));
  CHECK(bias_at(c, t1) == 0.0);

  CHECK_THROWS_AS(debias::pair_bias(code, {t1, t2}, {}, {stats[1], stats[0]}), ConfigError);
}

TEST_CASE("multi bias examples") {
  const ChannelId t[3] = {{2, 5}, {3, 7}, {4, 1}};
  const std::vector<ChannelStats> stats = {ChannelStats(t[0], 0.0, 1.0, 100), ChannelStats(t[1], 1.0, 0.5, 100),
                                           ChannelStats(t[2], -2.0, 3.0, 100)};
  auto code = StyleCode::zeros(layout());
  code.at(t[0]) = 0.3;
  code.at(t[1]) = 1.0 + 2 * 0.5;  // two std above the mean
  code.at(t[2]) = 4.0;

  std::vector<double> x(6, 0.0), y(6, 0.0);
  auto zero = debias::multi_bias(code, t, x, y, stats);
  for (const auto& id : t) CHECK(bias_at(zero, id) == 0.0);

  // x(0,1): target 0 driven by target 1
  x[CoupledBias::pair_index(0, 1, 3)] = 1.0;
  auto b = debias::multi_bias(code, t, x, y, stats);
  CHECK(bias_at(b, t[0]) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(bias_at(b, t[1]) == 0.0);
  CHECK(bias_at(b, t[2]) == 0.0);

  CHECK(CoupledBias::pair_index(0, 1, 3) == 0);
  CHECK(CoupledBias::pair_index(0, 2, 3) == 1);
  CHECK(CoupledBias::pair_index(1, 0, 3) == 2);
  CHECK(CoupledBias::pair_index(2, 1, 3) == 5);

  std::vector<double> short_x(5, 0.0);
  CHECK_THROWS_AS(debias::multi_bias(code, t, short_x, y, stats), ConfigError);
  CHECK_THROWS_AS(debias::multi_bias(code, std::span(t, 1), std::vector<double>{}, std::vector<double>{},
                                     std::span(stats.data(), 1)),
                  ConfigError);
  CHECK_THROWS_AS(debias::multi_bias(code, t, x, y, std::span(stats.data(), 2)), ConfigError);
}

TEST_CASE("multi bias at M=2 is the pair bias bit for bit") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n(0.0, 3.0);
  std::uniform_real_distribution<double> pos(0.01, 5.0);
  const ChannelId t1{2, 5}, t2{5, 11};
  for (int i = 0; i < 10000; ++i) {
    auto code = StyleCode::zeros(layout());
    code.at(t1) = n(rng);
    code.at(t2) = n(rng);
    const std::array<ChannelStats, 2> stats = {ChannelStats(t1, n(rng), pos(rng), 1000),
                                               ChannelStats(t2, n(rng), pos(rng), 1000)};
    const PairParameters p{n(rng), n(rng), n(rng), n(rng)};
    double x[2], y[2];
    debias::to_coupled(p, x, y);
    const auto pair = debias::pair_bias(code, {t1, t2}, p, stats);
    const auto multi = debias::multi_bias(code, std::array{t1, t2}, x, y, stats);
    REQUIRE(pair.size() == multi.size());
    for (std::size_t k = 0; k < pair.size(); ++k) {
      CHECK(pair[k].first == multi[k].first);
      CHECK(testing::same_bits(pair[k].second, multi[k].second));
    }
  }
}

TEST_CASE("coupled tensor applies the multi bias") {
  const ChannelId t1{2, 5}, t2{5, 11};
  auto c = CoupledBias::zeros({t1, t2}, {ChannelStats(t1, 0.0, 1.0, 10), ChannelStats(t2, 0.0, 2.0, 10)});
  c.x = {1.0, 0.0};  // x(0,1)
  c.y = {0.0, 0.5};  // y(1,0)
  auto code = StyleCode::zeros(layout());
  code.at(t2) = 4.0;
  const auto out = apply_fairstyle(code, c);
  CHECK(out.at(t1) == doctest::Approx(2.0));
  CHECK(out.at(t2) == doctest::Approx(4.5));
}
