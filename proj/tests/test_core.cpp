#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "fairstyle/core/batch.hpp"
#include "fairstyle/core/error.hpp"
#include "fairstyle/core/hash.hpp"
#include "fairstyle/core/tensor.hpp"
#include "fairstyle/core/tensor_io.hpp"
#include "fairstyle/synth/synthetic.hpp"
#include "support.hpp"

using namespace fairstyle;
namespace fs = std::filesystem;

namespace {

std::shared_ptr<const StyleLayout> small_layout() {
  return std::make_shared<const StyleLayout>(synth::stylegan_like_layout(7, 16));
}

CoupledBias zero_coupled(const synth::SyntheticModel& m) {
  const ChannelId a{2, 5}, b{5, 11};
  return CoupledBias::zeros({a, b}, {ChannelStats(a, 0.1, 1.2, 1000), ChannelStats(b, -0.3, 0.8, 1000)});
}

}  // namespace

TEST_CASE("fnv1a and splitmix64 reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(to_hex(0xabcULL) == "0000000000000abc");
}

TEST_CASE("derive_seed separates indices and stages") {
  CHECK(derive_seed(7, std::uint64_t{0}) != derive_seed(7, std::uint64_t{1}));
  CHECK(derive_seed(7, std::uint64_t{3}) == derive_seed(7, std::uint64_t{3}));
  CHECK(derive_seed(7, "debias") != derive_seed(7, "audit"));
  CHECK(derive_seed(7, "debias") != derive_seed(8, "debias"));
}

TEST_CASE("style layout addressing") {
  const auto layout = small_layout();
  // block 0: conv + trgb, then 6 blocks of conv, conv, trgb
  CHECK(layout->layer_count() == 2 + 6 * 3);
  CHECK(layout->layer(1).kind == LayerKind::trgb);
  CHECK(layout->layer(2).block == 1);
  CHECK(layout->last_block() == 6);
  CHECK(layout->total_channels() == 20 * 16);
  CHECK(layout->flat_index({2, 5}) == 2 * 16 + 5);
  CHECK(layout->channel_at(2 * 16 + 5) == ChannelId{2, 5});
  CHECK(layout->contains({19, 15}));
  CHECK_FALSE(layout->contains({20, 0}));
  CHECK_FALSE(layout->contains({0, 16}));
  CHECK_THROWS_AS(layout->check({0, 16}), AddressError);
  CHECK_THROWS_AS(layout->check({20, 0}), AddressError);
  CHECK(to_string(ChannelId{2, 5}) == "(2,5)");
}

TEST_CASE("fingerprint depends on count and widths") {
  const auto a = StyleLayout(synth::stylegan_like_layout(7, 16)).fingerprint();
  CHECK(a == StyleLayout(synth::stylegan_like_layout(7, 16)).fingerprint());
  CHECK(a != StyleLayout(synth::stylegan_like_layout(7, 17)).fingerprint());
  CHECK(a != StyleLayout(synth::stylegan_like_layout(8, 16)).fingerprint());
  CHECK(a.rfind("L20-", 0) == 0);
}

TEST_CASE("style code shape is checked") {
  const auto layout = small_layout();
  CHECK_THROWS_AS(StyleCode(layout, std::vector<double>(3, 0.0)), ConfigError);
  auto code = StyleCode::zeros(layout);
  code.at({2, 5}) = 1.0;
  CHECK(code.layer(2)[5] == 1.0);
  CHECK(code.layer(2).size() == 16);
}

TEST_CASE("channel stats invariants") {
  CHECK_NOTHROW(ChannelStats({0, 0}, 0.0, 1.0, 2));
  CHECK_THROWS_AS(ChannelStats({0, 0}, 0.0, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(ChannelStats({0, 0}, 0.0, 0.0, 10), DegenerateChannelError);
  CHECK_THROWS_AS(ChannelStats({0, 0}, 0.0, -1.0, 10), DegenerateChannelError);
  CHECK_THROWS_AS(ChannelStats({0, 0}, 0.0, std::nan(""), 10), DegenerateChannelError);
}

TEST_CASE("scalar tensor adds to one channel") {
  const auto layout = small_layout();
  auto code = StyleCode::zeros(layout);
  code.at({2, 5}) = 1.0;
  code.at({3, 0}) = -2.0;
  const auto out = apply_fairstyle(code, ScalarBias{{2, 5}, 10.0});
  CHECK(out.at({2, 5}) == 11.0);
  CHECK(code.at({2, 5}) == 1.0);  // input untouched
  for (std::size_t f = 0; f < layout->total_channels(); ++f) {
    if (layout->channel_at(f) == ChannelId{2, 5}) continue;
    CHECK(out.values()[f] == code.values()[f]);
  }
}

TEST_CASE("zero tensors are identities") {
  const auto model = synth::make_synthetic(synth::independent_pair_spec(0.8, 0.8));
  const auto& gen = *model.generator;
  const std::vector<FairStyleTensor> zeros = {
      ScalarBias{{2, 5}, 0.0},
      zero_coupled(model),
      DirectionBias{{{{2, 5}, 1.0}, {{3, 4}, -0.5}}, 0.0},
      DirectionBias{{{{2, 5}, 0.0}}, 3.0},
  };
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto code = gen.sample_style(seed);
    for (const auto& t : zeros) {
      CHECK(apply_fairstyle(code, t) == code);
      CHECK(gen.synthesize(code, &t) == gen.render(code));
    }
  }
}

TEST_CASE("support is respected") {
  const auto model = synth::make_synthetic(synth::independent_pair_spec(0.8, 0.8));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  const DirectionBias dir{{{{2, 5}, 1.0}, {{3, 4}, -0.5}}, 0.7};
  const ScalarBias scalar{{5, 11}, u(rng)};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto code = model.generator->sample_style(seed);
    for (const FairStyleTensor& t : {FairStyleTensor(dir), FairStyleTensor(scalar)}) {
      const auto out = apply_fairstyle(code, t);
      const auto sup = support(t);
      const auto& layout = code.layout();
      for (std::size_t f = 0; f < layout.total_channels(); ++f) {
        const auto id = layout.channel_at(f);
        if (std::find(sup.begin(), sup.end(), id) == sup.end()) CHECK(out.values()[f] == code.values()[f]);
      }
    }
    const auto out = apply_fairstyle(code, dir);
    CHECK(out.at({2, 5}) == code.at({2, 5}) + 0.7);
    CHECK(out.at({3, 4}) == code.at({3, 4}) + 0.7 * -0.5);
  }
}

TEST_CASE("coupled tensor with zero parameters matches the zero scalar") {
  const auto model = synth::make_synthetic(synth::independent_pair_spec(0.8, 0.8));
  const auto coupled = zero_coupled(model);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto code = model.generator->sample_style(seed);
    CHECK(apply_fairstyle(code, coupled) == apply_fairstyle(code, ScalarBias{{2, 5}, 0.0}));
  }
}

TEST_CASE("tensor validation errors") {
  const auto layout = small_layout();
  const auto code = StyleCode::zeros(layout);
  CHECK_THROWS_AS(apply_fairstyle(code, ScalarBias{{40, 0}, 1.0}), AddressError);
  CHECK_THROWS_AS(apply_fairstyle(code, ScalarBias{{2, 99}, 1.0}), AddressError);
  CHECK_THROWS_AS(apply_fairstyle(code, ScalarBias{{1, 0}, 1.0}), ConfigError);  // tRGB

  const ChannelId a{2, 5}, b{5, 11};
  CoupledBias missing;
  missing.targets = {a, b};
  missing.x = {0, 0};
  missing.y = {0, 0};
  CHECK_THROWS_AS(apply_fairstyle(code, missing), ConfigError);

  auto wrong_count = CoupledBias::zeros({a, b}, {ChannelStats(a, 0, 1, 10), ChannelStats(b, 0, 1, 10)});
  wrong_count.x.push_back(0.0);
  CHECK_THROWS_AS(apply_fairstyle(code, wrong_count), ConfigError);

  auto mismatched = CoupledBias::zeros({a, b}, {ChannelStats(b, 0, 1, 10), ChannelStats(a, 0, 1, 10)});
  CHECK_THROWS_AS(apply_fairstyle(code, mismatched), ConfigError);

  CHECK_THROWS_AS(apply_fairstyle(code, DirectionBias{{{a, 1.0}, {a, 2.0}}, 1.0}), ConfigError);
  CHECK(CoupledBias::parameter_count(3) == 12);
  CHECK(CoupledBias::parameter_count(4) == 24);
}

TEST_CASE("variant names") {
  CHECK(variant_name(ScalarBias{}) == "scalar");
  CHECK(variant_name(CoupledBias{}) == "affine-coupled");
  CHECK(variant_name(DirectionBias{}) == "direction-scaled");
}

TEST_CASE("generate_batch determinism, cardinality and zero tensor") {
  const auto model = synth::make_synthetic(synth::biased_single_spec(0.8));
  const auto& gen = *model.generator;
  const auto a = generate_batch(gen, 4, nullptr, 0);
  const auto b = generate_batch(gen, 4, nullptr, 0);
  CHECK(a.images == b.images);
  CHECK(a.codes == b.codes);
  CHECK(a.latent_seeds == b.latent_seeds);

  const auto c = generate_batch(gen, 128, nullptr, 7);
  CHECK(c.images.size() == 128);
  CHECK(c.codes.size() == 128);
  const FairStyleTensor zero = ScalarBias{{2, 5}, 0.0};
  CHECK(generate_batch(gen, 128, &zero, 7).images == c.images);
  CHECK(generate_batch(gen, 128, nullptr, 8).images != c.images);

  CHECK(c.latent_seeds[3] == latent_seed(7, 3));
  CHECK(gen.sample_style(c.latent_seeds[3]) == c.codes[3]);
  CHECK_THROWS_AS(generate_batch(gen, 0, nullptr, 7), ConfigError);
}

TEST_CASE("generate_batch keeps codes unedited") {
  const auto model = synth::make_synthetic(synth::biased_single_spec(0.8));
  const FairStyleTensor t = ScalarBias{{2, 5}, 2.0};
  const auto with = generate_batch(*model.generator, 8, &t, 1);
  const auto without = generate_batch(*model.generator, 8, nullptr, 1);
  CHECK(with.codes == without.codes);
  CHECK(with.images != without.images);
}

TEST_CASE("adapter failures carry the sample index") {
  const auto model = synth::make_synthetic(synth::biased_single_spec(0.8));
  const testing::FailingGenerator bad(*model.generator, latent_seed(5, 6));
  try {
    (void)generate_batch(bad, 10, nullptr, 5);
    FAIL("expected an adapter error");
  } catch (const AdapterError& e) {
    CHECK(std::string(e.what()).find("6") != std::string::npos);
  }

  const testing::LambdaClassifier wild("wild", [](const Image& img) { return img.pixels[0] > 0 ? 1.5 : 0.2; });
  const ClassifierAdapter* set[] = {&wild};
  const auto batch = generate_batch(*model.generator, 32, nullptr, 5);
  try {
    (void)score_batch(set, batch.images);
    FAIL("expected an adapter error");
  } catch (const AdapterError& e) {
    CHECK(std::string(e.what()).find("wild") != std::string::npos);
  }
}

TEST_CASE("labels use the classifier boundary") {
  const testing::LambdaClassifier c("c", [](const Image&) { return 0.5; });
  CHECK(c.label(0.5));
  CHECK(c.label(0.9));
  CHECK_FALSE(c.label(0.2));
  struct Exclusive : ClassifierAdapter {
    Exclusive() : ClassifierAdapter("x", 0.5, Boundary::exclusive) {}
    double score(const Image&) const override { return 0.5; }
  } x;
  CHECK_FALSE(x.label(0.5));
}

TEST_CASE("parallel kernels match the serial reference bit for bit") {
  const auto model = synth::make_synthetic(synth::correlated_pair_spec({0.45, 0.35, 0.15, 0.05}));
  const auto& gen = *model.generator;
  const auto set = model.classifier_set();
  const auto codes = sample_codes(gen, 300, 11);
  CHECK(codes == reference::sample_codes(gen, 300, 11));
  const auto stats_a = ChannelStats({2, 5}, 0.05, 1.1, 1000);
  const auto stats_b = ChannelStats({5, 11}, -0.02, 0.9, 1000);
  CoupledBias coupled = CoupledBias::zeros({{2, 5}, {5, 11}}, {stats_a, stats_b});
  coupled.x = {0.3, -0.2};
  coupled.y = {0.1, 0.4};
  const std::vector<FairStyleTensor> tensors = {ScalarBias{{2, 5}, 0.7}, coupled,
                                                DirectionBias{{{{2, 5}, 1.0}, {{5, 11}, 0.5}}, -0.3}};
  for (const auto& t : tensors) {
    const auto images = render_batch(gen, codes, &t);
    CHECK(images == reference::render_batch(gen, codes, &t));
    CHECK(score_batch(set, images) == reference::score_batch(set, images));
  }
}

TEST_CASE("tensor documents round trip") {
  const auto model = synth::make_synthetic(synth::independent_pair_spec(0.8, 0.7));
  const auto layout = model.generator->layout();
  const auto dir = fs::temp_directory_path() / "fairstyle_test_core";
  fs::create_directories(dir);
  CoupledBias coupled = zero_coupled(model);
  coupled.x = {0.25, -1.5};
  coupled.y = {0.125, 3.0e-7};
  const std::vector<FairStyleTensor> tensors = {ScalarBias{{2, 5}, -0.8551882281561293}, coupled,
                                                DirectionBias{{{{2, 5}, 1.0}, {{3, 4}, -0.1}}, 0.3}};
  for (const auto& t : tensors) {
    TensorDocument doc{t, layout->fingerprint(), {"attr_a", "attr_b"}, "2026-01-01T00:00:00Z", {{"seed", 3}}};
    const auto path = dir / "t.json";
    save_tensor(path, doc);
    const auto back = load_tensor(path, *layout);
    CHECK(tensor_hash(back.tensor) == tensor_hash(t));
    CHECK(back.attribute_names == doc.attribute_names);
    CHECK(back.created_at == doc.created_at);
    CHECK(back.provenance == doc.provenance);
    const auto j = read_json(path);
    for (const char* key : {"variant", "targets", "parameters", "channel_stats", "generator_fingerprint",
                            "attribute_names", "created_at"}) {
      CHECK(j.contains(key));
    }
    // nothing left behind by the atomic write
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir)) files += e.is_regular_file();
    CHECK(files == 1);
  }
  CHECK(tensor_hash(tensors[0]) != tensor_hash(ScalarBias{{2, 5}, -0.85}));

  // a different generator refuses the tensor
  const StyleLayout other(synth::stylegan_like_layout(7, 33));
  CHECK_THROWS_AS(load_tensor(dir / "t.json", other), FingerprintMismatch);
  CHECK_THROWS_AS(load_tensor(dir / "missing.json", *layout), IoError);
  fs::remove_all(dir);
}
