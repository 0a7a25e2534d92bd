// Parallel kernels against their serial references on the synthetic model.

#include <benchmark/benchmark.h>

#include "fairstyle/core/batch.hpp"
#include "fairstyle/discovery/discovery.hpp"
#include "fairstyle/synth/synthetic.hpp"

using namespace fairstyle;

namespace {

const synth::SyntheticModel& model() {
  static const auto m = synth::make_synthetic(synth::random_discovery_spec(1, 128));
  return m;
}

std::size_t size_of(const benchmark::State& state) { return static_cast<std::size_t>(state.range(0)); }

template <bool Parallel>
void sample(benchmark::State& state) {
  for (auto _ : state) {
    auto codes = Parallel ? sample_codes(*model().generator, size_of(state), 1)
                          : reference::sample_codes(*model().generator, size_of(state), 1);
    benchmark::DoNotOptimize(codes);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void render(benchmark::State& state) {
  const auto codes = reference::sample_codes(*model().generator, size_of(state), 2);
  const FairStyleTensor t = ScalarBias{model().spec.attributes[0].causal, 0.5};
  for (auto _ : state) {
    auto images = Parallel ? render_batch(*model().generator, codes, &t)
                           : reference::render_batch(*model().generator, codes, &t);
    benchmark::DoNotOptimize(images);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void score(benchmark::State& state) {
  const auto codes = reference::sample_codes(*model().generator, size_of(state), 3);
  const auto images = reference::render_batch(*model().generator, codes);
  const auto set = model().classifier_set();
  for (auto _ : state) {
    auto scores = Parallel ? score_batch(set, images) : reference::score_batch(set, images);
    benchmark::DoNotOptimize(scores);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void sweep(benchmark::State& state) {
  const auto& gen = *model().generator;
  const auto codes = reference::sample_codes(gen, size_of(state), 4);
  const auto candidates = discovery::candidate_channels(*gen.layout(), {});
  const auto& cls = *model().classifiers[0];
  for (auto _ : state) {
    auto scores = Parallel ? discovery::sweep(gen, cls, codes, candidates, 10.0)
                           : discovery::reference::sweep(gen, cls, codes, candidates, 10.0);
    benchmark::DoNotOptimize(scores);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(candidates.size()));
}

}  // namespace

BENCHMARK(sample<false>)->Name("sample/serial")->Arg(1024)->Arg(16384);
BENCHMARK(sample<true>)->Name("sample/parallel")->Arg(1024)->Arg(16384);
BENCHMARK(render<false>)->Name("render/serial")->Arg(1024)->Arg(16384);
BENCHMARK(render<true>)->Name("render/parallel")->Arg(1024)->Arg(16384);
BENCHMARK(score<false>)->Name("score/serial")->Arg(1024)->Arg(16384);
BENCHMARK(score<true>)->Name("score/parallel")->Arg(1024)->Arg(16384);
BENCHMARK(sweep<false>)->Name("sweep/serial")->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(sweep<true>)->Name("sweep/parallel")->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
