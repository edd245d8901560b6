#include <benchmark/benchmark.h>

#include <vector>

#include "scalenas/arch.hpp"
#include "scalenas/flops.hpp"
#include "scalenas/rank_stats.hpp"
#include "scalenas/rng.hpp"
#include "scalenas/sampler.hpp"
#include "scalenas/space_io.hpp"
#include "scalenas/supernet.hpp"

using namespace scalenas;

namespace {

const SearchSpace& imagenet_space() {
  static const SearchSpace space =
      load_space(std::string(SCALENAS_SOURCE_DIR) +
                 "/configs/spaces/imagenet1k.json");
  return space;
}

const SearchSpace& toy_space() {
  static const SearchSpace space = load_space(
      std::string(SCALENAS_SOURCE_DIR) + "/configs/spaces/toy.json");
  return space;
}

void BM_apply_strategy(benchmark::State& state) {
  const SearchSpace& space = imagenet_space();
  const BaseArch base = random_base(space, 1);
  const ScalingStrategy s{1360, 1200, 1355};
  for (auto _ : state)
    benchmark::DoNotOptimize(apply_strategy(base, s, space));
}
BENCHMARK(BM_apply_strategy);

void BM_count_flops(benchmark::State& state) {
  const SearchSpace& space = imagenet_space();
  const ScaledArch arch =
      apply_strategy(random_base(space, 1), ScalingStrategy{1360, 1200, 1355},
                     space);
  for (auto _ : state) benchmark::DoNotOptimize(count_flops(arch));
}
BENCHMARK(BM_count_flops);

void BM_hss_sample(benchmark::State& state) {
  const SearchSpace& space = imagenet_space();
  const HssSampler sampler(space, MixtureWeights::equal(space.max_stage()));
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(rng));
}
BENCHMARK(BM_hss_sample);

PairedSeries random_series(int q, bool tied) {
  Rng rng(hash_combine(3, static_cast<std::uint64_t>(q)));
  PairedSeries s;
  for (int i = 0; i < q; ++i) {
    s.acc.push_back(tied ? static_cast<double>(rng.uniform_int(0, 9))
                         : rng.uniform01());
    s.flops.push_back(tied ? static_cast<double>(rng.uniform_int(0, 9))
                           : rng.uniform01());
  }
  return s;
}

void BM_kendall_merge(benchmark::State& state) {
  const PairedSeries s =
      random_series(static_cast<int>(state.range(0)), false);
  for (auto _ : state) benchmark::DoNotOptimize(kendall(s));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_kendall_merge)->Range(64, 4096)->Complexity();

void BM_kendall_bruteforce(benchmark::State& state) {
  const PairedSeries s =
      random_series(static_cast<int>(state.range(0)), false);
  for (auto _ : state) benchmark::DoNotOptimize(kendall_bruteforce(s));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_kendall_bruteforce)->Range(64, 1024)->Complexity();

void BM_supernet_evaluate(benchmark::State& state) {
  const SearchSpace& space = toy_space();
  SupernetConfig cfg;
  cfg.n_train = 256;
  cfg.n_val = 256;
  ToySupernet net(space, cfg);
  const HssSampler sampler(space, MixtureWeights::equal(space.max_stage()));
  Rng rng(4);
  net.train([&sampler](Rng& r) { return sampler.sample(r); }, 0, rng);
  const BaseArch base = random_base(space, 5);
  const ScalingStrategy s{1200, 1200, 1200};
  for (auto _ : state) benchmark::DoNotOptimize(net.evaluate(base, s));
}
BENCHMARK(BM_supernet_evaluate);

}  // namespace

BENCHMARK_MAIN();
