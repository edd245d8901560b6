#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "scalenas/flops.hpp"
#include "scalenas/rank_stats.hpp"
#include "scalenas/sampler.hpp"
#include "scalenas/supernet.hpp"
#include "test_spaces.hpp"

using namespace scalenas;
using namespace testspaces;

namespace {

SupernetConfig small_config() {
  SupernetConfig cfg;
  cfg.l_max = 6;
  cfg.w_max = 24;
  cfg.f_max = 16;
  cfg.classes = 10;
  cfg.n_train = 1500;
  cfg.n_val = 600;
  cfg.width_base = 12;
  cfg.feat_base = 12;
  cfg.data_mean_scale = 0.55;
  return cfg;
}

SearchSpace budgeted_tiny() { return with_mc_budgets(tiny_space(), 0.15); }

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("path slices stay in range and grow with the strategy") {
  const SearchSpace sp = budgeted_tiny();
  const ToySupernet net(sp, small_config());
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const BaseArch base = random_base(sp, rng);
    const PathSlice lo = net.map_path(base, ScalingStrategy::identity());
    const PathSlice hi = net.map_path(base, ScalingStrategy{1500, 1400, 1400});
    for (const PathSlice& p : {lo, hi}) {
      CHECK(p.k >= 2);
      CHECK(p.k <= small_config().l_max);
      CHECK(p.c >= 2);
      CHECK(p.c <= small_config().w_max);
      CHECK(p.f >= 2);
      CHECK(p.f <= small_config().f_max);
    }
    CHECK(hi.k >= lo.k);
    CHECK(hi.c >= lo.c);
    CHECK(hi.f >= lo.f);
  }
}

TEST_CASE("deeper or wider bases never map to smaller slices") {
  const SearchSpace sp = budgeted_tiny();
  const ToySupernet net(sp, small_config());
  BaseArch shallow;
  shallow.stages.resize(2);
  shallow.stages[0].blocks = {BlockChoice{3, 3, false}};
  shallow.stages[1].blocks = {BlockChoice{3, 3, false}};
  BaseArch deep = shallow;
  deep.stages[0].blocks.assign(3, BlockChoice{6, 5, true});
  deep.stages[1].blocks.assign(3, BlockChoice{6, 5, true});
  const PathSlice ps = net.map_path(shallow, ScalingStrategy::identity());
  const PathSlice pd = net.map_path(deep, ScalingStrategy::identity());
  CHECK(pd.k > ps.k);
  CHECK(pd.c >= ps.c);
}

TEST_CASE("training for zero steps freezes without touching the weights") {
  const SearchSpace sp = budgeted_tiny();
  ToySupernet trained(sp, small_config());
  const ToySupernet fresh(sp, small_config());
  const HssSampler sampler(sp, MixtureWeights::equal(sp.max_stage()));
  Rng rng(5);
  trained.train([&sampler](Rng& r) { return sampler.sample(r); }, 0, rng);
  CHECK(trained.frozen());
  CHECK_FALSE(fresh.frozen());
  for (const PathSlice p :
       {PathSlice{2, 4, 4}, PathSlice{3, 8, 8}, PathSlice{6, 24, 16}})
    CHECK(trained.evaluate_slice(p) == fresh.evaluate_slice(p));
}

TEST_CASE("evaluation requires a frozen net and training happens once") {
  const SearchSpace sp = budgeted_tiny();
  ToySupernet net(sp, small_config());
  CHECK_THROWS_AS(net.evaluate(tiny_base(), ScalingStrategy::identity()),
                  std::logic_error);
  const HssSampler sampler(sp, MixtureWeights::equal(sp.max_stage()));
  Rng rng(6);
  net.train([&sampler](Rng& r) { return sampler.sample(r); }, 50, rng);
  Rng rng2(7);
  CHECK_THROWS_AS(
      net.train([&sampler](Rng& r) { return sampler.sample(r); }, 1, rng2),
      std::logic_error);
}

TEST_CASE("training is deterministic and evaluation is pure after freezing") {
  const SearchSpace sp = budgeted_tiny();
  const HssSampler sampler(sp, MixtureWeights::equal(sp.max_stage()));
  auto make = [&]() {
    ToySupernet net(sp, small_config());
    Rng rng(42);
    net.train([&sampler](Rng& r) { return sampler.sample(r); }, 400, rng);
    return net;
  };
  const ToySupernet a = make();
  const ToySupernet b = make();
  Rng pr(9);
  for (int i = 0; i < 30; ++i) {
    const SampleEvent ev = sampler.sample(pr);
    const double va = a.evaluate(ev.base, ev.strategy);
    CHECK(va == b.evaluate(ev.base, ev.strategy));
    CHECK(va == a.evaluate(ev.base, ev.strategy));  // replay purity
    CHECK(va >= 0.0);
    CHECK(va <= 1.0);
    CHECK(va == a.evaluate_slice(a.map_path(ev.base, ev.strategy)));
  }
}

TEST_CASE("per-stage visit counts follow the sampling weights") {
  const SearchSpace sp = budgeted_tiny();
  const HssSampler sampler(sp, MixtureWeights::equal(sp.max_stage()));
  ToySupernet net(sp, small_config());
  Rng rng(11);
  const int steps = 3000;
  net.train([&sampler](Rng& r) { return sampler.sample(r); }, steps, rng);
  const std::vector<long long>& visits = net.visit_counts();
  REQUIRE(visits.size() == sp.grids.size());
  long long total = 0;
  for (long long v : visits) total += v;
  CHECK(total == steps);
  for (long long v : visits) {
    const double freq = static_cast<double>(v) / steps;
    CHECK(std::abs(freq - 1.0 / 3.0) < 0.02);
  }
}

TEST_CASE("runaway optimization settings trip the divergence guard") {
  const SearchSpace sp = budgeted_tiny();
  SupernetConfig cfg = small_config();
  cfg.l_max = 10;
  cfg.w_max = 48;
  cfg.f_max = 32;
  cfg.n_train = 5000;
  cfg.n_val = 2000;
  cfg.lr0 = 1000.0;
  cfg.momentum = 0.99;
  cfg.batch = 8;
  ToySupernet net(sp, cfg);
  const HssSampler sampler(sp, MixtureWeights::equal(sp.max_stage()));
  Rng rng(7);
  CHECK_THROWS_AS(
      net.train([&sampler](Rng& r) { return sampler.sample(r); }, 400, rng),
      TrainingDivergedError);
}

TEST_CASE("saved state reloads into an identical evaluator") {
  const SearchSpace sp = budgeted_tiny();
  const HssSampler sampler(sp, MixtureWeights::equal(sp.max_stage()));
  ToySupernet net(sp, small_config());
  Rng rng(21);
  net.train([&sampler](Rng& r) { return sampler.sample(r); }, 300, rng);

  const std::string path = temp_path("supernet_roundtrip.bin");
  net.save(path);
  const ToySupernet back = ToySupernet::load(path, sp);
  CHECK(back.frozen());
  Rng pr(22);
  for (int i = 0; i < 25; ++i) {
    const SampleEvent ev = sampler.sample(pr);
    CHECK(back.evaluate(ev.base, ev.strategy) ==
          net.evaluate(ev.base, ev.strategy));
  }
  std::remove(path.c_str());
}

TEST_CASE("loading against a structurally different space is rejected") {
  const SearchSpace sp = budgeted_tiny();
  ToySupernet net(sp, small_config());
  const HssSampler sampler(sp, MixtureWeights::equal(sp.max_stage()));
  Rng rng(23);
  net.train([&sampler](Rng& r) { return sampler.sample(r); }, 50, rng);
  const std::string path = temp_path("supernet_mismatch.bin");
  net.save(path);

  SearchSpace other = with_mc_budgets(tiny_space(), 0.15);
  other.stages[0].out_channels = 12;
  CHECK_THROWS_AS(ToySupernet::load(path, other), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("shared-net accuracies rank paths like standalone retraining") {
  SearchSpace sp = with_budgets(
      tiny_space(), select_budgets(tiny_space(), 1000, 2, 0, 0.15));
  SupernetConfig cfg;
  cfg.l_max = 10;
  cfg.w_max = 48;
  cfg.f_max = 32;
  cfg.n_train = 5000;
  cfg.n_val = 2000;
  cfg.data_mean_scale = 0.55;

  const HssSampler sampler(sp, MixtureWeights::equal(sp.max_stage()));
  ToySupernet shared(sp, cfg);
  Rng train_rng(hash_combine(1, 0x747261696e303030ULL));
  shared.train([&sampler](Rng& r) { return sampler.sample(r); }, 2500,
               train_rng);

  Rng pr(0x70617468730000ULL);
  PairedSeries series;
  for (int i = 0; i < 20; ++i) {
    const SampleEvent ev = sampler.sample(pr);
    ToySupernet solo(sp, cfg);
    Rng solo_rng(hash_combine(977, static_cast<std::uint64_t>(i)));
    solo.train([&ev](Rng&) { return ev; }, 800, solo_rng);
    series.acc.push_back(shared.evaluate(ev.base, ev.strategy));
    series.flops.push_back(solo.evaluate(ev.base, ev.strategy));
  }
  CHECK(spearman(series) > 0.5);
}
