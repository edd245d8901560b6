#include "scalenas/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "scalenas/flops.hpp"

namespace scalenas {

void MixtureWeights::validate() const {
  if (eta.empty()) throw std::invalid_argument("mixture weights empty");
  double sum = 0.0;
  for (double e : eta) {
    if (e < 0.0) throw std::invalid_argument("mixture weight < 0");
    sum += e;
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("mixture weights must sum to 1");
}

MixtureWeights MixtureWeights::equal(int max_stage) {
  MixtureWeights w;
  w.eta.assign(static_cast<std::size_t>(max_stage) + 1,
               1.0 / (max_stage + 1));
  return w;
}

MixtureWeights MixtureWeights::grid_size(const SearchSpace& space) {
  MixtureWeights w;
  long long total = 0;
  for (const auto& g : space.grids) total += g.size();
  for (const auto& g : space.grids)
    w.eta.push_back(static_cast<double>(g.size()) / total);
  return w;
}

HssSampler::HssSampler(const SearchSpace& space, MixtureWeights weights)
    : space_(space), weights_(std::move(weights)) {
  weights_.validate();
  if (weights_.eta.size() != space.grids.size())
    throw std::invalid_argument("weights do not match stage count");
  double acc = 0.0;
  for (double e : weights_.eta) {
    acc += e;
    cumulative_.push_back(acc);
  }
  cumulative_.back() = 1.0;  // guard against rounding at the top end
  for (const auto& g : space.grids) {
    grids_.push_back(enumerate_grid(g));
    pooled_total_ += g.size();
  }
}

SampleEvent HssSampler::sample(Rng& rng) const {
  SampleEvent ev;
  const double u = rng.uniform01();
  ev.stage = 0;
  while (ev.stage + 1 < static_cast<int>(cumulative_.size()) &&
         u >= cumulative_[static_cast<std::size_t>(ev.stage)])
    ++ev.stage;
  const auto& grid = grids_[static_cast<std::size_t>(ev.stage)];
  ev.strategy = grid[rng.uniform_u64(grid.size())];
  ev.base = random_base(space_, rng);
  ev.flops =
      count_flops(apply_strategy(ev.base, ev.strategy, space_)).total_flops;
  return ev;
}

SampleEvent HssSampler::sample_uniform(Rng& rng) const {
  SampleEvent ev;
  long long idx =
      static_cast<long long>(rng.uniform_u64(static_cast<std::uint64_t>(pooled_total_)));
  ev.stage = 0;
  for (const auto& grid : grids_) {
    if (idx < static_cast<long long>(grid.size())) {
      ev.strategy = grid[static_cast<std::size_t>(idx)];
      break;
    }
    idx -= static_cast<long long>(grid.size());
    ++ev.stage;
  }
  ev.base = random_base(space_, rng);
  ev.flops =
      count_flops(apply_strategy(ev.base, ev.strategy, space_)).total_flops;
  return ev;
}

SampleEvent sample_hss(const SearchSpace& space, const MixtureWeights& weights,
                       std::uint64_t rng_seed) {
  HssSampler sampler(space, weights);
  Rng rng(rng_seed);
  return sampler.sample(rng);
}

SampleEvent sample_uniform_baseline(const SearchSpace& space,
                                    std::uint64_t rng_seed) {
  HssSampler sampler(space, MixtureWeights::equal(space.max_stage()));
  Rng rng(rng_seed);
  return sampler.sample_uniform(rng);
}

}  // namespace scalenas
