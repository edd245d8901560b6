#pragma once

#include <cstdint>
#include <vector>

#include "scalenas/arch.hpp"
#include "scalenas/rng.hpp"

namespace scalenas {

// Hierarchical sampling strategy (HSS): ancestral sampling of (base model,
// scaling strategy) pairs from the mixture p(alpha, S) = p(alpha) * sum_j
// eta_j p_j(S), plus the pooled-uniform baseline whose FLOPs histogram is
// bell-shaped instead of multi-modal.

struct MixtureWeights {
  std::vector<double> eta;  // one weight per scaling stage, j = 0..M

  // Throws std::invalid_argument unless every eta_j >= 0 and the sum is 1
  // within 1e-12.
  void validate() const;

  static MixtureWeights equal(int max_stage);
  // "Combination ratio" mode: eta_j proportional to |grid_j|.
  static MixtureWeights grid_size(const SearchSpace& space);
};

struct SampleEvent {
  int stage = 0;
  BaseArch base;
  ScalingStrategy strategy;
  long long flops = 0;
};

// Precomputes the per-stage strategy lists once; sampling is then O(1) per
// draw plus the FLOPs count. One instance per worker; instances are
// independent given independent child streams.
class HssSampler {
 public:
  HssSampler(const SearchSpace& space, MixtureWeights weights);

  SampleEvent sample(Rng& rng) const;           // stage ~ eta, strategy uniform in stage
  SampleEvent sample_uniform(Rng& rng) const;   // strategy uniform over pooled grids

  const std::vector<std::vector<ScalingStrategy>>& grids() const {
    return grids_;
  }

 private:
  const SearchSpace& space_;
  MixtureWeights weights_;
  std::vector<double> cumulative_;
  std::vector<std::vector<ScalingStrategy>> grids_;
  long long pooled_total_ = 0;
};

// Spec-shaped single-draw conveniences (construct the tables per call; use
// HssSampler for hot loops).
SampleEvent sample_hss(const SearchSpace& space, const MixtureWeights& weights,
                       std::uint64_t rng_seed);
SampleEvent sample_uniform_baseline(const SearchSpace& space,
                                    std::uint64_t rng_seed);

}  // namespace scalenas
