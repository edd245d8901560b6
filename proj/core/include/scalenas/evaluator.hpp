#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "scalenas/arch.hpp"

namespace scalenas {

// Pluggable accuracy oracles standing in for a trained super-supernet.
// After its freeze point an evaluator is a pure function of (base, strategy).
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual double evaluate(const BaseArch& base,
                          const ScalingStrategy& s) const = 0;
};

// Deterministic synthetic surrogate. Seed-derived per-stage operator
// utilities and weights form a base-feature score in [0, 1]; the strategy
// enters through saturating responses 1 - exp(-kappa*(m - 1)) per multiplier
// plus a score*response interaction; a logistic squash keeps accuracy in
// (0, 1) and strictly increasing in each multiplier. Optional seeded noise is
// a pure hash of (seed, base, strategy), so replay is exact.
struct SurrogateConfig {
  std::uint64_t seed = 1;
  double noise_sigma = 0.0;
  // Response magnitudes/rates per dimension (d, w, r).
  double beta_d = 0.55, beta_w = 0.80, beta_r = 0.70;
  double kappa_d = 1.6, kappa_w = 1.9, kappa_r = 1.7;
  double interaction = 0.35;   // coefficient of score * response
  double base_gain = 1.1;      // weight of the base-feature score
  double offset = -1.1;        // pre-squash offset centering accuracies
};

class SurrogateModel final : public Evaluator {
 public:
  SurrogateModel(const SearchSpace& space, const SurrogateConfig& config);

  double evaluate(const BaseArch& base,
                  const ScalingStrategy& s) const override;

  // Base-feature score in [0, 1] (exposed for tests).
  double base_score(const BaseArch& base) const;

 private:
  struct StageTable {
    // utility indexed by (expand, kernel, se) position in the operator set
    std::vector<double> utility;
    double weight = 1.0;
    double max_utility = 0.0;
    int n_max = 1;
  };
  double choice_utility(std::size_t stage, const BlockChoice& b) const;

  const SearchSpace& space_;
  SurrogateConfig cfg_;
  std::vector<StageTable> tables_;
  double score_norm_ = 1.0;
};

}  // namespace scalenas
