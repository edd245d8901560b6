#pragma once

#include <cstdint>
#include <vector>

#include "scalenas/arch.hpp"
#include "scalenas/rng.hpp"

namespace scalenas {

// Analytic FLOPs/parameter counting and Monte-Carlo budget selection.
//
// Convention (pinned): one multiply-accumulate = 2 FLOPs. A kxk convolution
// c_in -> c_out over an HxW output map costs 2*k^2*c_in*c_out*H*W; depthwise
// divides by the group count. MBConv = expansion 1x1 (omitted when e = 1) +
// depthwise kxk + projection 1x1; SE adds a global average pool, two
// fully-connected layers at reduction ratio 0.25 over the expanded channels,
// and the channel-wise rescale. Final pooling and classifier are included.
// Spatial sizes follow ceiling division by stride.

struct FlopsReport {
  long long total_flops = 0;
  long long total_params = 0;
  // stem, one entry per stage, head conv, pooling, classifier.
  std::vector<long long> per_stage_flops;
};

struct BudgetPlan {
  long long f0 = 0;                  // multiple of the granularity when derived
  std::vector<long long> budgets;    // budgets[j] = 2^j * f0, j = 0..M
  double tolerance = 0.10;           // relative band for budget membership
};

FlopsReport count_flops(const ScaledArch& arch);

// Mean FLOPs of n_samples uniform bases at strategy (1,1,1), rounded to the
// nearest multiple of space.budget_granularity -> f0; budgets[j] = 2^j * f0.
// space.forced_f0 != 0 bypasses the Monte-Carlo estimate (used for spaces
// whose published budget is not on the default 50M lattice).
BudgetPlan select_budgets(const SearchSpace& space, int n_samples, int M,
                          std::uint64_t rng_seed, double tolerance = 0.10);

// |total_flops - budget| <= tolerance * budget.
bool within_budget(const FlopsReport& report, long long budget,
                   double tolerance);
bool within_budget(long long flops, long long budget, double tolerance);

// Copy of `space` with plan.budgets written into grids[j].flops_budget.
SearchSpace with_budgets(const SearchSpace& space, const BudgetPlan& plan);

}  // namespace scalenas
