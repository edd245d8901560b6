#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "scalenas/rng.hpp"

namespace scalenas {

// ---------------------------------------------------------------------------
// Base-architecture grammar, scaling-strategy grids, and the deterministic
// rule combining a base model with a strategy into a concrete scaled
// architecture ("path").
// ---------------------------------------------------------------------------

// One MBConv block's searchable choice. expand_rate 1 is the distinguished
// first-stage block (no expansion convolution).
struct BlockChoice {
  int expand_rate = 6;  // 1, 3, or 6
  int kernel = 3;       // 3, 5, or 7
  bool use_se = false;

  auto operator<=>(const BlockChoice&) const = default;
};

// Per-stage grammar row: block-count range, channels, stride, the operator
// set blocks may choose from, and which scaling axes apply to the stage.
struct StageSpec {
  std::string name;
  int n_min = 1;
  int n_max = 1;
  int out_channels = 0;
  int stride = 1;
  std::vector<int> expand_rates{3, 6};
  std::vector<int> kernels{3, 5, 7};
  std::vector<bool> se_options{false, true};
  bool scalable_depth = true;
  bool scalable_width_in = true;
  bool scalable_width_out = true;
  bool scalable_resolution = true;

  std::uint64_t choices_per_block() const {
    return static_cast<std::uint64_t>(expand_rates.size()) * kernels.size() *
           se_options.size();
  }
};

// A concrete base model: one block list per searchable stage.
struct BaseArch {
  struct Stage {
    std::vector<BlockChoice> blocks;
  };
  std::vector<Stage> stages;

  bool operator==(const BaseArch& o) const {
    if (stages.size() != o.stages.size()) return false;
    for (std::size_t i = 0; i < stages.size(); ++i)
      if (stages[i].blocks != o.stages[i].blocks) return false;
    return true;
  }
};

// Multipliers (d, w, r), all >= 1. Stored in exact thousandths so that grid
// enumeration, lexicographic ordering, and the ceiling rule are free of
// floating-point drift: ceil(x*m) == (x*milli + 999) / 1000 in integers.
struct ScalingStrategy {
  int d_milli = 1000;
  int w_milli = 1000;
  int r_milli = 1000;

  double d() const { return d_milli / 1000.0; }
  double w() const { return w_milli / 1000.0; }
  double r() const { return r_milli / 1000.0; }

  static ScalingStrategy identity() { return {1000, 1000, 1000}; }
  static ScalingStrategy from_reals(double d, double w, double r);

  bool is_identity() const {
    return d_milli == 1000 && w_milli == 1000 && r_milli == 1000;
  }
  auto operator<=>(const ScalingStrategy&) const = default;
};

// Exact ceiling of x * (milli/1000) for x >= 0.
inline long long ceil_scale(long long x, int milli) {
  return (x * milli + 999) / 1000;
}

// min/step/max axis in thousandths; step 0 encodes a singleton axis.
struct AxisSpec {
  int min_milli = 1000;
  int step_milli = 0;
  int max_milli = 1000;

  int count() const {
    if (step_milli == 0) return 1;
    return (max_milli - min_milli) / step_milli + 1;
  }
  int value_at(int i) const { return min_milli + i * step_milli; }
  bool contains(int v) const {
    if (v < min_milli || v > max_milli) return false;
    if (step_milli == 0) return v == min_milli;
    return (v - min_milli) % step_milli == 0;
  }
};

struct StrategyGrid {
  int stage_index = 0;
  AxisSpec depth;
  AxisSpec width;
  AxisSpec resolution;
  long long flops_budget = 0;  // set once a budget plan is attached

  int size() const { return depth.count() * width.count() * resolution.count(); }
  bool contains(const ScalingStrategy& s) const {
    return depth.contains(s.d_milli) && width.contains(s.w_milli) &&
           resolution.contains(s.r_milli);
  }
};

// The joint search space: stem/head convolutions, searchable stages, and the
// per-scaling-stage strategy grids.
struct SearchSpace {
  int base_resolution = 224;
  int num_classes = 1000;

  int stem_out_channels = 32;
  int stem_kernel = 3;
  int stem_stride = 2;
  bool stem_scale_width_out = true;

  int head_channels = 1280;  // pinned output width of the final 1x1 conv

  std::vector<StageSpec> stages;
  std::vector<StrategyGrid> grids;  // index j = 0..M; grids[0] is {(1,1,1)}

  long long forced_f0 = 0;                    // 0 = derive by Monte Carlo
  long long budget_granularity = 50'000'000;  // f0 rounding unit

  int max_stage() const { return static_cast<int>(grids.size()) - 1; }

  // Number of distinct base models (saturates at +inf for huge spaces).
  double base_space_size() const;

  // Throws std::invalid_argument when a structural invariant is violated.
  void validate() const;
};

// The realized path: everything count_flops needs, self-contained.
struct ScaledArch {
  struct Stage {
    int in_channels = 0;
    int out_channels = 0;
    int stride = 1;
    std::vector<BlockChoice> blocks;

    bool operator==(const Stage&) const = default;
  };
  int input_resolution = 224;
  int num_classes = 1000;
  int stem_in_channels = 3;
  int stem_out_channels = 32;
  int stem_kernel = 3;
  int stem_stride = 2;
  int head_channels = 1280;
  std::vector<Stage> stages;

  bool operator==(const ScaledArch&) const = default;
};

// --- operations ------------------------------------------------------------

// Depth: scaled block count = ceil(n * d), added blocks copy the last block's
// choice. Width: scaled channels = ceil(c * w), stem input (3) and head
// output pinned. Resolution: ceil(base_resolution * r).
ScaledArch apply_strategy(const BaseArch& base, const ScalingStrategy& s,
                          const SearchSpace& space);

// Cartesian product of the three axes in lexicographic (d, w, r) order.
std::vector<ScalingStrategy> enumerate_grid(const StrategyGrid& grid);

// Block count uniform over [n_min, n_max]; every block choice uniform over
// the stage's operator set.
BaseArch random_base(const SearchSpace& space, Rng& rng);
BaseArch random_base(const SearchSpace& space, std::uint64_t seed);

// Each stage taken from a or b with probability 1/2.
BaseArch crossover(const BaseArch& a, const BaseArch& b, Rng& rng);

// Independently resample each stage's depth and each block's choice with
// probability `rate`; rate 1 is distributed as random_base.
BaseArch mutate(const BaseArch& a, double rate, const SearchSpace& space,
                Rng& rng);

// Canonical stage-ordered, field-ordered JSON; equal archs serialize
// identically, so the FNV-1a hash is stable.
std::string arch_to_json(const BaseArch& arch);
BaseArch arch_from_json(const std::string& json_text, const SearchSpace& space);
std::uint64_t arch_hash(const BaseArch& arch);

}  // namespace scalenas
