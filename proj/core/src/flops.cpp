#include "scalenas/flops.hpp"

#include <cmath>
#include <stdexcept>

namespace scalenas {

namespace {

inline long long ceil_div(long long a, long long b) { return (a + b - 1) / b; }

struct LayerCost {
  long long flops = 0;
  long long params = 0;
};

// Weights only (batch-norm statistics and biases of fused convolutions are
// not modeled); SE and classifier FCs include biases.
LayerCost conv(long long k, long long cin, long long cout, long long hout,
               long long groups = 1) {
  LayerCost c;
  c.flops = 2 * k * k * cin * cout * hout * hout / groups;
  c.params = k * k * cin * cout / groups;
  return c;
}

LayerCost mbconv(const BlockChoice& b, long long cin, long long cout,
                 long long hin, long long stride) {
  const long long hout = ceil_div(hin, stride);
  const long long cmid = static_cast<long long>(b.expand_rate) * cin;
  LayerCost total;
  auto add = [&total](LayerCost c) {
    total.flops += c.flops;
    total.params += c.params;
  };
  if (b.expand_rate != 1) add(conv(1, cin, cmid, hin));          // expand
  add(conv(b.kernel, cmid, cmid, hout, /*groups=*/cmid));        // depthwise
  if (b.use_se) {
    const long long cse = std::max<long long>(1, cmid / 4);     // ratio 0.25
    total.flops += cmid * hout * hout;                           // global pool
    total.flops += 2 * cmid * cse + 2 * cse * cmid;              // two FCs
    total.params += cmid * cse + cse + cse * cmid + cmid;
    total.flops += cmid * hout * hout;                           // rescale
  }
  add(conv(1, cmid, cout, hout));                                // project
  return total;
}

}  // namespace

FlopsReport count_flops(const ScaledArch& arch) {
  if (arch.input_resolution < 1)
    throw std::invalid_argument("non-positive input resolution");

  FlopsReport rep;
  long long h = ceil_div(arch.input_resolution, arch.stem_stride);
  LayerCost stem = conv(arch.stem_kernel, arch.stem_in_channels,
                        arch.stem_out_channels, h);
  rep.per_stage_flops.push_back(stem.flops);
  rep.total_params += stem.params;

  long long cin = arch.stem_out_channels;
  for (const auto& st : arch.stages) {
    long long stage_flops = 0;
    long long block_in = cin;
    for (std::size_t i = 0; i < st.blocks.size(); ++i) {
      const long long stride = (i == 0) ? st.stride : 1;
      LayerCost c = mbconv(st.blocks[i], block_in, st.out_channels, h, stride);
      h = ceil_div(h, stride);
      stage_flops += c.flops;
      rep.total_params += c.params;
      block_in = st.out_channels;
    }
    rep.per_stage_flops.push_back(stage_flops);
    cin = st.out_channels;
  }

  LayerCost head = conv(1, cin, arch.head_channels, h);
  rep.per_stage_flops.push_back(head.flops);
  rep.total_params += head.params;

  rep.per_stage_flops.push_back(arch.head_channels * h * h);  // global pool

  rep.per_stage_flops.push_back(2LL * arch.head_channels * arch.num_classes);
  rep.total_params +=
      static_cast<long long>(arch.head_channels) * arch.num_classes +
      arch.num_classes;

  for (long long f : rep.per_stage_flops) rep.total_flops += f;
  return rep;
}

BudgetPlan select_budgets(const SearchSpace& space, int n_samples, int M,
                          std::uint64_t rng_seed, double tolerance) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (M < 0) throw std::invalid_argument("M must be >= 0");

  long long f0 = space.forced_f0;
  if (f0 == 0) {
    Rng rng(rng_seed);
    long double sum = 0.0L;
    for (int i = 0; i < n_samples; ++i) {
      const BaseArch base = random_base(space, rng);
      const ScaledArch path =
          apply_strategy(base, ScalingStrategy::identity(), space);
      sum += static_cast<long double>(count_flops(path).total_flops);
    }
    const long double mean = sum / n_samples;
    const long long g = space.budget_granularity;
    f0 = llroundl(mean / g) * g;
    if (f0 <= 0) f0 = g;  // degenerate tiny spaces still get a positive budget
  }

  BudgetPlan plan;
  plan.f0 = f0;
  plan.tolerance = tolerance;
  plan.budgets.reserve(static_cast<std::size_t>(M) + 1);
  for (int j = 0; j <= M; ++j) plan.budgets.push_back(f0 << j);
  return plan;
}

bool within_budget(long long flops, long long budget, double tolerance) {
  if (tolerance <= 0.0 || tolerance >= 1.0)
    throw std::invalid_argument("tolerance must be in (0, 1)");
  const double diff = std::llabs(flops - budget);
  return diff <= tolerance * static_cast<double>(budget);
}

bool within_budget(const FlopsReport& report, long long budget,
                   double tolerance) {
  return within_budget(report.total_flops, budget, tolerance);
}

SearchSpace with_budgets(const SearchSpace& space, const BudgetPlan& plan) {
  SearchSpace out = space;
  if (plan.budgets.size() != out.grids.size())
    throw std::invalid_argument("budget plan does not match grid count");
  for (std::size_t j = 0; j < out.grids.size(); ++j)
    out.grids[j].flops_budget = plan.budgets[j];
  return out;
}

}  // namespace scalenas
