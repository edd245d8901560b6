#include "scalenas/arch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace scalenas {

ScalingStrategy ScalingStrategy::from_reals(double d, double w, double r) {
  auto to_milli = [](double v) {
    if (!(v >= 1.0)) throw std::invalid_argument("multiplier must be >= 1");
    return static_cast<int>(std::llround(v * 1000.0));
  };
  return {to_milli(d), to_milli(w), to_milli(r)};
}

double SearchSpace::base_space_size() const {
  double total = 1.0;
  for (const auto& st : stages) {
    double per_block = static_cast<double>(st.choices_per_block());
    double stage_total = 0.0;
    for (int n = st.n_min; n <= st.n_max; ++n)
      stage_total += std::pow(per_block, n);
    total *= stage_total;
  }
  return total;
}

void SearchSpace::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (base_resolution < 1) fail("base_resolution must be positive");
  if (stages.empty()) fail("space needs at least one stage");
  for (const auto& st : stages) {
    if (st.n_min < 1 || st.n_max < st.n_min)
      fail("stage " + st.name + ": need 1 <= n_min <= n_max");
    if (st.out_channels < 1) fail("stage " + st.name + ": channels");
    if (st.stride != 1 && st.stride != 2) fail("stage " + st.name + ": stride");
    if (st.expand_rates.empty() || st.kernels.empty() || st.se_options.empty())
      fail("stage " + st.name + ": empty operator set");
    for (int e : st.expand_rates)
      if (e != 1 && e != 3 && e != 6) fail("expand rate must be 1, 3 or 6");
    for (int k : st.kernels)
      if (k != 3 && k != 5 && k != 7) fail("kernel must be 3, 5 or 7");
  }
  if (grids.empty()) fail("space needs at least the stage-0 grid");
  for (std::size_t j = 0; j < grids.size(); ++j) {
    const auto& g = grids[j];
    if (g.stage_index != static_cast<int>(j)) fail("grid indices must be 0..M in order");
    for (const AxisSpec* ax : {&g.depth, &g.width, &g.resolution}) {
      if (ax->min_milli < 1000) fail("axis minimum below 1.0");
      if (ax->step_milli < 0 || ax->max_milli < ax->min_milli) fail("bad axis");
      if (ax->step_milli == 0 && ax->max_milli != ax->min_milli)
        fail("zero-step axis must be a singleton");
      if (ax->step_milli > 0 && (ax->max_milli - ax->min_milli) % ax->step_milli != 0)
        fail("axis span must be an integer multiple of step");
    }
  }
  const auto& g0 = grids[0];
  if (g0.size() != 1 || g0.depth.min_milli != 1000 || g0.width.min_milli != 1000 ||
      g0.resolution.min_milli != 1000)
    fail("stage-0 grid must be the singleton {(1,1,1)}");
}

ScaledArch apply_strategy(const BaseArch& base, const ScalingStrategy& s,
                          const SearchSpace& space) {
  if (s.d_milli < 1000 || s.w_milli < 1000 || s.r_milli < 1000)
    throw std::invalid_argument("scaling multipliers must be >= 1");
  if (base.stages.size() != space.stages.size())
    throw std::invalid_argument("base arch does not match space");

  ScaledArch out;
  out.num_classes = space.num_classes;
  out.stem_kernel = space.stem_kernel;
  out.stem_stride = space.stem_stride;
  out.head_channels = space.head_channels;
  out.input_resolution =
      static_cast<int>(ceil_scale(space.base_resolution, s.r_milli));
  out.stem_out_channels =
      space.stem_scale_width_out
          ? static_cast<int>(ceil_scale(space.stem_out_channels, s.w_milli))
          : space.stem_out_channels;

  int in_ch = out.stem_out_channels;
  out.stages.reserve(space.stages.size());
  for (std::size_t i = 0; i < space.stages.size(); ++i) {
    const StageSpec& spec = space.stages[i];
    const auto& blocks = base.stages[i].blocks;
    if (blocks.empty()) throw std::invalid_argument("empty stage in base arch");

    ScaledArch::Stage st;
    st.stride = spec.stride;
    st.in_channels = in_ch;
    st.out_channels =
        spec.scalable_width_out
            ? static_cast<int>(ceil_scale(spec.out_channels, s.w_milli))
            : spec.out_channels;

    const int n = spec.scalable_depth
                      ? static_cast<int>(ceil_scale(
                            static_cast<long long>(blocks.size()), s.d_milli))
                      : static_cast<int>(blocks.size());
    st.blocks = blocks;
    // Added blocks copy the structure of the last block; stride stays 1
    // (downsampling only in the stage's first block).
    while (static_cast<int>(st.blocks.size()) < n)
      st.blocks.push_back(blocks.back());

    in_ch = st.out_channels;
    out.stages.push_back(std::move(st));
  }
  return out;
}

std::vector<ScalingStrategy> enumerate_grid(const StrategyGrid& grid) {
  std::vector<ScalingStrategy> out;
  out.reserve(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.depth.count(); ++i)
    for (int j = 0; j < grid.width.count(); ++j)
      for (int k = 0; k < grid.resolution.count(); ++k)
        out.push_back({grid.depth.value_at(i), grid.width.value_at(j),
                       grid.resolution.value_at(k)});
  return out;
}

namespace {

BlockChoice random_choice(const StageSpec& spec, Rng& rng) {
  BlockChoice c;
  c.expand_rate = spec.expand_rates[rng.uniform_u64(spec.expand_rates.size())];
  c.kernel = spec.kernels[rng.uniform_u64(spec.kernels.size())];
  c.use_se = spec.se_options[rng.uniform_u64(spec.se_options.size())];
  return c;
}

}  // namespace

BaseArch random_base(const SearchSpace& space, Rng& rng) {
  BaseArch arch;
  arch.stages.reserve(space.stages.size());
  for (const StageSpec& spec : space.stages) {
    BaseArch::Stage st;
    const int n = rng.uniform_int(spec.n_min, spec.n_max);
    st.blocks.reserve(static_cast<std::size_t>(n));
    for (int b = 0; b < n; ++b) st.blocks.push_back(random_choice(spec, rng));
    arch.stages.push_back(std::move(st));
  }
  return arch;
}

BaseArch random_base(const SearchSpace& space, std::uint64_t seed) {
  Rng rng(seed);
  return random_base(space, rng);
}

BaseArch crossover(const BaseArch& a, const BaseArch& b, Rng& rng) {
  if (a.stages.size() != b.stages.size())
    throw std::invalid_argument("crossover parents from different spaces");
  BaseArch child;
  child.stages.reserve(a.stages.size());
  for (std::size_t i = 0; i < a.stages.size(); ++i)
    child.stages.push_back(rng.bernoulli(0.5) ? a.stages[i] : b.stages[i]);
  return child;
}

BaseArch mutate(const BaseArch& a, double rate, const SearchSpace& space,
                Rng& rng) {
  if (rate < 0.0 || rate > 1.0)
    throw std::invalid_argument("mutation rate must be in [0, 1]");
  BaseArch out = a;
  for (std::size_t i = 0; i < out.stages.size(); ++i) {
    const StageSpec& spec = space.stages[i];
    auto& blocks = out.stages[i].blocks;
    if (rng.bernoulli(rate)) {
      const int n = rng.uniform_int(spec.n_min, spec.n_max);
      while (static_cast<int>(blocks.size()) > n) blocks.pop_back();
      while (static_cast<int>(blocks.size()) < n)
        blocks.push_back(random_choice(spec, rng));
    }
    for (auto& blk : blocks)
      if (rng.bernoulli(rate)) blk = random_choice(spec, rng);
  }
  return out;
}

std::string arch_to_json(const BaseArch& arch) {
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();
  for (const auto& st : arch.stages) {
    nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
    for (const auto& b : st.blocks)
      blocks.push_back({{"e", b.expand_rate}, {"k", b.kernel}, {"se", b.use_se}});
    stages.push_back({{"blocks", std::move(blocks)}});
  }
  return nlohmann::ordered_json{{"stages", std::move(stages)}}.dump();
}

BaseArch arch_from_json(const std::string& json_text, const SearchSpace& space) {
  const auto j = nlohmann::json::parse(json_text);
  BaseArch arch;
  for (const auto& st : j.at("stages")) {
    BaseArch::Stage stage;
    for (const auto& b : st.at("blocks"))
      stage.blocks.push_back({b.at("e").get<int>(), b.at("k").get<int>(),
                              b.at("se").get<bool>()});
    arch.stages.push_back(std::move(stage));
  }
  if (arch.stages.size() != space.stages.size())
    throw std::invalid_argument("arch JSON does not match space");
  for (std::size_t i = 0; i < arch.stages.size(); ++i) {
    const auto& spec = space.stages[i];
    const int n = static_cast<int>(arch.stages[i].blocks.size());
    if (n < spec.n_min || n > spec.n_max)
      throw std::invalid_argument("arch JSON violates block-count range");
  }
  return arch;
}

std::uint64_t arch_hash(const BaseArch& arch) {
  const std::string text = arch_to_json(arch);
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace scalenas
