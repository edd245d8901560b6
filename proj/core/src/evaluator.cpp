#include "scalenas/evaluator.hpp"

#include <cmath>
#include <stdexcept>

namespace scalenas {

namespace {

// Pure hash -> uniform double in [0, 1).
double hash_uniform(std::uint64_t h) {
  // final SplitMix64 avalanche
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double hash_normal(std::uint64_t h) {
  const double u1 = 1.0 - hash_uniform(h);
  const double u2 = hash_uniform(hash_combine(h, 0x5bf03e9ad1c4f2a7ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

SurrogateModel::SurrogateModel(const SearchSpace& space,
                               const SurrogateConfig& config)
    : space_(space), cfg_(config) {
  if (cfg_.noise_sigma < 0.0)
    throw std::invalid_argument("noise sigma must be >= 0");
  Rng rng(hash_combine(kFnvOffset, cfg_.seed));
  double norm = 0.0;
  for (const StageSpec& spec : space.stages) {
    StageTable t;
    t.n_max = spec.n_max;
    t.weight = rng.uniform(0.5, 1.0);
    const std::size_t combos = spec.choices_per_block();
    t.utility.reserve(combos);
    for (std::size_t i = 0; i < combos; ++i)
      t.utility.push_back(rng.uniform(0.25, 1.0));
    for (double u : t.utility) t.max_utility = std::max(t.max_utility, u);
    tables_.push_back(std::move(t));
    // The per-stage maximum of the position-decayed block sum.
    double decay_sum = 0.0, decay = 1.0;
    for (int b = 0; b < spec.n_max; ++b, decay *= 0.7) decay_sum += decay;
    norm += tables_.back().weight * tables_.back().max_utility * decay_sum;
  }
  score_norm_ = norm > 0.0 ? norm : 1.0;
}

double SurrogateModel::choice_utility(std::size_t stage,
                                      const BlockChoice& b) const {
  const StageSpec& spec = space_.stages[stage];
  std::size_t ei = 0, ki = 0, si = 0;
  while (ei < spec.expand_rates.size() && spec.expand_rates[ei] != b.expand_rate)
    ++ei;
  while (ki < spec.kernels.size() && spec.kernels[ki] != b.kernel) ++ki;
  while (si < spec.se_options.size() && spec.se_options[si] != b.use_se) ++si;
  if (ei == spec.expand_rates.size() || ki == spec.kernels.size() ||
      si == spec.se_options.size())
    throw std::invalid_argument("block choice outside the stage operator set");
  const std::size_t idx =
      (ei * spec.kernels.size() + ki) * spec.se_options.size() + si;
  return tables_[stage].utility[idx];
}

double SurrogateModel::base_score(const BaseArch& base) const {
  if (base.stages.size() != tables_.size())
    throw std::invalid_argument("base arch does not match surrogate space");
  double score = 0.0;
  for (std::size_t i = 0; i < base.stages.size(); ++i) {
    double decay = 1.0;
    for (const BlockChoice& b : base.stages[i].blocks) {
      score += tables_[i].weight * choice_utility(i, b) * decay;
      decay *= 0.7;
    }
  }
  return score / score_norm_;
}

double SurrogateModel::evaluate(const BaseArch& base,
                                const ScalingStrategy& s) const {
  const double score = base_score(base);
  const double resp =
      cfg_.beta_d * (1.0 - std::exp(-cfg_.kappa_d * (s.d() - 1.0))) +
      cfg_.beta_w * (1.0 - std::exp(-cfg_.kappa_w * (s.w() - 1.0))) +
      cfg_.beta_r * (1.0 - std::exp(-cfg_.kappa_r * (s.r() - 1.0)));
  double raw = cfg_.offset + cfg_.base_gain * score + resp +
               cfg_.interaction * score * resp;
  if (cfg_.noise_sigma > 0.0) {
    std::uint64_t h = hash_combine(kFnvOffset, cfg_.seed);
    h = hash_combine(h, arch_hash(base));
    h = hash_combine(h, static_cast<std::uint64_t>(s.d_milli));
    h = hash_combine(h, static_cast<std::uint64_t>(s.w_milli));
    h = hash_combine(h, static_cast<std::uint64_t>(s.r_milli));
    raw += cfg_.noise_sigma * hash_normal(h);
  }
  return logistic(raw);
}

}  // namespace scalenas
