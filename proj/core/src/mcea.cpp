#include "scalenas/mcea.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_set>
#include <utility>

namespace scalenas {

namespace {

constexpr int kMaxBaseDraws = 10'000;
constexpr int kOffspringRetries = 50;

long long base_flops(const BaseArch& base, const SearchSpace& space) {
  return count_flops(apply_strategy(base, ScalingStrategy::identity(), space))
      .total_flops;
}

void require_budgets(const SearchSpace& space) {
  for (const auto& g : space.grids)
    if (g.flops_budget <= 0)
      throw std::invalid_argument(
          "search space has no attached budget plan (see with_budgets)");
}

ScalingStrategy stage0_point(const SearchSpace& space) {
  const StrategyGrid& g = space.grids.at(0);
  if (g.size() != 1)
    throw std::invalid_argument("stage-0 grid must be a single point");
  return {g.depth.value_at(0), g.width.value_at(0), g.resolution.value_at(0)};
}

// A population member with its cached identity and fitness-stage accuracies.
struct Individual {
  BaseArch arch;
  std::string json;
  std::uint64_t hash = 0;
  long long flops0 = 0;  // FLOPs at the stage-0 point
  double fitness = 0.0;
  std::vector<double> stage_accs;  // index j-1 for stage j
  // Multi-objective bookkeeping (rank 0 = first front).
  int rank = 0;
  double crowding = 0.0;
};

double population_std(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  const double mean =
      std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

BaseArch random_feasible_base(const SearchSpace& space, Rng& rng,
                              double tolerance) {
  const long long f0 = space.grids.at(0).flops_budget;
  for (int i = 0; i < kMaxBaseDraws; ++i) {
    BaseArch b = random_base(space, rng);
    if (within_budget(base_flops(b, space), f0, tolerance)) return b;
  }
  throw InfeasibleSpaceError(
      0, f0,
      "no base model fell within the stage-0 budget band in 10000 draws");
}

struct InitResult {
  std::vector<ScalingStrategy> strategies;  // size M+1
  std::vector<BaseArch> bases;              // the K drawn bases
};

InitResult init_strategies_impl(const SearchSpace& space,
                                const Evaluator& evaluator, int K, Rng& rng,
                                double tolerance, EvalCache& cache,
                                EvalLogger* logger) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  require_budgets(space);
  space.validate();

  InitResult out;
  out.bases.reserve(static_cast<std::size_t>(K));
  std::vector<std::uint64_t> hashes;
  for (int k = 0; k < K; ++k) {
    out.bases.push_back(random_feasible_base(space, rng, tolerance));
    hashes.push_back(arch_hash(out.bases.back()));
  }

  out.strategies.resize(space.grids.size());
  out.strategies[0] = stage0_point(space);
  for (int j = 1; j <= space.max_stage(); ++j) {
    const StrategyGrid& grid = space.grids[static_cast<std::size_t>(j)];
    const long long budget = grid.flops_budget;
    bool found = false;
    ScalingStrategy best{};
    double best_acc = 0.0;
    long double best_flops = 0.0L;
    for (const ScalingStrategy& s : enumerate_grid(grid)) {
      long double mean_flops = 0.0L;
      for (int k = 0; k < K; ++k)
        mean_flops += static_cast<long double>(
            count_flops(apply_strategy(out.bases[static_cast<std::size_t>(k)],
                                       s, space))
                .total_flops);
      mean_flops /= K;
      const long double dist =
          mean_flops >= budget ? mean_flops - budget : budget - mean_flops;
      if (dist > static_cast<long double>(tolerance) * budget) continue;
      double mean_acc = 0.0;
      for (int k = 0; k < K; ++k)
        mean_acc += cache
                        .eval(out.bases[static_cast<std::size_t>(k)],
                              hashes[static_cast<std::size_t>(k)], s, j,
                              /*iteration=*/0, space, evaluator, logger)
                        .acc;
      mean_acc /= K;
      const bool better =
          !found || mean_acc > best_acc ||
          (mean_acc == best_acc &&
           (mean_flops < best_flops ||
            (mean_flops == best_flops && s < best)));
      if (better) {
        found = true;
        best = s;
        best_acc = mean_acc;
        best_flops = mean_flops;
      }
    }
    if (!found)
      throw InfeasibleSpaceError(
          j, budget,
          "no stage-" + std::to_string(j) +
              " strategy lands in the budget band averaged over the initial "
              "bases");
    out.strategies[static_cast<std::size_t>(j)] = best;
  }
  return out;
}

// --- multi-objective helpers -------------------------------------------

bool dominates(const Individual& a, const Individual& b) {
  const bool ge = a.fitness >= b.fitness && a.flops0 <= b.flops0;
  return ge && (a.fitness > b.fitness || a.flops0 < b.flops0);
}

void assign_fronts(std::vector<Individual>& pool) {
  const std::size_t n = pool.size();
  std::vector<int> dominated_by(n, 0);
  std::vector<std::vector<std::size_t>> dominating(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (i == k) continue;
      if (dominates(pool[i], pool[k])) dominating[i].push_back(k);
      else if (dominates(pool[k], pool[i])) ++dominated_by[i];
    }
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < n; ++i)
    if (dominated_by[i] == 0) {
      pool[i].rank = 0;
      front.push_back(i);
    }
  int rank = 0;
  while (!front.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : front)
      for (std::size_t k : dominating[i])
        if (--dominated_by[k] == 0) {
          pool[k].rank = rank + 1;
          next.push_back(k);
        }
    ++rank;
    front = std::move(next);
  }
  // Crowding distance per front over (fitness, flops0).
  std::vector<std::vector<std::size_t>> fronts(static_cast<std::size_t>(rank));
  for (std::size_t i = 0; i < n; ++i) {
    pool[i].crowding = 0.0;
    fronts[static_cast<std::size_t>(pool[i].rank)].push_back(i);
  }
  for (auto& f : fronts) {
    if (f.size() < 3) {
      for (std::size_t i : f)
        pool[i].crowding = std::numeric_limits<double>::infinity();
      continue;
    }
    auto sweep = [&](auto key) {
      std::sort(f.begin(), f.end(), [&](std::size_t a, std::size_t b) {
        return key(pool[a]) < key(pool[b]);
      });
      const double lo = key(pool[f.front()]), hi = key(pool[f.back()]);
      pool[f.front()].crowding = pool[f.back()].crowding =
          std::numeric_limits<double>::infinity();
      if (hi <= lo) return;
      for (std::size_t i = 1; i + 1 < f.size(); ++i)
        pool[f[i]].crowding +=
            (key(pool[f[i + 1]]) - key(pool[f[i - 1]])) / (hi - lo);
    };
    sweep([](const Individual& x) { return x.fitness; });
    sweep([](const Individual& x) { return static_cast<double>(x.flops0); });
  }
}

// Deterministic total orders. Scalar mode: fitness desc, canonical JSON asc.
// Multi-objective mode: front asc, crowding desc, JSON asc.
bool scalar_before(const Individual& a, const Individual& b) {
  if (a.fitness != b.fitness) return a.fitness > b.fitness;
  return a.json < b.json;
}
bool pareto_before(const Individual& a, const Individual& b) {
  if (a.rank != b.rank) return a.rank < b.rank;
  if (a.crowding != b.crowding) return a.crowding > b.crowding;
  return a.json < b.json;
}

}  // namespace

void MceaConfig::validate() const {
  if (M < 1) throw std::invalid_argument("M must be >= 1");
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (P < 1) throw std::invalid_argument("P must be >= 1");
  if (N < 0) throw std::invalid_argument("N must be >= 0");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0))
    throw std::invalid_argument("mutation_rate must lie in [0, 1]");
  if (!(budget_tolerance > 0.0 && budget_tolerance < 1.0))
    throw std::invalid_argument("budget_tolerance must lie in (0, 1)");
  if (!pi.empty()) {
    if (static_cast<int>(pi.size()) != M)
      throw std::invalid_argument("pi must have one weight per scaling stage");
    double sum = 0.0;
    for (double w : pi) {
      if (w < 0.0) throw std::invalid_argument("pi weights must be >= 0");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("pi weights must sum to 1");
  }
}

std::vector<double> MceaConfig::weights() const {
  if (!pi.empty()) return pi;
  return std::vector<double>(static_cast<std::size_t>(M), 1.0 / M);
}

InfeasibleSpaceError::InfeasibleSpaceError(int stage_, long long budget_,
                                           const std::string& what_)
    : std::runtime_error("stage " + std::to_string(stage_) + " (budget " +
                         std::to_string(budget_) + "): " + what_),
      stage(stage_),
      budget(budget_) {}

EvalCache::Entry EvalCache::eval(const BaseArch& base, std::uint64_t base_hash,
                                 const ScalingStrategy& s, int stage,
                                 int iteration, const SearchSpace& space,
                                 const Evaluator& evaluator,
                                 EvalLogger* logger) {
  std::uint64_t key = base_hash;
  key = hash_combine(key, static_cast<std::uint64_t>(s.d_milli));
  key = hash_combine(key, static_cast<std::uint64_t>(s.w_milli));
  key = hash_combine(key, static_cast<std::uint64_t>(s.r_milli));
  if (auto it = map_.find(key); it != map_.end()) return it->second;
  Entry e;
  e.flops = count_flops(apply_strategy(base, s, space)).total_flops;
  e.acc = evaluator.evaluate(base, s);
  map_.emplace(key, e);
  if (logger != nullptr)
    logger->log({iteration, stage, base_hash, s, e.flops, e.acc});
  return e;
}

double mcea_objective(const BaseArch& base,
                      const std::vector<ScalingStrategy>& strategies,
                      const std::vector<double>& weights,
                      const SearchSpace& space, const Evaluator& evaluator,
                      EvalCache& cache, int iteration, EvalLogger* logger) {
  if (strategies.size() != weights.size() + 1)
    throw std::invalid_argument("strategies must hold stages 0..M");
  const std::uint64_t h = arch_hash(base);
  double j_val = 0.0;
  for (std::size_t j = 1; j < strategies.size(); ++j)
    j_val += weights[j - 1] * cache
                                  .eval(base, h, strategies[j],
                                        static_cast<int>(j), iteration, space,
                                        evaluator, logger)
                                  .acc;
  return j_val;
}

std::vector<ScalingStrategy> init_strategies(const SearchSpace& space,
                                             const Evaluator& evaluator, int K,
                                             std::uint64_t rng_seed,
                                             double tolerance) {
  Rng rng(rng_seed);
  EvalCache cache;
  return init_strategies_impl(space, evaluator, K, rng, tolerance, cache,
                              nullptr)
      .strategies;
}

BaseStepResult base_step(const SearchState& state, const SearchSpace& space,
                         const Evaluator& evaluator, const MceaConfig& config,
                         Rng& rng, EvalCache& cache, EvalLogger* logger) {
  config.validate();
  require_budgets(space);
  if (static_cast<int>(state.strategies.size()) != config.M + 1)
    throw std::invalid_argument("state must carry strategies for stages 0..M");
  const std::vector<double> w = config.weights();
  const int t = state.iteration + 1;
  const long long f0 = space.grids.at(0).flops_budget;

  auto make_individual = [&](BaseArch a) {
    Individual ind;
    ind.arch = std::move(a);
    ind.json = arch_to_json(ind.arch);
    ind.hash = arch_hash(ind.arch);
    ind.flops0 = base_flops(ind.arch, space);
    ind.stage_accs.resize(static_cast<std::size_t>(config.M));
    ind.fitness = 0.0;
    for (int j = 1; j <= config.M; ++j) {
      const double acc =
          cache
              .eval(ind.arch, ind.hash, state.strategies[static_cast<std::size_t>(j)],
                    j, t, space, evaluator, logger)
              .acc;
      ind.stage_accs[static_cast<std::size_t>(j - 1)] = acc;
      ind.fitness += w[static_cast<std::size_t>(j - 1)] * acc;
    }
    return ind;
  };

  std::vector<Individual> pop;
  pop.reserve(static_cast<std::size_t>(config.P));
  pop.push_back(make_individual(state.alpha));
  for (int i = 1; i < config.P; ++i)
    pop.push_back(make_individual(
        random_feasible_base(space, rng, config.budget_tolerance)));

  const bool mo = config.multi_objective;
  auto before = [mo](const Individual& a, const Individual& b) {
    return mo ? pareto_before(a, b) : scalar_before(a, b);
  };
  if (mo) assign_fronts(pop);

  auto tournament = [&](const std::vector<Individual>& p) -> const Individual& {
    const auto i = static_cast<std::size_t>(rng.uniform_u64(p.size()));
    const auto k = static_cast<std::size_t>(rng.uniform_u64(p.size()));
    return before(p[i], p[k]) ? p[i] : p[k];
  };

  // Figure-6 accuracy records: the surviving population after each
  // generation. Early iterations keep weak random seeds alive for several
  // generations (wide spread); once the incumbent is strong its lineage
  // sweeps the population immediately (tight spread).
  std::vector<std::vector<double>> records(static_cast<std::size_t>(config.M));
  for (int gen = 0; gen < config.N; ++gen) {
    std::vector<Individual> offspring;
    offspring.reserve(static_cast<std::size_t>(config.P));
    for (int i = 0; i < config.P; ++i) {
      std::optional<BaseArch> child;
      const BaseArch* last_parent = nullptr;
      for (int attempt = 0; attempt <= kOffspringRetries; ++attempt) {
        const Individual& p1 = tournament(pop);
        const Individual& p2 = tournament(pop);
        last_parent = &p1.arch;
        BaseArch c = mutate(crossover(p1.arch, p2.arch, rng),
                            config.mutation_rate, space, rng);
        if (within_budget(base_flops(c, space), f0, config.budget_tolerance)) {
          child = std::move(c);
          break;
        }
      }
      offspring.push_back(make_individual(child ? std::move(*child)
                                                : *last_parent));
    }
    pop.insert(pop.end(), std::make_move_iterator(offspring.begin()),
               std::make_move_iterator(offspring.end()));
    if (mo) assign_fronts(pop);
    std::sort(pop.begin(), pop.end(), before);
    // Elitist truncation, distinct archs first: clones add no information,
    // so duplicates fill the population only once distinct ones run out.
    std::vector<Individual> kept, dupes;
    std::unordered_set<std::uint64_t> seen;
    for (Individual& ind : pop) {
      if (kept.size() == static_cast<std::size_t>(config.P)) break;
      if (seen.insert(ind.hash).second)
        kept.push_back(std::move(ind));
      else
        dupes.push_back(std::move(ind));
    }
    for (Individual& ind : dupes) {
      if (kept.size() == static_cast<std::size_t>(config.P)) break;
      kept.push_back(std::move(ind));
    }
    pop = std::move(kept);
    std::sort(pop.begin(), pop.end(), before);
    for (const Individual& ind : pop)
      for (int j = 0; j < config.M; ++j)
        records[static_cast<std::size_t>(j)].push_back(
            ind.stage_accs[static_cast<std::size_t>(j)]);
  }

  BaseStepResult out;
  const Individual* best = &pop.front();
  for (const Individual& ind : pop)
    if (scalar_before(ind, *best)) best = &ind;
  out.alpha = best->arch;
  out.fitness = best->fitness;
  out.stage_accs = std::move(records);
  out.stage_acc_std.assign(static_cast<std::size_t>(config.M), 0.0);
  for (int j = 0; j < config.M; ++j)
    out.stage_acc_std[static_cast<std::size_t>(j)] =
        population_std(out.stage_accs[static_cast<std::size_t>(j)]);
  return out;
}

ScalingStrategy strategy_step(const SearchState& state,
                              const SearchSpace& space,
                              const Evaluator& evaluator,
                              const MceaConfig& config, int stage,
                              EvalCache& cache, EvalLogger* logger) {
  config.validate();
  require_budgets(space);
  if (stage < 1 || stage > space.max_stage())
    throw std::invalid_argument("strategy_step applies to stages 1..M");
  const StrategyGrid& grid = space.grids[static_cast<std::size_t>(stage)];
  const long long budget = grid.flops_budget;
  const std::uint64_t h = arch_hash(state.alpha);
  const int t = state.iteration == 0 ? 1 : state.iteration;
  const std::vector<ScalingStrategy> points = enumerate_grid(grid);

  auto pick = [&](double tol) -> std::optional<ScalingStrategy> {
    std::optional<ScalingStrategy> best;
    double best_acc = 0.0;
    long long best_flops = 0;
    for (const ScalingStrategy& s : points) {
      const long long flops =
          count_flops(apply_strategy(state.alpha, s, space)).total_flops;
      if (!within_budget(flops, budget, tol)) continue;
      const double acc =
          cache.eval(state.alpha, h, s, stage, t, space, evaluator, logger).acc;
      const bool better = !best || acc > best_acc ||
                          (acc == best_acc &&
                           (flops < best_flops ||
                            (flops == best_flops && s < *best)));
      if (better) {
        best = s;
        best_acc = acc;
        best_flops = flops;
      }
    }
    return best;
  };

  if (auto s = pick(config.budget_tolerance)) return *s;
  const double widened = std::min(2.0 * config.budget_tolerance, 0.99);
  if (auto s = pick(widened)) return *s;
  throw InfeasibleSpaceError(stage, budget,
                             "no grid strategy lies in the budget band for "
                             "the current base, even after widening");
}

SearchState run_mcea(const SearchSpace& space, const Evaluator& evaluator,
                     const MceaConfig& config, EvalLogger* logger) {
  config.validate();
  require_budgets(space);
  if (config.M != space.max_stage())
    throw std::invalid_argument("config.M must match the space's max stage");
  const std::vector<double> w = config.weights();

  Rng rng(config.seed);
  EvalCache cache;
  InitResult init = init_strategies_impl(space, evaluator, config.K, rng,
                                         config.budget_tolerance, cache,
                                         logger);

  SearchState st;
  st.strategies = init.strategies;
  // alpha^(0): the fittest of the K initial bases under S^(0).
  {
    const Individual* best = nullptr;
    std::vector<Individual> inds;
    inds.reserve(init.bases.size());
    for (BaseArch& b : init.bases) {
      Individual ind;
      ind.arch = std::move(b);
      ind.json = arch_to_json(ind.arch);
      ind.hash = arch_hash(ind.arch);
      ind.fitness = 0.0;
      for (int j = 1; j <= config.M; ++j)
        ind.fitness +=
            w[static_cast<std::size_t>(j - 1)] *
            cache
                .eval(ind.arch, ind.hash,
                      st.strategies[static_cast<std::size_t>(j)], j, 0, space,
                      evaluator, logger)
                .acc;
      inds.push_back(std::move(ind));
    }
    for (const Individual& ind : inds)
      if (best == nullptr || scalar_before(ind, *best)) best = &ind;
    st.alpha = best->arch;
  }
  st.iteration = 0;
  st.best_alpha = st.alpha;
  st.best_strategies = st.strategies;
  // S^(0) is feasible in the K-base mean, not necessarily under alpha^(0),
  // so the initial tuple is never a best-so-far candidate.
  st.best_objective = -std::numeric_limits<double>::infinity();

  for (int t = 1; t <= config.T; ++t) {
    BaseStepResult bs = base_step(st, space, evaluator, config, rng, cache,
                                  logger);
    st.alpha = bs.alpha;
    st.iteration = t;
    for (int j = 1; j <= config.M; ++j)
      st.strategies[static_cast<std::size_t>(j)] =
          strategy_step(st, space, evaluator, config, j, cache, logger);

    IterationRecord rec;
    rec.t = t;
    rec.alpha = st.alpha;
    rec.strategies = st.strategies;
    rec.objective = mcea_objective(st.alpha, st.strategies, w, space,
                                   evaluator, cache, t, logger);
    rec.stage_accs = std::move(bs.stage_accs);
    rec.stage_acc_std = std::move(bs.stage_acc_std);
    if (rec.objective > st.best_objective) {
      st.best_objective = rec.objective;
      st.best_alpha = st.alpha;
      st.best_strategies = st.strategies;
    }
    rec.best_objective = st.best_objective;
    st.iterations.push_back(std::move(rec));
  }
  return st;
}

}  // namespace scalenas
