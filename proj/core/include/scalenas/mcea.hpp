#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "scalenas/arch.hpp"
#include "scalenas/evaluator.hpp"
#include "scalenas/flops.hpp"
#include "scalenas/rng.hpp"

namespace scalenas {

// Markov chain-based evolution algorithm: alternating argmax updates of the
// base model (elitist evolutionary search under the stage-0 budget band) and
// of each stage's scaling strategy (grid search under that stage's budget),
// with per-iteration accuracy-spread telemetry.

struct MceaConfig {
  int M = 3;  // max scaling stage; must equal space.max_stage()
  int T = 8;  // alternation iterations
  int K = 20; // base models drawn for strategy initialization
  int P = 50; // population size
  int N = 40; // generations per base step (P offspring each)
  // Stage weights pi_j for j = 1..M; empty means uniform 1/M. The objective
  // is sum_j pi_j * ACC(alpha, S_j) over scaling stages only.
  std::vector<double> pi;
  double mutation_rate = 0.10;
  double budget_tolerance = 0.10;
  std::uint64_t seed = 0;
  // Non-dominated (accuracy, base-FLOPs) selection instead of scalar
  // tournament; the scalar objective still decides the returned base.
  bool multi_objective = false;

  // Throws std::invalid_argument on out-of-range fields.
  void validate() const;
  // pi resolved to a concrete length-M vector.
  std::vector<double> weights() const;
};

// Raised when a budget band admits no candidate (stage 0: no base model in
// 10,000 draws; stage j: empty feasible grid even after one 2x band widening).
struct InfeasibleSpaceError : std::runtime_error {
  int stage;
  long long budget;
  InfeasibleSpaceError(int stage_, long long budget_, const std::string& what_);
};

// One record per actual evaluator invocation (cache misses only).
struct EvalRecord {
  int iteration = 0;  // 0 = strategy initialization
  int stage = 0;
  std::uint64_t arch_hash = 0;
  ScalingStrategy strategy;
  long long flops = 0;
  double acc = 0.0;
};

class EvalLogger {
 public:
  virtual ~EvalLogger() = default;
  virtual void log(const EvalRecord& record) = 0;
};

// Memoizes evaluator calls by (base hash, strategy); evaluators are pure
// once frozen, so replay from the cache is exact.
class EvalCache {
 public:
  struct Entry {
    double acc = 0.0;
    long long flops = 0;
  };

  Entry eval(const BaseArch& base, std::uint64_t base_hash,
             const ScalingStrategy& s, int stage, int iteration,
             const SearchSpace& space, const Evaluator& evaluator,
             EvalLogger* logger);

  std::size_t size() const { return map_.size(); }

 private:
  struct KeyHash {
    std::size_t operator()(const std::uint64_t& k) const {
      return static_cast<std::size_t>(k);
    }
  };
  std::unordered_map<std::uint64_t, Entry, KeyHash> map_;
};

struct IterationRecord {
  int t = 0;
  BaseArch alpha;                            // alpha^(t)
  std::vector<ScalingStrategy> strategies;   // S^(t), index = stage, [0] fixed
  double objective = 0.0;                    // Eq.-(4) value of the tuple
  double best_objective = 0.0;               // running maximum (elitism)
  // Final-population accuracies per scaling stage (index j-1) and their
  // population standard deviations: the Figure-6 convergence telemetry.
  std::vector<std::vector<double>> stage_accs;
  std::vector<double> stage_acc_std;
};

struct SearchState {
  int iteration = 0;                         // latest completed t
  BaseArch alpha;                            // current alpha^(t)
  std::vector<ScalingStrategy> strategies;   // current S^(t), size M+1
  std::vector<IterationRecord> iterations;
  BaseArch best_alpha;                       // best tuple ever seen
  std::vector<ScalingStrategy> best_strategies;
  double best_objective = 0.0;
};

struct BaseStepResult {
  BaseArch alpha;
  double fitness = 0.0;                      // under the incumbent strategies
  std::vector<std::vector<double>> stage_accs;
  std::vector<double> stage_acc_std;
};

// sum_j pi_j * ACC(base, strategies[j]) for j = 1..M.
double mcea_objective(const BaseArch& base,
                      const std::vector<ScalingStrategy>& strategies,
                      const std::vector<double>& weights,
                      const SearchSpace& space, const Evaluator& evaluator,
                      EvalCache& cache, int iteration,
                      EvalLogger* logger = nullptr);

// Draw K bases in the stage-0 band; for each stage pick the grid strategy
// whose K-base mean FLOPs is in band and whose K-base mean accuracy is
// maximal (ties: lower mean FLOPs, then lexicographic (d, w, r)). Element 0
// of the result is the stage-0 grid's fixed point.
std::vector<ScalingStrategy> init_strategies(const SearchSpace& space,
                                             const Evaluator& evaluator, int K,
                                             std::uint64_t rng_seed,
                                             double tolerance = 0.10);

// Evolutionary update of the base under frozen strategies; the population is
// seeded with state.alpha plus random feasible bases. Telemetry comes from
// the final population.
BaseStepResult base_step(const SearchState& state, const SearchSpace& space,
                         const Evaluator& evaluator, const MceaConfig& config,
                         Rng& rng, EvalCache& cache,
                         EvalLogger* logger = nullptr);

// Grid-search update of stage j's strategy under the frozen base. Widens the
// band once by 2x (capped below 1) when empty, then raises
// InfeasibleSpaceError.
ScalingStrategy strategy_step(const SearchState& state,
                              const SearchSpace& space,
                              const Evaluator& evaluator,
                              const MceaConfig& config, int stage,
                              EvalCache& cache, EvalLogger* logger = nullptr);

// Full alternation: init_strategies, then T rounds of base_step followed by
// a strategy sweep, tracking the best tuple (non-decreasing objective).
SearchState run_mcea(const SearchSpace& space, const Evaluator& evaluator,
                     const MceaConfig& config, EvalLogger* logger = nullptr);

}  // namespace scalenas
