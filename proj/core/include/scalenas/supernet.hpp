#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scalenas/evaluator.hpp"
#include "scalenas/sampler.hpp"

namespace scalenas {

// Toy weight-sharing super-supernet: a residual tanh multilayer network over
// a fixed synthetic Gaussian-mixture classification task. A path uses the
// first k layers and the first c units per layer (plus the first f input
// features), so shared prefixes of two paths see identical parameters.
//
// Path mapping from a scaled architecture (documented modeling choice):
//   k (layers)   <- total scaled block count, linearly mapped onto [2, l_max]
//   c (units)    <- width_base * (scaled channel sum / unscaled channel sum)
//   f (features) <- feat_base * (input resolution / base resolution)

struct SupernetConfig {
  int l_max = 10;        // residual layers in the store
  int w_max = 32;        // units per layer in the store
  int f_max = 32;        // synthetic feature dimension
  int classes = 10;
  int n_train = 5000;
  int n_val = 1000;
  double data_mean_scale = 0.9;  // class-mean spread of the mixture
  double data_noise = 1.0;       // within-class standard deviation
  std::uint64_t data_seed = 11;
  std::uint64_t init_seed = 17;
  double lr0 = 0.5;
  double momentum = 0.9;
  int batch = 64;
  int width_base = 16;
  int feat_base = 16;
};

struct TrainingDivergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PathSlice {
  int k = 1, c = 1, f = 1;
  auto operator<=>(const PathSlice&) const = default;
};

class ToySupernet final : public Evaluator {
 public:
  ToySupernet(const SearchSpace& space, const SupernetConfig& config);

  // One gradient step per drawn event, through that event's path slice only;
  // cross-entropy loss, momentum SGD, cosine learning-rate decay. Aborts via
  // TrainingDivergedError if the loss exceeds 10x its initial value. The net
  // freezes when training completes.
  void train(const std::function<SampleEvent(Rng&)>& sampler, int steps,
             Rng& rng);

  double evaluate(const BaseArch& base,
                  const ScalingStrategy& s) const override;

  // Fraction correct on the validation split for an explicit slice.
  double evaluate_slice(const PathSlice& slice) const;

  PathSlice map_path(const BaseArch& base, const ScalingStrategy& s) const;

  bool frozen() const { return frozen_; }
  const std::vector<long long>& visit_counts() const { return visit_counts_; }

  // Versioned little-endian binary state; load() checks that the space the
  // caller supplies structurally matches the one the net was built against.
  void save(const std::string& path) const;
  static ToySupernet load(const std::string& path, const SearchSpace& space);

  const SupernetConfig& config() const { return cfg_; }

 private:
  void init_weights();
  void build_dataset();
  double train_step(const Eigen::MatrixXd& X, const std::vector<int>& y,
                    const PathSlice& p, double lr);
  std::uint64_t space_fingerprint() const;

  const SearchSpace& space_;
  SupernetConfig cfg_;
  bool frozen_ = false;

  // Depth-mapping range computed from the space and its grids.
  int blocks_min_ = 1, blocks_max_ = 1;
  long long base_channel_sum_ = 1;

  Eigen::MatrixXd w_in_;                // w_max x f_max
  std::vector<Eigen::MatrixXd> w_mid_;  // l_max of w_max x w_max
  Eigen::MatrixXd w_out_;               // classes x w_max
  Eigen::VectorXd b_out_;               // classes
  Eigen::MatrixXd v_in_, v_out_;        // momentum buffers
  std::vector<Eigen::MatrixXd> v_mid_;
  Eigen::VectorXd v_bout_;

  Eigen::MatrixXd x_train_, x_val_;     // rows = examples
  std::vector<int> y_train_, y_val_;

  std::vector<long long> visit_counts_;
};

}  // namespace scalenas
