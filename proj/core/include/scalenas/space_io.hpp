#pragma once

#include <cstdint>
#include <string>

#include "scalenas/arch.hpp"
#include "scalenas/evaluator.hpp"
#include "scalenas/mcea.hpp"
#include "scalenas/supernet.hpp"

namespace scalenas {

// JSON persistence for search spaces and run configuration. Grid axes are
// written as reals in multiplier units and parsed to exact thousandths.

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

SearchSpace space_from_json_text(const std::string& text);
std::string space_to_json_text(const SearchSpace& space);
SearchSpace load_space(const std::string& path);

struct EvaluatorConfig {
  std::string kind = "surrogate";  // "surrogate" | "toy-supernet"
  SurrogateConfig surrogate;
  SupernetConfig supernet;
  int train_steps = 1500;
  std::string sampler = "hss";     // "hss" | "uniform" (training draws)
  std::string weights_file;        // optional pre-trained supernet state
};

struct RunConfig {
  std::string space_file;
  SearchSpace space;  // loaded from space_file (resolved against the config)
  EvaluatorConfig evaluator;
  MceaConfig mcea;
  long long budget_samples = 100'000;
  std::string hss_weights = "equal";  // "equal" | "grid-size"
  long long draws = 750'000;
  std::string out_dir = "out";
  std::uint64_t seed = 0;  // master seed: search and sampling streams
};

// Parses the config and loads its space file (relative paths resolve against
// the config file's directory). mcea.seed follows the master seed.
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json_text(const std::string& text,
                                    const std::string& base_dir);

}  // namespace scalenas
