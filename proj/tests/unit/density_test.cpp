#include <cmath>
#include <vector>

#include "doctest.h"
#include "scalenas/density.hpp"
#include "scalenas/rng.hpp"

using namespace scalenas;

namespace {

// Log-normal clump centered at 2^center_log2 with spread sigma (log2 units).
void add_clump(std::vector<long long>& out, double center_log2, double sigma,
               int n, Rng& rng) {
  for (int i = 0; i < n; ++i) {
    const double v = center_log2 + sigma * rng.normal();
    out.push_back(static_cast<long long>(std::llround(std::exp2(v))));
  }
}

}  // namespace

TEST_CASE("a single clump yields one mode near its center") {
  Rng rng(1);
  std::vector<long long> samples;
  add_clump(samples, 20.0, 0.15, 20000, rng);
  const ModeReport rep = detect_flops_modes(samples);
  REQUIRE(rep.modes.size() == 1);
  CHECK(std::log2(rep.modes[0]) == doctest::Approx(20.0).epsilon(0.02));
}

TEST_CASE("well-separated clumps yield one mode each") {
  Rng rng(2);
  std::vector<long long> samples;
  add_clump(samples, 19.0, 0.12, 15000, rng);
  add_clump(samples, 20.0, 0.12, 15000, rng);
  add_clump(samples, 21.0, 0.12, 15000, rng);
  add_clump(samples, 22.0, 0.12, 15000, rng);
  const ModeReport rep = detect_flops_modes(samples);
  REQUIRE(rep.modes.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(std::log2(rep.modes[i]) ==
          doctest::Approx(19.0 + static_cast<double>(i)).epsilon(0.02));
  // Modes come back sorted ascending with a populated grid.
  CHECK(rep.grid_log2.size() == rep.density.size());
  CHECK(rep.grid_log2.size() >= 2);
}

TEST_CASE("clumps closer than the bandwidth merge into one mode") {
  Rng rng(3);
  std::vector<long long> samples;
  add_clump(samples, 20.00, 0.20, 15000, rng);
  add_clump(samples, 20.15, 0.20, 15000, rng);
  const ModeReport rep = detect_flops_modes(samples);
  CHECK(rep.modes.size() == 1);
}

TEST_CASE("low-prominence shoulders are not counted as modes") {
  Rng rng(4);
  std::vector<long long> samples;
  add_clump(samples, 20.0, 0.15, 30000, rng);
  add_clump(samples, 21.2, 0.15, 200, rng);  // under the 5% prominence floor
  DensityParams params;
  params.rel_prominence = 0.05;
  const ModeReport rep = detect_flops_modes(samples, params);
  CHECK(rep.modes.size() == 1);
}

TEST_CASE("mode detection is deterministic for identical inputs") {
  Rng rng(5);
  std::vector<long long> samples;
  add_clump(samples, 18.0, 0.1, 8000, rng);
  add_clump(samples, 20.5, 0.1, 8000, rng);
  const ModeReport a = detect_flops_modes(samples);
  const ModeReport b = detect_flops_modes(samples);
  CHECK(a.modes == b.modes);
  CHECK(a.density == b.density);
}
