// Seeded repetition experiments on the synthetic daily + weekly series. The
// claims are majorities over seeds, not per-seed guarantees.

#include <gtest/gtest.h>

#include <algorithm>

#include "stlf/pipeline.hpp"
#include "synthetic.hpp"

namespace stlf::pipeline {
namespace {

struct Task {
  LoadSeries history;
  std::vector<double> actual;
};

Task task(std::uint64_t seed) {
  const auto series = testing::synthetic_load({.days = 200, .seed = seed});
  return {head_days(series, 199), day_values(series, 199)};
}

PipelineConfig base(std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.seed = seed;
  cfg.mix_index = 0;
  cfg.swarm.particles = 5;
  cfg.swarm.iterations = 5;
  cfg.probe_epochs = 2;
  return cfg;
}

TEST(Experiment, DecomposedSwarmVariantNoWorseThanPlainLstm) {
  int no_worse = 0;
  std::string log;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto t = task(seed);
    const std::vector<Variant> vs = {Variant::lstm, Variant::emd_pso_lstm};
    const auto table = compare_methods(t.history, t.actual, vs, base(seed));
    ASSERT_TRUE(table.rows[0].result && table.rows[1].result);
    const double lstm = table.rows[0].result->mape->mean;
    const double hybrid = table.rows[1].result->mape->mean;
    if (hybrid <= lstm) ++no_worse;
    log += "seed " + std::to_string(seed) + ": lstm " + std::to_string(lstm) + " emd_pso_lstm " +
           std::to_string(hybrid) + "\n";
  }
  std::cout << log;
  EXPECT_GE(no_worse, 3) << log;
}

TEST(Experiment, WeekLongWindowRanksInTopTwo) {
  int top_two = 0;
  std::string log;
  const std::vector<std::size_t> ns = {1, 3, 7, 14};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto t = task(seed);
    auto cfg = base(seed);
    cfg.variant = Variant::lstm;
    const auto table = sweep_input_pattern(t.history, t.actual, ns, cfg);
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      ASSERT_TRUE(table.rows[i].result) << table.rows[i].error;
      ranked.emplace_back(table.rows[i].result->mape->mean, ns[i]);
    }
    std::sort(ranked.begin(), ranked.end());
    if (ranked[0].second == 7 || ranked[1].second == 7) ++top_two;
    log += "seed " + std::to_string(seed) + ":";
    for (const auto& [m, n] : ranked) log += " " + std::to_string(n) + "-1=" + std::to_string(m);
    log += "\n";
  }
  std::cout << log;
  EXPECT_GE(top_two, 3) << log;
}

}  // namespace
}  // namespace stlf::pipeline
