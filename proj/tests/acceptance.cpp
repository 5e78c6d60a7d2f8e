// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "cli_harness.hpp"
#include "gradcheck.hpp"
#include "signal_oracles.hpp"
#include "stlf/stlf.hpp"
#include "synthetic.hpp"

using namespace stlf;
using stlf::testing::Scratch;

namespace {

struct Outcome {
  enum class Status { pass, fail, skip } status = Status::fail;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Status::pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Status::fail, std::move(d)}; }
Outcome check(bool ok, std::string d) { return ok ? pass(std::move(d)) : fail(std::move(d)); }

std::string fmt(double v, int digits = 4) { return format_fixed(v, digits); }
std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

int failures = 0;

void run(int id, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = fail(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.status != Outcome::Status::skip && secs >= budget_s) {
    o.status = Outcome::Status::fail;
    o.detail += "; over time budget";
  }
  const char* tag = o.status == Outcome::Status::pass ? "PASS" : o.status == Outcome::Status::skip ? "SKIP" : "FAIL";
  if (o.status == Outcome::Status::fail) ++failures;
  std::cout << tag << "  [" << id << "] " << title << " (" << fmt(secs, 2) << " s, budget " << budget_s
            << " s): " << o.detail << std::endl;
}

// [1] Analytic LSTM gradients against central differences.
Outcome gradient_oracle() {
  const nn::NetDims dims{3, 4, 2, 1};
  double worst = -1e300;
  std::string where;
  std::size_t entries = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(1001, 0, seed));
    const auto params = testing::random_params<nn::LstmCell>(dims, rng);
    const auto seq = testing::random_matrix(rng, 3, 5);
    const nn::Vector target = testing::random_matrix(rng, 2, 1);
    const auto rep = testing::check_gradients(params, seq, target, 1e-5, 1e-4, 1e-6);
    entries += rep.entries;
    if (rep.worst_excess > worst) {
      worst = rep.worst_excess;
      where = "seed " + std::to_string(seed) + " " + rep.worst_tensor;
    }
  }
  return check(worst <= 0, std::to_string(entries) + " entries over 20 instances; worst excess over tolerance " +
                               sci(worst) + " at " + where);
}

// [2] Sum of IMFs and residual reproduces the input; IMFs satisfy the extrema condition.
Outcome emd_reconstruction() {
  std::vector<std::vector<double>> fixtures;
  Rng rng(2002);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> v(100 + rng.below(900));
    double walk = rng.uniform(-100, 100);
    const double noise = rng.uniform(0.1, 5);
    for (auto& x : v) {
      walk += rng.uniform(-1, 1);
      x = walk + rng.uniform(-noise, noise);
    }
    fixtures.push_back(std::move(v));
  }
  {
    fixtures.push_back(testing::sine(720, 24, 3.0));
    std::vector<double> chirp(1000), mix(1000), trend_sine(800);
    for (std::size_t t = 0; t < chirp.size(); ++t) {
      const double x = static_cast<double>(t);
      chirp[t] = std::sin(2 * std::numbers::pi * x * x / 20000.0);
      mix[t] = std::sin(2 * std::numbers::pi * x / 12) + 0.5 * std::sin(2 * std::numbers::pi * x / 90) + 0.001 * x;
    }
    for (std::size_t t = 0; t < trend_sine.size(); ++t) {
      trend_sine[t] = 100 + 0.05 * static_cast<double>(t) + 10 * std::sin(2 * std::numbers::pi * t / 24.0);
    }
    fixtures.push_back(chirp);
    fixtures.push_back(mix);
    fixtures.push_back(trend_sine);
    fixtures.push_back(testing::synthetic_load({.days = 60, .seed = 5}).values);
  }
  double worst = 0;
  std::size_t imfs = 0, violations = 0, capped = 0;
  for (const auto& v : fixtures) {
    const auto set = emd::decompose(v);
    worst = std::max(worst, testing::max_rel_reconstruction_error(v, set));
    for (std::size_t k = 0; k < set.imfs.size(); ++k) {
      ++imfs;
      const bool was_capped =
          std::find(set.capped_imfs.begin(), set.capped_imfs.end(), k) != set.capped_imfs.end();
      if (was_capped) {
        ++capped;
      } else if (!emd::satisfies_extrema_condition(set.imfs[k])) {
        ++violations;
      }
    }
  }
  return check(worst < 1e-8 && violations == 0,
               std::to_string(fixtures.size()) + " fixtures, " + std::to_string(imfs) +
                   " IMFs; max relative reconstruction error " + sci(worst) + "; condition violations " +
                   std::to_string(violations) + " (" + std::to_string(capped) + " capped IMFs exempt)");
}

// [3] Daily sine plus linear trend separates into IMF 1 and a monotone residual.
Outcome emd_separation() {
  const auto s = testing::sine(720, 24);
  std::vector<double> v(720);
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = s[t] + 0.005 * static_cast<double>(t);
  const auto set = emd::decompose(v);
  const double r = testing::pearson(set.imfs.at(0), s);
  const auto res_extrema = emd::find_extrema(set.residual).count();
  return check(r > 0.99 && res_extrema <= 2, "IMF 1 correlation with the sine " + fmt(r, 6) + "; residual extrema " +
                                                 std::to_string(res_extrema) + "; IMFs " +
                                                 std::to_string(set.imfs.size()));
}

// [4] Adam on theta^2.
Outcome adam_behaviour() {
  nn::AdamState s(1, 0.1);
  std::vector<double> theta = {5.0};
  std::size_t steps = 0;
  while (std::abs(theta[0]) >= 1e-2 && steps < 400) {
    const std::vector<double> g = {2 * theta[0]};
    nn::adam_step(theta, g, s);
    ++steps;
  }
  const bool converged = std::abs(theta[0]) < 1e-2;
  double worst_ratio_err = 0;
  for (double g : {1e-6, -1e-4, 0.3, -2.0, 75.0, -1e6}) {
    nn::AdamState first(1, 0.1);
    std::vector<double> x = {1.0};
    const std::vector<double> grad = {g};
    nn::adam_step(x, grad, first);
    worst_ratio_err = std::max(worst_ratio_err, std::abs(std::abs(1.0 - x[0]) / 0.1 - 1.0));
  }
  return check(converged && worst_ratio_err <= 0.01,
               "|theta| < 1e-2 after " + std::to_string(steps) + " steps (final " + sci(theta[0]) +
                   "); worst first-step deviation from alpha " + fmt(100 * worst_ratio_err, 3) + "%");
}

// [5] PSO on the 5-dim sphere.
Outcome pso_sphere() {
  int solved = 0;
  bool monotone = true;
  std::string bests;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    pso::SwarmConfig cfg;
    cfg.particles = 20;
    cfg.iterations = 50;
    cfg.lower = -5;
    cfg.upper = 5;
    cfg.v_max = 2.0;
    cfg.seed = seed;
    const auto r = pso::optimize(
        [](std::span<const double> x) {
          double acc = 0;
          for (double v : x) acc += v * v;
          return acc;
        },
        5, cfg);
    if (r.best_fitness < 1e-2) ++solved;
    for (std::size_t i = 1; i < r.history.size(); ++i) monotone = monotone && r.history[i] <= r.history[i - 1];
    bests += (bests.empty() ? "" : " ") + sci(r.best_fitness);
  }
  return check(solved >= 9 && monotone, std::to_string(solved) + "/10 seeds below 1e-2; histories monotone: " +
                                            (monotone ? "yes" : "no") + "; best " + bests);
}

// The end-to-end configuration: documented defaults except the mix index is
// chosen from IMF periods and the swarm is small enough for the time budget.
pipeline::PipelineConfig synthetic_config(std::uint64_t seed) {
  pipeline::PipelineConfig cfg;
  cfg.variant = pipeline::Variant::emd_pso_lstm;
  cfg.seed = seed;
  cfg.mix_index = 0;
  cfg.swarm.particles = 5;
  cfg.swarm.iterations = 5;
  cfg.probe_epochs = 2;
  return cfg;
}

// [6] Day-ahead forecast on the synthetic series beats same-day-last-week.
Outcome end_to_end() {
  int wins = 0;
  std::string rows;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto series = testing::synthetic_load({.days = 200, .seed = seed});
    const auto history = pipeline::head_days(series, 199);
    const auto actual = pipeline::day_values(series, 199);
    const auto cfg = synthetic_config(seed);
    const auto models = pipeline::fit(history, cfg);
    const auto r = pipeline::forecast_day(models, history, cfg, actual);
    const auto base = pipeline::evaluate_mape(pipeline::persistence_forecast(history), actual);
    if (r.mape->mean < base.mean) ++wins;
    rows += (rows.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) + " " + fmt(r.mape->mean, 2) +
            "% vs " + fmt(base.mean, 2) + "% (" + std::to_string(models.size()) + " parts)";
  }
  return check(wins >= 4, std::to_string(wins) + "/5 seeds beat persistence: " + rows);
}

// [7] Conditional check on a user-supplied year of hourly data.
Outcome dataset_protocol() {
  const char* path = std::getenv("STLF_EUNITE_CSV");
  if (!path || !*path) {
    return {Outcome::Status::skip, "set STLF_EUNITE_CSV to an 8760-hour timestamp,load CSV to run"};
  }
  Scratch s("acceptance_dataset");
  const auto series = load_csv(path);
  if (series.size() != 8760) return fail("expected 8760 hourly values, found " + std::to_string(series.size()));
  const std::string in = std::string("--input \"") + path + "\"";
  const auto d = testing::run_cli("--out-dir \"" + (s / "decompose").string() + "\" decompose " + in, s / "log");
  if (d.exit_code != 0) return fail("decompose exited " + std::to_string(d.exit_code) + ": " + d.output);
  const auto components = read_file(s / "decompose/components.csv");
  const auto header = components.substr(0, components.find('\n'));
  const auto imfs = static_cast<long>(std::count(header.begin(), header.end(), ',')) - 1;

  const std::size_t days = series.size() / kHoursPerDay;
  const std::size_t target = days >= 336 ? 336 : days;
  const auto c = testing::run_cli("--out-dir \"" + (s / "compare").string() + "\" compare " + in +
                                      " --target-day " + std::to_string(target),
                                  s / "log");
  if (c.exit_code != 0) return fail("compare exited " + std::to_string(c.exit_code) + ": " + c.output);
  const auto table = read_file(s / "compare/comparison.csv");
  const std::string expected_header =
      "hour,actual,lstm,lstm_mape,emd_lstm,emd_lstm_mape,pso_lstm,pso_lstm_mape,rnn,rnn_mape,gru,gru_mape,"
      "emd_pso_lstm,emd_pso_lstm_mape";
  const bool shaped = table.substr(0, table.find('\n')) == expected_header &&
                      std::count(table.begin(), table.end(), '\n') == 26;
  std::string emd_pso = "n/a";
  const auto summary = read_file(s / "compare/comparison_summary.csv");
  if (auto pos = summary.find("\nemd_pso_lstm,"); pos != std::string::npos) {
    emd_pso = summary.substr(pos + 14, summary.find(',', pos + 14) - pos - 14);
  }
  return check(imfs >= 8 && imfs <= 12 && shaped,
               std::to_string(imfs) + " IMFs (expected 10 +/- 2); six-variant table " + (shaped ? "ok" : "malformed") +
                   "; emd_pso_lstm mean MAPE on day " + std::to_string(target) + ": " + emd_pso +
                   "% (reference 1.43%, expected roughly 1.4-3%, not asserted)");
}

// [8] Two full train+predict runs from one manifest give identical forecasts.
Outcome determinism() {
  Scratch s("acceptance_determinism");
  const auto series = testing::synthetic_load({.days = 61, .seed = 8});
  s.write_series("history.csv", pipeline::head_days(series, 60));
  const std::string hist = "--input \"" + (s / "history.csv").string() + "\"";
  {
    std::string cfg = config::serialize(synthetic_config(42));
    cfg += "train.epochs=60\n";
    write_file_atomic(s / "run.cfg", cfg);
  }
  auto full_run = [&](const std::string& dir, const std::filesystem::path& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string common = "--config \"" + cfg.string() + "\" --out-dir \"" + (s / dir).string() + "\" ";
    const auto t = testing::run_cli(common + "train " + hist, s / "log");
    if (t.exit_code != 0) throw std::runtime_error("train failed: " + t.output);
    const auto p = testing::run_cli(common + "predict --models \"" + (s / dir / "models.bin").string() + "\" " + hist,
                                    s / "log");
    if (p.exit_code != 0) throw std::runtime_error("predict failed: " + p.output);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  const double first = full_run("a", s / "run.cfg");
  const double second = full_run("b", s / "a" / "train.manifest");
  const auto a = read_file(s / "a/forecast.csv");
  const auto b = read_file(s / "b/forecast.csv");
  const bool same_models = read_file(s / "a/models.bin") == read_file(s / "b/models.bin");
  return check(a == b && same_models && second < 2 * first,
               std::string("forecast.csv ") + (a == b ? "identical" : "DIFFERS") + " (" + std::to_string(a.size()) +
                   " bytes), models " + (same_models ? "identical" : "DIFFER") + "; runs took " + fmt(first, 2) +
                   " s and " + fmt(second, 2) + " s");
}

// [9] MAPE arithmetic against published table values.
Outcome metric_fidelity() {
  const std::vector<double> actual = {754.00};
  const std::vector<double> pred = {731.91};
  const double row = pipeline::evaluate_mape(pred, actual).mean;
  // Hourly MAPE column of the proposed method in the method comparison table.
  const std::vector<double> column = {1.77, 0.31, 2.68, 2.30, 1.64, 2.56, 0.53, 0.75, 1.92, 1.22, 0.60, 0.08,
                                      0.77, 2.58, 2.03, 0.94, 2.97, 2.45, 0.20, 1.29, 1.28, 1.49, 0.65, 1.26};
  // Mean through evaluate_mape: predictions 100 - m against an actual of 100.
  std::vector<double> hundred(column.size(), 100.0), p(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) p[i] = 100.0 - column[i];
  const double mean = pipeline::evaluate_mape(p, hundred).mean;
  return check(std::abs(row - 2.93) <= 0.01 && std::abs(mean - 1.43) <= 0.01,
               "754.00 vs 731.91 -> " + fmt(row, 4) + "% (table 2.93); column mean " + fmt(mean, 4) +
                   "% (table 1.43)");
}

}  // namespace

int main() {
  std::cout << "stlf acceptance run" << std::endl;
  run(1, "LSTM gradients match central differences", 10, gradient_oracle);
  run(2, "EMD reconstruction and IMF condition", 30, emd_reconstruction);
  run(3, "EMD separates sine from trend", 5, emd_separation);
  run(4, "Adam convergence and first-step size", 1, adam_behaviour);
  run(5, "PSO on the 5-dim sphere", 10, pso_sphere);
  run(6, "synthetic day-ahead forecast beats persistence", 600, end_to_end);
  run(7, "full-year dataset protocol (conditional)", 24 * 3600, dataset_protocol);
  run(8, "train+predict determinism through the CLI", 600, determinism);
  run(9, "MAPE arithmetic matches published values", 1, metric_fidelity);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion/criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
