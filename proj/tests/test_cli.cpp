#include <gtest/gtest.h>

#include <cmath>

#include "cli_harness.hpp"
#include "stlf/config.hpp"
#include "stlf/io.hpp"
#include "synthetic.hpp"

namespace stlf::testing {
namespace {

// Small and fast: the CLI plumbing is under test, not forecast quality.
const std::string kFast =
    "--set train.epochs=3 --set train.hidden_dim=3 --set swarm.particles=2 "
    "--set swarm.iterations=1 --set swarm.probe_epochs=1 ";

LoadSeries fixture(std::size_t days = 30) { return synthetic_load({.days = days, .seed = 7}); }

std::string out_dir(const Scratch& s, const std::string& sub) { return "--out-dir \"" + (s / sub).string() + "\" "; }

std::vector<std::vector<double>> numeric_rows(const std::string& csv, std::size_t skip_cols) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    const auto cells = split(line);
    for (std::size_t i = skip_cols; i < cells.size(); ++i) row.push_back(*parse_double(cells[i]));
    rows.push_back(row);
  }
  return rows;
}

TEST(CliClean, CleanInputPassesThroughWithEmptyReport) {
  Scratch s("clean_ok");
  auto series = fixture();
  s.write_series("in.csv", series);
  const auto r = run_cli(out_dir(s, "out") + "clean --input \"" + (s / "in.csv").string() + "\"", s / "log");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto cleaned = load_csv(s / "out/cleaned.csv");
  EXPECT_EQ(cleaned.values, series.values);
  EXPECT_EQ(read_file(s / "out/report.csv"), "day,hour,original,revised\n");
  EXPECT_TRUE(std::filesystem::exists(s / "out/clean.manifest"));
}

TEST(CliClean, OneSpikeGivesOneReportRow) {
  Scratch s("clean_spike");
  auto series = fixture();
  series.values[10 * 24 + 5] *= 3.0;
  s.write_series("in.csv", series);
  const auto r = run_cli(out_dir(s, "out") + "clean --input \"" + (s / "in.csv").string() + "\"", s / "log");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto report = read_file(s / "out/report.csv");
  EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 2);
  EXPECT_NE(report.find("\n11,6,"), std::string::npos) << report;
}

TEST(CliClean, MissingInputFailsWithoutOutputs) {
  Scratch s("clean_missing");
  const auto r = run_cli(out_dir(s, "out") + "clean --input \"" + (s / "nope.csv").string() + "\"", s / "log");
  EXPECT_EQ(r.exit_code, 2) << r.output;
  EXPECT_NE(r.output.find("error:"), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(s / "out"));
}

TEST(CliDecompose, ComponentsSumToCleanedInputAndAreStable) {
  Scratch s("decompose");
  s.write_series("in.csv", fixture());
  const std::string args = "decompose --input \"" + (s / "in.csv").string() + "\"";
  ASSERT_EQ(run_cli(out_dir(s, "a") + args, s / "log").exit_code, 0);
  ASSERT_EQ(run_cli(out_dir(s, "b") + args, s / "log").exit_code, 0);
  const auto csv = read_file(s / "a/components.csv");
  EXPECT_EQ(csv, read_file(s / "b/components.csv"));
  EXPECT_EQ(csv.substr(0, 15), "timestamp,imf1,");
  const auto input = load_csv(s / "in.csv").values;
  const auto rows = numeric_rows(csv, 1);
  ASSERT_EQ(rows.size(), input.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    double sum = 0;
    for (double v : rows[t]) sum += v;
    EXPECT_NEAR(sum, input[t], 1e-8 * std::abs(input[t]));
  }
}

TEST(CliDecompose, SineFixtureGivesFewColumns) {
  Scratch s("decompose_sine");
  LoadSeries sine;
  sine.start = *parse_timestamp("2024-01-01T00");
  for (std::size_t t = 0; t < 20 * 24; ++t) sine.values.push_back(500 + 100 * std::sin(2 * M_PI * t / 24.0));
  s.write_series("in.csv", sine);
  ASSERT_EQ(run_cli(out_dir(s, "o") + "decompose --input \"" + (s / "in.csv").string() + "\"", s / "log").exit_code, 0);
  const auto csv = read_file(s / "o/components.csv");
  const std::string first_line = csv.substr(0, csv.find('\n'));
  const auto header = split(first_line);
  EXPECT_GE(header.size(), 3u);  // timestamp, imf1, res
  EXPECT_LE(header.size(), 4u);
  EXPECT_EQ(header.back(), "res");
}

TEST(CliTrainPredict, RerunsAreBitwiseIdenticalAndManifestReproduces) {
  Scratch s("train_predict");
  const auto series = fixture(31);
  s.write_series("history.csv", pipeline::head_days(series, 30));
  LoadSeries actual{series.stamp_at(30 * 24), pipeline::day_values(series, 30), "kW"};
  s.write_series("actual.csv", actual);
  const std::string hist = "\"" + (s / "history.csv").string() + "\"";

  auto train_predict = [&](const std::string& dir, const std::string& cfg_args) {
    const auto t = run_cli(cfg_args + out_dir(s, dir) + "train --input " + hist, s / "log");
    EXPECT_EQ(t.exit_code, 0) << t.output;
    const auto p = run_cli("--config \"" + (s / dir / "train.manifest").string() + "\" " + out_dir(s, dir) +
                               "predict --models \"" + (s / dir / "models.bin").string() + "\" --input " + hist +
                               " --actual \"" + (s / "actual.csv").string() + "\"",
                           s / "log");
    EXPECT_EQ(p.exit_code, 0) << p.output;
    return read_file(s / dir / "forecast.csv");
  };
  const std::string args = kFast + "--seed 11 --set variant=emd_pso_lstm ";
  const auto a = train_predict("a", args);
  const auto b = train_predict("b", args);
  EXPECT_EQ(a, b);
  // Rerun driven only by the first run's manifest.
  const auto c = train_predict("c", "--config \"" + (s / "a/train.manifest").string() + "\" ");
  EXPECT_EQ(a, c);
  EXPECT_EQ(read_file(s / "a/models.bin"), read_file(s / "c/models.bin"));
  EXPECT_EQ(a.substr(0, 5), "hour,");
  EXPECT_NE(a.find(",aggregate,actual,mape\n"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(s / "a/swarm_trace.csv"));

  const auto manifest = config::parse(read_file(s / "a/train.manifest"));
  EXPECT_EQ(manifest.seed, 11u);
  EXPECT_EQ(manifest.train.epochs, 3u);
  EXPECT_NE(read_file(s / "a/train.manifest").find("meta.input_fnv1a64="), std::string::npos);
}

TEST(CliEvaluate, PerfectForecastScoresZero) {
  Scratch s("evaluate");
  const auto series = fixture(1);
  s.write_series("actual.csv", series);
  std::string forecast = "hour,aggregate\n";
  for (std::size_t h = 0; h < 24; ++h) forecast += std::to_string(h + 1) + "," + format_double(series.values[h]) + "\n";
  write_file_atomic(s / "forecast.csv", forecast);
  const auto r = run_cli(out_dir(s, "o") + "evaluate --forecast \"" + (s / "forecast.csv").string() +
                             "\" --actual \"" + (s / "actual.csv").string() + "\"",
                         s / "log");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto metrics = read_file(s / "o/metrics.txt");
  EXPECT_NE(metrics.find("mape_mean=0.0000\n"), std::string::npos) << metrics;
  EXPECT_NE(metrics.find("accuracy=100.0000\n"), std::string::npos);
}

TEST(CliCompare, TwoVariantsGiveTwoNumericSummaryRows) {
  Scratch s("compare");
  s.write_series("in.csv", fixture(31));
  const auto r = run_cli(kFast + out_dir(s, "o") + "compare --input \"" + (s / "in.csv").string() +
                             "\" --variants lstm,emd_pso_lstm",
                         s / "log");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto summary = read_file(s / "o/comparison_summary.csv");
  const auto rows = split(summary, '\n');
  ASSERT_GE(rows.size(), 3u);
  for (std::size_t i = 1; i <= 2; ++i) {
    const auto cells = split(rows[i]);
    ASSERT_GE(cells.size(), 2u) << summary;
    EXPECT_TRUE(parse_double(cells[1])) << summary;
  }
  const auto table = read_file(s / "o/comparison.csv");
  EXPECT_EQ(table.substr(0, table.find('\n')), "hour,actual,lstm,lstm_mape,emd_pso_lstm,emd_pso_lstm_mape");
  EXPECT_NE(table.find("\nmean,"), std::string::npos);
}

TEST(CliSweep, WindowSweepRows) {
  Scratch s("sweep");
  s.write_series("in.csv", fixture(31));
  const auto r = run_cli(kFast + "--set variant=lstm " + out_dir(s, "o") + "sweep --input \"" +
                             (s / "in.csv").string() + "\" --kind window --values 1,7",
                         s / "log");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto table = read_file(s / "o/sweep.csv");
  EXPECT_EQ(table.substr(0, table.find('\n')), "hour,actual,1-1,1-1_mape,7-1,7-1_mape");
}

TEST(CliErrors, ExitCodes) {
  Scratch s("errors");
  s.write_series("in.csv", fixture());
  const std::string in = "\"" + (s / "in.csv").string() + "\"";
  EXPECT_EQ(run_cli("", s / "log").exit_code, 1);
  EXPECT_EQ(run_cli("frobnicate", s / "log").exit_code, 1);
  EXPECT_EQ(run_cli("--set nope=1 clean --input " + in, s / "log").exit_code, 1);
  EXPECT_EQ(run_cli("--mix-scheme sideways clean --input " + in, s / "log").exit_code, 1);
  EXPECT_EQ(run_cli("--help", s / "log").exit_code, 0);

  write_file_atomic(s / "bad.csv", "timestamp,load\n2024-01-01T00,1\n2024-01-01T02,1\n");
  const auto gap = run_cli(out_dir(s, "o") + "clean --input \"" + (s / "bad.csv").string() + "\"", s / "log");
  EXPECT_EQ(gap.exit_code, 2);
  EXPECT_NE(gap.output.find("bad.csv:3"), std::string::npos) << gap.output;

  write_file_atomic(s / "flat.csv", [] {
    std::string csv = "timestamp,load\n";
    for (int h = 0; h < 48; ++h) csv += "2024-01-0" + std::to_string(1 + h / 24) + "T" + (h % 24 < 10 ? "0" : "") + std::to_string(h % 24) + ",5\n";
    return csv;
  }());
  EXPECT_EQ(run_cli(out_dir(s, "o") + "decompose --input \"" + (s / "flat.csv").string() + "\"", s / "log").exit_code, 3);
}

}  // namespace
}  // namespace stlf::testing
