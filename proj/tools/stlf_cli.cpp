// stlf: batch command-line front end for the day-ahead load forecaster.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stlf/stlf.hpp"

namespace fs = std::filesystem;
using namespace stlf;

namespace {

constexpr const char* kVersion = "0.1.0";

struct GlobalOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool deterministic = false;
  std::string mix_scheme;
  std::string pso_loop;
  std::optional<std::size_t> threads;
};

// Records stage timings and extra facts for the run manifest.
class Manifest {
 public:
  explicit Manifest(std::string command) { set("command", std::move(command)); }

  void set(const std::string& key, std::string value) { meta_[key] = std::move(value); }

  void input(const std::string& role, const fs::path& path) {
    set(role, path.string());
    set(role + "_fnv1a64", hex64(fnv1a64(read_file(path))));
  }

  template <class F>
  decltype(auto) stage(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Stop {
      Manifest& m;
      std::string name;
      std::chrono::steady_clock::time_point t0;
      ~Stop() {
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
        m.set("timing." + name + "_ms", format_fixed(ms.count(), 1));
      }
    } stop{*this, name, t0};
    return f();
  }

  std::string render(const pipeline::PipelineConfig& cfg) const {
    std::string out = "# stlf run manifest; usable as --config to rerun\n";
    out += "meta.tool=stlf\nmeta.version=" + std::string(kVersion) + "\n";
    for (const auto& [k, v] : meta_) out += "meta." + k + "=" + v + "\n";
    return out + config::serialize(cfg);
  }

 private:
  std::map<std::string, std::string> meta_;
};

pipeline::PipelineConfig resolve_config(const GlobalOptions& g) {
  pipeline::PipelineConfig cfg;
  if (!g.config_path.empty()) {
    config::apply(cfg, read_file(g.config_path), g.config_path);
  }
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    config::set(cfg, trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1)));
  }
  if (g.seed) cfg.seed = *g.seed;
  if (g.deterministic) cfg.deterministic = true;
  if (!g.mix_scheme.empty()) cfg.mix_scheme = config::parse_mix_scheme(g.mix_scheme);
  if (!g.pso_loop.empty()) cfg.swarm.loop = config::parse_loop_order(g.pso_loop);
  if (g.threads) cfg.threads = *g.threads;
  cfg.validate();
  return cfg;
}

// All outputs are rendered before anything is written; the manifest goes last.
void write_outputs(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  fs::create_directories(dir);
  for (const auto& [name, content] : files) write_file_atomic(dir / name, content);
}

std::vector<double> read_column(const fs::path& path, const std::string& column) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  const auto header = split(line);
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == column) col = i;
  }
  if (col == header.size()) throw DataError(path.string() + ": no '" + column + "' column");
  std::vector<double> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    const auto v = col < cells.size() ? parse_double(trim(cells[col])) : std::nullopt;
    if (!v) throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad " + column + " value");
    out.push_back(*v);
  }
  return out;
}

std::vector<double> read_actual(const fs::path& path) {
  const auto s = load_csv(path);
  if (s.size() != kHoursPerDay) {
    throw DataError(path.string() + ": expected 24 hourly actual values, found " + std::to_string(s.size()));
  }
  return s.values;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : split(s)) {
    const auto t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

// History = days before the target; actual = the target day (1-based).
std::pair<LoadSeries, std::vector<double>> split_target(const LoadSeries& s, std::size_t target_day) {
  const std::size_t days = s.size() / kHoursPerDay;
  if (s.size() % kHoursPerDay != 0) throw DataError("input must cover whole days");
  if (target_day == 0) target_day = days;
  if (target_day < 2 || target_day > days) {
    throw UsageError("--target-day must lie in [2, " + std::to_string(days) + "]");
  }
  return {pipeline::head_days(s, target_day - 1), pipeline::day_values(s, target_day - 1)};
}

int cmd_clean(const GlobalOptions& g, const fs::path& input) {
  Manifest m("clean");
  const auto cfg = resolve_config(g);
  const auto series = m.stage("read", [&] { return load_csv(input); });
  m.input("input", input);
  const auto result = m.stage("clean", [&] { return clean(LoadMatrix::from_series(series), cfg.cleaning); });
  LoadSeries cleaned = series;
  cleaned.values.assign(result.matrix.flat().begin(), result.matrix.flat().end());
  std::ostringstream csv;
  write_load_csv(csv, cleaned);
  m.set("revised_cells", std::to_string(result.revisions.size()));
  write_outputs(g.out_dir, {{"cleaned.csv", csv.str()},
                            {"report.csv", report::cleaning_report_csv(result)},
                            {"clean.manifest", m.render(cfg)}});
  std::cout << "cleaned " << series.size() << " values, revised " << result.revisions.size() << "\n";
  return 0;
}

int cmd_decompose(const GlobalOptions& g, const fs::path& input) {
  Manifest m("decompose");
  const auto cfg = resolve_config(g);
  const auto series = m.stage("read", [&] { return load_csv(input); });
  m.input("input", input);
  const auto cleaned = m.stage("clean", [&] { return clean(LoadMatrix::from_series(series), cfg.cleaning); });
  const auto set = m.stage("decompose", [&] { return emd::decompose(cleaned.matrix.flat(), cfg.sift); });
  m.set("imfs", std::to_string(set.imfs.size()));
  std::string capped;
  for (auto k : set.capped_imfs) capped += (capped.empty() ? "" : ",") + std::to_string(k + 1);
  m.set("capped_imfs", capped);
  if (!capped.empty()) std::cerr << "warning: sifting hit the iteration cap for IMF " << capped << "\n";
  write_outputs(g.out_dir, {{"components.csv", report::components_csv(set, series.start)},
                            {"decompose.manifest", m.render(cfg)}});
  std::cout << "decomposed into " << set.imfs.size() << " IMFs and a residual\n";
  return 0;
}

int cmd_train(const GlobalOptions& g, const fs::path& input) {
  Manifest m("train");
  const auto cfg = resolve_config(g);
  const auto series = m.stage("read", [&] { return load_csv(input); });
  m.input("input", input);
  const auto models = m.stage("fit", [&] { return pipeline::fit(series, cfg); });
  m.set("components", std::to_string(models.size()));
  std::vector<std::pair<std::string, std::string>> files = {
      {"models.bin", models_to_bytes(models)}, {"loss.csv", report::loss_csv(models)}};
  if (pipeline::uses_pso(cfg.variant)) files.emplace_back("swarm_trace.csv", report::swarm_trace_csv(models));
  files.emplace_back("train.manifest", m.render(cfg));
  write_outputs(g.out_dir, files);
  std::cout << "trained " << models.size() << " component model(s)\n";
  return 0;
}

int cmd_predict(const GlobalOptions& g, const fs::path& models_path, const fs::path& input,
                const std::string& actual_path) {
  Manifest m("predict");
  const auto cfg = resolve_config(g);
  std::istringstream bytes(read_file(models_path), std::ios::binary);
  const auto models = read_models(bytes);
  m.input("models", models_path);
  const auto series = m.stage("read", [&] { return load_csv(input); });
  m.input("input", input);
  std::optional<std::vector<double>> actual;
  if (!actual_path.empty()) {
    actual = read_actual(actual_path);
    m.input("actual", actual_path);
  }
  const auto r = m.stage("forecast", [&] { return pipeline::forecast_day(models, series, cfg, actual); });
  if (r.mape) m.set("mape_mean", format_fixed(r.mape->mean, 4));
  write_outputs(g.out_dir, {{"forecast.csv", report::forecast_csv(r)}, {"predict.manifest", m.render(cfg)}});
  if (r.mape) std::cout << "mean MAPE " << format_fixed(r.mape->mean, 2) << "%\n";
  return 0;
}

int cmd_evaluate(const GlobalOptions& g, const fs::path& forecast, const fs::path& actual_path) {
  Manifest m("evaluate");
  const auto cfg = resolve_config(g);
  const auto pred = read_column(forecast, "aggregate");
  m.input("forecast", forecast);
  const auto actual = load_csv(actual_path).values;
  m.input("actual", actual_path);
  const auto r = pipeline::evaluate_mape(pred, actual);
  write_outputs(g.out_dir, {{"metrics.txt", report::metrics_text(r)}, {"evaluate.manifest", m.render(cfg)}});
  std::cout << "mean MAPE " << format_fixed(r.mean, 2) << "%\n";
  return 0;
}

int cmd_compare(const GlobalOptions& g, const fs::path& input, std::size_t target_day,
                const std::string& variants) {
  Manifest m("compare");
  const auto cfg = resolve_config(g);
  const auto series = m.stage("read", [&] { return load_csv(input); });
  m.input("input", input);
  const auto [history, actual] = split_target(series, target_day);
  std::vector<pipeline::Variant> vs;
  if (variants.empty()) {
    vs.assign(pipeline::kAllVariants.begin(), pipeline::kAllVariants.end());
  } else {
    for (const auto& v : split_list(variants)) vs.push_back(pipeline::parse_variant(v));
  }
  m.set("target_day", std::to_string(history.size() / kHoursPerDay + 1));
  m.set("variants", variants.empty() ? "all" : variants);
  const auto table = m.stage("compare", [&] { return pipeline::compare_methods(history, actual, vs, cfg); });
  write_outputs(g.out_dir, {{"comparison.csv", report::experiment_csv(table)},
                            {"comparison_summary.csv", report::experiment_summary_csv(table)},
                            {"compare.manifest", m.render(cfg)}});
  int failures = 0;
  for (const auto& row : table.rows) {
    if (row.result) {
      std::cout << row.label << ": mean MAPE " << format_fixed(row.result->mape->mean, 2) << "%\n";
    } else {
      std::cerr << row.label << ": failed: " << row.error << "\n";
      ++failures;
    }
  }
  return failures == static_cast<int>(table.rows.size()) ? static_cast<int>(ErrorKind::numeric) : 0;
}

int cmd_sweep(const GlobalOptions& g, const fs::path& input, std::size_t target_day,
              const std::string& kind, const std::string& values) {
  Manifest m("sweep");
  const auto cfg = resolve_config(g);
  const auto series = m.stage("read", [&] { return load_csv(input); });
  m.input("input", input);
  const auto [history, actual] = split_target(series, target_day);
  std::vector<std::size_t> settings;
  for (const auto& v : split_list(values)) {
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc{} || ptr != v.data() + v.size() || n == 0) {
      throw UsageError("--values expects positive integers, got '" + v + "'");
    }
    settings.push_back(n);
  }
  if (settings.empty()) throw UsageError("--values is empty");
  m.set("kind", kind);
  m.set("values", values);
  m.set("target_day", std::to_string(history.size() / kHoursPerDay + 1));
  const auto table = m.stage("sweep", [&] {
    return kind == "window" ? pipeline::sweep_input_pattern(history, actual, settings, cfg)
                            : pipeline::sweep_mix(history, actual, settings, cfg);
  });
  write_outputs(g.out_dir, {{"sweep.csv", report::experiment_csv(table)},
                            {"sweep_summary.csv", report::experiment_summary_csv(table)},
                            {"sweep.manifest", m.render(cfg)}});
  for (const auto& row : table.rows) {
    if (row.result) {
      std::cout << row.label << ": mean MAPE " << format_fixed(row.result->mape->mean, 2) << "%\n";
    } else {
      std::cerr << row.label << ": failed: " << row.error << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Day-ahead hourly load forecasting (EMD + PSO-initialized LSTM)", "stlf"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Key-value config file (a run manifest also works)");
  app.add_option("--set", g.overrides, "Override one config key: --set train.epochs=50 (repeatable)");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out-dir", g.out_dir, "Directory for outputs")->capture_default_str();
  app.add_flag("--deterministic", g.deterministic, "Train components sequentially");
  app.add_option("--mix-scheme", g.mix_scheme, "IMF recombination: separate or two-part");
  app.add_option("--pso-loop", g.pso_loop, "Swarm loop order: synchronous or paper");
  app.add_option("--threads", g.threads, "Component models trained concurrently");
  app.fallthrough();

  std::string input, models, actual, forecast, variants, kind = "window", values;
  std::size_t target_day = 0;

  auto* clean_cmd = app.add_subcommand("clean", "Detect and revise outliers");
  clean_cmd->add_option("--input", input, "Hourly load CSV (timestamp,load)")->required();

  auto* decompose_cmd = app.add_subcommand("decompose", "Clean, then split into IMFs and a residual");
  decompose_cmd->add_option("--input", input, "Hourly load CSV")->required();

  auto* train_cmd = app.add_subcommand("train", "Fit one model per frequency part");
  train_cmd->add_option("--input", input, "Training history CSV")->required();

  auto* predict_cmd = app.add_subcommand("predict", "Forecast the day after the input history");
  predict_cmd->add_option("--models", models, "models.bin written by train")->required();
  predict_cmd->add_option("--input", input, "History CSV (same cleaning and decomposition as training)")
      ->required();
  predict_cmd->add_option("--actual", actual, "Optional CSV with the 24 actual values");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "MAPE of a forecast against actual values");
  evaluate_cmd->add_option("--forecast", forecast, "forecast.csv written by predict")->required();
  evaluate_cmd->add_option("--actual", actual, "CSV with the actual values")->required();

  auto* compare_cmd = app.add_subcommand("compare", "Score several variants on one target day");
  compare_cmd->add_option("--input", input, "Hourly load CSV including the target day")->required();
  compare_cmd->add_option("--target-day", target_day, "1-based day to forecast (default: last)");
  compare_cmd->add_option("--variants", variants, "Comma list (default: all six)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Vary the window length or the IMF mix index");
  sweep_cmd->add_option("--input", input, "Hourly load CSV including the target day")->required();
  sweep_cmd->add_option("--target-day", target_day, "1-based day to forecast (default: last)");
  sweep_cmd->add_option("--kind", kind, "window or mix")
      ->check(CLI::IsMember({"window", "mix"}))
      ->capture_default_str();
  sweep_cmd->add_option("--values", values, "Comma list, e.g. 1,3,7,14")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::usage);
  }

  try {
    if (clean_cmd->parsed()) return cmd_clean(g, input);
    if (decompose_cmd->parsed()) return cmd_decompose(g, input);
    if (train_cmd->parsed()) return cmd_train(g, input);
    if (predict_cmd->parsed()) return cmd_predict(g, models, input, actual);
    if (evaluate_cmd->parsed()) return cmd_evaluate(g, forecast, actual);
    if (compare_cmd->parsed()) return cmd_compare(g, input, target_day, variants);
    if (sweep_cmd->parsed()) return cmd_sweep(g, input, target_day, kind, values);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::numeric);
  }
  return static_cast<int>(ErrorKind::usage);
}
