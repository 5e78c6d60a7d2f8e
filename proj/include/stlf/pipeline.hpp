#pragma once

// End-to-end day-ahead forecasting: clean, decompose, recombine, one network
// per frequency part, denormalize, sum. Also the evaluation and experiment
// harness used for the method comparison and the input/mix sweeps.

#include <array>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "stlf/data.hpp"
#include "stlf/emd.hpp"
#include "stlf/error.hpp"
#include "stlf/nn/network.hpp"
#include "stlf/nn/train.hpp"
#include "stlf/pso.hpp"
#include "stlf/pso_weights.hpp"
#include "stlf/random.hpp"

namespace stlf::pipeline {

enum class Variant { lstm, emd_lstm, pso_lstm, emd_pso_lstm, rnn, gru };

inline constexpr std::array<Variant, 6> kAllVariants = {
    Variant::lstm, Variant::emd_lstm, Variant::pso_lstm,
    Variant::rnn,  Variant::gru,      Variant::emd_pso_lstm};

inline constexpr bool uses_emd(Variant v) {
  return v == Variant::emd_lstm || v == Variant::emd_pso_lstm;
}
inline constexpr bool uses_pso(Variant v) {
  return v == Variant::pso_lstm || v == Variant::emd_pso_lstm;
}
inline constexpr nn::CellKind cell_kind(Variant v) {
  switch (v) {
    case Variant::rnn: return nn::CellKind::rnn;
    case Variant::gru: return nn::CellKind::gru;
    default: return nn::CellKind::lstm;
  }
}

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::lstm: return "lstm";
    case Variant::emd_lstm: return "emd_lstm";
    case Variant::pso_lstm: return "pso_lstm";
    case Variant::emd_pso_lstm: return "emd_pso_lstm";
    case Variant::rnn: return "rnn";
    case Variant::gru: return "gru";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  for (auto v : kAllVariants) {
    if (to_string(v) == s) return v;
  }
  throw UsageError("unknown variant '" + std::string(s) +
                   "' (expected lstm, emd_lstm, pso_lstm, emd_pso_lstm, rnn or gru)");
}

struct PipelineConfig {
  CleaningConfig cleaning;
  emd::SiftConfig sift;
  emd::MixScheme mix_scheme = emd::MixScheme::separate;
  std::size_t mix_index = 3;           // 0 selects it from IMF periods
  double mix_max_period = 336;         // hours; used when mix_index == 0
  std::size_t window_days = 7;
  StepLayout layout = StepLayout::day;
  nn::TrainConfig train;
  pso::SwarmConfig swarm;
  std::size_t probe_epochs = 5;
  double validation_fraction = 0.1;
  Variant variant = Variant::emd_pso_lstm;
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // component models trained concurrently
  bool deterministic = false;

  void validate() const {
    cleaning.validate();
    sift.validate();
    train.validate();
    swarm.validate();
    if (window_days < 1) throw UsageError("window_days must be >= 1");
    if (mix_index == 0 && !(mix_max_period > 0)) throw UsageError("mix_max_period must be > 0");
    if (!(validation_fraction > 0 && validation_fraction < 1)) {
      throw UsageError("validation_fraction must lie in (0, 1)");
    }
  }
};

using AnyParams = std::variant<nn::LstmParams, nn::RnnParams, nn::GruParams>;

struct ComponentModel {
  std::size_t component_id = 0;
  NormalizationParams norm;
  AnyParams params;
  std::vector<double> loss_history;
  std::vector<pso::TraceRow> swarm_trace;  // empty unless the swarm ran
};

// Cleaned history split into the parts that get one model each.
struct PreparedHistory {
  CleaningResult cleaning;
  std::optional<emd::ImfSet> imfs;
  std::size_t mix_index = 0;  // resolved; 0 without decomposition
  std::vector<std::vector<double>> parts;
};

inline PreparedHistory prepare(const LoadSeries& history, const PipelineConfig& cfg) {
  PreparedHistory out{clean(LoadMatrix::from_series(history), cfg.cleaning), std::nullopt, 0, {}};
  const auto cleaned = out.cleaning.matrix.flat();
  if (uses_emd(cfg.variant)) {
    out.imfs = emd::decompose(cleaned, cfg.sift);
    out.mix_index = cfg.mix_index == 0 ? emd::mix_index_by_period(*out.imfs, cfg.mix_max_period)
                                       : cfg.mix_index;
    if (out.mix_index > out.imfs->imfs.size()) {
      throw UsageError("mix_index " + std::to_string(out.mix_index) + " exceeds the " +
                       std::to_string(out.imfs->imfs.size()) + " IMFs found");
    }
    out.parts = emd::recombine(*out.imfs, out.mix_index, cfg.mix_scheme).parts;
  } else {
    out.parts.emplace_back(cleaned.begin(), cleaned.end());
  }
  return out;
}

namespace detail {

template <class F>
decltype(auto) with_cell(nn::CellKind kind, F&& f) {
  switch (kind) {
    case nn::CellKind::rnn: return f(nn::RnnCell{});
    case nn::CellKind::gru: return f(nn::GruCell{});
    case nn::CellKind::lstm: break;
  }
  return f(nn::LstmCell{});
}

template <class Cell>
ComponentModel fit_component(std::size_t id, std::span<const double> part,
                             const PipelineConfig& cfg) {
  const std::uint64_t component_seed = derive_seed(cfg.seed, seed_stream::component, id);
  ComponentModel model;
  model.component_id = id;
  model.norm = NormalizationParams::from_data(part);
  const LoadMatrix scaled(normalize(part, model.norm));
  const auto windows = build_windows(scaled, cfg.window_days, cfg.layout);

  auto train_cfg = cfg.train;
  train_cfg.seed = derive_seed(component_seed, seed_stream::train, 0);
  const auto dims = nn::dims_for(windows, train_cfg);
  auto params = nn::init_params<Cell>(dims, derive_seed(component_seed, seed_stream::init, 0));

  if (uses_pso(cfg.variant)) {
    const auto [probe, validation] = pso::split_validation(windows, cfg.validation_fraction);
    pso::FitnessSpec<Cell> spec;
    spec.probe_windows = &probe;
    spec.validation_windows = &validation;
    spec.probe_epochs = cfg.probe_epochs;
    spec.base = cfg.train;
    spec.base.seed = derive_seed(component_seed, seed_stream::probe, 0);
    spec.base_params = std::move(params);
    auto swarm_cfg = cfg.swarm;
    swarm_cfg.seed = derive_seed(component_seed, seed_stream::swarm, 0);
    auto search = pso::optimize_weights(spec, swarm_cfg);
    model.swarm_trace = std::move(search.swarm.trace);
    params = std::move(search.params);
  }

  auto trained = nn::train(windows, train_cfg, std::move(params));
  if (!trained.params.all_finite()) throw NumericError("training diverged (non-finite weights)");
  model.loss_history = std::move(trained.loss_history);
  model.params = std::move(trained.params);
  return model;
}

inline Error tag_component(std::size_t id, const std::exception& e) {
  const auto* known = dynamic_cast<const Error*>(&e);
  return Error(known ? known->kind() : ErrorKind::numeric,
               "component " + std::to_string(id + 1) + ": " + e.what());
}

}  // namespace detail

/// Trains one model per frequency part of `history` (one part when the variant
/// does not decompose). Models are returned in component order whatever the
/// thread count.
inline std::vector<ComponentModel> fit(const LoadSeries& history, const PipelineConfig& cfg) {
  cfg.validate();
  if (history.size() % kHoursPerDay != 0) throw DataError("history must cover whole days");
  if (history.size() / kHoursPerDay < cfg.window_days + 2) {
    throw DataError("history needs at least window_days + 2 days");
  }
  const auto prepared = prepare(history, cfg);
  const std::size_t k = prepared.parts.size();
  std::vector<std::optional<ComponentModel>> slots(k);
  std::vector<std::exception_ptr> errors(k);

  auto work = [&](std::size_t id) {
    try {
      slots[id] = detail::with_cell(cell_kind(cfg.variant), [&](auto cell) {
        using Cell = decltype(cell);
        return detail::fit_component<Cell>(id, prepared.parts[id], cfg);
      });
    } catch (const std::exception& e) {
      errors[id] = std::make_exception_ptr(detail::tag_component(id, e));
    }
  };

  const std::size_t workers = cfg.deterministic ? 1 : std::max<std::size_t>(1, std::min(cfg.threads, k));
  if (workers == 1) {
    for (std::size_t id = 0; id < k; ++id) work(id);
  } else {
    std::mutex m;
    std::size_t next = 0;
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          std::size_t id;
          {
            std::lock_guard lock(m);
            if (next >= k) return;
            id = next++;
          }
          work(id);
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<ComponentModel> models;
  for (auto& s : slots) models.push_back(std::move(*s));
  return models;
}

struct MapeReport {
  std::vector<double> per_hour;  // percent
  double mean = 0;               // percent
  double max = 0;
  double min = 0;
};

/// 100 * |actual - pred| / actual per hour, and their mean over n hours.
inline MapeReport evaluate_mape(std::span<const double> pred, std::span<const double> actual) {
  if (pred.size() != actual.size()) throw DataError("forecast and actual lengths differ");
  if (actual.empty()) throw DataError("no values to evaluate");
  MapeReport r;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0) {
      throw DataError("actual value at hour " + std::to_string(i) + " is zero; MAPE undefined");
    }
    r.per_hour.push_back(100.0 * std::abs(actual[i] - pred[i]) / std::abs(actual[i]));
  }
  double sum = 0;
  r.max = r.min = r.per_hour[0];
  for (double v : r.per_hour) {
    sum += v;
    r.max = std::max(r.max, v);
    r.min = std::min(r.min, v);
  }
  r.mean = sum / static_cast<double>(r.per_hour.size());
  return r;
}

struct ForecastResult {
  std::vector<std::vector<double>> per_component;  // load units, 24 each
  std::vector<double> aggregate;
  std::optional<std::vector<double>> actual;
  std::optional<MapeReport> mape;
};

/// Predicts the day that follows `history`. The history is cleaned and
/// decomposed exactly as in `fit`; each model sees the last window_days days
/// of its own part, scaled with the min/max it was trained with (values
/// outside that range are not clipped).
inline ForecastResult forecast_day(const std::vector<ComponentModel>& models,
                                   const LoadSeries& history, const PipelineConfig& cfg,
                                   std::optional<std::vector<double>> actual = std::nullopt) {
  cfg.validate();
  if (history.size() % kHoursPerDay != 0) throw DataError("history must cover whole days");
  if (history.size() / kHoursPerDay < cfg.window_days) {
    throw DataError("insufficient history: need at least " + std::to_string(cfg.window_days) +
                    " days");
  }
  const auto prepared = prepare(history, cfg);
  if (prepared.parts.size() != models.size()) {
    throw DataError("history decomposes into " + std::to_string(prepared.parts.size()) +
                    " parts but " + std::to_string(models.size()) + " models were given");
  }
  ForecastResult out;
  out.aggregate.assign(kHoursPerDay, 0.0);
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto& model = models[k];
    const LoadMatrix scaled(normalize(prepared.parts[k], model.norm));
    const auto input = window_input(scaled, scaled.days() - cfg.window_days, cfg.window_days,
                                    cfg.layout);
    const nn::Vector pred =
        std::visit([&](const auto& p) { return nn::predict(p, input); }, model.params);
    std::vector<double> values(kHoursPerDay);
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      values[h] = denormalize(pred(static_cast<Eigen::Index>(h)), model.norm);
      out.aggregate[h] += values[h];
    }
    out.per_component.push_back(std::move(values));
  }
  if (actual) {
    out.mape = evaluate_mape(out.aggregate, *actual);
    out.actual = std::move(actual);
  }
  return out;
}

/// The same hour one week before the forecast day.
inline std::vector<double> persistence_forecast(const LoadSeries& history) {
  const std::size_t days = history.size() / kHoursPerDay;
  if (days < 7) throw DataError("persistence baseline needs at least 7 days of history");
  const auto first = history.values.begin() + static_cast<std::ptrdiff_t>((days - 7) * kHoursPerDay);
  return {first, first + static_cast<std::ptrdiff_t>(kHoursPerDay)};
}

// The first `days` days of a series.
inline LoadSeries head_days(const LoadSeries& s, std::size_t days) {
  if (days * kHoursPerDay > s.size()) throw DataError("series shorter than requested days");
  LoadSeries out{s.start, {}, s.unit};
  out.values.assign(s.values.begin(), s.values.begin() + static_cast<std::ptrdiff_t>(days * kHoursPerDay));
  return out;
}

// Day `day` (0-based) of a series as 24 values.
inline std::vector<double> day_values(const LoadSeries& s, std::size_t day) {
  if ((day + 1) * kHoursPerDay > s.size()) throw DataError("day outside series");
  const auto first = s.values.begin() + static_cast<std::ptrdiff_t>(day * kHoursPerDay);
  return {first, first + static_cast<std::ptrdiff_t>(kHoursPerDay)};
}

struct ExperimentRow {
  std::string label;
  std::optional<ForecastResult> result;
  std::string error;  // set when this row failed; other rows still run
};

struct ExperimentTable {
  std::vector<double> actual;
  std::vector<ExperimentRow> rows;
};

inline ExperimentRow run_one(std::string label, const LoadSeries& history,
                             const std::vector<double>& actual, const PipelineConfig& cfg) {
  ExperimentRow row{std::move(label), std::nullopt, {}};
  try {
    const auto models = fit(history, cfg);
    row.result = forecast_day(models, history, cfg, actual);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

/// Fits and scores each variant on the same history and master seed.
inline ExperimentTable compare_methods(const LoadSeries& history, const std::vector<double>& actual,
                                       std::span<const Variant> variants,
                                       const PipelineConfig& base) {
  ExperimentTable t{actual, {}};
  for (auto v : variants) {
    auto cfg = base;
    cfg.variant = v;
    t.rows.push_back(run_one(to_string(v), history, actual, cfg));
  }
  return t;
}

/// One run per window length N, labelled "N-1".
inline ExperimentTable sweep_input_pattern(const LoadSeries& history,
                                           const std::vector<double>& actual,
                                           std::span<const std::size_t> ns,
                                           const PipelineConfig& base) {
  ExperimentTable t{actual, {}};
  for (auto n : ns) {
    auto cfg = base;
    cfg.window_days = n;
    t.rows.push_back(run_one(std::to_string(n) + "-1", history, actual, cfg));
  }
  return t;
}

/// One run per MIXn recombination, labelled "MIXn".
inline ExperimentTable sweep_mix(const LoadSeries& history, const std::vector<double>& actual,
                                 std::span<const std::size_t> ns, const PipelineConfig& base) {
  ExperimentTable t{actual, {}};
  for (auto n : ns) {
    auto cfg = base;
    cfg.mix_index = n;
    t.rows.push_back(run_one("MIX" + std::to_string(n), history, actual, cfg));
  }
  return t;
}

}  // namespace stlf::pipeline
