#pragma once

// Hourly load containers, bad-data cleaning, min-max scaling and the
// N-days-to-one-day supervised window builder.

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stlf/error.hpp"

namespace stlf {

inline constexpr std::size_t kHoursPerDay = 24;

// Calendar hour, counted from 1970-01-01T00:00 (no timezone).
struct HourStamp {
  std::int64_t hours = 0;
  friend constexpr auto operator<=>(HourStamp, HourStamp) = default;
};

// Accepts "YYYY-MM-DD HH", "YYYY-MM-DDTHH:MM" and "YYYY-MM-DDTHH:MM:SS"
// (either separator). Minutes and seconds must be zero.
inline std::optional<HourStamp> parse_timestamp(std::string_view text) {
  std::string s(text);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char sep = 0;
  int consumed = 0;
  int n = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d%n", &y, &mo, &d, &sep, &h, &consumed);
  if (n < 5 || (sep != 'T' && sep != ' ')) return std::nullopt;
  std::string_view rest = std::string_view(s).substr(static_cast<std::size_t>(consumed));
  if (!rest.empty()) {
    int more = 0;
    std::string tail(rest);
    if (std::sscanf(tail.c_str(), ":%2d%n", &mi, &more) == 1) {
      rest = rest.substr(static_cast<std::size_t>(more));
      tail = std::string(rest);
      if (!rest.empty() && std::sscanf(tail.c_str(), ":%2d%n", &sec, &more) == 1) {
        rest = rest.substr(static_cast<std::size_t>(more));
      }
    }
    if (rest == "Z") rest = {};
    if (!rest.empty()) return std::nullopt;
  }
  if (mi != 0 || sec != 0 || h < 0 || h > 23) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days_since = sys_days{ymd}.time_since_epoch().count();
  return HourStamp{static_cast<std::int64_t>(days_since) * 24 + h};
}

inline std::string format_timestamp(HourStamp t) {
  using namespace std::chrono;
  std::int64_t day_count = t.hours >= 0 ? t.hours / 24 : (t.hours - 23) / 24;
  const auto hour = static_cast<int>(t.hours - day_count * 24);
  const year_month_day ymd{sys_days{days{day_count}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hour);
  return buf;
}

struct LoadSeries {
  HourStamp start;
  std::vector<double> values;
  std::string unit = "kW";

  std::size_t size() const noexcept { return values.size(); }
  HourStamp stamp_at(std::size_t i) const noexcept {
    return HourStamp{start.hours + static_cast<std::int64_t>(i)};
  }
};

// Day-major table: row a is day a, column b is hour b.
class LoadMatrix {
 public:
  LoadMatrix() = default;

  explicit LoadMatrix(std::vector<double> flat) : data_(std::move(flat)) {
    if (data_.empty()) throw DataError("load matrix needs at least one day");
    if (data_.size() % kHoursPerDay != 0) {
      throw DataError("series length " + std::to_string(data_.size()) +
                      " is not a whole number of days");
    }
  }

  static LoadMatrix from_series(const LoadSeries& s) { return LoadMatrix(s.values); }

  std::size_t days() const noexcept { return data_.size() / kHoursPerDay; }
  std::size_t size() const noexcept { return data_.size(); }

  double& at(std::size_t day, std::size_t hour) { return data_[day * kHoursPerDay + hour]; }
  double at(std::size_t day, std::size_t hour) const { return data_[day * kHoursPerDay + hour]; }

  std::span<const double> day(std::size_t d) const {
    return std::span<const double>(data_).subspan(d * kHoursPerDay, kHoursPerDay);
  }

  std::span<const double> flat() const noexcept { return data_; }
  std::vector<double>& flat_mut() noexcept { return data_; }

 private:
  std::vector<double> data_;
};

struct CleaningConfig {
  double epsilon = 1.0;
  double alpha = 0.4;
  double beta = 0.4;
  double gamma = 0.2;

  void validate() const {
    if (!(epsilon > 0)) throw UsageError("cleaning epsilon must be > 0");
    if (alpha < 0 || beta < 0 || gamma < 0) throw UsageError("cleaning weights must be >= 0");
    if (std::abs(alpha + beta + gamma - 1.0) > 1e-12) {
      throw UsageError("cleaning weights alpha + beta + gamma must equal 1");
    }
  }
};

struct CellIndex {
  std::size_t day = 0;
  std::size_t hour = 0;
  friend bool operator==(CellIndex, CellIndex) = default;
};

struct CleaningStats {
  double mean = 0;
  double stddev = 0;  // population standard deviation
  std::vector<CellIndex> flagged;
};

// Flags every cell with |X - mean| > 3 * stddev * epsilon.
inline CleaningStats detect_outliers(const LoadMatrix& m, const CleaningConfig& cfg) {
  if (m.size() == 0) throw DataError("cannot clean an empty matrix");
  const auto values = m.flat();
  double sum = 0;
  for (double v : values) sum += v;
  const double n = static_cast<double>(values.size());
  CleaningStats stats;
  stats.mean = sum / n;
  double sq = 0;
  for (double v : values) sq += (v - stats.mean) * (v - stats.mean);
  stats.stddev = std::sqrt(sq / n);
  const double threshold = 3.0 * stats.stddev * cfg.epsilon;
  for (std::size_t d = 0; d < m.days(); ++d) {
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      if (std::abs(m.at(d, h) - stats.mean) > threshold) stats.flagged.push_back({d, h});
    }
  }
  return stats;
}

// Weighted blend of the same hour on adjacent days, adjacent hours on the same
// day, and the global mean. A missing neighbour at the matrix edge is replaced
// by the one that exists, counted twice.
inline double revise_point(const LoadMatrix& m, std::size_t day, std::size_t hour,
                           const CleaningConfig& cfg, const CleaningStats& stats) {
  if (day >= m.days() || hour >= kHoursPerDay) throw DataError("cell outside matrix");
  auto pair_sum = [](std::optional<double> a, std::optional<double> b, double self) {
    if (a && b) return *a + *b;
    if (a) return 2 * *a;
    if (b) return 2 * *b;
    return 2 * self;  // single-day matrix: no neighbours on this axis
  };
  const auto prev_day = day > 0 ? std::optional(m.at(day - 1, hour)) : std::nullopt;
  const auto next_day = day + 1 < m.days() ? std::optional(m.at(day + 1, hour)) : std::nullopt;
  const auto prev_hour = hour > 0 ? std::optional(m.at(day, hour - 1)) : std::nullopt;
  const auto next_hour =
      hour + 1 < kHoursPerDay ? std::optional(m.at(day, hour + 1)) : std::nullopt;
  const double self = m.at(day, hour);
  return cfg.alpha / 2 * pair_sum(prev_day, next_day, self) +
         cfg.beta / 2 * pair_sum(prev_hour, next_hour, self) + cfg.gamma * stats.mean;
}

struct RevisionRecord {
  CellIndex cell;
  double original = 0;
  double revised = 0;
};

struct CleaningResult {
  LoadMatrix matrix;
  CleaningStats stats;
  std::vector<RevisionRecord> revisions;
};

// Single pass: statistics and neighbours are taken from the input matrix,
// never from partially revised values.
inline CleaningResult clean(const LoadMatrix& input, const CleaningConfig& cfg) {
  cfg.validate();
  CleaningResult out{input, detect_outliers(input, cfg), {}};
  for (const auto& cell : out.stats.flagged) {
    const double revised = revise_point(input, cell.day, cell.hour, cfg, out.stats);
    out.revisions.push_back({cell, input.at(cell.day, cell.hour), revised});
    out.matrix.at(cell.day, cell.hour) = revised;
  }
  return out;
}

struct NormalizationParams {
  double x_min = 0;
  double x_max = 1;

  static NormalizationParams from_data(std::span<const double> values) {
    if (values.empty()) throw DataError("cannot derive normalization from empty data");
    NormalizationParams p{values[0], values[0]};
    for (double v : values) {
      p.x_min = std::min(p.x_min, v);
      p.x_max = std::max(p.x_max, v);
    }
    return p;
  }

  double range() const noexcept { return x_max - x_min; }
};

inline std::vector<double> normalize(std::span<const double> series,
                                     const NormalizationParams& p) {
  if (!(p.x_max > p.x_min)) {
    throw NumericError("degenerate normalization range: x_max == x_min (constant component)");
  }
  std::vector<double> out(series.size());
  const double r = p.range();
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = (series[i] - p.x_min) / r;
  return out;
}

inline double denormalize(double value, const NormalizationParams& p) noexcept {
  return value * (p.x_max - p.x_min) + p.x_min;
}

// How a window of N days is unrolled for the recurrent model: N steps of a
// 24-value day vector, or N*24 steps of a single hourly value.
enum class StepLayout { day, hour };

struct WindowSet {
  std::size_t n_days = 0;
  StepLayout layout = StepLayout::day;
  // Each input is features x steps, one column per time step.
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::VectorXd> targets;

  std::size_t size() const noexcept { return inputs.size(); }
  bool empty() const noexcept { return inputs.empty(); }

  WindowSet slice(std::size_t first, std::size_t count) const {
    WindowSet out{n_days, layout, {}, {}};
    out.inputs.assign(inputs.begin() + static_cast<std::ptrdiff_t>(first),
                      inputs.begin() + static_cast<std::ptrdiff_t>(first + count));
    out.targets.assign(targets.begin() + static_cast<std::ptrdiff_t>(first),
                       targets.begin() + static_cast<std::ptrdiff_t>(first + count));
    return out;
  }
};

inline std::size_t input_features(StepLayout layout) noexcept {
  return layout == StepLayout::day ? kHoursPerDay : 1;
}

// Input for predicting the day after days [first, first + n_days).
inline Eigen::MatrixXd window_input(const LoadMatrix& m, std::size_t first, std::size_t n_days,
                                    StepLayout layout = StepLayout::day) {
  if (first + n_days > m.days()) throw DataError("window runs past the end of the data");
  Eigen::MatrixXd in;
  if (layout == StepLayout::day) {
    in.resize(static_cast<Eigen::Index>(kHoursPerDay), static_cast<Eigen::Index>(n_days));
    for (std::size_t s = 0; s < n_days; ++s) {
      const auto row = m.day(first + s);
      for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        in(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(s)) = row[h];
      }
    }
  } else {
    const auto flat = m.flat().subspan(first * kHoursPerDay, n_days * kHoursPerDay);
    in.resize(1, static_cast<Eigen::Index>(flat.size()));
    for (std::size_t s = 0; s < flat.size(); ++s) in(0, static_cast<Eigen::Index>(s)) = flat[s];
  }
  return in;
}

inline WindowSet build_windows(const LoadMatrix& m, std::size_t n_days,
                               StepLayout layout = StepLayout::day) {
  if (n_days < 1) throw UsageError("window length must be at least one day");
  if (m.days() <= n_days) {
    throw DataError("too few days (" + std::to_string(m.days()) + ") for a " +
                    std::to_string(n_days) + "-day window");
  }
  WindowSet w{n_days, layout, {}, {}};
  const std::size_t count = m.days() - n_days;
  w.inputs.reserve(count);
  w.targets.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    w.inputs.push_back(window_input(m, k, n_days, layout));
    const auto next = m.day(k + n_days);
    w.targets.emplace_back(Eigen::Map<const Eigen::VectorXd>(
        next.data(), static_cast<Eigen::Index>(kHoursPerDay)));
  }
  return w;
}

}  // namespace stlf
