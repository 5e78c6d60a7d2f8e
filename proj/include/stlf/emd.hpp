#pragma once

// Empirical mode decomposition by envelope sifting.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "stlf/error.hpp"
#include "stlf/spline.hpp"

namespace stlf::emd {

struct Extremum {
  std::size_t index = 0;
  double value = 0;
};

struct ExtremaSet {
  std::vector<Extremum> maxima;
  std::vector<Extremum> minima;

  std::size_t count() const noexcept { return maxima.size() + minima.size(); }
};

enum class BoundaryPolicy { mirror, clamp };

struct SiftConfig {
  double sd_threshold = 0.2;
  std::size_t max_sift_iters = 10;
  std::size_t max_imfs = 16;
  BoundaryPolicy boundary = BoundaryPolicy::mirror;

  void validate() const {
    if (!(sd_threshold > 0)) throw UsageError("sd_threshold must be > 0");
    if (max_sift_iters < 1) throw UsageError("max_sift_iters must be >= 1");
    if (max_imfs < 1) throw UsageError("max_imfs must be >= 1");
  }
};

/// Interior local extrema. A run of equal values counts as one extremum,
/// reported at the run's midpoint, when both of its outer neighbours lie on
/// the same side of it. Runs touching either end of the series are ignored.
inline ExtremaSet find_extrema(std::span<const double> s) {
  ExtremaSet out;
  const std::size_t n = s.size();
  if (n < 3) return out;
  std::size_t i = 1;
  while (i + 1 < n) {
    std::size_t j = i;
    while (j + 1 < n && s[j + 1] == s[i]) ++j;
    if (j + 1 >= n) break;
    const double v = s[i];
    const std::size_t mid = (i + j) / 2;
    if (s[i - 1] < v && s[j + 1] < v) out.maxima.push_back({mid, v});
    if (s[i - 1] > v && s[j + 1] > v) out.minima.push_back({mid, v});
    i = j + 1;
  }
  return out;
}

/// Sign changes, with exact zeros skipped over.
inline std::size_t count_zero_crossings(std::span<const double> s) {
  std::size_t crossings = 0;
  int last_sign = 0;
  for (double v : s) {
    const int sign = (v > 0) - (v < 0);
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) ++crossings;
    last_sign = sign;
  }
  return crossings;
}

/// IMF condition 1: extrema and zero crossings differ by at most one.
inline bool satisfies_extrema_condition(std::span<const double> s) {
  const auto e = static_cast<long long>(find_extrema(s).count());
  const auto z = static_cast<long long>(count_zero_crossings(s));
  return std::llabs(e - z) <= 1;
}

/// Cubic spline through `knots`, sampled at 0..length-1.
///
/// `mirror` reflects the two knots nearest each end about the first and last
/// sample index. `clamp` repeats the first and last knot values at indices 0
/// and length-1 (a flat extension).
inline std::vector<double> spline_envelope(std::span<const Extremum> knots, std::size_t length,
                                           BoundaryPolicy policy) {
  if (length == 0) return {};
  std::vector<double> xs, ys;
  const double last = static_cast<double>(length - 1);
  auto push = [&](double x, double y) {
    if (xs.empty() || x > xs.back()) {
      xs.push_back(x);
      ys.push_back(y);
    }
  };
  if (!knots.empty()) {
    const std::size_t k = knots.size();
    if (policy == BoundaryPolicy::mirror) {
      for (std::size_t i = std::min<std::size_t>(2, k); i-- > 0;) {
        push(-static_cast<double>(knots[i].index), knots[i].value);
      }
    } else {
      push(0.0, knots.front().value);
    }
    for (const auto& e : knots) push(static_cast<double>(e.index), e.value);
    if (policy == BoundaryPolicy::mirror) {
      for (std::size_t i = 0; i < std::min<std::size_t>(2, k); ++i) {
        push(2 * last - static_cast<double>(knots[k - 1 - i].index), knots[k - 1 - i].value);
      }
    } else {
      push(last, knots.back().value);
    }
  }
  if (xs.size() < 2) throw InsufficientExtrema("insufficient extrema for an envelope");
  const NaturalCubicSpline spline(std::move(xs), std::move(ys));
  std::vector<double> env(length);
  for (std::size_t t = 0; t < length; ++t) env[t] = spline(static_cast<double>(t));
  return env;
}

struct SiftResult {
  std::vector<double> detail;         // h minus the envelope mean
  std::vector<double> mean_envelope;  // (upper + lower) / 2
};

/// One sifting step. Needs at least one interior maximum and one minimum so
/// that each envelope has two or more knots once the ends are extended.
inline SiftResult sift_once(std::span<const double> h, const SiftConfig& cfg) {
  const auto ex = find_extrema(h);
  if (ex.maxima.empty() || ex.minima.empty()) {
    throw InsufficientExtrema("insufficient extrema: need at least one maximum and one minimum");
  }
  const auto upper = spline_envelope(ex.maxima, h.size(), cfg.boundary);
  const auto lower = spline_envelope(ex.minima, h.size(), cfg.boundary);
  SiftResult r;
  r.detail.resize(h.size());
  r.mean_envelope.resize(h.size());
  for (std::size_t t = 0; t < h.size(); ++t) {
    r.mean_envelope[t] = (upper[t] + lower[t]) / 2;
    r.detail[t] = h[t] - r.mean_envelope[t];
  }
  return r;
}

struct ImfExtraction {
  std::vector<double> imf;
  std::size_t sifts = 0;
  bool hit_iteration_cap = false;  // stopped at max_sift_iters without converging
};

/// Sifts until the Cauchy ratio sum((h_prev - h)^2) / sum(h_prev^2) drops below
/// sd_threshold and the extrema/zero-crossing condition holds, or until
/// max_sift_iters.
inline ImfExtraction extract_imf(std::span<const double> r, const SiftConfig& cfg) {
  cfg.validate();
  ImfExtraction out;
  std::vector<double> h(r.begin(), r.end());
  while (true) {
    const auto ex = find_extrema(h);
    if (ex.maxima.empty() || ex.minima.empty()) {
      if (out.sifts == 0) throw InsufficientExtrema();
      break;  // sifting flattened h; nothing left to refine
    }
    auto step = sift_once(h, cfg);
    ++out.sifts;
    double num = 0, den = 0;
    for (std::size_t t = 0; t < h.size(); ++t) {
      num += step.mean_envelope[t] * step.mean_envelope[t];
      den += h[t] * h[t];
    }
    const double sd = den > 0 ? num / den : 0.0;
    h = std::move(step.detail);
    if (sd < cfg.sd_threshold && satisfies_extrema_condition(h)) break;
    if (out.sifts >= cfg.max_sift_iters) {
      out.hit_iteration_cap = true;
      break;
    }
  }
  out.imf = std::move(h);
  return out;
}

struct ImfSet {
  std::vector<std::vector<double>> imfs;
  std::vector<double> residual;
  std::vector<std::size_t> capped_imfs;  // indices where the sifting cap fired

  std::size_t length() const noexcept { return residual.size(); }
  std::size_t component_count() const noexcept { return imfs.size() + 1; }

  std::vector<double> reconstruct() const {
    std::vector<double> out = residual;
    for (const auto& imf : imfs) {
      for (std::size_t t = 0; t < out.size(); ++t) out[t] += imf[t];
    }
    return out;
  }
};

/// Repeatedly extracts IMFs from the running residual until it has two or
/// fewer extrema or max_imfs IMFs exist. At least one IMF is always taken.
inline ImfSet decompose(std::span<const double> series, const SiftConfig& cfg = {}) {
  cfg.validate();
  if (series.size() < 4) throw NumericError("series too short to decompose (need >= 4 points)");
  for (double v : series) {
    if (!std::isfinite(v)) throw NumericError("series contains non-finite values");
  }
  if (find_extrema(series).count() < 2) {
    throw InsufficientExtrema("series too flat to decompose (fewer than 2 extrema)");
  }
  ImfSet out;
  out.residual.assign(series.begin(), series.end());
  while (out.imfs.size() < cfg.max_imfs) {
    const auto ex = find_extrema(out.residual);
    if (ex.maxima.empty() || ex.minima.empty()) break;
    if (ex.count() <= 2 && !out.imfs.empty()) break;
    auto extraction = extract_imf(out.residual, cfg);
    if (extraction.hit_iteration_cap) out.capped_imfs.push_back(out.imfs.size());
    for (std::size_t t = 0; t < out.residual.size(); ++t) out.residual[t] -= extraction.imf[t];
    out.imfs.push_back(std::move(extraction.imf));
  }
  if (out.imfs.empty()) {
    throw InsufficientExtrema("series too flat to decompose (no maximum/minimum pair)");
  }
  return out;
}

enum class MixScheme {
  separate,  // IMF 1..n merged; every other IMF and the residual kept apart
  two_part,  // IMF 1..n merged; everything else merged into one low part
};

struct FrequencyParts {
  std::vector<std::vector<double>> parts;
  std::size_t mix_index = 1;
};

/// Average oscillation period in samples: twice the length over the number of
/// zero crossings. Infinite for a component that never crosses zero.
inline double mean_period(std::span<const double> imf) {
  const auto zc = count_zero_crossings(imf);
  if (zc == 0) return std::numeric_limits<double>::infinity();
  return 2.0 * static_cast<double>(imf.size()) / static_cast<double>(zc);
}

/// Length of the leading run of IMFs whose mean period is at most
/// `max_period` samples (at least 1).
inline std::size_t mix_index_by_period(const ImfSet& set, double max_period) {
  std::size_t n = 0;
  while (n < set.imfs.size() && mean_period(set.imfs[n]) <= max_period) ++n;
  return std::max<std::size_t>(n, 1);
}

inline FrequencyParts recombine(const ImfSet& set, std::size_t mix_index,
                                MixScheme scheme = MixScheme::separate) {
  if (mix_index < 1 || mix_index > set.imfs.size()) {
    throw UsageError("mix index " + std::to_string(mix_index) + " out of range 1.." +
                     std::to_string(set.imfs.size()));
  }
  FrequencyParts out;
  out.mix_index = mix_index;
  std::vector<double> high = set.imfs[0];
  for (std::size_t k = 1; k < mix_index; ++k) {
    for (std::size_t t = 0; t < high.size(); ++t) high[t] += set.imfs[k][t];
  }
  out.parts.push_back(std::move(high));
  if (scheme == MixScheme::separate) {
    for (std::size_t k = mix_index; k < set.imfs.size(); ++k) out.parts.push_back(set.imfs[k]);
    out.parts.push_back(set.residual);
  } else {
    std::vector<double> low = set.residual;
    for (std::size_t k = mix_index; k < set.imfs.size(); ++k) {
      for (std::size_t t = 0; t < low.size(); ++t) low[t] += set.imfs[k][t];
    }
    out.parts.push_back(std::move(low));
  }
  return out;
}

}  // namespace stlf::emd
