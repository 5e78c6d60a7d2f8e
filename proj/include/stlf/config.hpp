#pragma once

// Flat `key = value` text form of PipelineConfig. Every field has a key;
// '#' starts a comment; keys under `meta.` are ignored so a run manifest can
// be fed back in as a config file.

#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "stlf/io.hpp"
#include "stlf/pipeline.hpp"

namespace stlf::config {

using pipeline::PipelineConfig;

struct Field {
  std::string key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, std::string_view)> set;
};

namespace detail {

inline double to_double(std::string_view key, std::string_view v) {
  auto d = parse_double(v);
  if (!d) throw UsageError("config key '" + std::string(key) + "': not a number: '" + std::string(v) + "'");
  return *d;
}

inline std::uint64_t to_unsigned(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
    throw UsageError("config key '" + std::string(key) + "': not a non-negative integer: '" +
                     std::string(v) + "'");
  }
  return out;
}

inline bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw UsageError("config key '" + std::string(key) + "': expected true or false");
}

template <class T>
Field real(std::string key, T PipelineConfig::*outer, double T::*member) {
  return {key, [=](const PipelineConfig& c) { return format_double(c.*outer.*member); },
          [=](PipelineConfig& c, std::string_view v) { c.*outer.*member = to_double(key, v); }};
}

template <class T, class U>
Field count(std::string key, T PipelineConfig::*outer, U T::*member) {
  return {key, [=](const PipelineConfig& c) { return std::to_string(c.*outer.*member); },
          [=](PipelineConfig& c, std::string_view v) {
            c.*outer.*member = static_cast<U>(to_unsigned(key, v));
          }};
}

template <class U>
Field top_count(std::string key, U PipelineConfig::*member) {
  return {key, [=](const PipelineConfig& c) { return std::to_string(c.*member); },
          [=](PipelineConfig& c, std::string_view v) { c.*member = static_cast<U>(to_unsigned(key, v)); }};
}

}  // namespace detail

inline std::string to_string(emd::MixScheme s) {
  return s == emd::MixScheme::separate ? "separate" : "two-part";
}
inline emd::MixScheme parse_mix_scheme(std::string_view s) {
  if (s == "separate") return emd::MixScheme::separate;
  if (s == "two-part") return emd::MixScheme::two_part;
  throw UsageError("unknown mix scheme '" + std::string(s) + "' (expected separate or two-part)");
}
inline std::string to_string(pso::LoopOrder l) {
  return l == pso::LoopOrder::synchronous ? "synchronous" : "paper";
}
inline pso::LoopOrder parse_loop_order(std::string_view s) {
  if (s == "synchronous") return pso::LoopOrder::synchronous;
  if (s == "paper") return pso::LoopOrder::paper;
  throw UsageError("unknown swarm loop order '" + std::string(s) + "' (expected synchronous or paper)");
}

inline const std::vector<Field>& fields() {
  using namespace detail;
  using C = PipelineConfig;
  static const std::vector<Field> table = {
      {"variant", [](const C& c) { return pipeline::to_string(c.variant); },
       [](C& c, std::string_view v) { c.variant = pipeline::parse_variant(v); }},
      {"seed", [](const C& c) { return std::to_string(c.seed); },
       [](C& c, std::string_view v) { c.seed = to_unsigned("seed", v); }},
      top_count("threads", &C::threads),
      {"deterministic", [](const C& c) { return std::string(c.deterministic ? "true" : "false"); },
       [](C& c, std::string_view v) { c.deterministic = to_bool("deterministic", v); }},

      real("cleaning.epsilon", &C::cleaning, &CleaningConfig::epsilon),
      real("cleaning.alpha", &C::cleaning, &CleaningConfig::alpha),
      real("cleaning.beta", &C::cleaning, &CleaningConfig::beta),
      real("cleaning.gamma", &C::cleaning, &CleaningConfig::gamma),

      real("sift.sd_threshold", &C::sift, &emd::SiftConfig::sd_threshold),
      count("sift.max_sift_iters", &C::sift, &emd::SiftConfig::max_sift_iters),
      count("sift.max_imfs", &C::sift, &emd::SiftConfig::max_imfs),
      {"sift.boundary",
       [](const C& c) { return std::string(c.sift.boundary == emd::BoundaryPolicy::mirror ? "mirror" : "clamp"); },
       [](C& c, std::string_view v) {
         if (v == "mirror") c.sift.boundary = emd::BoundaryPolicy::mirror;
         else if (v == "clamp") c.sift.boundary = emd::BoundaryPolicy::clamp;
         else throw UsageError("sift.boundary must be mirror or clamp");
       }},

      {"mix.index", [](const C& c) { return c.mix_index == 0 ? std::string("auto") : std::to_string(c.mix_index); },
       [](C& c, std::string_view v) {
         c.mix_index = v == "auto" ? 0 : static_cast<std::size_t>(to_unsigned("mix.index", v));
         if (v != "auto" && c.mix_index == 0) throw UsageError("mix.index must be >= 1 or auto");
       }},
      {"mix.max_period", [](const C& c) { return format_double(c.mix_max_period); },
       [](C& c, std::string_view v) { c.mix_max_period = to_double("mix.max_period", v); }},
      {"mix.scheme", [](const C& c) { return to_string(c.mix_scheme); },
       [](C& c, std::string_view v) { c.mix_scheme = parse_mix_scheme(v); }},

      top_count("window.days", &C::window_days),
      {"window.layout", [](const C& c) { return std::string(c.layout == StepLayout::day ? "day" : "hour"); },
       [](C& c, std::string_view v) {
         if (v == "day") c.layout = StepLayout::day;
         else if (v == "hour") c.layout = StepLayout::hour;
         else throw UsageError("window.layout must be day or hour");
       }},

      count("train.hidden_dim", &C::train, &nn::TrainConfig::hidden_dim),
      count("train.num_layers", &C::train, &nn::TrainConfig::num_layers),
      real("train.learning_rate", &C::train, &nn::TrainConfig::learning_rate),
      count("train.batch_size", &C::train, &nn::TrainConfig::batch_size),
      count("train.epochs", &C::train, &nn::TrainConfig::epochs),
      real("train.clip_norm", &C::train, &nn::TrainConfig::clip_norm),
      real("train.beta1", &C::train, &nn::TrainConfig::beta1),
      real("train.beta2", &C::train, &nn::TrainConfig::beta2),
      real("train.adam_epsilon", &C::train, &nn::TrainConfig::adam_epsilon),

      count("swarm.particles", &C::swarm, &pso::SwarmConfig::particles),
      count("swarm.iterations", &C::swarm, &pso::SwarmConfig::iterations),
      real("swarm.inertia", &C::swarm, &pso::SwarmConfig::inertia),
      real("swarm.c1", &C::swarm, &pso::SwarmConfig::c1),
      real("swarm.c2", &C::swarm, &pso::SwarmConfig::c2),
      real("swarm.v_max", &C::swarm, &pso::SwarmConfig::v_max),
      real("swarm.lower", &C::swarm, &pso::SwarmConfig::lower),
      real("swarm.upper", &C::swarm, &pso::SwarmConfig::upper),
      {"swarm.loop", [](const C& c) { return to_string(c.swarm.loop); },
       [](C& c, std::string_view v) { c.swarm.loop = parse_loop_order(v); }},
      top_count("swarm.probe_epochs", &C::probe_epochs),
      {"swarm.validation_fraction", [](const C& c) { return format_double(c.validation_fraction); },
       [](C& c, std::string_view v) { c.validation_fraction = to_double("swarm.validation_fraction", v); }},
  };
  return table;
}

/// Applies one `key=value` assignment.
inline void set(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  if (key.starts_with("meta.")) return;
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(cfg, value);
      return;
    }
  }
  throw UsageError("unknown config key '" + std::string(key) + "'");
}

/// Applies "key=value" text on top of `cfg`. `origin` prefixes error messages.
inline void apply(PipelineConfig& cfg, std::string_view text, std::string_view origin = "config") {
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(std::string(origin) + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

inline PipelineConfig parse(std::string_view text, std::string_view origin = "config") {
  PipelineConfig cfg;
  apply(cfg, text, origin);
  return cfg;
}

/// Every key in table order, one `key=value` per line. Reals use the shortest
/// round-trip form so parse(serialize(c)) reproduces c exactly.
inline std::string serialize(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += f.key + "=" + f.get(cfg) + "\n";
  return out;
}

}  // namespace stlf::config
