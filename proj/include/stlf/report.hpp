#pragma once

// CSV and key-value renderings of pipeline results.

#include <string>

#include "stlf/emd.hpp"
#include "stlf/io.hpp"
#include "stlf/pipeline.hpp"

namespace stlf::report {

// hour,component_1..component_K,aggregate[,actual,mape]
inline std::string forecast_csv(const pipeline::ForecastResult& r) {
  std::string out = "hour";
  for (std::size_t k = 0; k < r.per_component.size(); ++k) out += ",component_" + std::to_string(k + 1);
  out += ",aggregate";
  if (r.actual) out += ",actual,mape";
  out += "\n";
  for (std::size_t h = 0; h < r.aggregate.size(); ++h) {
    out += std::to_string(h + 1);
    for (const auto& c : r.per_component) out += "," + format_double(c[h]);
    out += "," + format_double(r.aggregate[h]);
    if (r.actual) out += "," + format_double((*r.actual)[h]) + "," + format_double(r.mape->per_hour[h]);
    out += "\n";
  }
  return out;
}

inline std::string metrics_text(const pipeline::MapeReport& m) {
  std::string out;
  out += "hours=" + std::to_string(m.per_hour.size()) + "\n";
  out += "mape_mean=" + format_fixed(m.mean, 4) + "\n";
  out += "mape_max=" + format_fixed(m.max, 4) + "\n";
  out += "mape_min=" + format_fixed(m.min, 4) + "\n";
  out += "accuracy=" + format_fixed(100.0 - m.mean, 4) + "\n";
  for (std::size_t h = 0; h < m.per_hour.size(); ++h) {
    out += "mape_hour_" + std::to_string(h + 1) + "=" + format_fixed(m.per_hour[h], 4) + "\n";
  }
  return out;
}

// Hours down, one prediction/MAPE column pair per row label, then a mean row.
// Failed rows keep their columns but leave the cells empty.
inline std::string experiment_csv(const pipeline::ExperimentTable& t) {
  std::string out = "hour,actual";
  for (const auto& row : t.rows) out += "," + row.label + "," + row.label + "_mape";
  out += "\n";
  for (std::size_t h = 0; h < t.actual.size(); ++h) {
    out += std::to_string(h + 1) + "," + format_fixed(t.actual[h], 2);
    for (const auto& row : t.rows) {
      if (row.result) {
        out += "," + format_fixed(row.result->aggregate[h], 2) + "," +
               format_fixed(row.result->mape->per_hour[h], 2);
      } else {
        out += ",,";
      }
    }
    out += "\n";
  }
  out += "mean,";
  for (const auto& row : t.rows) {
    out += ",,";
    if (row.result) out += format_fixed(row.result->mape->mean, 2);
  }
  out += "\n";
  return out;
}

// One line per row label: label,mape_mean,mape_max,mape_min,status
inline std::string experiment_summary_csv(const pipeline::ExperimentTable& t) {
  std::string out = "label,mape_mean,mape_max,mape_min,status\n";
  for (const auto& row : t.rows) {
    out += row.label;
    if (row.result) {
      const auto& m = *row.result->mape;
      out += "," + format_fixed(m.mean, 4) + "," + format_fixed(m.max, 4) + "," +
             format_fixed(m.min, 4) + ",ok\n";
    } else {
      std::string msg = row.error;
      for (char& c : msg) {
        if (c == ',' || c == '\n') c = ';';
      }
      out += ",,,,error: " + msg + "\n";
    }
  }
  return out;
}

// timestamp,imf1..imfK,res
inline std::string components_csv(const emd::ImfSet& set, HourStamp start) {
  std::string out = "timestamp";
  for (std::size_t k = 0; k < set.imfs.size(); ++k) out += ",imf" + std::to_string(k + 1);
  out += ",res\n";
  for (std::size_t t = 0; t < set.residual.size(); ++t) {
    out += format_timestamp({start.hours + static_cast<std::int64_t>(t)});
    for (const auto& imf : set.imfs) out += "," + format_double(imf[t]);
    out += "," + format_double(set.residual[t]) + "\n";
  }
  return out;
}

// day,hour,original,revised (1-based day and hour)
inline std::string cleaning_report_csv(const CleaningResult& r) {
  std::string out = "day,hour,original,revised\n";
  for (const auto& rev : r.revisions) {
    out += std::to_string(rev.cell.day + 1) + "," + std::to_string(rev.cell.hour + 1) + "," +
           format_double(rev.original) + "," + format_double(rev.revised) + "\n";
  }
  return out;
}

// component,iteration,particle,fitness,gbest_fitness
inline std::string swarm_trace_csv(const std::vector<pipeline::ComponentModel>& models) {
  std::string out = "component,iteration,particle,fitness,gbest_fitness\n";
  for (const auto& m : models) {
    for (const auto& row : m.swarm_trace) {
      out += std::to_string(m.component_id + 1) + "," + std::to_string(row.iteration) + "," +
             std::to_string(row.particle) + "," + format_double(row.fitness) + "," +
             format_double(row.gbest_fitness) + "\n";
    }
  }
  return out;
}

// component,epoch,loss
inline std::string loss_csv(const std::vector<pipeline::ComponentModel>& models) {
  std::string out = "component,epoch,loss\n";
  for (const auto& m : models) {
    for (std::size_t e = 0; e < m.loss_history.size(); ++e) {
      out += std::to_string(m.component_id + 1) + "," + std::to_string(e + 1) + "," +
             format_double(m.loss_history[e]) + "\n";
    }
  }
  return out;
}

}  // namespace stlf::report
