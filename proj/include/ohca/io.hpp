#pragma once

// File formats: traces, probability lists, plans, scenarios, metrics, models
// and datasets. CSV everywhere except scenarios, plan metadata and models (JSON).

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ohca/allocation.hpp"
#include "ohca/error.hpp"
#include "ohca/hca_simulator.hpp"
#include "ohca/predictor.hpp"
#include "ohca/traffic.hpp"

namespace ohca::io {

using nlohmann::json;

// Fixed six-decimal rendering used by every text artifact.
inline std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line_no) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty())
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": bad number '" + std::string(text) + "'");
  return value;
}

// Reads a CSV with the given header; returns data rows split into fields.
inline std::vector<std::vector<std::string>> read_csv(std::istream& in, const std::vector<std::string>& header) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<std::string>> rows;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (!seen_header) {
      if (fields != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        throw Error(ErrorKind::ParseError, "expected header '" + expected + "'");
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != header.size())
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(header.size()) + " fields");
    fields.push_back(std::to_string(line_no));  // carried for error messages
    rows.push_back(std::move(fields));
  }
  if (!seen_header) throw Error(ErrorKind::ParseError, "missing CSV header");
  return rows;
}

}  // namespace detail

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  return out;
}

// --- traces: station,slot,busy_seconds,packets -----------------------------

inline std::vector<TrafficTrace> read_traces(std::istream& in, double window_length) {
  const auto rows = detail::read_csv(in, {"station", "slot", "busy_seconds", "packets"});
  std::map<std::size_t, TrafficTrace> by_station;
  for (const auto& r : rows) {
    const auto line_no = detail::parse_number<std::size_t>(r[4], 0);
    const auto station = detail::parse_number<std::size_t>(r[0], line_no);
    auto& trace = by_station[station];
    trace.station_id = station;
    trace.window_length = window_length;
    trace.samples.push_back({detail::parse_number<std::int64_t>(r[1], line_no),
                             detail::parse_number<double>(r[2], line_no),
                             detail::parse_number<std::uint64_t>(r[3], line_no)});
  }
  if (by_station.empty()) throw Error(ErrorKind::EmptyTrace, "trace file has no rows");
  std::vector<TrafficTrace> traces;
  for (auto& [station, trace] : by_station) {
    if (station != traces.size())
      throw Error(ErrorKind::InvalidTrace, "station ids must be contiguous from 0; missing " +
                                               std::to_string(traces.size()));
    validate_trace(trace);
    traces.push_back(std::move(trace));
  }
  return traces;
}

// --- probabilities: station,probability (or a bare comma list) -------------

inline ProbabilityVector read_probabilities(std::istream& in) {
  const auto rows = detail::read_csv(in, {"station", "probability"});
  std::vector<double> values(rows.size());
  std::vector<bool> seen(rows.size(), false);
  for (const auto& r : rows) {
    const auto line_no = detail::parse_number<std::size_t>(r[2], 0);
    const auto station = detail::parse_number<std::size_t>(r[0], line_no);
    if (station >= rows.size() || seen[station])
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": station ids must be 0..M-1, once each");
    seen[station] = true;
    values[station] = detail::parse_number<double>(r[1], line_no);
  }
  return ProbabilityVector(std::move(values));
}

inline ProbabilityVector parse_probability_list(std::string_view text) {
  std::vector<double> values;
  for (const auto& field : detail::split_csv(text)) values.push_back(detail::parse_number<double>(field, 1));
  return ProbabilityVector(std::move(values));
}

inline void write_probabilities(std::ostream& out, const ProbabilityVector& probs) {
  out << "station,probability\n";
  for (std::size_t i = 0; i < probs.size(); ++i) out << i << ',' << fmt(probs[i], 12) << '\n';
}

// --- plans -----------------------------------------------------------------

inline void write_plan_csv(std::ostream& out, const AllocationPlan& plan) {
  out << "station,channels\n";
  for (std::size_t i = 0; i < plan.counts.size(); ++i) out << i << ',' << plan.counts[i] << '\n';
}

inline std::vector<std::int64_t> read_plan_csv(std::istream& in) {
  const auto rows = detail::read_csv(in, {"station", "channels"});
  std::vector<std::int64_t> counts(rows.size(), -1);
  for (const auto& r : rows) {
    const auto line_no = detail::parse_number<std::size_t>(r[2], 0);
    const auto station = detail::parse_number<std::size_t>(r[0], line_no);
    if (station >= rows.size() || counts[station] != -1)
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": station ids must be 0..M-1, once each");
    counts[station] = detail::parse_number<std::int64_t>(r[1], line_no);
    if (counts[station] < 0) throw Error(ErrorKind::ParseError, "negative channel count");
  }
  return counts;
}

inline json plan_to_json(const AllocationPlan& plan, std::optional<double> objective = std::nullopt) {
  json params = json::object();
  if (plan.params.c) params["c"] = plan.params.c->str();
  if (plan.params.a) params["a"] = *plan.params.a;
  if (plan.params.d) params["d"] = *plan.params.d;
  if (plan.params.r) params["r"] = *plan.params.r;
  if (plan.params.k) params["k"] = *plan.params.k;
  json doc = {{"strategy", std::string(to_token(plan.strategy))},
              {"counts", plan.counts},
              {"total_fixed", plan.total_fixed},
              {"residual_to_pool", plan.residual_to_pool},
              {"params", params}};
  if (objective) doc["objective"] = fmt(*objective);
  return doc;
}

inline Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    if (text.find('.') == std::string_view::npos)
      return Rational::reduced(detail::parse_number<std::int64_t>(detail::trim(text), 0), 1);
    // decimal: exact up to 1e-9
    const double v = detail::parse_number<double>(detail::trim(text), 0);
    return Rational::reduced(static_cast<std::int64_t>(std::llround(v * 1e9)), 1'000'000'000);
  }
  return Rational::reduced(detail::parse_number<std::int64_t>(detail::trim(text.substr(0, slash)), 0),
                           detail::parse_number<std::int64_t>(detail::trim(text.substr(slash + 1)), 0));
}

inline AllocationPlan plan_from_json(const json& doc) {
  try {
    AllocationPlan plan;
    plan.strategy = parse_strategy(doc.at("strategy").get<std::string>());
    plan.counts = doc.at("counts").get<std::vector<std::int64_t>>();
    plan.total_fixed = doc.at("total_fixed").get<std::int64_t>();
    plan.residual_to_pool = doc.at("residual_to_pool").get<std::int64_t>();
    const auto& p = doc.at("params");
    if (p.contains("c")) plan.params.c = parse_rational(p["c"].get<std::string>());
    if (p.contains("a")) plan.params.a = p["a"].get<std::int64_t>();
    if (p.contains("d")) plan.params.d = p["d"].get<std::int64_t>();
    if (p.contains("r")) plan.params.r = p["r"].get<std::int64_t>();
    if (p.contains("k")) plan.params.k = p["k"].get<std::int64_t>();
    return plan;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("plan JSON: ") + e.what());
  }
}

// --- scenarios -------------------------------------------------------------
//
// {
//   "M": 4, "total_channels": 40, "fixed_fraction": "3/4",
//   "arrival_rate_per_cell": [...], "mean_holding_time": 1.0,
//   "sim_duration": 2000.0, "seed": 1,
//   "l_min": 2, "l_max": 13, "direction": "min"     (optional)
// }

inline ScenarioConfig scenario_from_json(const json& doc) {
  try {
    ScenarioConfig s;
    s.cells = doc.at("M").get<std::size_t>();
    s.total_channels = doc.at("total_channels").get<std::int64_t>();
    if (doc.contains("fixed_fraction")) {
      const auto& f = doc["fixed_fraction"];
      s.fixed_fraction = f.is_string() ? parse_rational(f.get<std::string>())
                                       : parse_rational(f.dump());
    }
    s.arrival_rate_per_cell = doc.at("arrival_rate_per_cell").get<std::vector<double>>();
    s.mean_holding_time = doc.at("mean_holding_time").get<double>();
    s.sim_duration = doc.at("sim_duration").get<double>();
    s.seed = doc.value("seed", std::uint64_t{1});
    if (doc.contains("l_min") || doc.contains("l_max"))
      s.bounds = ChannelBounds(doc.at("l_min").get<std::int64_t>(), doc.at("l_max").get<std::int64_t>());
    if (doc.contains("direction")) s.direction = parse_direction(doc["direction"].get<std::string>());
    validate_scenario(s);
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("scenario JSON: ") + e.what());
  }
}

inline json scenario_to_json(const ScenarioConfig& s) {
  json doc = {{"M", s.cells},
              {"total_channels", s.total_channels},
              {"fixed_fraction", s.fixed_fraction.str()},
              {"arrival_rate_per_cell", s.arrival_rate_per_cell},
              {"mean_holding_time", s.mean_holding_time},
              {"sim_duration", s.sim_duration},
              {"seed", s.seed},
              {"direction", std::string(to_token(s.direction))}};
  if (s.bounds) {
    doc["l_min"] = s.bounds->l_min;
    doc["l_max"] = s.bounds->l_max;
  }
  return doc;
}

inline ScenarioConfig read_scenario(const std::string& path) {
  auto in = open_input(path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, "'" + path + "': " + e.what());
  }
  return scenario_from_json(doc);
}

// --- metrics ---------------------------------------------------------------

inline void write_metrics_csv(std::ostream& out, const SimMetrics& m) {
  out << "cell,offered,blocked,completed,blocking_prob\n";
  for (std::size_t i = 0; i < m.cells.size(); ++i) {
    const auto& c = m.cells[i];
    out << i << ',' << c.offered << ',' << c.blocked << ',' << c.completed << ',' << fmt(c.blocking_probability())
        << '\n';
  }
}

inline std::string metrics_summary(const SimMetrics& m) {
  return "offered=" + std::to_string(m.total_offered()) + " blocked=" + std::to_string(m.total_blocked()) +
         " blocking=" + fmt(m.overall_blocking()) + " pool=" + std::to_string(m.pool_size) +
         " pool_peak=" + std::to_string(m.peak_pool_occupancy) + " pool_mean=" + fmt(m.mean_pool_occupancy);
}

// --- models: {"layer_sizes", "weights" (row-major per layer), "biases", ...} -

inline json model_to_json(const MlpModel& model) {
  json weights = json::array(), biases = json::array();
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const auto& w = model.weights()[l];
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    weights.push_back(flat);
    const auto& b = model.biases()[l];
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  return {{"layer_sizes", model.layer_sizes()},
          {"hidden_activation", "tanh"},
          {"output_activation", "identity"},
          {"weights", weights},
          {"biases", biases},
          {"target_mean", model.target_mean()},
          {"target_scale", model.target_scale()}};
}

inline MlpModel model_from_json(const json& doc) {
  try {
    auto sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
    if (doc.value("hidden_activation", std::string("tanh")) != "tanh")
      throw Error(ErrorKind::InvalidModel, "only tanh hidden activation is supported");
    const auto& wj = doc.at("weights");
    const auto& bj = doc.at("biases");
    if (sizes.size() < 2 || wj.size() != sizes.size() - 1 || bj.size() != sizes.size() - 1)
      throw Error(ErrorKind::InvalidModel, "layer count mismatch");
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const auto rows = static_cast<Eigen::Index>(sizes[l + 1]);
      const auto cols = static_cast<Eigen::Index>(sizes[l]);
      const auto flat = wj[l].get<std::vector<double>>();
      const auto bias = bj[l].get<std::vector<double>>();
      if (flat.size() != static_cast<std::size_t>(rows * cols) || bias.size() != static_cast<std::size_t>(rows))
        throw Error(ErrorKind::InvalidModel, "layer " + std::to_string(l) + " has the wrong number of parameters");
      Eigen::MatrixXd w(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
      weights.push_back(std::move(w));
      biases.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(), rows));
    }
    return MlpModel(std::move(sizes), std::move(weights), std::move(biases),
                    doc.value("target_mean", std::vector<double>{}), doc.value("target_scale", std::vector<double>{}));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("model JSON: ") + e.what());
  }
}

// --- datasets: bsn,is_weekend,slot,idle_time,packet_count ------------------

inline void write_dataset_csv(std::ostream& out, std::span<const TrafficRecord> rows) {
  out << "bsn,is_weekend,slot,idle_time,packet_count\n";
  for (const auto& r : rows)
    out << r.features.bsn << ',' << (r.features.is_weekend ? 1 : 0) << ',' << r.features.slot << ','
        << fmt(r.idle_time) << ',' << fmt(r.packet_count) << '\n';
}

inline std::vector<TrafficRecord> read_dataset_csv(std::istream& in) {
  const auto rows = detail::read_csv(in, {"bsn", "is_weekend", "slot", "idle_time", "packet_count"});
  std::vector<TrafficRecord> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const auto line_no = detail::parse_number<std::size_t>(r[5], 0);
    TrafficRecord rec;
    rec.features.bsn = detail::parse_number<std::size_t>(r[0], line_no);
    const auto weekend = detail::parse_number<int>(r[1], line_no);
    if (weekend != 0 && weekend != 1) throw Error(ErrorKind::ParseError, "is_weekend must be 0 or 1");
    rec.features.is_weekend = weekend == 1;
    rec.features.slot = detail::parse_number<std::size_t>(r[2], line_no);
    rec.idle_time = detail::parse_number<double>(r[3], line_no);
    rec.packet_count = detail::parse_number<double>(r[4], line_no);
    out.push_back(rec);
  }
  return out;
}

}  // namespace ohca::io
