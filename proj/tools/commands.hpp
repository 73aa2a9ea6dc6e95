#pragma once

// Subcommand implementations for the ohca tool. Each command reads its inputs,
// writes artifacts, prints a short report on `out`, and throws ohca::Error on
// failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ohca/ohca.hpp"

namespace ohca::cli {

// Seed used whenever none is given on the command line or in a scenario.
inline constexpr std::uint64_t kDefaultSeed = 20160101;

enum class Command { Summarize, Allocate, Simulate, Synth, Train, Predict, Benchmark };

struct SummarizeOptions {
  std::string trace;
  double window = 1.0;
  std::string source = "idle";  // idle | packets
  std::optional<std::string> out;
};

struct AllocateOptions {
  std::optional<std::string> trace;
  std::optional<std::string> probs;  // file path or inline comma list
  double window = 1.0;
  std::string source = "idle";
  std::string strategy;
  std::int64_t channels = 0;
  std::optional<std::int64_t> lmin;
  std::optional<std::int64_t> lmax;
  std::string direction = "min";
  std::optional<std::string> out;  // writes <out>.csv and <out>.json
};

struct SimulateOptions {
  std::string scenario;
  std::optional<std::string> plan;  // plan CSV; otherwise computed with `strategy`
  std::string strategy = "uniform";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

struct SynthOptions {
  std::size_t stations = 4;
  std::size_t days = 30;
  std::size_t slots = 24;
  double noise = 0.05;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::string> out;
};

struct TrainOptions {
  std::optional<std::string> data;  // dataset CSV; synthetic data when absent
  std::size_t stations = 4;
  std::size_t days = 30;
  std::size_t slots = 24;
  std::size_t hidden = 16;
  TrainConfig config{.seed = kDefaultSeed};
  std::string out = "model.json";
  std::optional<std::string> history;
};

struct PredictOptions {
  std::string model;
  bool weekend = false;
  double capacity = 1.0;
  std::optional<std::string> out;  // per-slot predictions CSV
};

struct BenchmarkOptions {
  std::string scenario;
  std::vector<std::string> strategies;
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> out;
};

namespace detail {

inline std::string slurp(const std::string& path) {
  auto in = io::open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  auto out = io::open_output(path);
  out << content;
  if (!out) throw Error(ErrorKind::IoError, "failed writing '" + path + "'");
}

inline std::vector<BaseStationStats> trace_stats(const std::string& path, double window) {
  auto in = io::open_input(path);
  std::vector<BaseStationStats> stats;
  for (const auto& trace : io::read_traces(in, window)) stats.push_back(summarize_trace(trace));
  return stats;
}

inline ProbabilityVector stats_probabilities(const std::vector<BaseStationStats>& stats, const std::string& source) {
  if (source == "idle") return idle_time_probabilities(stats);
  if (source == "packets") return inverse_packet_count_probabilities(stats);
  throw Error(ErrorKind::InvalidArgument, "probability source must be 'idle' or 'packets'");
}

inline ProbabilityVector load_probabilities(const std::string& arg) {
  if (std::filesystem::exists(arg)) {
    auto in = io::open_input(arg);
    return io::read_probabilities(in);
  }
  return io::parse_probability_list(arg);
}

// Plan computed from a scenario with the fixed share of its channels.
inline AllocationPlan scenario_plan(const ScenarioConfig& scenario, Strategy strategy) {
  const auto split = split_channels(scenario.total_channels, scenario.fixed_fraction);
  AllocationRequest req;
  req.strategy = strategy;
  req.channels = split.fixed;
  req.cells = scenario.cells;
  req.direction = scenario.direction;
  if (strategy != Strategy::UniformFca) {
    req.probs = scenario_probabilities(scenario);
    req.bounds = scenario_bounds(scenario);
  }
  return allocate(req);
}

}  // namespace detail

// Per-station stats on `out`; probabilities CSV to --out when given.
inline void cmd_summarize(const SummarizeOptions& opt, std::ostream& out) {
  const auto stats = detail::trace_stats(opt.trace, opt.window);
  const auto probs = detail::stats_probabilities(stats, opt.source);
  out << "station,idle_time,packet_count,probability\n";
  for (std::size_t i = 0; i < stats.size(); ++i)
    out << i << ',' << io::fmt(stats[i].idle_time) << ',' << stats[i].packet_count << ',' << io::fmt(probs[i], 12)
        << '\n';
  if (opt.out) {
    std::ostringstream csv;
    io::write_probabilities(csv, probs);
    detail::write_file(*opt.out, csv.str());
  }
}

inline AllocationPlan cmd_allocate(const AllocateOptions& opt, std::ostream& out) {
  if (opt.trace.has_value() == opt.probs.has_value())
    throw Error(ErrorKind::InvalidArgument, "give exactly one of --trace or --probs");
  const ProbabilityVector probs = opt.trace
                                      ? detail::stats_probabilities(detail::trace_stats(*opt.trace, opt.window),
                                                                    opt.source)
                                      : detail::load_probabilities(*opt.probs);
  AllocationRequest req;
  req.strategy = parse_strategy(opt.strategy);
  req.channels = opt.channels;
  req.probs = probs;
  req.direction = parse_direction(opt.direction);
  req.l_min = opt.lmin;
  if (opt.lmin && opt.lmax) req.bounds = ChannelBounds(*opt.lmin, *opt.lmax);
  else if (opt.lmax) throw Error(ErrorKind::MissingBounds, "--lmax needs --lmin");

  const AllocationPlan plan = allocate(req);
  const double objective = average_allocation(plan, probs);

  std::ostringstream csv;
  io::write_plan_csv(csv, plan);
  if (opt.out) {
    detail::write_file(*opt.out + ".csv", csv.str());
    detail::write_file(*opt.out + ".json", io::plan_to_json(plan, objective).dump(2) + "\n");
  } else {
    out << csv.str();
  }
  out << "objective=" << io::fmt(objective) << " residual_to_pool=" << plan.residual_to_pool << '\n';
  return plan;
}

inline SimMetrics cmd_simulate(const SimulateOptions& opt, std::ostream& out) {
  ScenarioConfig scenario = io::read_scenario(opt.scenario);
  if (opt.seed) scenario.seed = *opt.seed;
  AllocationPlan plan;
  if (opt.plan) {
    auto in = io::open_input(*opt.plan);
    plan.counts = io::read_plan_csv(in);
    plan.total_fixed = split_channels(scenario.total_channels, scenario.fixed_fraction).fixed;
    plan.residual_to_pool = plan.total_fixed - plan.assigned();
  } else {
    plan = detail::scenario_plan(scenario, parse_strategy(opt.strategy));
  }
  // every channel not fixed to a cell serves as a dynamic channel
  const std::int64_t pool = scenario.total_channels - plan.assigned();
  const SimMetrics metrics = run_hca_simulation(scenario, plan, pool);
  std::ostringstream csv;
  io::write_metrics_csv(csv, metrics);
  if (opt.out) detail::write_file(*opt.out, csv.str());
  else out << csv.str();
  out << io::metrics_summary(metrics) << '\n';
  return metrics;
}

inline void cmd_synth(const SynthOptions& opt, std::ostream& out) {
  SynthConfig cfg;
  cfg.noise = opt.noise;
  const auto rows = synth_traffic_dataset(opt.stations, opt.days, opt.slots, opt.seed, cfg);
  std::ostringstream csv;
  io::write_dataset_csv(csv, rows);
  if (opt.out) {
    detail::write_file(*opt.out, csv.str());
    out << "rows=" << rows.size() << '\n';
  } else {
    out << csv.str();
  }
}

inline TrainResult cmd_train(const TrainOptions& opt, std::ostream& out) {
  std::vector<TrafficRecord> rows;
  std::size_t stations = opt.stations;
  std::size_t slots = opt.slots;
  if (opt.data) {
    auto in = io::open_input(*opt.data);
    rows = io::read_dataset_csv(in);
    stations = slots = 0;
    for (const auto& r : rows) {
      stations = std::max(stations, r.features.bsn + 1);
      slots = std::max(slots, r.features.slot + 1);
    }
  } else {
    rows = synth_traffic_dataset(opt.stations, opt.days, opt.slots, opt.config.seed);
  }
  const auto samples = to_training_samples(rows, stations, slots);
  MlpModel model = MlpModel::initialize({stations + 3, opt.hidden, 2}, opt.config.seed);
  TrainResult result = mlp_train(std::move(model), samples, opt.config);

  auto doc = io::model_to_json(result.model);
  doc["stations"] = stations;
  doc["slots_per_day"] = slots;
  detail::write_file(opt.out, doc.dump(2) + "\n");
  if (opt.history) {
    std::ostringstream csv;
    csv << "epoch,mse\n";
    for (std::size_t e = 0; e < result.loss_history.size(); ++e)
      csv << e << ',' << io::fmt(result.loss_history[e], 9) << '\n';
    detail::write_file(*opt.history, csv.str());
  }
  out << "samples=" << samples.size() << " epochs=" << result.loss_history.size()
      << " initial_mse=" << io::fmt(result.initial_mse) << " final_mse=" << io::fmt(result.loss_history.back())
      << '\n';
  return result;
}

// Channel bounds per station from a trained model; per-slot predictions to --out.
inline std::vector<ChannelBounds> cmd_predict(const PredictOptions& opt, std::ostream& out) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detail::slurp(opt.model));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, "'" + opt.model + "': " + e.what());
  }
  const MlpModel model = io::model_from_json(doc);
  const auto stations = doc.value("stations", model.input_size() - 3);
  const auto slots = doc.value("slots_per_day", std::size_t{24});

  std::ostringstream csv;
  csv << "bsn,slot,idle_time,packet_count\n";
  std::vector<ChannelBounds> bounds;
  out << "station,l_min,l_max\n";
  for (std::size_t b = 0; b < stations; ++b) {
    std::vector<double> packets;
    for (std::size_t s = 0; s < slots; ++s) {
      const auto p = predict_parameters(model, {b, opt.weekend, s}, stations, slots);
      packets.push_back(p.packet_count);
      csv << b << ',' << s << ',' << io::fmt(p.idle_time) << ',' << io::fmt(p.packet_count) << '\n';
    }
    bounds.push_back(derive_bounds(packets, opt.capacity));
    out << b << ',' << bounds.back().l_min << ',' << bounds.back().l_max << '\n';
  }
  if (opt.out) detail::write_file(*opt.out, csv.str());
  return bounds;
}

struct BenchmarkRow {
  std::string strategy;
  double objective = 0.0;
  double mean_blocking = 0.0;
  double std_blocking = 0.0;
};

// One row per strategy, every strategy simulated on the same seeds.
inline std::vector<BenchmarkRow> cmd_benchmark(const BenchmarkOptions& opt, std::ostream& out) {
  if (opt.strategies.empty()) throw Error(ErrorKind::InvalidArgument, "no strategies given");
  const ScenarioConfig scenario = io::read_scenario(opt.scenario);
  const std::vector<std::uint64_t> seeds = opt.seeds.empty() ? std::vector<std::uint64_t>{scenario.seed} : opt.seeds;
  std::vector<BenchmarkRow> rows;
  for (const auto& token : opt.strategies) {
    const AllocationPlan plan = detail::scenario_plan(scenario, parse_strategy(token));
    const auto summary = evaluate_plan(scenario, plan, scenario.total_channels - plan.assigned(), seeds);
    rows.push_back({token, summary.objective, summary.mean_blocking, summary.std_blocking});
  }
  std::ostringstream csv;
  csv << "strategy,objective,mean_blocking,std_blocking\n";
  for (const auto& r : rows)
    csv << r.strategy << ',' << io::fmt(r.objective) << ',' << io::fmt(r.mean_blocking) << ','
        << io::fmt(r.std_blocking) << '\n';
  if (opt.out) detail::write_file(*opt.out, csv.str());
  out << csv.str();
  return rows;
}

}  // namespace ohca::cli
