#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace ohca::cli;

  CLI::App app{"Hybrid channel allocation: allocate, simulate, train and benchmark"};
  app.require_subcommand(1);

  SummarizeOptions summarize;
  auto* sum_cmd = app.add_subcommand("summarize", "Aggregate a trace into per-station stats and probabilities");
  sum_cmd->add_option("--trace", summarize.trace, "Trace CSV (station,slot,busy_seconds,packets)")->required();
  sum_cmd->add_option("--window", summarize.window, "Slot length in seconds")->default_val(1.0);
  sum_cmd->add_option("--source", summarize.source, "Probability source")->check(CLI::IsMember({"idle", "packets"}));
  sum_cmd->add_option("--out", summarize.out, "Write probabilities CSV here");

  AllocateOptions alloc;
  auto* alloc_cmd = app.add_subcommand("allocate", "Compute a fixed-channel allocation plan");
  alloc_cmd->add_option("--trace", alloc.trace, "Trace CSV");
  alloc_cmd->add_option("--probs", alloc.probs, "Probabilities CSV (station,probability) or inline list");
  alloc_cmd->add_option("--window", alloc.window, "Slot length in seconds for --trace");
  alloc_cmd->add_option("--source", alloc.source, "Probability source for --trace")
      ->check(CLI::IsMember({"idle", "packets"}));
  alloc_cmd->add_option("--strategy", alloc.strategy, "ap1 | ap2 | ap3 | gp4 | source | uniform")->required();
  alloc_cmd->add_option("--channels", alloc.channels, "Fixed channel budget L")->required();
  alloc_cmd->add_option("--lmin", alloc.lmin, "Lower channel bound");
  alloc_cmd->add_option("--lmax", alloc.lmax, "Upper channel bound");
  alloc_cmd->add_option("--direction", alloc.direction, "min | max")->check(CLI::IsMember({"min", "max"}));
  alloc_cmd->add_option("--out", alloc.out, "Output prefix for <out>.csv and <out>.json");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the hybrid allocation simulator on a scenario");
  sim_cmd->add_option("--scenario", sim.scenario, "Scenario JSON")->required();
  sim_cmd->add_option("--plan", sim.plan, "Plan CSV (station,channels)");
  sim_cmd->add_option("--strategy", sim.strategy, "Allocator used when no plan is given");
  sim_cmd->add_option("--seed", sim.seed, "Override the scenario seed");
  sim_cmd->add_option("--out", sim.out, "Metrics CSV path");

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic traffic dataset");
  synth_cmd->add_option("--stations", synth.stations);
  synth_cmd->add_option("--days", synth.days);
  synth_cmd->add_option("--slots", synth.slots);
  synth_cmd->add_option("--noise", synth.noise);
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--out", synth.out, "Dataset CSV path");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train the traffic-parameter predictor");
  train_cmd->add_option("--data", train.data, "Dataset CSV (bsn,is_weekend,slot,idle_time,packet_count)");
  train_cmd->add_option("--stations", train.stations);
  train_cmd->add_option("--days", train.days);
  train_cmd->add_option("--slots", train.slots);
  train_cmd->add_option("--hidden", train.hidden, "Hidden layer width");
  train_cmd->add_option("--epochs", train.config.epochs);
  train_cmd->add_option("--lr", train.config.learning_rate);
  train_cmd->add_option("--batch", train.config.batch_size);
  train_cmd->add_option("--seed", train.config.seed);
  train_cmd->add_option("--out", train.out, "Model JSON path");
  train_cmd->add_option("--history", train.history, "Per-epoch MSE CSV path");

  PredictOptions predict;
  auto* predict_cmd = app.add_subcommand("predict", "Predict traffic parameters and channel bounds");
  predict_cmd->add_option("--model", predict.model, "Model JSON")->required();
  predict_cmd->add_flag("--weekend", predict.weekend);
  predict_cmd->add_option("--capacity", predict.capacity, "Channels per predicted packet");
  predict_cmd->add_option("--out", predict.out, "Per-slot predictions CSV");

  BenchmarkOptions bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Compare strategies on a scenario over paired seeds");
  bench_cmd->add_option("--scenario", bench.scenario, "Scenario JSON")->required();
  bench_cmd->add_option("--strategies", bench.strategies, "Comma-separated strategy tokens")
      ->delimiter(',')
      ->required();
  bench_cmd->add_option("--seeds", bench.seeds, "Comma-separated seeds")->delimiter(',');
  bench_cmd->add_option("--seed", bench.seeds, "Single seed");
  bench_cmd->add_option("--out", bench.out, "Comparison CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sum_cmd) cmd_summarize(summarize, std::cout);
    else if (*alloc_cmd) cmd_allocate(alloc, std::cout);
    else if (*sim_cmd) cmd_simulate(sim, std::cout);
    else if (*synth_cmd) cmd_synth(synth, std::cout);
    else if (*train_cmd) cmd_train(train, std::cout);
    else if (*predict_cmd) cmd_predict(predict, std::cout);
    else if (*bench_cmd) cmd_benchmark(bench, std::cout);
  } catch (const ohca::Error& e) {
    std::cerr << e.name() << '\n' << e.what() << '\n';
    return 1;
  }
  return 0;
}
