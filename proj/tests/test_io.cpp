#include <gtest/gtest.h>

#include <sstream>

#include "ohca/allocators.hpp"
#include "ohca/io.hpp"
#include "test_util.hpp"

using namespace ohca;

TEST(TraceCsv, GroupsByStation) {
  std::istringstream in(
      "station,slot,busy_seconds,packets\n"
      "0,0,4,3\n"
      "1,0,1,1\n"
      "0,1,6,7\n"
      "1,1,2.5,9\n");
  const auto traces = io::read_traces(in, 10.0);
  ASSERT_EQ(traces.size(), 2u);
  const auto s0 = summarize_trace(traces[0]);
  EXPECT_DOUBLE_EQ(s0.idle_time, 10.0);
  EXPECT_EQ(s0.packet_count, 10u);
  EXPECT_DOUBLE_EQ(summarize_trace(traces[1]).idle_time, 16.5);
}

TEST(TraceCsv, Errors) {
  std::istringstream bad_header("station,slot,busy,packets\n0,0,1,1\n");
  EXPECT_EQ(error_of([&] { io::read_traces(bad_header, 1.0); }), ErrorKind::ParseError);
  std::istringstream gap("station,slot,busy_seconds,packets\n0,0,1,1\n2,0,1,1\n");
  EXPECT_EQ(error_of([&] { io::read_traces(gap, 5.0); }), ErrorKind::InvalidTrace);
  std::istringstream too_busy("station,slot,busy_seconds,packets\n0,0,9,1\n");
  EXPECT_EQ(error_of([&] { io::read_traces(too_busy, 5.0); }), ErrorKind::InvalidTrace);
  std::istringstream junk("station,slot,busy_seconds,packets\n0,x,1,1\n");
  EXPECT_EQ(error_of([&] { io::read_traces(junk, 5.0); }), ErrorKind::ParseError);
  std::istringstream empty("station,slot,busy_seconds,packets\n");
  EXPECT_EQ(error_of([&] { io::read_traces(empty, 5.0); }), ErrorKind::EmptyTrace);
}

TEST(ProbabilityFiles, ReadWriteAndInline) {
  std::istringstream in("station,probability\n1,0.25\n0,0.75\n");
  const auto p = io::read_probabilities(in);
  EXPECT_DOUBLE_EQ(p[0], 0.75);
  EXPECT_DOUBLE_EQ(p[1], 0.25);
  std::ostringstream out;
  io::write_probabilities(out, p);
  std::istringstream back(out.str());
  EXPECT_EQ(io::read_probabilities(back).values(), p.values());
  EXPECT_EQ(io::parse_probability_list("0.4, 0.3,0.2,0.1").size(), 4u);
  EXPECT_EQ(error_of([] { io::parse_probability_list("0.5,0.6"); }), ErrorKind::InvalidArgument);
}

TEST(PlanFormats, CsvAndJsonRoundTrip) {
  const auto plan = allocate_ap_case2(5, 35, ChannelBounds(2, 13), ProbabilityVector({0.1, 0.2, 0.3, 0.25, 0.15}));
  std::ostringstream csv;
  io::write_plan_csv(csv, plan);
  std::istringstream csv_in(csv.str());
  EXPECT_EQ(io::read_plan_csv(csv_in), plan.counts);

  const auto doc = io::plan_to_json(plan, 3.5);
  EXPECT_EQ(doc["strategy"], "ap2");
  EXPECT_EQ(doc["objective"], "3.500000");
  EXPECT_EQ(io::plan_from_json(doc), plan);

  const auto ap1 = allocate_ap_case1(3, 10, ProbabilityVector({0.5, 0.3, 0.2}));
  const auto ap1_doc = io::plan_to_json(ap1);
  EXPECT_EQ(ap1_doc["params"]["c"], "5/3");
  EXPECT_EQ(io::plan_from_json(ap1_doc), ap1);
}

TEST(ScenarioJson, ParsesFractionForms) {
  auto doc = nlohmann::json::parse(R"({
    "M": 2, "total_channels": 20, "fixed_fraction": "3/4",
    "arrival_rate_per_cell": [1.5, 2.0], "mean_holding_time": 2.0,
    "sim_duration": 100, "seed": 9, "l_min": 2, "l_max": 8, "direction": "max"})");
  const auto s = io::scenario_from_json(doc);
  EXPECT_EQ(s.cells, 2u);
  EXPECT_EQ(s.fixed_fraction, (Rational{3, 4}));
  EXPECT_EQ(s.seed, 9u);
  EXPECT_EQ(s.bounds, ChannelBounds(2, 8));
  EXPECT_EQ(s.direction, Direction::Maximize);

  doc["fixed_fraction"] = 0.75;
  EXPECT_EQ(io::scenario_from_json(doc).fixed_fraction, (Rational{3, 4}));
  doc["fixed_fraction"] = 1;
  EXPECT_EQ(io::scenario_from_json(doc).fixed_fraction, (Rational{1, 1}));

  const auto again = io::scenario_from_json(io::scenario_to_json(s));
  EXPECT_EQ(again.arrival_rate_per_cell, s.arrival_rate_per_cell);
  EXPECT_EQ(again.bounds, s.bounds);

  doc.erase("total_channels");
  EXPECT_EQ(error_of([&] { io::scenario_from_json(doc); }), ErrorKind::ParseError);
}

TEST(ModelJson, RoundTripPreservesOutputs) {
  MlpModel m = MlpModel::initialize({5, 6, 2}, 12);
  m.set_target_standardization({10.0, -1.0}, {2.0, 0.5});
  const auto back = io::model_from_json(nlohmann::json::parse(io::model_to_json(m).dump()));
  EXPECT_EQ(back.layer_sizes(), m.layer_sizes());
  EXPECT_EQ(back.target_mean(), m.target_mean());
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
  EXPECT_EQ(mlp_forward(back, x), mlp_forward(m, x));

  auto doc = io::model_to_json(m);
  doc["weights"][0].erase(0);
  EXPECT_EQ(error_of([&] { io::model_from_json(doc); }), ErrorKind::InvalidModel);
}

TEST(DatasetCsv, RoundTrip) {
  const auto rows = synth_traffic_dataset(2, 2, 3, 5);
  std::ostringstream out;
  io::write_dataset_csv(out, rows);
  std::istringstream in(out.str());
  const auto back = io::read_dataset_csv(in);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].features, rows[i].features);
    EXPECT_NEAR(back[i].packet_count, rows[i].packet_count, 1e-6);
    EXPECT_NEAR(back[i].idle_time, rows[i].idle_time, 1e-6);
  }
}

TEST(MetricsCsv, Layout) {
  SimMetrics m;
  m.cells = {{10, 2, 7}, {0, 0, 0}};
  std::ostringstream out;
  io::write_metrics_csv(out, m);
  EXPECT_EQ(out.str(), "cell,offered,blocked,completed,blocking_prob\n0,10,2,7,0.200000\n1,0,0,0,0.000000\n");
}
