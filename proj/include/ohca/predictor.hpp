#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ohca/error.hpp"
#include "ohca/random.hpp"
#include "ohca/traffic.hpp"

namespace ohca {

struct TrafficFeatures {
  std::size_t bsn = 0;  // base station number, 0-based
  bool is_weekend = false;
  std::size_t slot = 0;  // slot of day

  friend bool operator==(const TrafficFeatures&, const TrafficFeatures&) = default;
};

// one-hot(bsn) ++ [weekend] ++ [sin, cos of the slot angle]; length M + 3
inline Eigen::VectorXd encode_features(const TrafficFeatures& f, std::size_t stations, std::size_t slots_per_day) {
  if (stations == 0 || slots_per_day == 0) throw Error(ErrorKind::EncodingError, "M and slots_per_day must be > 0");
  if (f.bsn >= stations)
    throw Error(ErrorKind::EncodingError, "bsn " + std::to_string(f.bsn) + " outside [0, " + std::to_string(stations) + ")");
  if (f.slot >= slots_per_day)
    throw Error(ErrorKind::EncodingError,
                "slot " + std::to_string(f.slot) + " outside [0, " + std::to_string(slots_per_day) + ")");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(stations + 3));
  const auto m = static_cast<Eigen::Index>(stations);
  x[static_cast<Eigen::Index>(f.bsn)] = 1.0;
  x[m] = f.is_weekend ? 1.0 : 0.0;
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(f.slot) / static_cast<double>(slots_per_day);
  x[m + 1] = std::sin(angle);
  x[m + 2] = std::cos(angle);
  return x;
}

enum class Activation { Tanh };

// Feed-forward network: tanh hidden layers, linear output. Outputs live in
// standardized target space; target_mean/target_scale map them back.
class MlpModel {
 public:
  MlpModel(std::vector<std::size_t> layer_sizes, std::vector<Eigen::MatrixXd> weights,
           std::vector<Eigen::VectorXd> biases, std::vector<double> target_mean = {},
           std::vector<double> target_scale = {})
      : layer_sizes_(std::move(layer_sizes)),
        weights_(std::move(weights)),
        biases_(std::move(biases)),
        target_mean_(std::move(target_mean)),
        target_scale_(std::move(target_scale)) {
    if (layer_sizes_.size() < 2) throw Error(ErrorKind::InvalidModel, "need input and output layer sizes");
    if (std::any_of(layer_sizes_.begin(), layer_sizes_.end(), [](std::size_t s) { return s == 0; }))
      throw Error(ErrorKind::InvalidModel, "layer sizes must be positive");
    if (weights_.size() != layer_sizes_.size() - 1 || biases_.size() != weights_.size())
      throw Error(ErrorKind::InvalidModel, "expected one weight matrix and bias per layer");
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      const auto rows = static_cast<Eigen::Index>(layer_sizes_[l + 1]);
      const auto cols = static_cast<Eigen::Index>(layer_sizes_[l]);
      if (weights_[l].rows() != rows || weights_[l].cols() != cols || biases_[l].size() != rows)
        throw Error(ErrorKind::InvalidModel, "layer " + std::to_string(l) + " shape does not chain");
    }
    if (target_mean_.empty()) target_mean_.assign(output_size(), 0.0);
    if (target_scale_.empty()) target_scale_.assign(output_size(), 1.0);
    if (target_mean_.size() != output_size() || target_scale_.size() != output_size())
      throw Error(ErrorKind::InvalidModel, "target standardization has the wrong length");
    validate();
  }

  static MlpModel zeros(std::vector<std::size_t> layer_sizes) {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
      w.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(layer_sizes[l + 1]),
                                        static_cast<Eigen::Index>(layer_sizes[l])));
      b.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layer_sizes[l + 1])));
    }
    return MlpModel(std::move(layer_sizes), std::move(w), std::move(b));
  }

  // Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static MlpModel initialize(std::vector<std::size_t> layer_sizes, std::uint64_t seed) {
    MlpModel model = zeros(std::move(layer_sizes));
    RandomStream rng(seed, 0x6d6c70);
    for (auto& w : model.weights_) {
      const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-limit, limit);
    }
    return model;
  }

  void validate() const {
    for (std::size_t l = 0; l < weights_.size(); ++l)
      if (!weights_[l].allFinite() || !biases_[l].allFinite())
        throw Error(ErrorKind::InvalidModel, "non-finite parameter in layer " + std::to_string(l));
    for (std::size_t k = 0; k < target_scale_.size(); ++k)
      if (!std::isfinite(target_mean_[k]) || !std::isfinite(target_scale_[k]) || target_scale_[k] <= 0.0)
        throw Error(ErrorKind::InvalidModel, "invalid target standardization");
  }

  const std::vector<std::size_t>& layer_sizes() const noexcept { return layer_sizes_; }
  std::size_t input_size() const noexcept { return layer_sizes_.front(); }
  std::size_t output_size() const noexcept { return layer_sizes_.back(); }
  std::size_t layer_count() const noexcept { return weights_.size(); }
  Activation hidden_activation() const noexcept { return Activation::Tanh; }

  const std::vector<Eigen::MatrixXd>& weights() const noexcept { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const noexcept { return biases_; }
  std::vector<Eigen::MatrixXd>& weights() noexcept { return weights_; }
  std::vector<Eigen::VectorXd>& biases() noexcept { return biases_; }

  const std::vector<double>& target_mean() const noexcept { return target_mean_; }
  const std::vector<double>& target_scale() const noexcept { return target_scale_; }
  void set_target_standardization(std::vector<double> mean, std::vector<double> scale) {
    if (mean.size() != output_size() || scale.size() != output_size())
      throw Error(ErrorKind::DimensionMismatch, "standardization length differs from output size");
    target_mean_ = std::move(mean);
    target_scale_ = std::move(scale);
    validate();
  }

 private:
  std::vector<std::size_t> layer_sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
  std::vector<double> target_mean_;
  std::vector<double> target_scale_;
};

// Raw network output (standardized target space).
inline Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::VectorXd& input) {
  if (static_cast<std::size_t>(input.size()) != model.input_size())
    throw Error(ErrorKind::DimensionMismatch, "input has " + std::to_string(input.size()) + " features, model expects " +
                                                  std::to_string(model.input_size()));
  Eigen::VectorXd a = input;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    Eigen::VectorXd z = model.weights()[l] * a + model.biases()[l];
    a = (l + 1 == model.layer_count()) ? z : Eigen::VectorXd(z.array().tanh());
  }
  return a;
}

struct TrainingSample {
  Eigen::VectorXd input;
  Eigen::VectorXd target;
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

// Per-sample loss: mean over outputs of the squared error.
inline double sample_loss(const MlpModel& model, const TrainingSample& sample) {
  const Eigen::VectorXd diff = mlp_forward(model, sample.input) - sample.target;
  return diff.squaredNorm() / static_cast<double>(diff.size());
}

// Backpropagation of sample_loss.
inline Gradients backprop(const MlpModel& model, const TrainingSample& sample) {
  const std::size_t layers = model.layer_count();
  if (static_cast<std::size_t>(sample.target.size()) != model.output_size())
    throw Error(ErrorKind::DimensionMismatch, "target length differs from output size");
  std::vector<Eigen::VectorXd> activations{sample.input};
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::VectorXd z = model.weights()[l] * activations.back() + model.biases()[l];
    activations.push_back(l + 1 == layers ? z : Eigen::VectorXd(z.array().tanh()));
  }
  Gradients g;
  g.weights.resize(layers);
  g.biases.resize(layers);
  Eigen::VectorXd delta =
      (activations.back() - sample.target) * (2.0 / static_cast<double>(sample.target.size()));
  for (std::size_t l = layers; l-- > 0;) {
    g.weights[l] = delta * activations[l].transpose();
    g.biases[l] = delta;
    if (l > 0) {
      const Eigen::ArrayXd tanh_prime = 1.0 - activations[l].array().square();
      delta = (model.weights()[l].transpose() * delta).array() * tanh_prime;
    }
  }
  return g;
}

using GradientFn = std::function<Gradients(const MlpModel&, const TrainingSample&)>;

// Largest relative error between an analytic gradient and central finite
// differences (step 1e-4) over every parameter.
inline double gradient_check(const MlpModel& model, const TrainingSample& sample, const GradientFn& analytic = backprop) {
  constexpr double step = 1e-4;
  const Gradients ga = analytic(model, sample);
  MlpModel probe = model;
  double worst = 0.0;
  auto compare = [&](double& param, double analytic_value) {
    const double saved = param;
    param = saved + step;
    const double up = sample_loss(probe, sample);
    param = saved - step;
    const double down = sample_loss(probe, sample);
    param = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic_value), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic_value - numeric) / denom);
  };
  for (std::size_t l = 0; l < probe.layer_count(); ++l) {
    auto& w = probe.weights()[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) compare(w(r, c), ga.weights[l](r, c));
    auto& b = probe.biases()[l];
    for (Eigen::Index r = 0; r < b.size(); ++r) compare(b[r], ga.biases[l][r]);
  }
  return worst;
}

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 200;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  bool standardize_targets = true;
};

struct TrainResult {
  MlpModel model;
  double initial_mse = 0.0;          // before the first update
  std::vector<double> loss_history;  // full-dataset MSE after each epoch
};

// Mean squared error in standardized target space.
inline double dataset_mse(const MlpModel& model, std::span<const TrainingSample> data) {
  double total = 0.0;
  for (const auto& s : data) total += sample_loss(model, s);
  return data.empty() ? 0.0 : total / static_cast<double>(data.size());
}

// Mini-batch gradient descent on the mean squared error. Targets are
// standardized with the training-set mean and standard deviation.
inline TrainResult mlp_train(MlpModel model, std::span<const TrainingSample> dataset, const TrainConfig& config) {
  if (dataset.empty()) throw Error(ErrorKind::EmptyDataset, "training set is empty");
  if (config.batch_size == 0 || config.epochs == 0 || !(config.learning_rate >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "epochs, batch_size must be positive and learning_rate >= 0");
  const std::size_t outputs = model.output_size();
  for (const auto& s : dataset) {
    if (static_cast<std::size_t>(s.target.size()) != outputs)
      throw Error(ErrorKind::DimensionMismatch, "target length differs from output size");
    if (static_cast<std::size_t>(s.input.size()) != model.input_size())
      throw Error(ErrorKind::DimensionMismatch, "input length differs from model input size");
  }

  std::vector<double> mean(outputs, 0.0), scale(outputs, 1.0);
  if (config.standardize_targets) {
    const double n = static_cast<double>(dataset.size());
    for (const auto& s : dataset)
      for (std::size_t k = 0; k < outputs; ++k) mean[k] += s.target[static_cast<Eigen::Index>(k)] / n;
    std::vector<double> var(outputs, 0.0);
    for (const auto& s : dataset)
      for (std::size_t k = 0; k < outputs; ++k) {
        const double d = s.target[static_cast<Eigen::Index>(k)] - mean[k];
        var[k] += d * d / n;
      }
    for (std::size_t k = 0; k < outputs; ++k) scale[k] = var[k] > 0.0 ? std::sqrt(var[k]) : 1.0;
  }
  std::vector<TrainingSample> data(dataset.begin(), dataset.end());
  for (auto& s : data)
    for (std::size_t k = 0; k < outputs; ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      s.target[i] = (s.target[i] - mean[k]) / scale[k];
    }

  TrainResult result{model, dataset_mse(model, data), {}};
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  RandomStream rng(config.seed, 0x747261696e);
  auto& net = result.model;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      Gradients sum = backprop(net, data[order[start]]);
      for (std::size_t j = start + 1; j < stop; ++j) {
        const Gradients g = backprop(net, data[order[j]]);
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
          sum.weights[l] += g.weights[l];
          sum.biases[l] += g.biases[l];
        }
      }
      const double step = config.learning_rate / static_cast<double>(stop - start);
      for (std::size_t l = 0; l < net.layer_count(); ++l) {
        net.weights()[l] -= step * sum.weights[l];
        net.biases()[l] -= step * sum.biases[l];
      }
    }
    result.loss_history.push_back(dataset_mse(net, data));
  }
  net.set_target_standardization(std::move(mean), std::move(scale));  // also rejects diverged weights
  return result;
}

struct ParameterPrediction {
  double idle_time = 0.0;
  double packet_count = 0.0;
};

// De-standardized (idle_time, packet_count) for one feature triple.
inline ParameterPrediction predict_parameters(const MlpModel& model, const TrafficFeatures& features,
                                              std::size_t stations, std::size_t slots_per_day) {
  if (model.output_size() != 2) throw Error(ErrorKind::InvalidModel, "parameter model must have two outputs");
  const Eigen::VectorXd raw = mlp_forward(model, encode_features(features, stations, slots_per_day));
  return {raw[0] * model.target_scale()[0] + model.target_mean()[0],
          raw[1] * model.target_scale()[1] + model.target_mean()[1]};
}

// Channel bounds from predicted per-slot packet counts scaled by a capacity
// factor (channels per predicted packet). Negative predictions count as zero.
inline ChannelBounds derive_bounds(std::span<const double> predicted_packet_counts, double capacity_factor = 1.0) {
  if (predicted_packet_counts.empty()) throw Error(ErrorKind::EmptyTrace, "no predictions");
  if (!(capacity_factor > 0.0)) throw Error(ErrorKind::InvalidArgument, "capacity factor must be positive");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double p : predicted_packet_counts) {
    if (!std::isfinite(p)) throw Error(ErrorKind::InvalidArgument, "non-finite prediction");
    const double demand = std::max(0.0, p) * capacity_factor;
    lo = std::min(lo, demand);
    hi = std::max(hi, demand);
  }
  const auto l_min = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(lo)));
  const auto l_max = std::max<std::int64_t>(l_min, static_cast<std::int64_t>(std::ceil(hi)));
  return ChannelBounds(l_min, l_max);
}

// Bounds for one station over every slot of a day type.
inline ChannelBounds predict_station_bounds(const MlpModel& model, std::size_t bsn, bool is_weekend,
                                            std::size_t stations, std::size_t slots_per_day,
                                            double capacity_factor = 1.0) {
  std::vector<double> packets;
  for (std::size_t s = 0; s < slots_per_day; ++s)
    packets.push_back(predict_parameters(model, {bsn, is_weekend, s}, stations, slots_per_day).packet_count);
  return derive_bounds(packets, capacity_factor);
}

// ---------------------------------------------------------------------------
// Synthetic traffic
// ---------------------------------------------------------------------------
//
// For station b, day d (weekend when d % 7 >= 5) and slot s of S:
//   load(b, d, s) = (2 + b) * (1 + amplitude * sin(2 pi s / S)) * (weekend ? weekend_factor : 1)
//   packet_count  = packets_per_load * load * (1 + noise * z1), clamped at 0
//   idle_time     = slot_seconds / (1 + load) * (1 + noise * z2), clamped to [0, slot_seconds]
// with z1, z2 independent standard normals from the seeded stream.

struct SynthConfig {
  double noise = 0.05;
  double diurnal_amplitude = 0.5;
  double weekend_factor = 0.5;
  double packets_per_load = 10.0;
  double slot_seconds = 3600.0;
};

struct TrafficRecord {
  TrafficFeatures features;
  double idle_time = 0.0;
  double packet_count = 0.0;
};

inline bool is_weekend_day(std::size_t day) { return day % 7 >= 5; }

inline double synthetic_load(const TrafficFeatures& f, std::size_t slots_per_day, const SynthConfig& cfg) {
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(f.slot) / static_cast<double>(slots_per_day);
  return (2.0 + static_cast<double>(f.bsn)) * (1.0 + cfg.diurnal_amplitude * std::sin(angle)) *
         (f.is_weekend ? cfg.weekend_factor : 1.0);
}

inline std::vector<TrafficRecord> synth_traffic_dataset(std::size_t stations, std::size_t days,
                                                        std::size_t slots_per_day, std::uint64_t seed,
                                                        const SynthConfig& cfg = {}) {
  if (stations == 0 || days == 0 || slots_per_day == 0)
    throw Error(ErrorKind::InvalidArgument, "stations, days and slots must be positive");
  RandomStream rng(seed, 0x73796e7468);
  std::vector<TrafficRecord> rows;
  rows.reserve(stations * days * slots_per_day);
  for (std::size_t d = 0; d < days; ++d)
    for (std::size_t s = 0; s < slots_per_day; ++s)
      for (std::size_t b = 0; b < stations; ++b) {
        TrafficRecord r;
        r.features = {b, is_weekend_day(d), s};
        const double load = synthetic_load(r.features, slots_per_day, cfg);
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        r.packet_count = std::max(0.0, cfg.packets_per_load * load * (1.0 + cfg.noise * z1));
        r.idle_time = std::clamp(cfg.slot_seconds / (1.0 + load) * (1.0 + cfg.noise * z2), 0.0, cfg.slot_seconds);
        rows.push_back(r);
      }
  return rows;
}

inline std::vector<TrainingSample> to_training_samples(std::span<const TrafficRecord> rows, std::size_t stations,
                                                       std::size_t slots_per_day) {
  std::vector<TrainingSample> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    Eigen::VectorXd target(2);
    target << r.idle_time, r.packet_count;
    out.push_back({encode_features(r.features, stations, slots_per_day), std::move(target)});
  }
  return out;
}

inline std::vector<std::size_t> default_layer_sizes(std::size_t stations) { return {stations + 3, 16, 2}; }

}  // namespace ohca
