// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/trainer/train.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "jcif/common/error.hpp"
#include "jcif/common/random.hpp"
#include "jcif/numerics/ops.hpp"
#include "jcif/trainer/adam.hpp"
#include "jcif/trainer/gradient_surgery.hpp"

namespace jcif::trainer {

using numerics::Bindings;
using numerics::ParameterSet;
using numerics::Shape;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

void TrainSchedule::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("schedule: learning rate must be positive");
  }
  if (!(codec_factor >= 0.0 && codec_factor <= 1.0)) {
    throw ConfigError("schedule: codec learning-rate factor must lie in [0, 1]");
  }
  if (batch_size == 0) throw ConfigError("schedule: batch size must be positive");
  if (early_stop_window == 0) throw ConfigError("schedule: early-stop window must be positive");
  if (!(early_stop_tolerance >= 0.0)) throw ConfigError("schedule: early-stop tolerance must be non-negative");
  if (surgery != SurgeryTasks::kHashingAndCompression && surgery != SurgeryTasks::kHashingOnly) {
    throw ConfigError("schedule: surgery task set must be 3 or 4");
  }
  if (!(stage1_decay_fraction >= 0.0 && stage1_decay_fraction < 1.0)) {
    throw ConfigError("schedule: stage-1 decay fraction must lie in [0, 1)");
  }
  if (!(stage1_decay_factor > 0.0 && stage1_decay_factor <= 1.0)) {
    throw ConfigError("schedule: stage-1 decay factor must lie in (0, 1]");
  }
  if (mgda_scaling != MgdaScaling::kRaw && mgda_scaling != MgdaScaling::kLoss) {
    throw ConfigError("schedule: unknown MGDA gradient scaling");
  }
}

Tensor TrainSchedule::to_tensor() const {
  return Tensor(Shape{13}, {static_cast<double>(stage1_steps), static_cast<double>(stage2_steps), learning_rate,
                            codec_factor, static_cast<double>(batch_size),
                            static_cast<double>(seed >> 32), static_cast<double>(seed & 0xffffffffULL),
                            static_cast<double>(early_stop_window), early_stop_tolerance,
                            static_cast<double>(surgery), static_cast<double>(mgda_scaling),
                            stage1_decay_fraction, stage1_decay_factor});
}

TrainSchedule TrainSchedule::from_tensor(const Tensor& t) {
  if (t.shape() != Shape{13}) throw FormatError("schedule record: expected 13 values");
  auto count = [&](std::size_t i, double max) {
    const double v = t[i];
    if (!(v >= 0.0) || v != std::floor(v) || v > max) throw FormatError("schedule record: bad count");
    return static_cast<std::uint64_t>(v);
  };
  TrainSchedule s;
  s.stage1_steps = count(0, 1e12);
  s.stage2_steps = count(1, 1e12);
  s.learning_rate = t[2];
  s.codec_factor = t[3];
  s.batch_size = count(4, 1e9);
  s.seed = (count(5, 4294967295.0) << 32) | count(6, 4294967295.0);
  s.early_stop_window = count(7, 1e12);
  s.early_stop_tolerance = t[8];
  s.surgery = static_cast<SurgeryTasks>(count(9, 255));
  s.mgda_scaling = static_cast<MgdaScaling>(count(10, 255));
  s.stage1_decay_fraction = t[11];
  s.stage1_decay_factor = t[12];
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("schedule record: ") + e.what());
  }
  return s;
}

std::string log_csv_header() { return "step,stage,L_C,L_p,L_b,L_c,bpp,psnr"; }

std::string log_csv_row(const LogRow& r) {
  std::ostringstream os;
  os.precision(9);
  auto field = [&](double v) {
    os << ',';
    if (std::isnan(v)) return;
    os << v;
  };
  os << r.step << ',' << r.stage;
  field(r.compression);
  field(r.pairwise);
  field(r.balance);
  field(r.classification);
  field(r.bpp);
  field(r.psnr);
  return os.str();
}

void write_log_csv(const std::filesystem::path& path, std::span<const LogRow> rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write training log " + path.string());
  out << log_csv_header() << '\n';
  for (const auto& r : rows) out << log_csv_row(r) << '\n';
  if (!out) throw IoError("failed writing training log " + path.string());
}

std::map<std::string, Tensor> training_meta(const TrainSchedule& schedule, const codec::CodecConfig& codec,
                                            const std::optional<hash::HashHeadConfig>& head) {
  std::map<std::string, Tensor> meta;
  meta.emplace("meta.schedule", schedule.to_tensor());
  meta.emplace("meta.codec", codec.to_tensor());
  if (head) meta.emplace("meta.hash", head->to_tensor());
  return meta;
}

namespace {

// Cycles through seeded permutations of the sample indices.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::uint64_t seed, std::uint64_t stream)
      : rng_(Rng::derive(seed, stream)), order_(n) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    cursor_ = n;
  }

  std::vector<std::size_t> next(std::size_t count) {
    std::vector<std::size_t> batch;
    batch.reserve(count);
    while (batch.size() < count) {
      if (cursor_ == order_.size()) {
        rng_.shuffle(order_.begin(), order_.end());
        cursor_ = 0;
      }
      batch.push_back(order_[cursor_++]);
    }
    return batch;
  }

 private:
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

void check_data(std::span<const TrainingSample> data) {
  if (data.empty()) throw ConfigError("training set is empty");
  const Shape& shape = data.front().image.shape();
  if (shape.size() != 3) throw ShapeError("training images must be (H, W, C)");
  for (const auto& s : data) {
    if (s.image.shape() != shape) throw ShapeError("training images must share one shape");
  }
}

double scalar(Var v) { return v.value()[0]; }

Var batch_mean(std::vector<Var>& parts) {
  Var total = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) total = numerics::add(total, parts[i]);
  return numerics::scale(total, 1.0 / static_cast<double>(parts.size()));
}

[[noreturn]] void abort_non_finite(const LogRow& r) {
  std::ostringstream os;
  os << "non-finite loss at stage " << r.stage << " step " << r.step << ": L_C=" << r.compression
     << " L_p=" << r.pairwise << " L_b=" << r.balance << " L_c=" << r.classification << " bpp=" << r.bpp
     << " psnr=" << r.psnr;
  throw NumericError(os.str());
}

std::vector<double> gradient_of(Tape& tape, ParameterSet& params, Var loss, const std::vector<std::string>& names) {
  params.zero_grad();
  tape.backward(loss);
  return params.flat_grad(names);
}

double batch_psnr(double mean_mse) {
  return mean_mse > 0.0 ? 10.0 * std::log10(1.0 / mean_mse) : std::numeric_limits<double>::infinity();
}

// Early stopping on windowed means of L_C.
class Plateau {
 public:
  Plateau(std::size_t window, double tolerance) : window_(window), tolerance_(tolerance) {}

  bool push(double value) {
    history_.push_back(value);
    if (history_.size() > 2 * window_) history_.pop_front();
    if (history_.size() < 2 * window_) return false;
    double previous = 0.0, current = 0.0;
    for (std::size_t i = 0; i < window_; ++i) {
      previous += history_[i];
      current += history_[window_ + i];
    }
    return previous - current < tolerance_ * std::abs(previous);
  }

  void reset() { history_.clear(); }

 private:
  std::size_t window_;
  double tolerance_;
  std::deque<double> history_;
};

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

StageReport stage1_train(ParameterSet& params, const codec::CodecConfig& cfg, std::span<const TrainingSample> data,
                         const TrainSchedule& schedule, const StepCallback& on_step) {
  schedule.validate();
  cfg.validate();
  check_data(data);
  if (schedule.stage1_steps == 0) throw ConfigError("stage 1 needs a positive step budget");
  const auto names = params.names(codec::kCodecPrefix);
  if (names.empty()) throw ConfigError("stage 1: no codec parameters to train");

  const double pixels = static_cast<double>(data.front().image.extent(0) * data.front().image.extent(1));
  BatchSampler sampler(data.size(), schedule.seed, 1);
  Rng noise = Rng::derive(schedule.seed, 2);
  Adam adam;
  Plateau plateau(schedule.early_stop_window, schedule.early_stop_tolerance);
  StageReport report;

  const auto decay_steps =
      static_cast<std::size_t>(std::llround(schedule.stage1_decay_fraction * static_cast<double>(schedule.stage1_steps)));
  std::size_t last_step = schedule.stage1_steps;
  std::size_t decay_from = last_step - decay_steps + 1;

  for (std::size_t step = 1; step <= last_step; ++step) {
    Tape tape;
    Bindings b(tape, params, true);
    std::vector<Var> rates, weighted, losses;
    double mse_sum = 0.0;
    const auto batch = sampler.next(schedule.batch_size);
    for (std::size_t idx : batch) {
      auto terms = codec::compression_terms(b, cfg, tape.constant(data[idx].image),
                                            codec::QuantizeMode::kTraining, noise);
      rates.push_back(terms.rate_bits);
      weighted.push_back(terms.weighted_distortion);
      losses.push_back(terms.loss);
      mse_sum += scalar(terms.mse);
    }
    Var rate = batch_mean(rates);
    Var dist = batch_mean(weighted);

    LogRow row;
    row.step = step;
    row.stage = 1;
    row.compression = scalar(rate) + scalar(dist);
    row.pairwise = row.balance = row.classification = kNan;
    row.bpp = scalar(rate) / pixels;
    row.psnr = batch_psnr(mse_sum / static_cast<double>(batch.size()));
    if (!std::isfinite(row.compression)) abort_non_finite(row);

    const auto g_rate = gradient_of(tape, params, rate, names);
    const auto g_dist = gradient_of(tape, params, dist, names);
    const auto combined = schedule.mgda_scaling == MgdaScaling::kLoss
                              ? loss_scaled_mgda(g_rate, g_dist, scalar(rate), scalar(dist))
                              : mgda_combine(g_rate, g_dist);
    const double lr = schedule.learning_rate * (step >= decay_from ? schedule.stage1_decay_factor : 1.0);
    adam.step(params, names, combined.combined, lr);
    params.zero_grad();

    report.log.push_back(row);
    if (on_step) on_step(row);
    if (plateau.push(row.compression)) {
      if (step + 1 < decay_from && decay_steps > 0) {
        decay_from = step + 1;
        last_step = step + decay_steps;
        plateau.reset();
      } else {
        report.early_stopped = true;
        break;
      }
    }
  }
  return report;
}

StageReport stage2_train(ParameterSet& params, const codec::CodecConfig& cfg, const hash::HashHeadConfig& head,
                         std::span<const TrainingSample> data, const TrainSchedule& schedule,
                         const StepCallback& on_step) {
  schedule.validate();
  cfg.validate();
  head.validate();
  check_data(data);
  if (schedule.stage2_steps == 0) throw ConfigError("stage 2 needs a positive step budget");
  if (params.names(codec::kCodecPrefix).empty()) throw ConfigError("stage 2 requires trained codec parameters");
  if (params.names(hash::kHashPrefix).empty()) throw ConfigError("stage 2 requires hash head parameters");
  if (schedule.batch_size < 2) throw ConfigError("stage 2 needs at least two images per batch");
  for (const auto& s : data) {
    if (s.labels.size() != head.classes) throw ShapeError("label vector length differs from the class count");
  }

  std::vector<std::string> names = params.names(codec::kCodecPrefix);
  for (auto& n : params.names(hash::kHashPrefix)) names.push_back(std::move(n));
  const auto factor = [&](const std::string& name) {
    return name.starts_with(codec::kCodecPrefix) ? schedule.codec_factor : 1.0;
  };

  const double pixels = static_cast<double>(data.front().image.extent(0) * data.front().image.extent(1));
  BatchSampler sampler(data.size(), schedule.seed, 3);
  Rng noise = Rng::derive(schedule.seed, 4);
  Rng surgery_rng = Rng::derive(schedule.seed, 5);
  Adam adam;
  StageReport report;

  for (std::size_t step = 1; step <= schedule.stage2_steps; ++step) {
    Tape tape;
    Bindings b(tape, params, true);
    std::vector<Var> losses, rates;
    std::vector<hash::HashOutputs> outputs;
    std::vector<LabelVector> labels;
    double mse_sum = 0.0;
    const auto batch = sampler.next(schedule.batch_size);
    for (std::size_t idx : batch) {
      auto terms = codec::compression_terms(b, cfg, tape.constant(data[idx].image),
                                            codec::QuantizeMode::kTraining, noise);
      losses.push_back(terms.loss);
      rates.push_back(terms.rate_bits);
      mse_sum += scalar(terms.mse);
      outputs.push_back(hash::hash_forward(b, head, terms.latent));
      labels.push_back(data[idx].labels);
    }
    Var compression = batch_mean(losses);
    const auto hashing = hash::hashing_loss(outputs, labels, head);

    LogRow row;
    row.step = step;
    row.stage = 2;
    row.compression = scalar(compression);
    row.pairwise = scalar(hashing.pairwise);
    row.balance = scalar(hashing.balance);
    row.classification = scalar(hashing.classification);
    row.bpp = scalar(batch_mean(rates)) / pixels;
    row.psnr = batch_psnr(mse_sum / static_cast<double>(batch.size()));
    if (!std::isfinite(row.compression) || !std::isfinite(row.pairwise) || !std::isfinite(row.balance) ||
        !std::isfinite(row.classification)) {
      abort_non_finite(row);
    }

    std::vector<FlatGradient> tasks;
    tasks.push_back(gradient_of(tape, params, hashing.pairwise, names));
    tasks.push_back(gradient_of(tape, params, hashing.balance, names));
    tasks.push_back(gradient_of(tape, params, hashing.classification, names));
    auto compression_grad = gradient_of(tape, params, compression, names);
    std::vector<double> update;
    if (schedule.surgery == SurgeryTasks::kHashingAndCompression) {
      tasks.push_back(std::move(compression_grad));
      update = pcgrad(tasks, surgery_rng).sum;
    } else {
      update = pcgrad(tasks, surgery_rng).sum;
      for (std::size_t i = 0; i < update.size(); ++i) update[i] += compression_grad[i];
    }
    adam.step(params, names, update, schedule.learning_rate, factor);
    params.zero_grad();

    report.log.push_back(row);
    if (on_step) on_step(row);
  }
  return report;
}

}  // namespace jcif::trainer
