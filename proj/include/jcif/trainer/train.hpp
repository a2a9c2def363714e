// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jcif/codec/model.hpp"
#include "jcif/common/labels.hpp"
#include "jcif/hash/head.hpp"
#include "jcif/numerics/parameters.hpp"

namespace jcif::trainer {

enum class SurgeryTasks : std::uint8_t {
  kHashingAndCompression = 4,  // PCGrad over L_p, L_b, L_c and L_C
  kHashingOnly = 3,            // PCGrad over L_p, L_b, L_c; L_C added unprojected
};

// Scaling of the task gradients from which the stage-1 MGDA weight is solved.
// The weight is always applied to the unscaled rate and distortion gradients.
enum class MgdaScaling : std::uint8_t {
  kRaw = 0,   // min-norm weight of the raw gradients
  kLoss = 1,  // min-norm weight of each gradient divided by its loss value
};

struct TrainSchedule {
  std::size_t stage1_steps = 3000;
  std::size_t stage2_steps = 600;
  double learning_rate = 1e-3;
  // Stage-2 rate multiplier for codec parameters. Zero freezes the codec.
  double codec_factor = 0.1;
  std::size_t batch_size = 8;
  std::uint64_t seed = 7;
  // Stage 1 trains its final `stage1_decay_fraction` of steps at
  // learning_rate * stage1_decay_factor.
  double stage1_decay_fraction = 1.0 / 3.0;
  double stage1_decay_factor = 0.1;
  // A stage-1 plateau (the mean L_C over the last `early_stop_window` steps
  // improving on the previous window by less than `early_stop_tolerance`)
  // starts the decay phase at once; a plateau within it ends the stage.
  std::size_t early_stop_window = 500;
  double early_stop_tolerance = 1e-3;
  SurgeryTasks surgery = SurgeryTasks::kHashingAndCompression;
  MgdaScaling mgda_scaling = MgdaScaling::kLoss;

  void validate() const;
  bool operator==(const TrainSchedule&) const = default;

  numerics::Tensor to_tensor() const;
  static TrainSchedule from_tensor(const numerics::Tensor& t);
};

struct TrainingSample {
  numerics::Tensor image;  // (H, W, C) in [0, 1]
  LabelVector labels;
};

// One training step. Stage-1 rows leave the hashing columns as NaN.
struct LogRow {
  std::size_t step = 0;
  int stage = 1;
  double compression = 0.0;  // L_C, batch mean
  double pairwise = 0.0;
  double balance = 0.0;
  double classification = 0.0;
  double bpp = 0.0;
  double psnr = 0.0;
};

std::string log_csv_header();
std::string log_csv_row(const LogRow& row);
void write_log_csv(const std::filesystem::path& path, std::span<const LogRow> rows);

struct StageReport {
  std::vector<LogRow> log;
  bool early_stopped = false;
};

using StepCallback = std::function<void(const LogRow&)>;

// Trains the "codec.*" parameters alone. Each step takes separate gradients
// of the rate and of the weighted distortion and descends along their
// minimum-norm combination.
StageReport stage1_train(numerics::ParameterSet& params, const codec::CodecConfig& codec,
                         std::span<const TrainingSample> data, const TrainSchedule& schedule,
                         const StepCallback& on_step = {});

// Trains codec and hash head together with PCGrad across the task losses.
// `params` must already hold both "codec.*" and "hash_head.*" tensors.
StageReport stage2_train(numerics::ParameterSet& params, const codec::CodecConfig& codec,
                         const hash::HashHeadConfig& head, std::span<const TrainingSample> data,
                         const TrainSchedule& schedule, const StepCallback& on_step = {});

// Checkpoint metadata records ("schedule", "codec", and "hash" when present).
std::map<std::string, numerics::Tensor> training_meta(const TrainSchedule& schedule,
                                                      const codec::CodecConfig& codec,
                                                      const std::optional<hash::HashHeadConfig>& head);

}  // namespace jcif::trainer
