#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "csmc/sensing/operator.hpp"
#include "csmc/train/dataset.hpp"
#include "csmc/unfold/model.hpp"

namespace csmc::train {

enum class ReferenceMode {
  /// Previous ground-truth frame.
  ground_truth,
  /// Previous frame decoded by the model itself with motion estimation
  /// bypassed, refreshed during training.
  self_decoded,
};

struct TrainConfig {
  double lambda = 0.5;
  double lr = 1e-3;
  /// Cosine decay of the learning rate down to lr * lr_final_fraction.
  double lr_final_fraction = 1.0;
  /// Learning-rate multiplier for the motion-estimation weight matrices.
  double mhme_weight_lr_scale = 1.0;
  std::size_t batch_size = 250;
  std::size_t iterations = 1000;
  /// Rates drawn per batch when the model has ITP; otherwise the model's rate.
  std::vector<sensing::Ratio> cr_list;
  std::uint64_t seed = 1;

  ReferenceMode references = ReferenceMode::self_decoded;
  /// Iterations that use ground-truth references before self-decoded ones.
  std::size_t reference_warmup = 0;
  /// Re-decode references every this many iterations (0: only once).
  std::size_t reference_refresh = 0;
  /// Train the first frame of each clip without a reference.
  bool key_frames = true;
  /// Compute normalization statistics from the data before training.
  bool fit_normalization = true;
  /// Stop once a batch reaches L_err below this value.
  std::optional<double> stop_below_err;
};

struct TrainLogEntry {
  std::size_t iter = 0;
  double loss = 0.0;
  double l_err = 0.0;
  double l_mc = 0.0;
  sensing::Ratio cr;
};

struct TrainReport {
  std::vector<TrainLogEntry> log;
  std::size_t iterations = 0;
};

/// `iter,loss,l_err,l_mc,cr` with a '.' decimal point regardless of locale.
void write_log_line(std::ostream& out, const TrainLogEntry& entry);

/// Block-level mini-batch training with Adam. Clips are pixel-scale frames;
/// batches are drawn without replacement from every (clip, frame, block).
/// Throws DivergenceError on a non-finite loss.
TrainReport train_loop(unfold::ModelParams& model, const std::vector<Clip>& clips,
                       const sensing::MeasurementOperator& op, const TrainConfig& config,
                       std::ostream* log = nullptr);

}  // namespace csmc::train
