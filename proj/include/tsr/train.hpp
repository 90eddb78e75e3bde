#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "tsr/dataset.hpp"
#include "tsr/metrics.hpp"
#include "tsr/model.hpp"
#include "tsr/optim.hpp"

namespace tsr {

struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  int patience = 5;            // stop after this many epochs without val gain
  double stop_val_f1 = 1.0;    // stop as soon as val micro-F1 reaches this
  uint64_t seed = 0;           // drives the epoch shuffles
  int neighbor_count = kDefaultNeighborCount;   // K used when pairing tables
  Variant variant = Variant::kFull;             // used when this config builds the model
  BoxMode bbox_mode = BoxMode::kAligned;        // used when this config builds datasets
  std::vector<float> class_weights;             // empty = unweighted loss
  std::string history_path;    // per-epoch CSV written when non-empty
  bool verbose = false;        // per-epoch progress on stdout
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_micro_f1 = 0.0;
  double val_micro_f1 = 0.0;
  double val_macro_f1 = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = 0;  // epoch whose weights the model holds afterwards
  double best_val_micro_f1 = 0.0;
  bool stopped_early = false;
  int64_t optimizer_steps = 0;
};

struct EvalResult {
  MetricsReport report;
  std::vector<int> predicted;  // predicted label per dataset entry
};

// Runs the model over the whole dataset in eval mode.
EvalResult evaluate(CattNet<float>& model, const PairDataset& dataset, int batch_size = 64);

// Full training loop: seeded shuffling, AdamW updates, one validation pass
// per epoch, best-epoch weight restoration and early stopping. Train-side
// loss and F1 are accumulated online from the training batches themselves.
// Throws TrainError when the loss turns non-finite.
TrainResult train_model(CattNet<float>& model, const PairDataset& train_set,
                        const PairDataset& val_set, const TrainConfig& config);

// CSV with the exact header epoch,train_loss,val_micro_f1,val_macro_f1.
void write_history_csv(const std::vector<EpochStats>& history, const std::string& path);

// Orchestration used by the command line and the acceptance experiments:
// builds the train/val pair datasets from a manifest (box mode and K from
// the config, input size from the model) and runs train_model.
TrainResult train_from_manifest(const std::string& root, const DatasetManifest& manifest,
                                CattNet<float>& model, const TrainConfig& config,
                                const std::string& train_split = "train",
                                const std::string& val_split = "val");

}  // namespace tsr
