#include "tsr/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "tsr/rng.hpp"

namespace tsr {
namespace {

// Weights plus batch-norm running statistics; enough to roll the model back
// to its best validation epoch.
struct Snapshot {
  std::vector<std::vector<float>> params;
  std::vector<std::vector<float>> stats;
};

Snapshot take_snapshot(CattNet<float>& model) {
  Snapshot snap;
  for (Param<float>* p : model.params()) snap.params.push_back(p->tensor.value_vec());
  for (const auto& stat : model.stats()) snap.stats.push_back(*stat.values);
  return snap;
}

void restore_snapshot(CattNet<float>& model, const Snapshot& snap) {
  auto params = model.params();
  for (size_t i = 0; i < params.size(); ++i) params[i]->tensor.value_vec() = snap.params[i];
  auto stats = model.stats();
  for (size_t i = 0; i < stats.size(); ++i) *stats[i].values = snap.stats[i];
  model.mark_stats_initialized();
}

// Contiguous batch slices; a trailing single element is folded into the
// previous batch because batch norm cannot normalize a batch of one.
std::vector<std::vector<int>> batch_slices(const std::vector<int>& order, int batch_size) {
  std::vector<std::vector<int>> slices;
  const int n = static_cast<int>(order.size());
  for (int start = 0; start < n; start += batch_size) {
    const int stop = std::min(start + batch_size, n);
    slices.emplace_back(order.begin() + start, order.begin() + stop);
  }
  if (slices.size() > 1 && slices.back().size() == 1) {
    slices[slices.size() - 2].push_back(slices.back()[0]);
    slices.pop_back();
  }
  return slices;
}

}  // namespace

EvalResult evaluate(CattNet<float>& model, const PairDataset& dataset, int batch_size) {
  if (dataset.size() == 0) throw TrainError("cannot evaluate an empty dataset");
  if (batch_size < 1) throw TrainError("batch size must be positive");
  EvalResult out;
  double loss_sum = 0.0;
  const int n = dataset.size();
  for (int start = 0; start < n; start += batch_size) {
    const int stop = std::min(start + batch_size, n);
    std::vector<int> indices(static_cast<size_t>(stop - start));
    std::iota(indices.begin(), indices.end(), start);
    PairBatch<float> batch = gather_batch<float>(dataset, indices);
    Tensor<float> logits = model.forward(nullptr, batch, false);
    Tensor<float> loss = ops::softmax_cross_entropy<float>(nullptr, logits, batch.labels);
    loss_sum += static_cast<double>(loss.item()) * batch.size();
    const std::vector<int> preds = ops::argmax_rows(logits);
    for (int i = 0; i < batch.size(); ++i) {
      out.report.matrix.add(batch.labels[static_cast<size_t>(i)], preds[static_cast<size_t>(i)]);
      out.predicted.push_back(preds[static_cast<size_t>(i)]);
    }
  }
  out.report.loss = loss_sum / n;
  out.report.has_loss = true;
  return out;
}

TrainResult train_model(CattNet<float>& model, const PairDataset& train_set,
                        const PairDataset& val_set, const TrainConfig& config) {
  if (config.epochs < 1 || config.batch_size < 1) throw TrainError("bad epoch or batch config");
  if (config.learning_rate <= 0) throw TrainError("learning rate must be positive");
  if (train_set.size() < 2) throw TrainError("training set needs at least two pairs");
  if (val_set.size() < 1) throw TrainError("validation set is empty");

  AdamW<float> opt;
  opt.lr = static_cast<float>(config.learning_rate);
  opt.weight_decay = static_cast<float>(config.weight_decay);
  std::vector<Param<float>*> params = model.params();

  Rng rng(config.seed);
  std::vector<int> order(static_cast<size_t>(train_set.size()));
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  Snapshot best;
  double best_f1 = -1.0;
  int epochs_since_best = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    ConfusionMatrix train_cm;
    for (const std::vector<int>& slice : batch_slices(order, config.batch_size)) {
      PairBatch<float> batch = gather_batch<float>(train_set, slice);
      Tape<float> tape;
      Tensor<float> logits = model.forward(&tape, batch, true);
      Tensor<float> loss = ops::softmax_cross_entropy(
          &tape, logits, batch.labels,
          config.class_weights.empty() ? nullptr : &config.class_weights);
      const float lv = loss.item();
      if (!std::isfinite(lv))
        throw TrainError("training diverged: non-finite loss in epoch " + std::to_string(epoch));
      opt.zero_grad(params);
      tape.backward(loss);
      opt.step(params);
      loss_sum += static_cast<double>(lv) * batch.size();
      const std::vector<int> preds = ops::argmax_rows(logits);
      for (int i = 0; i < batch.size(); ++i)
        train_cm.add(batch.labels[static_cast<size_t>(i)], preds[static_cast<size_t>(i)]);
    }

    const EvalResult val = evaluate(model, val_set, config.batch_size);
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / train_set.size();
    stats.train_micro_f1 = train_cm.micro_f1();
    stats.val_micro_f1 = val.report.matrix.micro_f1();
    stats.val_macro_f1 = val.report.matrix.macro_f1();
    result.history.push_back(stats);
    if (config.verbose)
      std::printf("epoch %3d  train_loss %.4f  train_f1 %.4f  val_f1 %.4f\n", epoch,
                  stats.train_loss, stats.train_micro_f1, stats.val_micro_f1);

    if (stats.val_micro_f1 > best_f1) {
      best_f1 = stats.val_micro_f1;
      result.best_epoch = epoch;
      best = take_snapshot(model);
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
    }
    if (best_f1 >= config.stop_val_f1) {
      result.stopped_early = epoch < config.epochs;
      break;
    }
    if (config.patience > 0 && epochs_since_best >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }

  restore_snapshot(model, best);
  result.best_val_micro_f1 = best_f1;
  result.optimizer_steps = opt.step_count;
  if (!config.history_path.empty()) write_history_csv(result.history, config.history_path);
  return result;
}

TrainResult train_from_manifest(const std::string& root, const DatasetManifest& manifest,
                                CattNet<float>& model, const TrainConfig& config,
                                const std::string& train_split, const std::string& val_split) {
  const PairDataset train_set =
      build_pair_dataset(root, manifest.split(train_split), config.bbox_mode,
                         config.neighbor_count, model.config().input_size);
  const PairDataset val_set =
      build_pair_dataset(root, manifest.split(val_split), config.bbox_mode,
                         config.neighbor_count, model.config().input_size);
  return train_model(model, train_set, val_set, config);
}

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw TrainError("cannot write history csv: " + path);
  out << "epoch,train_loss,val_micro_f1,val_macro_f1\n";
  for (const EpochStats& row : history) {
    std::ostringstream line;
    line << row.epoch << ',' << std::setprecision(10) << row.train_loss << ','
         << row.val_micro_f1 << ',' << row.val_macro_f1;
    out << line.str() << '\n';
  }
}

}  // namespace tsr
