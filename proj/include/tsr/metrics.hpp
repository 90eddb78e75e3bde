#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "tsr/table.hpp"

namespace tsr {

// 3x3 confusion matrix over relation labels; rows index the true label and
// columns the predicted label.
class ConfusionMatrix {
 public:
  void add(int truth, int predicted);
  void merge(const ConfusionMatrix& other);

  int64_t count(int truth, int predicted) const;
  int64_t total() const;
  int64_t support(int label) const;    // row sum: how often the label is true
  int64_t predicted(int label) const;  // column sum: how often it is predicted

  double precision(int label) const;
  double recall(int label) const;
  double f1(int label) const;

  double accuracy() const;
  double macro_precision() const;
  double macro_recall() const;
  double macro_f1() const;
  // Pooled over all classes; for single-label classification the pooled
  // precision, recall and F1 all equal the accuracy.
  double micro_precision() const;
  double micro_recall() const;
  double micro_f1() const;

 private:
  static void check_label(int label);
  std::array<std::array<int64_t, 3>, 3> counts_{};
};

// Serializable snapshot of every score derived from a confusion matrix.
struct MetricsReport {
  ConfusionMatrix matrix;
  double loss = 0.0;  // optional mean loss over the evaluated set
  bool has_loss = false;

  std::string to_json() const;
  static MetricsReport from_json(const std::string& text);
};

}  // namespace tsr
