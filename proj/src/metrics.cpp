#include "tsr/metrics.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace tsr {

using nlohmann::json;

void ConfusionMatrix::check_label(int label) {
  if (label < 0 || label > 2)
    throw std::invalid_argument("relation label out of range: " + std::to_string(label));
}

void ConfusionMatrix::add(int truth, int predicted) {
  check_label(truth);
  check_label(predicted);
  ++counts_[static_cast<size_t>(truth)][static_cast<size_t>(predicted)];
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  for (size_t t = 0; t < 3; ++t)
    for (size_t p = 0; p < 3; ++p) counts_[t][p] += other.counts_[t][p];
}

int64_t ConfusionMatrix::count(int truth, int predicted) const {
  check_label(truth);
  check_label(predicted);
  return counts_[static_cast<size_t>(truth)][static_cast<size_t>(predicted)];
}

int64_t ConfusionMatrix::total() const {
  int64_t n = 0;
  for (const auto& row : counts_)
    for (int64_t c : row) n += c;
  return n;
}

int64_t ConfusionMatrix::support(int label) const {
  check_label(label);
  int64_t n = 0;
  for (int64_t c : counts_[static_cast<size_t>(label)]) n += c;
  return n;
}

int64_t ConfusionMatrix::predicted(int label) const {
  check_label(label);
  int64_t n = 0;
  for (const auto& row : counts_) n += row[static_cast<size_t>(label)];
  return n;
}

double ConfusionMatrix::precision(int label) const {
  const int64_t denom = predicted(label);
  if (denom == 0) return 0.0;
  return static_cast<double>(count(label, label)) / static_cast<double>(denom);
}

double ConfusionMatrix::recall(int label) const {
  const int64_t denom = support(label);
  if (denom == 0) return 0.0;
  return static_cast<double>(count(label, label)) / static_cast<double>(denom);
}

double ConfusionMatrix::f1(int label) const {
  const double p = precision(label);
  const double r = recall(label);
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

double ConfusionMatrix::accuracy() const {
  const int64_t n = total();
  if (n == 0) return 0.0;
  int64_t hit = 0;
  for (size_t c = 0; c < 3; ++c) hit += counts_[c][c];
  return static_cast<double>(hit) / static_cast<double>(n);
}

double ConfusionMatrix::macro_precision() const {
  return (precision(0) + precision(1) + precision(2)) / 3.0;
}

double ConfusionMatrix::macro_recall() const {
  return (recall(0) + recall(1) + recall(2)) / 3.0;
}

double ConfusionMatrix::macro_f1() const { return (f1(0) + f1(1) + f1(2)) / 3.0; }

double ConfusionMatrix::micro_precision() const {
  int64_t tp = 0, fp = 0;
  for (int c = 0; c < 3; ++c) {
    tp += count(c, c);
    fp += predicted(c) - count(c, c);
  }
  if (tp + fp == 0) return 0.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double ConfusionMatrix::micro_recall() const {
  int64_t tp = 0, fn = 0;
  for (int c = 0; c < 3; ++c) {
    tp += count(c, c);
    fn += support(c) - count(c, c);
  }
  if (tp + fn == 0) return 0.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double ConfusionMatrix::micro_f1() const {
  const double p = micro_precision();
  const double r = micro_recall();
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

std::string MetricsReport::to_json() const {
  json counts = json::array();
  for (int t = 0; t < 3; ++t) {
    json row = json::array();
    for (int p = 0; p < 3; ++p) row.push_back(matrix.count(t, p));
    counts.push_back(row);
  }
  json per_class = json::array();
  for (int c = 0; c < 3; ++c) {
    per_class.push_back({{"label", to_string(static_cast<RelationLabel>(c))},
                         {"precision", matrix.precision(c)},
                         {"recall", matrix.recall(c)},
                         {"f1", matrix.f1(c)},
                         {"support", matrix.support(c)}});
  }
  json doc{{"counts", counts},
           {"per_class", per_class},
           {"accuracy", matrix.accuracy()},
           {"macro", {{"precision", matrix.macro_precision()},
                      {"recall", matrix.macro_recall()},
                      {"f1", matrix.macro_f1()}}},
           {"micro", {{"precision", matrix.micro_precision()},
                      {"recall", matrix.micro_recall()},
                      {"f1", matrix.micro_f1()}}}};
  if (has_loss) doc["loss"] = loss;
  return doc.dump(2) + "\n";
}

MetricsReport MetricsReport::from_json(const std::string& text) {
  json doc = json::parse(text);
  MetricsReport report;
  const json& counts = doc.at("counts");
  for (int t = 0; t < 3; ++t)
    for (int p = 0; p < 3; ++p) {
      const int64_t n = counts.at(static_cast<size_t>(t)).at(static_cast<size_t>(p)).get<int64_t>();
      for (int64_t i = 0; i < n; ++i) report.matrix.add(t, p);
    }
  if (doc.contains("loss")) {
    report.loss = doc["loss"].get<double>();
    report.has_loss = true;
  }
  return report;
}

}  // namespace tsr
