#include "tsr/dataset.hpp"

#include <filesystem>
#include <stdexcept>

#include "tsr/png_io.hpp"

namespace tsr {

std::vector<float> position_features(const Table& table, const Cell& a, const Cell& b) {
  if (table.width < 1 || table.height < 1)
    throw AnnotationError("table has no size; cannot normalize positions");
  const float w = static_cast<float>(table.width);
  const float h = static_cast<float>(table.height);
  const BBox ba = table.operative_box(a);
  const BBox bb = table.operative_box(b);
  return {static_cast<float>(ba.x1) / w,
          static_cast<float>(ba.y1) / h,
          static_cast<float>(ba.x2) / w,
          static_cast<float>(ba.y2) / h,
          static_cast<float>(bb.x1) / w,
          static_cast<float>(bb.y1) / h,
          static_cast<float>(bb.x2) / w,
          static_cast<float>(bb.y2) / h,
          static_cast<float>((ba.center_x() - bb.center_x()) / w),
          static_cast<float>((ba.center_y() - bb.center_y()) / h)};
}

void append_table(PairDataset& dataset, const Table& table, const GrayImage& image, BoxMode mode,
                  int neighbor_count) {
  if (image.width != table.width || image.height != table.height)
    throw AnnotationError("image size " + std::to_string(image.width) + "x" +
                          std::to_string(image.height) + " does not match annotation " +
                          std::to_string(table.width) + "x" + std::to_string(table.height));
  Table prepared = table;
  derive_relations(prepared);
  prepared = apply_empty_cell_policy(prepared, mode);

  const int table_index = static_cast<int>(dataset.tables.size());
  const int s = dataset.input_size;
  const auto pairs = generate_pairs(prepared, neighbor_count);
  for (const PairCandidate& pc : pairs) {
    const Cell& ca = *prepared.find_cell(pc.a);
    const Cell& cb = *prepared.find_cell(pc.b);
    const BBox box_a = prepared.operative_box(ca);
    const BBox box_b = prepared.operative_box(cb);
    const GrayImage ia = resize_pad(crop(image, box_a), s, s);
    const GrayImage ib = resize_pad(crop(image, box_b), s, s);
    const GrayImage iu = resize_pad(union_crop(image, box_a, box_b), s, s);
    dataset.cell_a.insert(dataset.cell_a.end(), ia.pixels.begin(), ia.pixels.end());
    dataset.cell_b.insert(dataset.cell_b.end(), ib.pixels.begin(), ib.pixels.end());
    dataset.unions.insert(dataset.unions.end(), iu.pixels.begin(), iu.pixels.end());
    const auto pos = position_features(prepared, ca, cb);
    dataset.positions.insert(dataset.positions.end(), pos.begin(), pos.end());
    dataset.labels.push_back(static_cast<int>(pc.label));
    dataset.table_of.push_back(table_index);
    dataset.keys.push_back({pc.a, pc.b});
  }
  dataset.tables.push_back(std::move(prepared));
}

PairDataset build_pair_dataset(const std::string& root, const std::vector<ManifestEntry>& entries,
                               BoxMode mode, int neighbor_count, int input_size) {
  namespace fs = std::filesystem;
  PairDataset dataset;
  dataset.input_size = input_size;
  for (const ManifestEntry& entry : entries) {
    Table table = load_annotation((fs::path(root) / entry.annotation).string());
    const GrayImage image = read_png_gray((fs::path(root) / entry.image).string());
    append_table(dataset, table, image, mode, neighbor_count);
  }
  return dataset;
}

template <typename T>
PairBatch<T> gather_batch(const PairDataset& dataset, const std::vector<int>& indices) {
  if (indices.empty()) throw std::invalid_argument("gather_batch needs at least one index");
  const int n = static_cast<int>(indices.size());
  const int s = dataset.input_size;
  const int64_t plane = static_cast<int64_t>(s) * s;
  PairBatch<T> batch;
  batch.cell_a = Tensor<T>({n, 1, s, s});
  batch.cell_b = Tensor<T>({n, 1, s, s});
  batch.unions = Tensor<T>({n, 1, s, s});
  batch.positions = Tensor<T>({n, kPositionFeatures});
  batch.labels.resize(static_cast<size_t>(n));
  auto copy_plane = [plane](const std::vector<uint8_t>& src, int64_t entry, T* dst) {
    const uint8_t* p = src.data() + entry * plane;
    for (int64_t i = 0; i < plane; ++i) dst[i] = static_cast<T>(255 - p[i]) / static_cast<T>(255);
  };
  for (int i = 0; i < n; ++i) {
    const int idx = indices[static_cast<size_t>(i)];
    if (idx < 0 || idx >= dataset.size())
      throw std::invalid_argument("batch index out of range: " + std::to_string(idx));
    copy_plane(dataset.cell_a, idx, batch.cell_a.data() + static_cast<int64_t>(i) * plane);
    copy_plane(dataset.cell_b, idx, batch.cell_b.data() + static_cast<int64_t>(i) * plane);
    copy_plane(dataset.unions, idx, batch.unions.data() + static_cast<int64_t>(i) * plane);
    for (int f = 0; f < kPositionFeatures; ++f)
      batch.positions.data()[static_cast<int64_t>(i) * kPositionFeatures + f] =
          static_cast<T>(dataset.positions[static_cast<size_t>(idx) * kPositionFeatures +
                                           static_cast<size_t>(f)]);
    batch.labels[static_cast<size_t>(i)] = dataset.labels[static_cast<size_t>(idx)];
  }
  return batch;
}

template PairBatch<float> gather_batch<float>(const PairDataset&, const std::vector<int>&);
template PairBatch<double> gather_batch<double>(const PairDataset&, const std::vector<int>&);

}  // namespace tsr
