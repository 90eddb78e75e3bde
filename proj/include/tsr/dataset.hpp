#pragma once

#include <string>
#include <vector>

#include "tsr/annotation.hpp"
#include "tsr/image.hpp"
#include "tsr/model.hpp"
#include "tsr/pairing.hpp"
#include "tsr/table.hpp"

namespace tsr {

// Geometry features for one pair: both operative boxes scaled into [0,1] by
// the table size, followed by the center offset (a minus b). 10 floats.
std::vector<float> position_features(const Table& table, const Cell& a, const Cell& b);

// Flattened classification dataset: each entry is one candidate pair with all
// inputs preprocessed (crops resized to the network size, stored as 8-bit
// gray until gather time). Entries keep their table index and cell ids so
// predictions can be folded back into per-table structures.
struct PairDataset {
  int input_size = 84;
  std::vector<uint8_t> cell_a;     // n * input_size^2
  std::vector<uint8_t> cell_b;
  std::vector<uint8_t> unions;
  std::vector<float> positions;    // n * kPositionFeatures
  std::vector<int> labels;
  std::vector<int> table_of;       // entry -> index into `tables`
  std::vector<RelationKey> keys;   // entry -> (cell id a, cell id b)
  std::vector<Table> tables;       // processed tables, relations derived

  int size() const { return static_cast<int>(labels.size()); }
};

// Adds every candidate pair of one table. The image must match the table's
// declared size.
void append_table(PairDataset& dataset, const Table& table, const GrayImage& image,
                  BoxMode mode, int neighbor_count);

// Loads manifest entries from `root`, applies the box-mode policy, and pairs
// each table's cells.
PairDataset build_pair_dataset(const std::string& root, const std::vector<ManifestEntry>& entries,
                               BoxMode mode, int neighbor_count, int input_size = 84);

// Copies the selected entries into network tensors (images normalized so ink
// is 1 and background 0).
template <typename T>
PairBatch<T> gather_batch(const PairDataset& dataset, const std::vector<int>& indices);

}  // namespace tsr
