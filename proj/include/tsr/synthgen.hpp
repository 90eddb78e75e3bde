#pragma once

#include <cstdint>
#include <string>

#include "tsr/annotation.hpp"
#include "tsr/image.hpp"
#include "tsr/table.hpp"

namespace tsr {

// Knobs for the synthetic table renderer. Every table drawn from the same
// params and index is byte-identical, independent of generation order.
struct GenParams {
  int min_rows = 2, max_rows = 6;
  int min_cols = 2, max_cols = 6;
  int min_cell_width = 42, max_cell_width = 110;
  int min_cell_height = 22, max_cell_height = 44;
  int margin = 12;             // white page border around the grid
  double span_prob = 0.12;     // chance an eligible slot starts a merged cell
  int max_span = 3;            // longest run of merged grid slots
  double empty_prob = 0.08;    // chance a cell carries no text
  double border_prob = 1.0;    // chance each interior grid line is inked
  bool outer_border = true;
  int speckles = 0;            // count of random light-gray noise dots
  double train_frac = 0.7;
  double val_frac = 0.15;      // remainder of the dataset becomes "test"
  uint64_t seed = 0;
};

// Preset styles used by the cross-style experiments: 'a' is densely ruled
// with few empty cells, 'b' is mostly unruled, sparser and noisier.
GenParams style_profile(char profile);

struct SynthItem {
  Table table;
  GrayImage image;
};

// Renders table `index` of the stream defined by `params`. The result has
// grid coordinates, aligned and text boxes, empty flags and derived
// relations; `image_path` already holds the dataset-relative png name.
SynthItem generate_table(const GenParams& params, int index);

// Renders `count` tables into `out_dir` (images/, annotations/,
// manifest.json, gen_config.json) and returns the manifest. Tables are
// independent, so `jobs` worker threads may render them concurrently; the
// output tree is byte-identical for any job count.
DatasetManifest generate_dataset(const GenParams& params, int count, const std::string& out_dir,
                                 int jobs = 1);

std::string gen_params_to_json(const GenParams& params);
GenParams gen_params_from_json(const std::string& text);

}  // namespace tsr
