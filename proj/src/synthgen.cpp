#include "tsr/synthgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "tsr/png_io.hpp"
#include "tsr/rng.hpp"

namespace tsr {
namespace {

using nlohmann::json;

constexpr uint8_t kBorderInk = 20;

void check_params(const GenParams& p) {
  auto bad = [](const std::string& what) { throw std::invalid_argument("gen params: " + what); };
  if (p.min_rows < 1 || p.min_rows > p.max_rows) bad("row range");
  if (p.min_cols < 1 || p.min_cols > p.max_cols) bad("column range");
  if (p.min_cell_width < 6 || p.min_cell_width > p.max_cell_width) bad("cell width range");
  if (p.min_cell_height < 6 || p.min_cell_height > p.max_cell_height) bad("cell height range");
  if (p.margin < 1) bad("margin");
  if (p.span_prob < 0 || p.span_prob > 1 || p.empty_prob < 0 || p.empty_prob > 1 ||
      p.border_prob < 0 || p.border_prob > 1)
    bad("probability outside [0,1]");
  if (p.max_span < 2) bad("max span");
  if (p.speckles < 0) bad("speckle count");
  if (p.train_frac < 0 || p.val_frac < 0 || p.train_frac + p.val_frac > 1.0)
    bad("split fractions");
}

std::string table_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "table_%06d", index);
  return buf;
}

struct Grid {
  int rows = 0, cols = 0;
  std::vector<int> xb, yb;         // boundary line coordinates, sizes cols+1 / rows+1
  std::vector<std::vector<int>> owner;  // owner[row][col] = cell id
};

void draw_borders(GrayImage& img, const Grid& grid, const GenParams& p, Rng& rng) {
  for (int k = 0; k <= grid.cols; ++k) {
    const bool outer = k == 0 || k == grid.cols;
    const bool on = outer ? p.outer_border : rng.chance(p.border_prob);
    if (!on) continue;
    for (int i = 0; i < grid.rows; ++i) {
      const bool boundary = outer || grid.owner[static_cast<size_t>(i)][static_cast<size_t>(k - 1)] !=
                                          grid.owner[static_cast<size_t>(i)][static_cast<size_t>(k)];
      if (!boundary) continue;
      for (int y = grid.yb[static_cast<size_t>(i)]; y <= grid.yb[static_cast<size_t>(i) + 1]; ++y)
        img.at(grid.xb[static_cast<size_t>(k)], y) = kBorderInk;
    }
  }
  for (int k = 0; k <= grid.rows; ++k) {
    const bool outer = k == 0 || k == grid.rows;
    const bool on = outer ? p.outer_border : rng.chance(p.border_prob);
    if (!on) continue;
    for (int j = 0; j < grid.cols; ++j) {
      const bool boundary = outer || grid.owner[static_cast<size_t>(k - 1)][static_cast<size_t>(j)] !=
                                          grid.owner[static_cast<size_t>(k)][static_cast<size_t>(j)];
      if (!boundary) continue;
      for (int x = grid.xb[static_cast<size_t>(j)]; x <= grid.xb[static_cast<size_t>(j) + 1]; ++x)
        img.at(x, grid.yb[static_cast<size_t>(k)]) = kBorderInk;
    }
  }
}

// Word-like runs of 1px vertical strokes with gaps every third column.
BBox draw_glyphs(GrayImage& img, const BBox& box, Rng& rng) {
  const BBox inner{box.x1 + 3, box.y1 + 3, box.x2 - 3, box.y2 - 3};
  if (inner.width() < 6 || inner.height() < 5) {
    const int x0 = std::min(box.x1 + 1, box.x2);
    const int y0 = std::min(box.y1 + 1, box.y2);
    const int x1 = std::min(x0 + 2, box.x2);
    const int y1 = std::min(y0 + 2, box.y2);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) img.at(x, y) = 40;
    return BBox{x0, y0, x1, y1};
  }
  const int word_h = rng.range(5, std::min(10, inner.height()));
  const int y0 = inner.y1 + rng.range(0, inner.height() - word_h);
  int x = inner.x1 + rng.range(0, std::min(4, std::max(0, inner.width() - 8)));
  const int n_words = rng.range(1, 3);
  BBox text{};
  bool any = false;
  for (int w = 0; w < n_words && x <= inner.x2 - 5; ++w) {
    const int word_w = std::min(static_cast<int>(rng.range(6, 22)), inner.x2 - x + 1);
    const uint8_t shade = static_cast<uint8_t>(rng.range(0, 70));
    int last = 0;
    for (int dx = 0; dx < word_w; ++dx) {
      if (dx % 3 == 2) continue;  // inter-stroke gap
      last = dx;
      for (int dy = 0; dy < word_h; ++dy) img.at(x + dx, y0 + dy) = shade;
    }
    const BBox word{x, y0, x + last, y0 + word_h - 1};
    text = any ? box_union(text, word) : word;
    any = true;
    x += word_w + rng.range(3, 7);
  }
  if (!any) {  // width admitted no word; fall back to one short stroke pair
    for (int dy = 0; dy < word_h; ++dy) {
      img.at(inner.x1, y0 + dy) = 60;
      img.at(inner.x1 + 1, y0 + dy) = 60;
    }
    text = BBox{inner.x1, y0, inner.x1 + 1, y0 + word_h - 1};
  }
  return text;
}

}  // namespace

GenParams style_profile(char profile) {
  GenParams p;
  switch (profile) {
    case 'a':
      p.span_prob = 0.12;
      p.empty_prob = 0.06;
      p.border_prob = 1.0;
      p.outer_border = true;
      p.speckles = 4;
      return p;
    case 'b':
      p.min_cell_width = 50;
      p.max_cell_width = 130;
      p.min_cell_height = 26;
      p.max_cell_height = 50;
      p.margin = 18;
      p.span_prob = 0.22;
      p.empty_prob = 0.18;
      p.border_prob = 0.12;
      p.outer_border = false;
      p.speckles = 30;
      return p;
    default:
      throw std::invalid_argument(std::string("unknown style profile: ") + profile);
  }
}

SynthItem generate_table(const GenParams& params, int index) {
  check_params(params);
  if (index < 0) throw std::invalid_argument("table index must be non-negative");
  Rng rng(mix_seed(params.seed, static_cast<uint64_t>(index)));

  Grid grid;
  grid.rows = rng.range(params.min_rows, params.max_rows);
  grid.cols = rng.range(params.min_cols, params.max_cols);
  grid.xb.assign(static_cast<size_t>(grid.cols) + 1, 0);
  grid.yb.assign(static_cast<size_t>(grid.rows) + 1, 0);
  grid.xb[0] = params.margin;
  for (int j = 0; j < grid.cols; ++j)
    grid.xb[static_cast<size_t>(j) + 1] =
        grid.xb[static_cast<size_t>(j)] + rng.range(params.min_cell_width, params.max_cell_width) + 1;
  grid.yb[0] = params.margin;
  for (int i = 0; i < grid.rows; ++i)
    grid.yb[static_cast<size_t>(i) + 1] =
        grid.yb[static_cast<size_t>(i)] + rng.range(params.min_cell_height, params.max_cell_height) + 1;

  grid.owner.assign(static_cast<size_t>(grid.rows),
                    std::vector<int>(static_cast<size_t>(grid.cols), -1));
  SynthItem item;
  Table& table = item.table;
  for (int i = 0; i < grid.rows; ++i) {
    for (int j = 0; j < grid.cols; ++j) {
      if (grid.owner[static_cast<size_t>(i)][static_cast<size_t>(j)] != -1) continue;
      int hspan = 1, vspan = 1;
      if (rng.chance(params.span_prob)) {
        const bool across = rng.chance(0.5);
        const int want = rng.range(2, params.max_span);
        if (across) {
          while (hspan < want && j + hspan < grid.cols &&
                 grid.owner[static_cast<size_t>(i)][static_cast<size_t>(j + hspan)] == -1)
            ++hspan;
        } else {
          while (vspan < want && i + vspan < grid.rows &&
                 grid.owner[static_cast<size_t>(i + vspan)][static_cast<size_t>(j)] == -1)
            ++vspan;
        }
      }
      Cell cell;
      cell.id = static_cast<int>(table.cells.size());
      cell.row_start = i;
      cell.row_end = i + vspan - 1;
      cell.col_start = j;
      cell.col_end = j + hspan - 1;
      cell.aligned_box = BBox{grid.xb[static_cast<size_t>(j)] + 1, grid.yb[static_cast<size_t>(i)] + 1,
                              grid.xb[static_cast<size_t>(j + hspan)] - 1,
                              grid.yb[static_cast<size_t>(i + vspan)] - 1};
      cell.empty = rng.chance(params.empty_prob);
      for (int di = 0; di < vspan; ++di)
        for (int dj = 0; dj < hspan; ++dj)
          grid.owner[static_cast<size_t>(i + di)][static_cast<size_t>(j + dj)] = cell.id;
      table.cells.push_back(cell);
    }
  }

  // Keep at least two cells with text so pairing has something to work with
  // in either box mode.
  int non_empty = 0;
  for (const Cell& cell : table.cells) non_empty += cell.empty ? 0 : 1;
  for (size_t i = 0; i < table.cells.size() && non_empty < 2; ++i) {
    if (!table.cells[i].empty) continue;
    table.cells[i].empty = false;
    ++non_empty;
  }

  const int width = grid.xb[static_cast<size_t>(grid.cols)] + params.margin + 1;
  const int height = grid.yb[static_cast<size_t>(grid.rows)] + params.margin + 1;
  GrayImage& img = item.image;
  img = GrayImage(width, height);

  draw_borders(img, grid, params, rng);
  for (Cell& cell : table.cells) {
    if (cell.empty) continue;
    cell.text_box = draw_glyphs(img, cell.aligned_box, rng);
  }
  for (int s = 0; s < params.speckles; ++s) {
    const int x = static_cast<int>(rng.below(static_cast<uint64_t>(width)));
    const int y = static_cast<int>(rng.below(static_cast<uint64_t>(height)));
    const uint8_t v = static_cast<uint8_t>(150 + rng.below(70));
    if (img.at(x, y) == kBackground) img.at(x, y) = v;
  }

  table.id = index;
  table.image_path = "images/" + table_name(index) + ".png";
  table.width = width;
  table.height = height;
  table.box_mode = BoxMode::kAligned;
  derive_relations(table);
  return item;
}

DatasetManifest generate_dataset(const GenParams& params, int count, const std::string& out_dir,
                                 int jobs) {
  check_params(params);
  if (count < 1) throw std::invalid_argument("dataset count must be positive");
  if (jobs < 1) throw std::invalid_argument("job count must be positive");
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "images");
  fs::create_directories(fs::path(out_dir) / "annotations");

  auto emit = [&params, &out_dir](int index) {
    SynthItem item = generate_table(params, index);
    write_png(item.image, (fs::path(out_dir) / item.table.image_path).string());
    save_annotation(item.table,
                    (fs::path(out_dir) / ("annotations/" + table_name(index) + ".json")).string());
  };
  if (jobs == 1) {
    for (int index = 0; index < count; ++index) emit(index);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::mutex error_lock;
    std::exception_ptr error;
    for (int w = 0; w < std::min(jobs, count); ++w)
      pool.emplace_back([&next, &emit, &error, &error_lock, count]() {
        try {
          for (int index = next.fetch_add(1); index < count; index = next.fetch_add(1))
            emit(index);
        } catch (...) {
          std::lock_guard<std::mutex> hold(error_lock);
          if (!error) error = std::current_exception();
        }
      });
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  int n_train = static_cast<int>(std::lround(params.train_frac * count));
  n_train = std::min(n_train, count);
  int n_val = static_cast<int>(std::lround(params.val_frac * count));
  n_val = std::min(n_val, count - n_train);

  DatasetManifest manifest;
  for (int index = 0; index < count; ++index) {
    ManifestEntry entry;
    entry.id = index;
    entry.image = "images/" + table_name(index) + ".png";
    entry.annotation = "annotations/" + table_name(index) + ".json";
    entry.split = index < n_train ? "train" : index < n_train + n_val ? "val" : "test";
    manifest.entries.push_back(std::move(entry));
  }
  save_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());
  std::ofstream cfg(fs::path(out_dir) / "gen_config.json");
  cfg << gen_params_to_json(params);
  return manifest;
}

std::string gen_params_to_json(const GenParams& p) {
  json doc{{"min_rows", p.min_rows},
           {"max_rows", p.max_rows},
           {"min_cols", p.min_cols},
           {"max_cols", p.max_cols},
           {"min_cell_width", p.min_cell_width},
           {"max_cell_width", p.max_cell_width},
           {"min_cell_height", p.min_cell_height},
           {"max_cell_height", p.max_cell_height},
           {"margin", p.margin},
           {"span_prob", p.span_prob},
           {"max_span", p.max_span},
           {"empty_prob", p.empty_prob},
           {"border_prob", p.border_prob},
           {"outer_border", p.outer_border},
           {"speckles", p.speckles},
           {"train_frac", p.train_frac},
           {"val_frac", p.val_frac},
           {"seed", p.seed}};
  return doc.dump(2) + "\n";
}

GenParams gen_params_from_json(const std::string& text) {
  json doc = json::parse(text);
  GenParams p;
  p.min_rows = doc.value("min_rows", p.min_rows);
  p.max_rows = doc.value("max_rows", p.max_rows);
  p.min_cols = doc.value("min_cols", p.min_cols);
  p.max_cols = doc.value("max_cols", p.max_cols);
  p.min_cell_width = doc.value("min_cell_width", p.min_cell_width);
  p.max_cell_width = doc.value("max_cell_width", p.max_cell_width);
  p.min_cell_height = doc.value("min_cell_height", p.min_cell_height);
  p.max_cell_height = doc.value("max_cell_height", p.max_cell_height);
  p.margin = doc.value("margin", p.margin);
  p.span_prob = doc.value("span_prob", p.span_prob);
  p.max_span = doc.value("max_span", p.max_span);
  p.empty_prob = doc.value("empty_prob", p.empty_prob);
  p.border_prob = doc.value("border_prob", p.border_prob);
  p.outer_border = doc.value("outer_border", p.outer_border);
  p.speckles = doc.value("speckles", p.speckles);
  p.train_frac = doc.value("train_frac", p.train_frac);
  p.val_frac = doc.value("val_frac", p.val_frac);
  p.seed = doc.value("seed", p.seed);
  return p;
}

}  // namespace tsr
