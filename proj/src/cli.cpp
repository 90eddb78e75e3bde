#include "tsr/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tsr/checkpoint.hpp"
#include "tsr/dataset.hpp"
#include "tsr/image.hpp"
#include "tsr/kernels.hpp"
#include "tsr/metrics.hpp"
#include "tsr/model.hpp"
#include "tsr/pairing.hpp"
#include "tsr/png_io.hpp"
#include "tsr/recovery.hpp"
#include "tsr/synthgen.hpp"
#include "tsr/table.hpp"
#include "tsr/train.hpp"

namespace tsr {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

BoxMode parse_mode(const std::string& s) {
  if (s == "aligned") return BoxMode::kAligned;
  if (s == "text_focused") return BoxMode::kTextFocused;
  throw std::invalid_argument("unknown bbox mode: " + s);
}

RelationLabel label_from_string(const std::string& s) {
  if (s == "none") return RelationLabel::kNone;
  if (s == "vertical") return RelationLabel::kVertical;
  if (s == "horizontal") return RelationLabel::kHorizontal;
  throw std::invalid_argument("unknown relation label: " + s);
}

void apply_jobs(int jobs) {
  if (jobs < 1) throw std::invalid_argument("--jobs must be positive");
  kernels::exec().parallel = jobs > 1;
#ifdef _OPENMP
  omp_set_num_threads(jobs);
#endif
}

// Serializes the subcommand's resolved options so a run can be replayed from
// its artifact directory alone.
void echo_run_config(CLI::App* sub, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "run_config.toml");
  out << sub->config_to_str(true, true);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

Table load_prepared_table(const std::string& annotation_path, BoxMode mode) {
  Table table = load_annotation(annotation_path);
  derive_relations(table);
  return apply_empty_cell_policy(table, mode);
}

DatasetManifest load_manifest_dir(const std::string& data_dir) {
  const fs::path manifest = fs::path(data_dir) / "manifest.json";
  if (!fs::exists(manifest))
    throw std::runtime_error("no manifest.json under " + data_dir);
  return load_manifest(manifest.string());
}

std::vector<LabeledPair> load_pairs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pairs file: " + path);
  json doc = json::parse(in);
  std::vector<LabeledPair> pairs;
  for (const json& jp : doc.at("pairs")) {
    LabeledPair pair;
    pair.a = jp.at("a").get<int>();
    pair.b = jp.at("b").get<int>();
    pair.label = label_from_string(jp.at("label").get<std::string>());
    pairs.push_back(pair);
  }
  return pairs;
}

void print_metrics_table(const ConfusionMatrix& cm) {
  std::printf("%-12s %10s %10s %10s %10s\n", "class", "precision", "recall", "f1", "support");
  for (int c = 0; c < 3; ++c)
    std::printf("%-12s %10.4f %10.4f %10.4f %10lld\n", to_string(static_cast<RelationLabel>(c)),
                cm.precision(c), cm.recall(c), cm.f1(c),
                static_cast<long long>(cm.support(c)));
  std::printf("%-12s %10.4f %10.4f %10.4f\n", "macro", cm.macro_precision(), cm.macro_recall(),
              cm.macro_f1());
  std::printf("%-12s %10.4f %10.4f %10.4f\n", "micro", cm.micro_precision(), cm.micro_recall(),
              cm.micro_f1());
  std::printf("accuracy %.4f over %lld pairs\n", cm.accuracy(),
              static_cast<long long>(cm.total()));
}

// Shared flag bundle; each subcommand registers the subset it uses.
struct CommonOpts {
  uint64_t seed = 0;
  int k = kDefaultNeighborCount;
  int jobs = 1;
  std::string variant = "full";
  std::string bbox_mode = "aligned";
  std::string out;
  std::string data;
};

void add_seed(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--seed", o.seed, "seed for all randomness in this run")->capture_default_str();
}
void add_k(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--k", o.k, "neighbors per cell when forming candidate pairs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}
void add_jobs(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--jobs", o.jobs, "worker threads for generation and kernels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}
void add_variant(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--variant", o.variant, "model variant")
      ->check(CLI::IsMember({"full", "no_attention", "position_only"}))
      ->capture_default_str();
}
void add_bbox_mode(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--bbox-mode", o.bbox_mode, "which cell boxes drive pairing and crops")
      ->check(CLI::IsMember({"aligned", "text_focused"}))
      ->capture_default_str();
}
void add_out(CLI::App* sub, CommonOpts& o, const char* what) {
  sub->add_option("--out", o.out, what)->required();
}
void add_data(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--data", o.data, "dataset directory containing manifest.json")->required();
}
void add_config(CLI::App* sub) {
  sub->set_config("--config", "", "read options from a key=value config file");
}

struct ModelDims {
  int input_size = 84;
  int channels = 64;
  int embed_blocks = 4;
  int attention_hidden = 256;
  int classifier_hidden = 512;
};

void add_model_dims(CLI::App* sub, ModelDims& dims) {
  sub->add_option("--input-size", dims.input_size, "network input side in pixels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--channels", dims.channels, "filters per convolution block")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--embed-blocks", dims.embed_blocks, "conv-bn-relu-pool repetitions")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--attention-hidden", dims.attention_hidden, "attention head hidden width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--classifier-hidden", dims.classifier_hidden, "classifier hidden width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"table structure toolkit: synthesize datasets, pair cells, train and apply the "
               "relation classifier, and recover row/column structure"};
  app.require_subcommand(1);

  // ---------------------------------------------------------------- synth
  auto synth = app.add_subcommand("synth", "generate a synthetic table dataset");
  CommonOpts synth_opts;
  struct {
    int count = 100;
    std::string profile = "a";
    GenParams overrides;  // filled post-parse
  } synth_extra;
  add_out(synth, synth_opts, "output dataset directory");
  add_seed(synth, synth_opts);
  add_jobs(synth, synth_opts);
  add_config(synth);
  synth->add_option("--count", synth_extra.count, "number of tables")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--profile", synth_extra.profile, "style profile")
      ->check(CLI::IsMember({"a", "b"}))
      ->capture_default_str();
  GenParams& ov = synth_extra.overrides;
  synth->add_option("--min-rows", ov.min_rows)->capture_default_str();
  synth->add_option("--max-rows", ov.max_rows)->capture_default_str();
  synth->add_option("--min-cols", ov.min_cols)->capture_default_str();
  synth->add_option("--max-cols", ov.max_cols)->capture_default_str();
  synth->add_option("--min-cell-width", ov.min_cell_width)->capture_default_str();
  synth->add_option("--max-cell-width", ov.max_cell_width)->capture_default_str();
  synth->add_option("--min-cell-height", ov.min_cell_height)->capture_default_str();
  synth->add_option("--max-cell-height", ov.max_cell_height)->capture_default_str();
  synth->add_option("--margin", ov.margin)->capture_default_str();
  synth->add_option("--span-prob", ov.span_prob)->capture_default_str();
  synth->add_option("--max-span", ov.max_span)->capture_default_str();
  synth->add_option("--empty-prob", ov.empty_prob)->capture_default_str();
  synth->add_option("--border-prob", ov.border_prob)->capture_default_str();
  synth->add_option("--outer-border", ov.outer_border)->capture_default_str();
  synth->add_option("--speckles", ov.speckles)->capture_default_str();
  synth->add_option("--train-frac", ov.train_frac)->capture_default_str();
  synth->add_option("--val-frac", ov.val_frac)->capture_default_str();
  synth->callback([&]() {
    GenParams params = style_profile(synth_extra.profile[0]);
    // Explicit flags win over the profile preset.
    auto maybe = [&](const char* flag, auto GenParams::* field) {
      if (synth->count(flag)) params.*field = ov.*field;
    };
    maybe("--min-rows", &GenParams::min_rows);
    maybe("--max-rows", &GenParams::max_rows);
    maybe("--min-cols", &GenParams::min_cols);
    maybe("--max-cols", &GenParams::max_cols);
    maybe("--min-cell-width", &GenParams::min_cell_width);
    maybe("--max-cell-width", &GenParams::max_cell_width);
    maybe("--min-cell-height", &GenParams::min_cell_height);
    maybe("--max-cell-height", &GenParams::max_cell_height);
    maybe("--margin", &GenParams::margin);
    maybe("--span-prob", &GenParams::span_prob);
    maybe("--max-span", &GenParams::max_span);
    maybe("--empty-prob", &GenParams::empty_prob);
    maybe("--border-prob", &GenParams::border_prob);
    maybe("--outer-border", &GenParams::outer_border);
    maybe("--speckles", &GenParams::speckles);
    maybe("--train-frac", &GenParams::train_frac);
    maybe("--val-frac", &GenParams::val_frac);
    params.seed = synth_opts.seed;
    echo_run_config(synth, synth_opts.out);
    const DatasetManifest manifest =
        generate_dataset(params, synth_extra.count, synth_opts.out, synth_opts.jobs);
    std::printf("wrote %zu tables to %s\n", manifest.entries.size(), synth_opts.out.c_str());
  });

  // ---------------------------------------------------------------- pairs
  auto pairs_cmd = app.add_subcommand("pairs", "emit candidate pairs and label statistics");
  CommonOpts pairs_opts;
  std::string pairs_split = "all";
  add_data(pairs_cmd, pairs_opts);
  add_out(pairs_cmd, pairs_opts, "output directory for pairs.json");
  add_k(pairs_cmd, pairs_opts);
  add_bbox_mode(pairs_cmd, pairs_opts);
  add_config(pairs_cmd);
  pairs_cmd->add_option("--split", pairs_split, "manifest split to pair")->capture_default_str();
  pairs_cmd->callback([&]() {
    const DatasetManifest manifest = load_manifest_dir(pairs_opts.data);
    const BoxMode mode = parse_mode(pairs_opts.bbox_mode);
    json tables = json::array();
    int64_t counts[3] = {0, 0, 0};
    for (const ManifestEntry& entry : manifest.split(pairs_split)) {
      const Table table =
          load_prepared_table((fs::path(pairs_opts.data) / entry.annotation).string(), mode);
      json jt{{"id", table.id}, {"pairs", json::array()}};
      for (const PairCandidate& pc : generate_pairs(table, pairs_opts.k)) {
        jt["pairs"].push_back({{"a", pc.a},
                               {"b", pc.b},
                               {"label", to_string(pc.label)},
                               {"distance", pc.distance}});
        ++counts[static_cast<int>(pc.label)];
      }
      tables.push_back(std::move(jt));
    }
    json doc{{"tables", tables},
             {"label_counts",
              {{"none", counts[0]}, {"vertical", counts[1]}, {"horizontal", counts[2]}}}};
    echo_run_config(pairs_cmd, pairs_opts.out);
    write_text_file((fs::path(pairs_opts.out) / "pairs.json").string(), doc.dump(2) + "\n");
    std::printf("pairs: none %lld, vertical %lld, horizontal %lld\n",
                static_cast<long long>(counts[0]), static_cast<long long>(counts[1]),
                static_cast<long long>(counts[2]));
  });

  // ---------------------------------------------------------------- train
  auto train_cmd = app.add_subcommand("train", "train a relation classifier");
  CommonOpts train_opts;
  ModelDims train_dims;
  TrainConfig train_cfg;
  std::string train_split = "train", val_split = "val";
  std::vector<double> class_weights;
  add_data(train_cmd, train_opts);
  add_out(train_cmd, train_opts, "output directory for checkpoint and history");
  add_seed(train_cmd, train_opts);
  add_k(train_cmd, train_opts);
  add_jobs(train_cmd, train_opts);
  add_variant(train_cmd, train_opts);
  add_bbox_mode(train_cmd, train_opts);
  add_model_dims(train_cmd, train_dims);
  add_config(train_cmd);
  train_cmd->add_option("--epochs", train_cfg.epochs)->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--batch-size", train_cfg.batch_size)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--lr", train_cfg.learning_rate)->capture_default_str();
  train_cmd->add_option("--weight-decay", train_cfg.weight_decay)->capture_default_str();
  train_cmd->add_option("--patience", train_cfg.patience, "0 disables early stopping")
      ->capture_default_str();
  train_cmd->add_option("--class-weights", class_weights,
                        "per-class loss weights (none vertical horizontal)")
      ->expected(3);
  train_cmd->add_option("--train-split", train_split)->capture_default_str();
  train_cmd->add_option("--val-split", val_split)->capture_default_str();
  train_cmd->add_flag("--verbose", train_cfg.verbose, "print one line per epoch");
  train_cmd->callback([&]() {
    apply_jobs(train_opts.jobs);
    echo_run_config(train_cmd, train_opts.out);
    ModelConfig mc;
    mc.variant = variant_from_string(train_opts.variant);
    mc.input_size = train_dims.input_size;
    mc.channels = train_dims.channels;
    mc.embed_blocks = train_dims.embed_blocks;
    mc.attention_hidden = train_dims.attention_hidden;
    mc.classifier_hidden = train_dims.classifier_hidden;
    mc.seed = train_opts.seed;
    CattNet<float> model(mc);
    train_cfg.seed = train_opts.seed;
    train_cfg.neighbor_count = train_opts.k;
    train_cfg.variant = mc.variant;
    train_cfg.bbox_mode = parse_mode(train_opts.bbox_mode);
    train_cfg.class_weights.assign(class_weights.begin(), class_weights.end());
    train_cfg.history_path = (fs::path(train_opts.out) / "history.csv").string();
    const DatasetManifest manifest = load_manifest_dir(train_opts.data);
    const TrainResult result =
        train_from_manifest(train_opts.data, manifest, model, train_cfg, train_split, val_split);
    AdamW<float> opt_state;
    opt_state.step_count = result.optimizer_steps;
    save_checkpoint((fs::path(train_opts.out) / "model.ckpt").string(), model, &opt_state);
    json summary{{"best_epoch", result.best_epoch},
                 {"best_val_micro_f1", result.best_val_micro_f1},
                 {"epochs_run", result.history.size()},
                 {"stopped_early", result.stopped_early},
                 {"optimizer_steps", result.optimizer_steps},
                 {"parameter_count", model.parameter_count()}};
    write_text_file((fs::path(train_opts.out) / "train_summary.json").string(),
                    summary.dump(2) + "\n");
    std::printf("best epoch %d, val micro-f1 %.4f; checkpoint in %s\n", result.best_epoch,
                result.best_val_micro_f1, train_opts.out.c_str());
  });

  // ---------------------------------------------------------------- eval
  auto eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint (or the label oracle)");
  CommonOpts eval_opts;
  std::string eval_split = "test", eval_ckpt;
  int eval_batch = 64;
  bool eval_oracle = false;
  add_data(eval_cmd, eval_opts);
  add_out(eval_cmd, eval_opts, "output directory for metrics.json and predictions.json");
  add_k(eval_cmd, eval_opts);
  add_jobs(eval_cmd, eval_opts);
  add_bbox_mode(eval_cmd, eval_opts);
  add_config(eval_cmd);
  eval_cmd->add_option("--checkpoint", eval_ckpt, "trained model checkpoint");
  eval_cmd->add_flag("--oracle", eval_oracle, "score the perfect predictor instead of a model");
  eval_cmd->add_option("--split", eval_split)->capture_default_str();
  eval_cmd->add_option("--batch-size", eval_batch)->check(CLI::PositiveNumber)->capture_default_str();
  eval_cmd->callback([&]() {
    if (eval_ckpt.empty() && !eval_oracle)
      throw std::runtime_error("eval needs --checkpoint or --oracle");
    apply_jobs(eval_opts.jobs);
    const DatasetManifest manifest = load_manifest_dir(eval_opts.data);
    const BoxMode mode = parse_mode(eval_opts.bbox_mode);
    int input_size = 84;
    CattNet<float>* model = nullptr;
    CattNet<float> loaded(ModelConfig{Variant::kPositionOnly, 84, 64, 4, 256, 512, 0});
    if (!eval_oracle) {
      loaded = load_checkpoint(eval_ckpt);
      model = &loaded;
      input_size = loaded.config().input_size;
    }
    const PairDataset ds = build_pair_dataset(eval_opts.data, manifest.split(eval_split), mode,
                                              eval_opts.k, input_size);
    if (ds.size() == 0) throw std::runtime_error("no candidate pairs in split " + eval_split);
    MetricsReport report;
    std::vector<int> predicted;
    if (eval_oracle) {
      predicted = ds.labels;
      for (int label : ds.labels) report.matrix.add(label, label);
    } else {
      EvalResult ev = evaluate(*model, ds, eval_batch);
      report = ev.report;
      predicted = std::move(ev.predicted);
    }
    echo_run_config(eval_cmd, eval_opts.out);
    write_text_file((fs::path(eval_opts.out) / "metrics.json").string(), report.to_json());
    json preds = json::array();
    for (int i = 0; i < ds.size(); ++i) {
      preds.push_back({{"table", ds.tables[static_cast<size_t>(ds.table_of[static_cast<size_t>(i)])].id},
                       {"a", ds.keys[static_cast<size_t>(i)].first},
                       {"b", ds.keys[static_cast<size_t>(i)].second},
                       {"truth", to_string(static_cast<RelationLabel>(ds.labels[static_cast<size_t>(i)]))},
                       {"label", to_string(static_cast<RelationLabel>(predicted[static_cast<size_t>(i)]))}});
    }
    write_text_file((fs::path(eval_opts.out) / "predictions.json").string(),
                    json{{"pairs", preds}}.dump(2) + "\n");
    print_metrics_table(report.matrix);
  });

  // ---------------------------------------------------------------- infer
  auto infer_cmd = app.add_subcommand("infer", "classify one table's candidate pairs");
  CommonOpts infer_opts;
  std::string infer_ckpt, infer_image, infer_annotation;
  int infer_batch = 64;
  add_out(infer_cmd, infer_opts, "output directory for graph.json");
  add_k(infer_cmd, infer_opts);
  add_jobs(infer_cmd, infer_opts);
  add_bbox_mode(infer_cmd, infer_opts);
  add_config(infer_cmd);
  infer_cmd->add_option("--checkpoint", infer_ckpt)->required();
  infer_cmd->add_option("--image", infer_image, "table png")->required();
  infer_cmd->add_option("--annotation", infer_annotation, "table annotation json")->required();
  infer_cmd->add_option("--batch-size", infer_batch)->check(CLI::PositiveNumber)->capture_default_str();
  infer_cmd->callback([&]() {
    apply_jobs(infer_opts.jobs);
    CattNet<float> model = load_checkpoint(infer_ckpt);
    const BoxMode mode = parse_mode(infer_opts.bbox_mode);
    const Table raw = load_annotation(infer_annotation);
    const GrayImage image = read_png_gray(infer_image);
    PairDataset ds;
    ds.input_size = model.config().input_size;
    append_table(ds, raw, image, mode, infer_opts.k);
    json jpairs = json::array();
    for (int start = 0; start < ds.size(); start += infer_batch) {
      const int stop = std::min(start + infer_batch, ds.size());
      std::vector<int> indices(static_cast<size_t>(stop - start));
      std::iota(indices.begin(), indices.end(), start);
      const PairBatch<float> batch = gather_batch<float>(ds, indices);
      const Tensor<float> logits = model.forward(nullptr, batch, false);
      const Tensor<float> probs = ops::softmax_rows(logits);
      const std::vector<int> labels = ops::argmax_rows(logits);
      for (int i = 0; i < batch.size(); ++i) {
        const int row = start + i;
        jpairs.push_back(
            {{"a", ds.keys[static_cast<size_t>(row)].first},
             {"b", ds.keys[static_cast<size_t>(row)].second},
             {"label", to_string(static_cast<RelationLabel>(labels[static_cast<size_t>(i)]))},
             {"probs",
              {probs.data()[static_cast<size_t>(i) * 3], probs.data()[static_cast<size_t>(i) * 3 + 1],
               probs.data()[static_cast<size_t>(i) * 3 + 2]}}});
      }
    }
    json doc{{"table", ds.tables[0].id}, {"bbox_mode", infer_opts.bbox_mode},
             {"k", infer_opts.k}, {"pairs", jpairs}};
    echo_run_config(infer_cmd, infer_opts.out);
    write_text_file((fs::path(infer_opts.out) / "graph.json").string(), doc.dump(2) + "\n");
    std::printf("classified %d pairs\n", ds.size());
  });

  // ---------------------------------------------------------------- recover
  auto recover_cmd = app.add_subcommand("recover", "rebuild row/column structure");
  CommonOpts recover_opts;
  std::string recover_annotation, recover_pairs;
  add_out(recover_cmd, recover_opts, "output directory for structure.json");
  add_bbox_mode(recover_cmd, recover_opts);
  add_config(recover_cmd);
  recover_cmd->add_option("--annotation", recover_annotation)->required();
  recover_cmd->add_option("--pairs", recover_pairs,
                          "graph.json from infer; omitted = ground-truth relations");
  recover_cmd->callback([&]() {
    const Table table =
        load_prepared_table(recover_annotation, parse_mode(recover_opts.bbox_mode));
    const StructureResult structure = recover_pairs.empty()
                                          ? recover_structure(table)
                                          : recover_structure(table, load_pairs_file(recover_pairs));
    echo_run_config(recover_cmd, recover_opts.out);
    write_text_file((fs::path(recover_opts.out) / "structure.json").string(), structure.to_json());
    std::printf("%zu rows, %zu columns, %zu unassigned\n", structure.rows.size(),
                structure.columns.size(), structure.unassigned.size());
  });

  // ---------------------------------------------------------------- render
  auto render_cmd = app.add_subcommand("render", "draw boxes and relations over a table image");
  CommonOpts render_opts;
  std::string render_annotation, render_image, render_pairs;
  add_out(render_cmd, render_opts, "output directory for overlay.png");
  add_bbox_mode(render_cmd, render_opts);
  add_config(render_cmd);
  render_cmd->add_option("--image", render_image)->required();
  render_cmd->add_option("--annotation", render_annotation)->required();
  render_cmd->add_option("--pairs", render_pairs,
                         "graph.json from infer; omitted = draw ground truth");
  render_cmd->callback([&]() {
    const Table table = load_prepared_table(render_annotation, parse_mode(render_opts.bbox_mode));
    const GrayImage image = read_png_gray(render_image);
    RgbImage overlay;
    if (render_pairs.empty()) {
      overlay = render_overlay(image, table);
    } else {
      std::vector<PairCandidate> predictions;
      for (const LabeledPair& pair : load_pairs_file(render_pairs))
        predictions.push_back(PairCandidate{pair.a, pair.b, pair.label, 0.0});
      overlay = render_overlay(image, table, &predictions);
    }
    echo_run_config(render_cmd, render_opts.out);
    write_png(overlay, (fs::path(render_opts.out) / "overlay.png").string());
    std::printf("wrote overlay.png\n");
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace tsr
