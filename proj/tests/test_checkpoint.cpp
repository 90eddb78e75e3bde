#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "support/test_util.hpp"
#include "tsr/checkpoint.hpp"
#include "tsr/dataset.hpp"
#include "tsr/rng.hpp"
#include "tsr/synthgen.hpp"
#include "tsr/train.hpp"

using namespace tsr;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "tsr_ckpt_tests";
  fs::create_directories(dir);
  return dir / name;
}

ModelConfig small_config(Variant variant = Variant::kFull, uint64_t seed = 3) {
  return ModelConfig{variant, 16, 8, 2, 16, 32, seed};
}

PairBatch<float> random_batch(Rng& rng, int n, int input_size) {
  PairBatch<float> batch;
  batch.cell_a = Tensor<float>({n, 1, input_size, input_size});
  batch.cell_b = Tensor<float>({n, 1, input_size, input_size});
  batch.unions = Tensor<float>({n, 1, input_size, input_size});
  batch.positions = Tensor<float>({n, kPositionFeatures});
  for (auto* t : {&batch.cell_a, &batch.cell_b, &batch.unions, &batch.positions})
    for (int64_t i = 0; i < t->numel(); ++i)
      t->data()[i] = static_cast<float>(rng.uniform());
  batch.labels.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) batch.labels[static_cast<size_t>(i)] = i % 3;
  return batch;
}

// One optimizer step so moments, running stats and weights all move off
// their initial values before we snapshot.
void warm_up(CattNet<float>& model, AdamW<float>& opt, uint64_t seed) {
  Rng rng(seed);
  PairBatch<float> batch = random_batch(rng, 4, model.config().input_size);
  Tape<float> tape;
  Tensor<float> logits = model.forward(&tape, batch, true);
  Tensor<float> loss = ops::softmax_cross_entropy<float>(&tape, logits, batch.labels);
  opt.zero_grad(model.params());
  tape.backward(loss);
  opt.step(model.params());
}

bool same_values(const Tensor<float>& a, const Tensor<float>& b) {
  return a.shape() == b.shape() && a.value_vec() == b.value_vec();
}

}  // namespace

TEST_CASE("checkpoint round trip restores weights, stats and outputs bit-exactly") {
  CattNet<float> model(small_config());
  AdamW<float> opt;
  opt.weight_decay = 0.01f;
  warm_up(model, opt, 11);
  const auto path = temp_file("round_trip.ckpt").string();
  save_checkpoint(path, model, &opt);

  CattNet<float> restored(small_config(Variant::kFull, /*seed=*/999));  // different init
  AdamW<float> opt2;
  load_checkpoint_into(path, restored, &opt2);

  auto p1 = model.params();
  auto p2 = restored.params();
  REQUIRE(p1.size() == p2.size());
  for (size_t i = 0; i < p1.size(); ++i) {
    CAPTURE(p1[i]->name);
    CHECK(p1[i]->name == p2[i]->name);
    CHECK(same_values(p1[i]->tensor, p2[i]->tensor));
  }
  for (size_t i = 0; i < p1.size(); ++i) {
    CHECK(p1[i]->m == p2[i]->m);
    CHECK(p1[i]->v == p2[i]->v);
  }
  CHECK(opt2.step_count == opt.step_count);

  // Same input, same logits, in eval mode (exercises the running stats).
  Rng rng(77);
  PairBatch<float> batch = random_batch(rng, 3, model.config().input_size);
  Tensor<float> a = model.forward(nullptr, batch, false);
  Tensor<float> b = restored.forward(nullptr, batch, false);
  CHECK(a.value_vec() == b.value_vec());
}

TEST_CASE("model-only checkpoints load without an optimizer") {
  CattNet<float> model(small_config(Variant::kPositionOnly));
  const auto path = temp_file("model_only.ckpt").string();
  save_checkpoint(path, model);

  CattNet<float> restored(small_config(Variant::kPositionOnly, 5));
  load_checkpoint_into(path, restored);  // fine: optimizer not requested

  AdamW<float> opt;
  CHECK_THROWS_AS(load_checkpoint_into(path, restored, &opt), CheckpointError);
}

TEST_CASE("load_checkpoint rebuilds the stored configuration") {
  ModelConfig cfg = small_config(Variant::kNoAttention, 21);
  CattNet<float> model(cfg);
  AdamW<float> opt;
  warm_up(model, opt, 31);
  const auto path = temp_file("rebuild.ckpt").string();
  save_checkpoint(path, model, &opt);

  ModelConfig peeked = peek_checkpoint_config(path);
  CHECK(peeked.variant == cfg.variant);
  CHECK(peeked.input_size == cfg.input_size);
  CHECK(peeked.channels == cfg.channels);
  CHECK(peeked.embed_blocks == cfg.embed_blocks);
  CHECK(peeked.seed == cfg.seed);

  CattNet<float> rebuilt = load_checkpoint(path);
  Rng rng(4);
  PairBatch<float> batch = random_batch(rng, 2, cfg.input_size);
  CHECK(model.forward(nullptr, batch, false).value_vec() ==
        rebuilt.forward(nullptr, batch, false).value_vec());
}

TEST_CASE("a differing seed still loads into a matching architecture") {
  CattNet<float> model(small_config(Variant::kFull, 1));
  AdamW<float> opt;
  warm_up(model, opt, 8);
  const auto path = temp_file("seed_diff.ckpt").string();
  save_checkpoint(path, model);
  CattNet<float> other(small_config(Variant::kFull, 2));
  load_checkpoint_into(path, other);
  CHECK(same_values(model.params()[0]->tensor, other.params()[0]->tensor));
}

TEST_CASE("variant mismatch is an explicit error") {
  CattNet<float> model(small_config(Variant::kFull));
  const auto path = temp_file("variant.ckpt").string();
  save_checkpoint(path, model);
  CattNet<float> wrong(small_config(Variant::kNoAttention));
  CHECK_THROWS_WITH_AS(load_checkpoint_into(path, wrong), doctest::Contains("variant"),
                       CheckpointError);
}

TEST_CASE("dimension mismatch is an explicit error") {
  CattNet<float> model(small_config());
  const auto path = temp_file("dims.ckpt").string();
  save_checkpoint(path, model);
  ModelConfig bigger = small_config();
  bigger.channels = 16;
  CattNet<float> wrong(bigger);
  CHECK_THROWS_AS(load_checkpoint_into(path, wrong), CheckpointError);
}

TEST_CASE("truncated files fail the integrity check") {
  CattNet<float> model(small_config());
  const auto path = temp_file("trunc.ckpt");
  save_checkpoint(path.string(), model);
  const auto size = fs::file_size(path);
  fs::resize_file(path, size - 8);
  CattNet<float> target(small_config());
  CHECK_THROWS_AS(load_checkpoint_into(path.string(), target), CheckpointError);
}

TEST_CASE("a flipped payload byte fails the integrity check") {
  CattNet<float> model(small_config());
  const auto path = temp_file("corrupt.ckpt");
  save_checkpoint(path.string(), model);
  // Flip one byte near the middle of the file.
  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  REQUIRE(f.good());
  const auto size = fs::file_size(path);
  f.seekg(static_cast<std::streamoff>(size / 2));
  char byte = 0;
  f.read(&byte, 1);
  byte = static_cast<char>(byte ^ 0x40);
  f.seekp(static_cast<std::streamoff>(size / 2));
  f.write(&byte, 1);
  f.close();
  CattNet<float> target(small_config());
  CHECK_THROWS_AS(load_checkpoint_into(path.string(), target), CheckpointError);
}

TEST_CASE("files that are not checkpoints are rejected") {
  const auto path = temp_file("not_a.ckpt");
  std::ofstream(path) << "just some text, definitely not a checkpoint";
  CattNet<float> target(small_config());
  CHECK_THROWS_AS(load_checkpoint_into(path.string(), target), CheckpointError);
  CHECK_THROWS_AS(peek_checkpoint_config((temp_file("missing.ckpt")).string()), CheckpointError);
}

TEST_CASE("save load save produces identical bytes") {
  CattNet<float> model(small_config());
  AdamW<float> opt;
  warm_up(model, opt, 55);
  const auto p1 = temp_file("twice_a.ckpt");
  const auto p2 = temp_file("twice_b.ckpt");
  save_checkpoint(p1.string(), model, &opt);

  // Same seed so the stored config matches; warm_up already moved every
  // weight, stat and moment away from init, so the loads are still doing
  // the work here.
  CattNet<float> restored(small_config());
  AdamW<float> opt2;
  load_checkpoint_into(p1.string(), restored, &opt2);
  save_checkpoint(p2.string(), restored, &opt2);

  std::ifstream a(p1, std::ios::binary), b(p2, std::ios::binary);
  std::vector<char> ba((std::istreambuf_iterator<char>(a)), {});
  std::vector<char> bb((std::istreambuf_iterator<char>(b)), {});
  CHECK(ba == bb);
}
