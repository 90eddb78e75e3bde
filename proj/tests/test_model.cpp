#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "tsr/gradcheck.hpp"
#include "tsr/model.hpp"
#include "tsr/optim.hpp"
#include "tsr/rng.hpp"

using namespace tsr;

namespace {

// Small full-model configuration used throughout: 16 -> 8 -> 4 spatial,
// embed dim 8*4*4 = 128.
ModelConfig scaled_config(Variant variant = Variant::kFull, uint64_t seed = 1) {
  ModelConfig cfg;
  cfg.variant = variant;
  cfg.input_size = 16;
  cfg.channels = 8;
  cfg.embed_blocks = 2;
  cfg.attention_hidden = 16;
  cfg.classifier_hidden = 32;
  cfg.seed = seed;
  return cfg;
}

template <typename T>
PairBatch<T> random_batch(Rng& rng, int n, int input_size, bool labels_spread = true) {
  PairBatch<T> batch;
  batch.cell_a = Tensor<T>({n, 1, input_size, input_size});
  batch.cell_b = Tensor<T>({n, 1, input_size, input_size});
  batch.unions = Tensor<T>({n, 1, input_size, input_size});
  batch.positions = Tensor<T>({n, kPositionFeatures});
  for (auto* t : {&batch.cell_a, &batch.cell_b, &batch.unions, &batch.positions})
    for (auto& v : t->value_vec()) v = static_cast<T>(rng.uniform(0, 1));
  for (int i = 0; i < n; ++i)
    batch.labels.push_back(labels_spread ? i % kNumClasses
                                         : static_cast<int>(rng.range(0, kNumClasses - 1)));
  return batch;
}

PairBatch<float> swapped(const PairBatch<float>& batch) {
  PairBatch<float> out;
  out.cell_a = batch.cell_b;
  out.cell_b = batch.cell_a;
  out.unions = batch.unions;
  out.positions = batch.positions;
  out.labels = batch.labels;
  return out;
}

}  // namespace

TEST_CASE("variant names round trip") {
  for (Variant v : {Variant::kFull, Variant::kNoAttention, Variant::kPositionOnly})
    CHECK(variant_from_string(to_string(v)) == v);
  CHECK_THROWS_AS(variant_from_string("bogus"), TensorError);
}

TEST_CASE("embedding geometry follows the config") {
  CattNet<float> def{ModelConfig{}};
  CHECK(def.embed_spatial() == 5);  // 84 -> 42 -> 21 -> 10 -> 5
  CHECK(def.embed_dim() == 1600);

  CattNet<float> small{scaled_config()};
  CHECK(small.embed_spatial() == 4);
  CHECK(small.embed_dim() == 128);
}

TEST_CASE("configs that collapse the feature map are rejected") {
  ModelConfig cfg = scaled_config();
  cfg.input_size = 8;
  cfg.embed_blocks = 4;  // 8 -> 4 -> 2 -> 1, fourth pool impossible
  CHECK_THROWS_AS(CattNet<float>{cfg}, TensorError);
  cfg.embed_blocks = 0;
  CHECK_THROWS_AS(CattNet<float>{cfg}, TensorError);
}

TEST_CASE("parameter counts match hand-computed totals") {
  CattNet<float> pos{ModelConfig{Variant::kPositionOnly, 84, 64, 4, 256, 512, 0}};
  // 10*64+64 + 64*64+64 + 64*3+3
  CHECK(pos.parameter_count() == 5059);

  CattNet<float> full{ModelConfig{}};
  // two conv stacks 111936 each, attention heads 426304 + 416281,
  // classifier 821251
  CHECK(full.parameter_count() == 1887708);

  CattNet<float> na{ModelConfig{Variant::kNoAttention, 84, 64, 4, 256, 512, 0}};
  CHECK(na.parameter_count() == 111936 + 821251);
}

TEST_CASE("the same seed reproduces identical weights") {
  CattNet<float> a{scaled_config(Variant::kFull, 7)};
  CattNet<float> b{scaled_config(Variant::kFull, 7)};
  CattNet<float> c{scaled_config(Variant::kFull, 8)};

  auto pa = a.params(), pb = b.params(), pc = c.params();
  REQUIRE(pa.size() == pb.size());
  bool any_diff_c = false;
  for (size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i]->name == pb[i]->name);
    CHECK(pa[i]->tensor.value_vec() == pb[i]->tensor.value_vec());
    if (pa[i]->tensor.value_vec() != pc[i]->tensor.value_vec()) any_diff_c = true;
  }
  CHECK(any_diff_c);
}

TEST_CASE("forward produces [n,3] logits for every variant") {
  Rng rng(41);
  for (Variant v : {Variant::kFull, Variant::kNoAttention, Variant::kPositionOnly}) {
    CattNet<float> model{scaled_config(v)};
    PairBatch<float> batch = random_batch<float>(rng, 4, 16);
    Tensor<float> logits = model.forward(nullptr, batch, true);
    CHECK(logits.shape() == std::vector<int>{4, kNumClasses});
  }
}

TEST_CASE("variants reject inputs they do not consume") {
  Rng rng(42);
  PairBatch<float> batch = random_batch<float>(rng, 2, 16);

  CattNet<float> full{scaled_config(Variant::kFull)};
  PairBatch<float> no_cells = batch;
  no_cells.cell_a = Tensor<float>();
  CHECK_THROWS_AS(full.forward(nullptr, no_cells, true), TensorError);

  CattNet<float> pos{scaled_config(Variant::kPositionOnly)};
  PairBatch<float> no_positions = batch;
  no_positions.positions = Tensor<float>();
  CHECK_THROWS_AS(pos.forward(nullptr, no_positions, true), TensorError);

  CHECK_THROWS_AS(pos.embed_table(nullptr, batch.unions, true), TensorError);
  CattNet<float> na{scaled_config(Variant::kNoAttention)};
  CHECK_THROWS_AS(na.embed_cells(nullptr, batch.cell_a, true), TensorError);
}

TEST_CASE("image shape validation names the offending input") {
  CattNet<float> model{scaled_config()};
  PairBatch<float> batch;
  batch.cell_a = Tensor<float>({2, 1, 8, 8});  // wrong spatial size
  batch.cell_b = Tensor<float>({2, 1, 16, 16});
  batch.unions = Tensor<float>({2, 1, 16, 16});
  batch.labels = {0, 1};
  CHECK_THROWS_WITH_AS(model.forward(nullptr, batch, true),
                       doctest::Contains("cell images must be"), TensorError);
}

TEST_CASE("evaluation before any training step is refused") {
  Rng rng(43);
  CattNet<float> model{scaled_config()};
  PairBatch<float> batch = random_batch<float>(rng, 2, 16);
  CHECK_THROWS_AS(model.forward(nullptr, batch, false), TensorError);
  model.forward(nullptr, batch, true);
  CHECK(model.stats_initialized());
  Tensor<float> logits = model.forward(nullptr, batch, false);  // now fine
  CHECK(logits.dim(0) == 2);
}

TEST_CASE("swapping the pair order leaves full-variant logits unchanged") {
  Rng rng(44);
  CattNet<float> model{scaled_config()};
  for (int trial = 0; trial < 10; ++trial) {
    PairBatch<float> batch = random_batch<float>(rng, 5, 16);
    Tensor<float> ab = model.forward(nullptr, batch, true);
    Tensor<float> ba = model.forward(nullptr, swapped(batch), true);
    CHECK(ab.value_vec() == ba.value_vec());  // bit-exact by construction
  }
}

TEST_CASE("saturated attention reduces the full variant to no_attention") {
  Rng rng(45);
  CattNet<float> full{scaled_config(Variant::kFull, 3)};
  CattNet<float> na{scaled_config(Variant::kNoAttention, 99)};

  // Force both attention heads to emit huge constants: sigmoid saturates to
  // exactly 1 and the gate becomes the identity.
  auto saturate = [](model_detail::Mlp2<float>& head) {
    for (auto& v : head.fc2.weight.tensor.value_vec()) v = 0.f;
    for (auto& v : head.fc2.bias.tensor.value_vec()) v = 250.f;
  };
  saturate(full.attention_channel_head());
  saturate(full.attention_spatial_head());

  // Share the union path: copy table stack and classifier weights by name.
  std::map<std::string, Param<float>*> source;
  for (Param<float>* p : full.params()) source[p->name] = p;
  for (Param<float>* p : na.params()) {
    REQUIRE(source.count(p->name) == 1);
    p->tensor.value_vec() = source[p->name]->tensor.value_vec();
  }

  PairBatch<float> batch = random_batch<float>(rng, 4, 16);
  Tensor<float> lf = full.forward(nullptr, batch, true);
  Tensor<float> ln = na.forward(nullptr, batch, true);
  CHECK(lf.value_vec() == ln.value_vec());
}

TEST_CASE("loss on a fixed batch strictly decreases over the first 5 steps") {
  Rng rng(46);
  CattNet<float> model{scaled_config(Variant::kFull, 12)};
  PairBatch<float> batch = random_batch<float>(rng, 8, 16);

  AdamW<float> opt;  // lr 1e-3
  opt.weight_decay = 0.01f;
  auto params = model.params();

  std::vector<float> losses;
  for (int step = 0; step < 6; ++step) {
    Tape<float> tape;
    Tensor<float> logits = model.forward(&tape, batch, true);
    Tensor<float> loss = ops::softmax_cross_entropy(&tape, logits, batch.labels);
    losses.push_back(loss.item());
    if (step == 5) break;
    opt.zero_grad(params);
    tape.backward(loss);
    opt.step(params);
  }
  for (size_t i = 1; i < losses.size(); ++i) CHECK(losses[i] < losses[i - 1]);
}

TEST_CASE("end-to-end gradients agree with finite differences") {
  ModelConfig cfg;
  cfg.variant = Variant::kFull;
  cfg.input_size = 8;
  cfg.channels = 4;
  cfg.embed_blocks = 2;
  cfg.attention_hidden = 8;
  cfg.classifier_hidden = 8;
  cfg.seed = 5;
  CattNet<double> model{cfg};

  Rng rng(47);
  PairBatch<double> batch = random_batch<double>(rng, 2, 8);

  std::vector<Tensor<double>> wrt;
  for (Param<double>* p : model.params()) wrt.push_back(p->tensor);
  const double err = grad_check<double>(
      [&](Tape<double>* tape) {
        Tensor<double> logits = model.forward(tape, batch, true);
        return ops::softmax_cross_entropy(tape, logits, batch.labels);
      },
      wrt, 1e-5);
  CHECK(err < 1e-6);

  CattNet<double> pos{ModelConfig{Variant::kPositionOnly, 8, 4, 2, 8, 8, 6}};
  std::vector<Tensor<double>> pos_wrt;
  for (Param<double>* p : pos.params()) pos_wrt.push_back(p->tensor);
  const double pos_err = grad_check<double>(
      [&](Tape<double>* tape) {
        Tensor<double> logits = pos.forward(tape, batch, true);
        return ops::softmax_cross_entropy(tape, logits, batch.labels);
      },
      pos_wrt, 1e-5);
  CHECK(pos_err < 1e-6);
}
