#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsr/layers.hpp"
#include "tsr/ops.hpp"
#include "tsr/rng.hpp"
#include "tsr/tensor.hpp"

namespace tsr {

// Ablation variants of the pair classifier.
enum class Variant { kFull, kNoAttention, kPositionOnly };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kNoAttention: return "no_attention";
    case Variant::kPositionOnly: return "position_only";
  }
  return "?";
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "full") return Variant::kFull;
  if (s == "no_attention") return Variant::kNoAttention;
  if (s == "position_only") return Variant::kPositionOnly;
  throw TensorError("unknown variant: " + s);
}

// Number of geometry features per pair: both boxes normalized to the table
// size (4 + 4) plus the center offset (2).
inline constexpr int kPositionFeatures = 10;
inline constexpr int kNumClasses = 3;

struct ModelConfig {
  Variant variant = Variant::kFull;
  int input_size = 84;        // square side of every network input image
  int channels = 64;          // filters per convolution block
  int embed_blocks = 4;       // conv-bn-relu-pool repetitions
  int attention_hidden = 256; // hidden width of both attention heads
  int classifier_hidden = 512;
  uint64_t seed = 0;
};

// One training/inference batch. Image tensors are [N,1,S,S] (present for the
// image-based variants), positions are [N,10] (used by position_only).
template <typename T>
struct PairBatch {
  Tensor<T> cell_a;
  Tensor<T> cell_b;
  Tensor<T> unions;
  Tensor<T> positions;
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
};

namespace model_detail {

// conv3x3 -> batchnorm -> relu -> maxpool2, repeated; 84 -> 42 -> 21 -> 10 -> 5.
template <typename T>
struct ConvStack {
  struct Block {
    Conv2d<T> conv;
    BatchNorm2d<T> bn;
  };
  std::vector<Block> blocks;

  void init(Rng& rng, int in_channels, int filters, int count, const std::string& prefix) {
    blocks.resize(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
      const std::string name = prefix + ".block" + std::to_string(i + 1);
      blocks[static_cast<size_t>(i)].conv.init(rng, i == 0 ? in_channels : filters, filters,
                                               name + ".conv");
      blocks[static_cast<size_t>(i)].bn.init(filters, name + ".bn");
    }
  }

  Tensor<T> forward(Tape<T>* tape, const Tensor<T>& x, bool training) {
    Tensor<T> h = x;
    for (Block& block : blocks) {
      h = block.conv.forward(tape, h);
      h = block.bn.forward(tape, h, training);
      h = ops::relu(tape, h);
      h = ops::maxpool2(tape, h);
    }
    return h;
  }

  void collect(std::vector<Param<T>*>& out) {
    for (Block& block : blocks) {
      block.conv.collect(out);
      block.bn.collect(out);
    }
  }
};

// Two-layer perceptron with a relu between the layers.
template <typename T>
struct Mlp2 {
  Linear<T> fc1, fc2;

  void init(Rng& rng, int in, int hidden, int out, const std::string& prefix) {
    fc1.init(rng, in, hidden, prefix + ".fc1");
    fc2.init(rng, hidden, out, prefix + ".fc2");
  }
  Tensor<T> forward(Tape<T>* tape, const Tensor<T>& x) const {
    return fc2.forward(tape, ops::relu(tape, fc1.forward(tape, x)));
  }
  void collect(std::vector<Param<T>*>& out) {
    fc1.collect(out);
    fc2.collect(out);
  }
};

}  // namespace model_detail

// Pair classifier over table cells. The full variant embeds both cell crops
// and the union crop, turns the cell embeddings into channel and spatial
// attention weights (sigmoid of a sum, so the pair order cannot matter), and
// classifies the gated union embedding. no_attention classifies the raw
// union embedding; position_only classifies geometry features alone.
template <typename T>
class CattNet {
 public:
  explicit CattNet(const ModelConfig& config) : cfg_(config) {
    if (cfg_.channels < 1 || cfg_.embed_blocks < 1 || cfg_.attention_hidden < 1 ||
        cfg_.classifier_hidden < 1)
      throw TensorError("model config dimensions must be positive");
    spatial_ = cfg_.input_size;
    for (int i = 0; i < cfg_.embed_blocks; ++i) {
      if (spatial_ < 2)
        throw TensorError("input size " + std::to_string(cfg_.input_size) +
                          " collapses below 2x2 after " + std::to_string(i) + " pooling steps");
      spatial_ /= 2;
    }
    embed_dim_ = cfg_.channels * spatial_ * spatial_;

    Rng rng(cfg_.seed);
    switch (cfg_.variant) {
      case Variant::kFull:
        cell_embed_.init(rng, 1, cfg_.channels, cfg_.embed_blocks, "cell_embed");
        table_embed_.init(rng, 1, cfg_.channels, cfg_.embed_blocks, "table_embed");
        attn_channel_.init(rng, embed_dim_, cfg_.attention_hidden, cfg_.channels, "attn_channel");
        attn_spatial_.init(rng, embed_dim_, cfg_.attention_hidden, spatial_ * spatial_,
                           "attn_spatial");
        classifier_.init(rng, embed_dim_, cfg_.classifier_hidden, kNumClasses, "classifier");
        break;
      case Variant::kNoAttention:
        table_embed_.init(rng, 1, cfg_.channels, cfg_.embed_blocks, "table_embed");
        classifier_.init(rng, embed_dim_, cfg_.classifier_hidden, kNumClasses, "classifier");
        break;
      case Variant::kPositionOnly:
        position_fc1_.init(rng, kPositionFeatures, 64, "position.fc1");
        position_fc2_.init(rng, 64, 64, "position.fc2");
        position_fc3_.init(rng, 64, kNumClasses, "position.fc3");
        break;
    }
  }

  const ModelConfig& config() const { return cfg_; }
  int embed_spatial() const { return spatial_; }
  int embed_dim() const { return embed_dim_; }

  // Embedding stacks, exposed for inspection; output is [N,channels,s,s].
  Tensor<T> embed_cells(Tape<T>* tape, const Tensor<T>& images, bool training) {
    check_images(images, "cell");
    if (cfg_.variant != Variant::kFull)
      throw TensorError("this variant has no cell embedding network");
    return cell_embed_.forward(tape, images, training);
  }
  Tensor<T> embed_table(Tape<T>* tape, const Tensor<T>& images, bool training) {
    if (cfg_.variant == Variant::kPositionOnly)
      throw TensorError("this variant has no table embedding network");
    check_images(images, "union");
    return table_embed_.forward(tape, images, training);
  }

  Tensor<T> forward(Tape<T>* tape, const PairBatch<T>& batch, bool training) {
    switch (cfg_.variant) {
      case Variant::kFull: {
        if (!batch.cell_a.defined() || !batch.cell_b.defined() || !batch.unions.defined())
          throw TensorError("full variant needs cell and union images");
        Tensor<T> ea = embed_cells(tape, batch.cell_a, training);
        Tensor<T> eb = embed_cells(tape, batch.cell_b, training);
        Tensor<T> eu = embed_table(tape, batch.unions, training);
        const int n = ea.dim(0);
        Tensor<T> fa = ops::reshape(tape, ea, {n, embed_dim_});
        Tensor<T> fb = ops::reshape(tape, eb, {n, embed_dim_});
        // Summing the per-cell head outputs makes the gate symmetric in the
        // pair order before the sigmoid squashes it into (0,1).
        Tensor<T> ca = ops::sigmoid(
            tape, ops::add(tape, attn_channel_.forward(tape, fa), attn_channel_.forward(tape, fb)));
        Tensor<T> sp = ops::sigmoid(
            tape, ops::add(tape, attn_spatial_.forward(tape, fa), attn_spatial_.forward(tape, fb)));
        Tensor<T> ca4 = ops::reshape(tape, ca, {n, cfg_.channels, 1, 1});
        Tensor<T> sp4 = ops::reshape(tape, sp, {n, 1, spatial_, spatial_});
        Tensor<T> fused = ops::attention_gate(tape, ca4, sp4, eu);
        return classifier_.forward(tape, ops::reshape(tape, fused, {n, embed_dim_}));
      }
      case Variant::kNoAttention: {
        if (!batch.unions.defined()) throw TensorError("no_attention variant needs union images");
        Tensor<T> eu = embed_table(tape, batch.unions, training);
        const int n = eu.dim(0);
        return classifier_.forward(tape, ops::reshape(tape, eu, {n, embed_dim_}));
      }
      case Variant::kPositionOnly: {
        if (!batch.positions.defined())
          throw TensorError("position_only variant needs position features");
        if (batch.positions.ndim() != 2 || batch.positions.dim(1) != kPositionFeatures)
          throw TensorError("position features must be [N," +
                            std::to_string(kPositionFeatures) + "]");
        Tensor<T> h = ops::relu(tape, position_fc1_.forward(tape, batch.positions));
        h = ops::relu(tape, position_fc2_.forward(tape, h));
        return position_fc3_.forward(tape, h);
      }
    }
    throw TensorError("unreachable variant");
  }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> out;
    switch (cfg_.variant) {
      case Variant::kFull:
        cell_embed_.collect(out);
        table_embed_.collect(out);
        attn_channel_.collect(out);
        attn_spatial_.collect(out);
        classifier_.collect(out);
        break;
      case Variant::kNoAttention:
        table_embed_.collect(out);
        classifier_.collect(out);
        break;
      case Variant::kPositionOnly:
        position_fc1_.collect(out);
        position_fc2_.collect(out);
        position_fc3_.collect(out);
        break;
    }
    return out;
  }

  struct StatRef {
    std::string name;
    std::vector<T>* values;
  };
  std::vector<StatRef> stats() {
    std::vector<StatRef> out;
    auto add_stack = [&out](model_detail::ConvStack<T>& stack) {
      for (auto& block : stack.blocks) {
        out.push_back({block.bn.prefix + ".running_mean", &block.bn.running_mean});
        out.push_back({block.bn.prefix + ".running_var", &block.bn.running_var});
      }
    };
    if (cfg_.variant == Variant::kFull) add_stack(cell_embed_);
    if (cfg_.variant != Variant::kPositionOnly) add_stack(table_embed_);
    return out;
  }

  bool stats_initialized() const {
    bool all = true;
    auto scan = [&all](const model_detail::ConvStack<T>& stack) {
      for (const auto& block : stack.blocks) all = all && block.bn.initialized;
    };
    if (cfg_.variant == Variant::kFull) scan(cell_embed_);
    if (cfg_.variant != Variant::kPositionOnly) scan(table_embed_);
    return all;
  }

  void mark_stats_initialized() {
    auto scan = [](model_detail::ConvStack<T>& stack) {
      for (auto& block : stack.blocks) block.bn.initialized = true;
    };
    if (cfg_.variant == Variant::kFull) scan(cell_embed_);
    if (cfg_.variant != Variant::kPositionOnly) scan(table_embed_);
  }

  int64_t parameter_count() {
    int64_t total = 0;
    for (Param<T>* p : params()) total += p->tensor.numel();
    return total;
  }

  // Attention heads exposed for ablation experiments in the tests.
  model_detail::Mlp2<T>& attention_channel_head() { return attn_channel_; }
  model_detail::Mlp2<T>& attention_spatial_head() { return attn_spatial_; }
  model_detail::Mlp2<T>& classifier_head() { return classifier_; }
  model_detail::ConvStack<T>& table_embed_stack() { return table_embed_; }
  model_detail::ConvStack<T>& cell_embed_stack() { return cell_embed_; }

 private:
  void check_images(const Tensor<T>& images, const char* what) const {
    if (!images.defined()) throw TensorError(std::string(what) + " images missing");
    if (images.ndim() != 4 || images.dim(1) != 1 || images.dim(2) != cfg_.input_size ||
        images.dim(3) != cfg_.input_size)
      throw TensorError(std::string(what) + " images must be [N,1," +
                        std::to_string(cfg_.input_size) + "," + std::to_string(cfg_.input_size) +
                        "], got " + shape_string(images.shape()));
  }

  ModelConfig cfg_;
  int spatial_ = 0;
  int embed_dim_ = 0;
  model_detail::ConvStack<T> cell_embed_;
  model_detail::ConvStack<T> table_embed_;
  model_detail::Mlp2<T> attn_channel_;
  model_detail::Mlp2<T> attn_spatial_;
  model_detail::Mlp2<T> classifier_;
  Linear<T> position_fc1_, position_fc2_, position_fc3_;
};

}  // namespace tsr
