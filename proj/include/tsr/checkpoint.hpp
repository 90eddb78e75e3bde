#pragma once

#include <stdexcept>
#include <string>

#include "tsr/model.hpp"
#include "tsr/optim.hpp"

namespace tsr {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Single-file binary snapshot: model configuration, every weight, the
// batch-norm running statistics and (optionally) AdamW moments, guarded by a
// trailing crc32 so truncation or bit rot is caught on load.
void save_checkpoint(const std::string& path, CattNet<float>& model,
                     const AdamW<float>* optimizer = nullptr);

// Restores a checkpoint into an existing model, which must have the same
// variant and dimensions; throws CheckpointError otherwise.
void load_checkpoint_into(const std::string& path, CattNet<float>& model,
                          AdamW<float>* optimizer = nullptr);

// Convenience: build the model the checkpoint describes, then restore it.
CattNet<float> load_checkpoint(const std::string& path, AdamW<float>* optimizer = nullptr);

// Reads only the stored model configuration.
ModelConfig peek_checkpoint_config(const std::string& path);

}  // namespace tsr
