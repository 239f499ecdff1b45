#pragma once

#include <string>
#include <vector>

#include "mrca/network.hpp"

namespace mrca {

// Identity of the embedding table a model was trained against.
struct EmbeddingFingerprint {
  int dim = 0;
  std::size_t vocab_size = 0;
  double boost = 0.0;
};

struct Checkpoint {
  ModelParams params;
  std::vector<std::string> relations;
  EmbeddingFingerprint embedding;
};

// Versioned binary container: magic, version, JSON manifest (shape
// metadata, relation vocabulary, embedding fingerprint, tensor directory
// with names/shapes/offsets), then tensor payloads as 64-bit little-endian
// column-major arrays. Loading verifies magic, version and that every
// tensor shape is consistent with the manifest's shape metadata.
void save_checkpoint(const std::string &path, const Checkpoint &ckpt);
Checkpoint load_checkpoint(const std::string &path);

}  // namespace mrca
