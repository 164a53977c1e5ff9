#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfim/linalg.hpp"

namespace rfim {

struct Dataset {
  std::vector<Vector> features;  // intensities in [0,1]
  std::vector<int> labels;
  std::vector<std::string> class_names;

  std::size_t size() const { return features.size(); }
  std::size_t dim() const { return features.empty() ? 0 : features.front().size(); }
  std::size_t arity() const { return class_names.size(); }
};

struct IdxError : std::runtime_error {
  enum class Kind { BadMagic, Truncated, CountMismatch, Io };
  Kind kind;
  IdxError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
};

// IDX pair reader: big-endian magic 0x00000803 (images) / 0x00000801 (labels),
// big-endian 32-bit dims, then raw unsigned bytes scaled by 1/255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Inverse of load_idx for byte-quantized features (values k/255). Used to
// build fixtures; round-trips such datasets bit-exactly.
void save_idx(const Dataset& ds, const std::string& images_path, const std::string& labels_path);

// Keeps only the two classes, relabelled a -> 0, b -> 1, original order kept.
Dataset binary_subset(const Dataset& ds, int class_a, int class_b);

// Two isotropic Gaussian clusters at ±separation/2 along the first axis
// (unit noise), mapped affinely into [0,1] and clipped. Labels alternate.
Dataset synth_blobs(std::size_t n, std::size_t dim, double separation, std::uint64_t seed);

// Multi-class variant: `classes` isotropic clusters at seeded random centers
// whose expected pairwise latent distance is `separation` noise units.
// Labels cycle 0..classes-1.
Dataset synth_classes(std::size_t n, std::size_t dim, std::size_t classes, double separation,
                      std::uint64_t seed);

struct SplitSpec {
  double train_fraction = 0.5;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded shuffle then prefix split; deterministic per SplitSpec.
Split train_test_split(std::size_t n, const SplitSpec& spec);

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices);

// Seeded index batches for one epoch; the final short batch is kept.
std::vector<std::vector<std::size_t>> minibatches(std::size_t n, std::size_t batch_size,
                                                  std::uint64_t seed, std::size_t epoch);

}  // namespace rfim
