#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlsom/patching.hpp"
#include "mlsom/types.hpp"

namespace mlsom {

/// Byte images plus integer labels, stored contiguously (H x W x C per image,
/// channels interleaved). Immutable after loading.
struct LabeledImageSet {
  Index height = 0;
  Index width = 0;
  Index channels = 1;
  int num_classes = 0;
  std::vector<std::uint8_t> pixels;  // size() * height * width * channels
  std::vector<int> labels;

  Index size() const { return static_cast<Index>(labels.size()); }
  Index image_bytes() const { return height * width * channels; }

  ByteImageView image(Index i) const {
    return {height, width, channels,
            std::span<const std::uint8_t>(pixels).subspan(
                static_cast<std::size_t>(i * image_bytes()),
                static_cast<std::size_t>(image_bytes()))};
  }
};

/// Reads an IDX image/label pair: big-endian magic 0x00000803 (images) /
/// 0x00000801 (labels), big-endian u32 counts and dims, then raw bytes.
/// Malformed files raise DataError naming the offending field.
LabeledImageSet load_mnist(const std::string& images_path, const std::string& labels_path);

/// Reads CIFAR-10 binary batches: 3073-byte records (1 label byte + 1024
/// bytes per R, G, B plane, row-major), de-interleaved into H x W x C.
LabeledImageSet load_cifar10(const std::vector<std::string>& batch_paths);

/// Deterministic stratified sample without replacement. Per-class quotas are
/// count / num_classes, the first count % num_classes classes taking one
/// extra; classes short of their quota are backfilled from the remaining
/// examples in index order. Selected examples keep their original relative
/// order, so count == size() returns the set unchanged.
LabeledImageSet subset(const LabeledImageSet& set, Index count, std::uint64_t seed);

}  // namespace mlsom
