#pragma once

#include <span>
#include <vector>

#include "mlsom/types.hpp"

namespace mlsom {

/// Sliding-window settings. Windows are square, `window` and `stride` in
/// pixels; `channels` is 1 for grayscale and 3 for RGB.
struct PatchConfig {
  Index window = 14;
  Index stride = 7;
  Index channels = 1;

  Index patch_dim() const { return window * window * channels; }

  /// Window origins along one image axis of length `extent`.
  Index steps(Index extent) const { return (extent - window) / stride + 1; }

  /// The window must fit and tile the image exactly: window <= extent and
  /// (extent - window) divisible by stride on both axes. No padding.
  void validate_for(Index image_height, Index image_width) const {
    if (window < 1 || stride < 1) throw ConfigError("window and stride must be positive");
    if (channels != 1 && channels != 3) throw ConfigError("channels must be 1 or 3");
    if (window > image_height || window > image_width)
      throw ConfigError("window " + std::to_string(window) + " exceeds image " +
                        std::to_string(image_height) + "x" + std::to_string(image_width));
    if ((image_height - window) % stride != 0 || (image_width - window) % stride != 0)
      throw ConfigError("stride incompatibility: window " + std::to_string(window) +
                        ", stride " + std::to_string(stride) + " does not tile a " +
                        std::to_string(image_height) + "x" + std::to_string(image_width) +
                        " image");
  }
};

/// Real-valued image with pixel values in [0, 1]; H x W x C storage with
/// channels interleaved last.
template <class Scalar>
struct Image {
  Index height = 0;
  Index width = 0;
  Index channels = 1;
  Vector<Scalar> pixels;  // index (row * width + col) * channels + ch

  Scalar operator()(Index row, Index col, Index ch = 0) const {
    return pixels[(row * width + col) * channels + ch];
  }
};

/// View of one byte image (same H x W x C interleaved layout).
struct ByteImageView {
  Index height = 0;
  Index width = 0;
  Index channels = 1;
  std::span<const std::uint8_t> pixels;
};

/// Byte image to real image: every pixel divided by 255 exactly.
template <class Scalar>
Image<Scalar> normalize_image(const ByteImageView& raw) {
  Image<Scalar> out{raw.height, raw.width, raw.channels, {}};
  out.pixels.resize(static_cast<Index>(raw.pixels.size()));
  for (Index i = 0; i < out.pixels.size(); ++i)
    out.pixels[i] = static_cast<Scalar>(raw.pixels[static_cast<std::size_t>(i)]) / Scalar(255);
  return out;
}

/// Flattened sliding-window patches of one image plus their window origins.
template <class Scalar>
struct PatchSet {
  RowMatrix<Scalar> patches;       // P x (window^2 * channels)
  std::vector<GridCoord> origins;  // top-left pixel of each window, traversal order

  Index count() const { return patches.rows(); }
};

/// Row-major traversal of window origins (top-left to bottom-right); each
/// patch flattened row-major with channels interleaved last, matching Image
/// storage.
template <class Scalar>
PatchSet<Scalar> extract_patches(const Image<Scalar>& image, const PatchConfig& cfg) {
  cfg.validate_for(image.height, image.width);
  const Index steps_r = cfg.steps(image.height);
  const Index steps_c = cfg.steps(image.width);
  PatchSet<Scalar> out;
  out.patches.resize(steps_r * steps_c, cfg.patch_dim());
  out.origins.reserve(static_cast<std::size_t>(steps_r * steps_c));
  Index p = 0;
  for (Index sr = 0; sr < steps_r; ++sr) {
    for (Index sc = 0; sc < steps_c; ++sc, ++p) {
      const Index r0 = sr * cfg.stride;
      const Index c0 = sc * cfg.stride;
      out.origins.push_back({r0, c0});
      Index d = 0;
      for (Index r = 0; r < cfg.window; ++r) {
        const Index src = ((r0 + r) * image.width + c0) * cfg.channels;
        for (Index c = 0; c < cfg.window * cfg.channels; ++c, ++d)
          out.patches(p, d) = image.pixels[src + c];
      }
    }
  }
  return out;
}

}  // namespace mlsom
