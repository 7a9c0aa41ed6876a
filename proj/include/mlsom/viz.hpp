#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "mlsom/coding.hpp"
#include "mlsom/som.hpp"

namespace mlsom {

/// 8-bit raster: grayscale (channels 1) or RGB (channels 3), row-major with
/// channels interleaved.
struct RenderedImage {
  Index height = 0;
  Index width = 0;
  Index channels = 1;
  std::vector<std::uint8_t> pixels;

  std::uint8_t& at(Index r, Index c, Index ch = 0) {
    return pixels[static_cast<std::size_t>((r * width + c) * channels + ch)];
  }
  std::uint8_t at(Index r, Index c, Index ch = 0) const {
    return pixels[static_cast<std::size_t>((r * width + c) * channels + ch)];
  }
};

/// Writes PGM (P5) for 1-channel images and PPM (P6) for 3-channel, max value
/// 255.
void write_pnm(const RenderedImage& image, const std::string& path);

/// Feature-map dump: PGM with 0 -> black and 1 -> white, lattice dimensions.
void write_feature_map_pgm(const FeatureMap& map, const std::string& path);

/// Side-by-side panel: the input image (integer-upscaled to roughly the
/// lattice panel height) on the left, the lattice on the right with active
/// cells drawn yellow on dark gray, each cell cell_px wide. Always RGB.
RenderedImage render_feature_overlay(const ByteImageView& input, const FeatureMap& map,
                                     Index cell_px = 8);
void render_feature_overlay(const ByteImageView& input, const FeatureMap& map,
                            const std::string& path, Index cell_px = 8);

/// One tile per neuron: its weight vector reshaped to window x window
/// (x channels), min-max normalized per tile. Tiles whose values are all
/// equal render mid-gray 128. Tiles are separated by 1-pixel black rules, so
/// the sheet is height*window + (height-1) pixels tall and width*window +
/// (width-1) wide.
template <class Scalar>
RenderedImage render_grid(const NeuronGrid<Scalar>& grid, const PatchConfig& pcfg) {
  if (pcfg.patch_dim() != grid.dim())
    throw ConfigError("grid dim " + std::to_string(grid.dim()) +
                      " is not window^2 * channels = " + std::to_string(pcfg.patch_dim()));
  const Index w = pcfg.window;
  const Index ch = pcfg.channels;
  RenderedImage img{grid.height * w + (grid.height - 1), grid.width * w + (grid.width - 1), ch,
                    {}};
  img.pixels.assign(static_cast<std::size_t>(img.height * img.width * img.channels), 0);
  for (Index gr = 0; gr < grid.height; ++gr) {
    for (Index gc = 0; gc < grid.width; ++gc) {
      const auto row = grid.weights.row(flat_of_coord({gr, gc}, grid.width));
      const double lo = static_cast<double>(row.minCoeff());
      const double hi = static_cast<double>(row.maxCoeff());
      const double span = hi - lo;
      const Index r0 = gr * (w + 1);
      const Index c0 = gc * (w + 1);
      for (Index r = 0; r < w; ++r)
        for (Index c = 0; c < w; ++c)
          for (Index k = 0; k < ch; ++k) {
            const double v = static_cast<double>(row[(r * w + c) * ch + k]);
            const double scaled = span > 0.0 ? (v - lo) / span * 255.0 : 128.0;
            img.at(r0 + r, c0 + c, k) =
                static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0) + 0.5);
          }
    }
  }
  return img;
}

template <class Scalar>
void render_grid(const NeuronGrid<Scalar>& grid, const PatchConfig& pcfg,
                 const std::string& path) {
  write_pnm(render_grid(grid, pcfg), path);
}

}  // namespace mlsom
