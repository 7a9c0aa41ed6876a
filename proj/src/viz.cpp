#include "mlsom/viz.hpp"

#include <fstream>

namespace mlsom {

void write_pnm(const RenderedImage& image, const std::string& path) {
  if (image.channels != 1 && image.channels != 3)
    throw ConfigError("pnm output supports 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << (image.channels == 1 ? "P5" : "P6") << "\n"
      << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  out.flush();
  if (!out) throw DataError("write failed for " + path);
}

void write_feature_map_pgm(const FeatureMap& map, const std::string& path) {
  RenderedImage img{map.bits.rows(), map.bits.cols(), 1, {}};
  img.pixels.resize(static_cast<std::size_t>(map.bits.size()));
  for (Index r = 0; r < map.bits.rows(); ++r)
    for (Index c = 0; c < map.bits.cols(); ++c) img.at(r, c) = map.bits(r, c) ? 255 : 0;
  write_pnm(img, path);
}

namespace {

constexpr std::uint8_t kCellOn[3] = {255, 255, 0};  // yellow
constexpr std::uint8_t kCellOff[3] = {48, 48, 48};
constexpr std::uint8_t kCellBorder[3] = {16, 16, 16};

}  // namespace

RenderedImage render_feature_overlay(const ByteImageView& input, const FeatureMap& map,
                                     Index cell_px) {
  if (cell_px < 2) throw ConfigError("cell_px must be at least 2");
  const Index lattice_h = map.bits.rows() * cell_px;
  const Index lattice_w = map.bits.cols() * cell_px;
  const Index scale = std::max<Index>(1, lattice_h / input.height);
  const Index in_h = input.height * scale;
  const Index in_w = input.width * scale;
  const Index gap = 2;
  RenderedImage img{std::max(in_h, lattice_h), in_w + gap + lattice_w, 3, {}};
  img.pixels.assign(static_cast<std::size_t>(img.height * img.width * 3), 0);

  // left: upscaled input (grayscale replicated across RGB)
  for (Index r = 0; r < in_h; ++r)
    for (Index c = 0; c < in_w; ++c) {
      const Index sr = r / scale;
      const Index sc = c / scale;
      for (Index k = 0; k < 3; ++k) {
        const Index src_ch = input.channels == 3 ? k : 0;
        img.at(r, c, k) =
            input.pixels[static_cast<std::size_t>((sr * input.width + sc) * input.channels +
                                                  src_ch)];
      }
    }

  // right: lattice cells, active cells yellow, 1px border inside each cell
  for (Index gr = 0; gr < map.bits.rows(); ++gr)
    for (Index gc = 0; gc < map.bits.cols(); ++gc) {
      const bool on = map.bits(gr, gc) != 0;
      for (Index r = 0; r < cell_px; ++r)
        for (Index c = 0; c < cell_px; ++c) {
          const bool border = r == 0 || c == 0 || r == cell_px - 1 || c == cell_px - 1;
          const std::uint8_t* color = border ? kCellBorder : (on ? kCellOn : kCellOff);
          for (Index k = 0; k < 3; ++k)
            img.at(gr * cell_px + r, in_w + gap + gc * cell_px + c, k) = color[k];
        }
    }
  return img;
}

void render_feature_overlay(const ByteImageView& input, const FeatureMap& map,
                            const std::string& path, Index cell_px) {
  write_pnm(render_feature_overlay(input, map, cell_px), path);
}

}  // namespace mlsom
