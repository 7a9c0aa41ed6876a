// Hermetic test fixtures: a parametric 10-class glyph dataset and writers for
// the on-disk dataset formats.
#pragma once

#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "mlsom/data.hpp"

namespace synth {

using mlsom::Index;

// 10 stroke-like glyph classes on a square canvas, with positional jitter,
// variable thickness, and pixel noise. Easy for a person, nontrivial for a
// pixel classifier.
inline mlsom::LabeledImageSet make_glyphs(Index per_class, std::uint64_t seed, Index side = 28) {
  mlsom::LabeledImageSet set;
  set.height = side;
  set.width = side;
  set.channels = 1;
  set.num_classes = 10;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> jitter(-3, 3);
  std::uniform_int_distribution<int> thick(1, 2);
  std::uniform_int_distribution<int> fg(170, 255);
  std::normal_distribution<double> noise(0.0, 10.0);

  const auto clamp_px = [&](double v) {
    return static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
  };

  for (Index i = 0; i < per_class * 10; ++i) {
    const int label = static_cast<int>(i % 10);
    std::vector<double> img(static_cast<std::size_t>(side * side), 8.0);
    const int jr = jitter(rng);
    const int jc = jitter(rng);
    const int t = thick(rng);
    const double ink = fg(rng);
    const Index mid = side / 2;
    const auto put = [&](Index r, Index c) {
      for (Index dr = -t; dr <= t; ++dr)
        for (Index dc = -t; dc <= t; ++dc) {
          const Index rr = r + dr + jr;
          const Index cc = c + dc + jc;
          if (rr >= 0 && rr < side && cc >= 0 && cc < side)
            img[static_cast<std::size_t>(rr * side + cc)] = ink;
        }
    };
    const Index lo = side / 5;
    const Index hi = side - side / 5;
    switch (label) {
      case 0:  // horizontal bar
        for (Index c = lo; c < hi; ++c) put(mid, c);
        break;
      case 1:  // vertical bar
        for (Index r = lo; r < hi; ++r) put(r, mid);
        break;
      case 2:  // main diagonal
        for (Index d = lo; d < hi; ++d) put(d, d);
        break;
      case 3:  // anti-diagonal
        for (Index d = lo; d < hi; ++d) put(d, side - 1 - d);
        break;
      case 4:  // cross
        for (Index c = lo; c < hi; ++c) put(mid, c);
        for (Index r = lo; r < hi; ++r) put(r, mid);
        break;
      case 5:  // box outline
        for (Index c = lo; c < hi; ++c) {
          put(lo, c);
          put(hi - 1, c);
        }
        for (Index r = lo; r < hi; ++r) {
          put(r, lo);
          put(r, hi - 1);
        }
        break;
      case 6:  // filled disk
        for (Index r = 0; r < side; ++r)
          for (Index c = 0; c < side; ++c) {
            const double dr = static_cast<double>(r - mid);
            const double dc = static_cast<double>(c - mid);
            if (dr * dr + dc * dc <= double(side) * side / 36.0) put(r, c);
          }
        break;
      case 7:  // X
        for (Index d = lo; d < hi; ++d) {
          put(d, d);
          put(d, side - 1 - d);
        }
        break;
      case 8:  // T
        for (Index c = lo; c < hi; ++c) put(lo, c);
        for (Index r = lo; r < hi; ++r) put(r, mid);
        break;
      default:  // L
        for (Index r = lo; r < hi; ++r) put(r, lo);
        for (Index c = lo; c < hi; ++c) put(hi - 1, c);
        break;
    }
    for (double& px : img) px += noise(rng);
    for (const double px : img) set.pixels.push_back(clamp_px(px));
    set.labels.push_back(label);
  }
  return set;
}

inline void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline std::vector<std::uint8_t> idx_image_bytes(const mlsom::LabeledImageSet& set) {
  std::vector<std::uint8_t> out;
  put_u32_be(out, 0x00000803u);
  put_u32_be(out, static_cast<std::uint32_t>(set.size()));
  put_u32_be(out, static_cast<std::uint32_t>(set.height));
  put_u32_be(out, static_cast<std::uint32_t>(set.width));
  out.insert(out.end(), set.pixels.begin(), set.pixels.end());
  return out;
}

inline std::vector<std::uint8_t> idx_label_bytes(const mlsom::LabeledImageSet& set) {
  std::vector<std::uint8_t> out;
  put_u32_be(out, 0x00000801u);
  put_u32_be(out, static_cast<std::uint32_t>(set.size()));
  for (int y : set.labels) out.push_back(static_cast<std::uint8_t>(y));
  return out;
}

inline void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

// Writes the set as an IDX pair under dir using the standard MNIST filenames
// for the given split ("train" or "t10k").
inline void write_idx_pair(const std::string& dir, const std::string& split,
                           const mlsom::LabeledImageSet& set) {
  write_bytes(dir + "/" + split + "-images-idx3-ubyte", idx_image_bytes(set));
  write_bytes(dir + "/" + split + "-labels-idx1-ubyte", idx_label_bytes(set));
}

// CIFAR-10 binary batch bytes: per record a label byte then 1024 bytes per
// R, G, B plane. `set` must be 32 x 32 x 3 interleaved.
inline std::vector<std::uint8_t> cifar_batch_bytes(const mlsom::LabeledImageSet& set) {
  std::vector<std::uint8_t> out;
  for (Index i = 0; i < set.size(); ++i) {
    out.push_back(static_cast<std::uint8_t>(set.labels[static_cast<std::size_t>(i)]));
    const auto img = set.image(i);
    for (Index ch = 0; ch < 3; ++ch)
      for (Index p = 0; p < 1024; ++p)
        out.push_back(img.pixels[static_cast<std::size_t>(p * 3 + ch)]);
  }
  return out;
}

}  // namespace synth
