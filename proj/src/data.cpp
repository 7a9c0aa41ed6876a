#include "mlsom/data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

namespace mlsom {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

std::uint32_t read_u32_be(const std::vector<std::uint8_t>& b, std::size_t off) {
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

}  // namespace

LabeledImageSet load_mnist(const std::string& images_path, const std::string& labels_path) {
  const auto img = read_file(images_path);
  if (img.size() < 16) throw DataError("image header truncated in " + images_path);
  const std::uint32_t img_magic = read_u32_be(img, 0);
  if (img_magic != 0x00000803u)
    throw DataError("bad magic in image file " + images_path + ": expected 0x00000803");
  const std::uint32_t n_images = read_u32_be(img, 4);
  const std::uint32_t rows = read_u32_be(img, 8);
  const std::uint32_t cols = read_u32_be(img, 12);
  if (rows == 0 || cols == 0) throw DataError("zero image dimensions in " + images_path);
  const std::size_t expected = 16 + std::size_t(n_images) * rows * cols;
  if (img.size() < expected)
    throw DataError("truncated image data in " + images_path + ": header promises " +
                    std::to_string(n_images) + " images of " + std::to_string(rows) + "x" +
                    std::to_string(cols));
  if (img.size() > expected)
    throw DataError("trailing bytes after image data in " + images_path);

  const auto lab = read_file(labels_path);
  if (lab.size() < 8) throw DataError("label header truncated in " + labels_path);
  const std::uint32_t lab_magic = read_u32_be(lab, 0);
  if (lab_magic != 0x00000801u)
    throw DataError("bad magic in label file " + labels_path + ": expected 0x00000801");
  const std::uint32_t n_labels = read_u32_be(lab, 4);
  if (lab.size() < 8 + std::size_t(n_labels))
    throw DataError("truncated label data in " + labels_path);
  if (lab.size() > 8 + std::size_t(n_labels))
    throw DataError("trailing bytes after label data in " + labels_path);
  if (n_labels != n_images)
    throw DataError("count mismatch: " + std::to_string(n_images) + " images in " + images_path +
                    " vs " + std::to_string(n_labels) + " labels in " + labels_path);

  LabeledImageSet set;
  set.height = rows;
  set.width = cols;
  set.channels = 1;
  set.num_classes = 10;
  set.pixels.assign(img.begin() + 16, img.end());
  set.labels.resize(n_labels);
  for (std::uint32_t i = 0; i < n_labels; ++i) {
    const std::uint8_t v = lab[8 + i];
    if (v >= 10)
      throw DataError("label value " + std::to_string(int(v)) + " out of range at record " +
                      std::to_string(i) + " in " + labels_path);
    set.labels[i] = v;
  }
  return set;
}

LabeledImageSet load_cifar10(const std::vector<std::string>& batch_paths) {
  constexpr Index kSide = 32;
  constexpr std::size_t kPlane = 1024;   // 32 * 32
  constexpr std::size_t kRecord = 3073;  // label + 3 planes

  LabeledImageSet set;
  set.height = kSide;
  set.width = kSide;
  set.channels = 3;
  set.num_classes = 10;

  for (const auto& path : batch_paths) {
    const auto bytes = read_file(path);
    if (bytes.size() % kRecord != 0)
      throw DataError("bad batch size: " + path + " holds " + std::to_string(bytes.size()) +
                      " bytes, not a multiple of 3073");
    const std::size_t records = bytes.size() / kRecord;
    for (std::size_t r = 0; r < records; ++r) {
      const std::uint8_t* rec = bytes.data() + r * kRecord;
      if (rec[0] >= 10)
        throw DataError("label value " + std::to_string(int(rec[0])) + " out of range at record " +
                        std::to_string(r) + " in " + path);
      set.labels.push_back(rec[0]);
      const std::size_t base = set.pixels.size();
      set.pixels.resize(base + 3 * kPlane);
      // planes R,G,B -> interleaved H x W x C
      for (std::size_t p = 0; p < kPlane; ++p)
        for (std::size_t ch = 0; ch < 3; ++ch)
          set.pixels[base + p * 3 + ch] = rec[1 + ch * kPlane + p];
    }
  }
  return set;
}

LabeledImageSet subset(const LabeledImageSet& set, Index count, std::uint64_t seed) {
  if (count < 0 || count > set.size())
    throw ConfigError("subset count " + std::to_string(count) + " exceeds set size " +
                      std::to_string(set.size()));
  if (set.num_classes < 1) throw DataError("subset of a set with no classes");

  std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(set.num_classes));
  for (Index i = 0; i < set.size(); ++i)
    by_class[static_cast<std::size_t>(set.labels[static_cast<std::size_t>(i)])].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<char> chosen(static_cast<std::size_t>(set.size()), 0);
  Index taken = 0;

  // selection sampling per class: keeps index order, exact quota
  for (int c = 0; c < set.num_classes; ++c) {
    Index quota = count / set.num_classes + (c < count % set.num_classes ? 1 : 0);
    const auto& pool = by_class[static_cast<std::size_t>(c)];
    quota = std::min<Index>(quota, static_cast<Index>(pool.size()));
    Index remaining = static_cast<Index>(pool.size());
    Index needed = quota;
    for (Index i = 0; i < static_cast<Index>(pool.size()) && needed > 0; ++i, --remaining) {
      std::uniform_int_distribution<Index> pick(0, remaining - 1);
      if (pick(rng) < needed) {
        chosen[static_cast<std::size_t>(pool[static_cast<std::size_t>(i)])] = 1;
        --needed;
        ++taken;
      }
    }
  }
  // backfill when some classes were short
  for (Index i = 0; i < set.size() && taken < count; ++i) {
    if (!chosen[static_cast<std::size_t>(i)]) {
      chosen[static_cast<std::size_t>(i)] = 1;
      ++taken;
    }
  }

  LabeledImageSet out;
  out.height = set.height;
  out.width = set.width;
  out.channels = set.channels;
  out.num_classes = set.num_classes;
  out.labels.reserve(static_cast<std::size_t>(count));
  out.pixels.reserve(static_cast<std::size_t>(count * set.image_bytes()));
  for (Index i = 0; i < set.size(); ++i) {
    if (!chosen[static_cast<std::size_t>(i)]) continue;
    out.labels.push_back(set.labels[static_cast<std::size_t>(i)]);
    const auto view = set.image(i);
    out.pixels.insert(out.pixels.end(), view.pixels.begin(), view.pixels.end());
  }
  return out;
}

}  // namespace mlsom
