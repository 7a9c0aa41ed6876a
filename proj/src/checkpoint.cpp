#include "mlsom/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace mlsom {

namespace {

static_assert(std::numeric_limits<float>::is_iec559, "checkpoints require IEEE-754 floats");

constexpr std::array<char, 7> kGridMagic = {'M', 'L', 'S', 'O', 'M', '1', '\0'};
constexpr std::array<char, 7> kClfMagic = {'M', 'L', 'C', 'L', 'F', '1', '\0'};

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot open " + path + " for writing");
  }
  void magic(const std::array<char, 7>& m) { out_.write(m.data(), m.size()); }
  void u32(std::uint32_t v) {
    const std::array<char, 4> b = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
                                   char((v >> 24) & 0xff)};
    out_.write(b.data(), b.size());
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void finish() {
    out_.flush();
    if (!out_) throw DataError("write failed for " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  Reader(const std::string& path, const char* what) : path_(path), what_(what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    bytes_.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  void expect_magic(const std::array<char, 7>& m) {
    if (bytes_.size() < m.size() || std::memcmp(bytes_.data(), m.data(), m.size()) != 0)
      throw DataError(std::string("bad magic in ") + what_ + " checkpoint " + path_);
    off_ = m.size();
  }
  std::uint32_t u32(const char* field) {
    if (off_ + 4 > bytes_.size()) fail(field);
    const std::uint32_t v = std::uint32_t(std::uint8_t(bytes_[off_])) |
                            (std::uint32_t(std::uint8_t(bytes_[off_ + 1])) << 8) |
                            (std::uint32_t(std::uint8_t(bytes_[off_ + 2])) << 16) |
                            (std::uint32_t(std::uint8_t(bytes_[off_ + 3])) << 24);
    off_ += 4;
    return v;
  }
  float f32(const char* field) { return std::bit_cast<float>(u32(field)); }
  void expect_end() {
    if (off_ != bytes_.size())
      throw DataError(std::string("trailing bytes in ") + what_ + " checkpoint " + path_);
  }
  void check_payload(std::size_t floats, const char* field) {
    if (off_ + 4 * floats > bytes_.size()) fail(field);
  }

 private:
  [[noreturn]] void fail(const char* field) {
    throw DataError(std::string("truncated ") + what_ + " checkpoint " + path_ + ": " + field);
  }
  std::string path_;
  const char* what_;
  std::vector<char> bytes_;
  std::size_t off_ = 0;
};

}  // namespace

void save_grid(const NeuronGrid<float>& grid, const std::string& path) {
  Writer w(path);
  w.magic(kGridMagic);
  w.u32(static_cast<std::uint32_t>(grid.height));
  w.u32(static_cast<std::uint32_t>(grid.width));
  w.u32(static_cast<std::uint32_t>(grid.dim()));
  for (Index j = 0; j < grid.weights.rows(); ++j)
    for (Index d = 0; d < grid.weights.cols(); ++d) w.f32(grid.weights(j, d));
  w.finish();
}

NeuronGrid<float> load_grid(const std::string& path) {
  Reader r(path, "grid");
  r.expect_magic(kGridMagic);
  const std::uint32_t height = r.u32("height");
  const std::uint32_t width = r.u32("width");
  const std::uint32_t dim = r.u32("dim");
  if (height == 0 || width == 0 || dim == 0)
    throw DataError("zero dimension field in grid checkpoint " + path);
  r.check_payload(std::size_t(height) * width * dim, "weights");
  NeuronGrid<float> grid{Index(height), Index(width), {}};
  grid.weights.resize(Index(height) * Index(width), Index(dim));
  for (Index j = 0; j < grid.weights.rows(); ++j)
    for (Index d = 0; d < grid.weights.cols(); ++d) grid.weights(j, d) = r.f32("weights");
  r.expect_end();
  return grid;
}

void save_classifier(const LinearClassifier<float>& clf, const std::string& path) {
  Writer w(path);
  w.magic(kClfMagic);
  w.u32(static_cast<std::uint32_t>(clf.num_classes()));
  w.u32(static_cast<std::uint32_t>(clf.feature_dim()));
  for (Index c = 0; c < clf.weights.rows(); ++c)
    for (Index d = 0; d < clf.weights.cols(); ++d) w.f32(clf.weights(c, d));
  for (Index c = 0; c < clf.bias.size(); ++c) w.f32(clf.bias(c));
  w.finish();
}

LinearClassifier<float> load_classifier(const std::string& path) {
  Reader r(path, "classifier");
  r.expect_magic(kClfMagic);
  const std::uint32_t classes = r.u32("num_classes");
  const std::uint32_t dim = r.u32("feature_dim");
  if (classes == 0 || dim == 0)
    throw DataError("zero dimension field in classifier checkpoint " + path);
  r.check_payload(std::size_t(classes) * dim + classes, "parameters");
  LinearClassifier<float> clf{RowMatrix<float>(Index(classes), Index(dim)),
                              Vector<float>(Index(classes))};
  for (Index c = 0; c < clf.weights.rows(); ++c)
    for (Index d = 0; d < clf.weights.cols(); ++d) clf.weights(c, d) = r.f32("weights");
  for (Index c = 0; c < clf.bias.size(); ++c) clf.bias(c) = r.f32("bias");
  r.expect_end();
  return clf;
}

}  // namespace mlsom
