#pragma once

#include "mlsom/som.hpp"

namespace mlsom {

/// Binary lattice-shaped summary of one image: 1 wherever some patch placed a
/// top-k winner. Stored as a dense byte matrix; the classifier consumes the
/// row-major flattening as a real vector.
struct FeatureMap {
  RowMatrix<std::uint8_t> bits;  // grid_height x grid_width, entries in {0, 1}

  Index popcount() const {
    Index n = 0;
    for (Index r = 0; r < bits.rows(); ++r)
      for (Index c = 0; c < bits.cols(); ++c) n += bits(r, c);
    return n;
  }

  template <class Scalar>
  Vector<Scalar> flatten() const {
    Vector<Scalar> v(bits.size());
    Index i = 0;
    for (Index r = 0; r < bits.rows(); ++r)
      for (Index c = 0; c < bits.cols(); ++c, ++i) v[i] = static_cast<Scalar>(bits(r, c));
    return v;
  }
};

/// Maps every nonzero count to 1. Idempotent: binarize(binarize(x)) ==
/// binarize(x).
inline RowMatrix<std::uint8_t> binarize(const RowMatrix<std::uint32_t>& counts) {
  return counts.unaryExpr([](std::uint32_t v) { return std::uint8_t(v != 0 ? 1 : 0); });
}

/// Binary grid with exactly k ones, at the lattice positions of the k nearest
/// neurons (same distance and tie-break rules as find_winners). The grid is
/// read-only here; k may differ from the n used during training.
template <class Scalar>
RowMatrix<std::uint8_t> encode_patch(const PatchRef<Scalar>& patch,
                                     const NeuronGrid<Scalar>& grid, int k, int threads = 1) {
  const Eigen::VectorXd dist = compute_distances<Scalar>(patch, grid, threads);
  const WinnerSet winners = find_winners(dist, k, grid.width);
  RowMatrix<std::uint8_t> bits = RowMatrix<std::uint8_t>::Zero(grid.height, grid.width);
  for (const GridCoord& w : winners.coords) bits(w.row, w.col) = 1;
  return bits;
}

/// Element-wise sum of the per-patch binary grids over all patches of the
/// image, binarized into a single feature map. Popcount lands in [k, k * P]
/// for P patches.
template <class Scalar>
FeatureMap encode_image(const Image<Scalar>& image, const NeuronGrid<Scalar>& grid,
                        const PatchConfig& pcfg, int k, int threads = 1) {
  const PatchSet<Scalar> ps = extract_patches(image, pcfg);
  RowMatrix<std::uint32_t> counts = RowMatrix<std::uint32_t>::Zero(grid.height, grid.width);
  for (Index p = 0; p < ps.count(); ++p)
    counts += encode_patch<Scalar>(ps.patches.row(p).transpose(), grid, k, threads)
                  .template cast<std::uint32_t>();
  return {binarize(counts)};
}

}  // namespace mlsom
