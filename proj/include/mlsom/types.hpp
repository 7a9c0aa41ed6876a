#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <type_traits>
#include <string>

namespace mlsom {

using Index = Eigen::Index;

/// Dense row-major matrix. Rows are the unit of iteration throughout the
/// library (neurons, patches, classifier classes), so row-major keeps each
/// one contiguous.
template <class Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Read-only vector argument. The type_identity keeps it out of template
/// deduction, so Scalar is pinned by the grid/classifier operand and plain
/// vectors or contiguous row views convert implicitly.
template <class Scalar>
using PatchRef = std::type_identity_t<Eigen::Ref<const Vector<Scalar>>>;

/// Position on the neuron lattice (row, col).
struct GridCoord {
  Index row = 0;
  Index col = 0;

  friend bool operator==(const GridCoord&, const GridCoord&) = default;
};

/// Flattened index j maps to lattice cell (j / width, j % width).
inline GridCoord coord_of_flat(Index flat, Index grid_width) {
  return {flat / grid_width, flat % grid_width};
}

inline Index flat_of_coord(const GridCoord& c, Index grid_width) {
  return c.row * grid_width + c.col;
}

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or out-of-range request.
struct ConfigError : Error {
  using Error::Error;
};

/// Mismatched operand dimensions.
struct DimensionError : Error {
  using Error::Error;
};

/// Unreadable, malformed, or empty input data.
struct DataError : Error {
  using Error::Error;
};

/// Numeric failure during optimization (non-finite loss or parameters).
struct TrainingError : Error {
  using Error::Error;
};

}  // namespace mlsom
