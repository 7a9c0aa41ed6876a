#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include "mlsom/data.hpp"
#include "mlsom/patching.hpp"
#include "mlsom/types.hpp"

namespace mlsom {

/// Weight update variants. `standard` pulls each neuron toward the input
/// patch under a Gaussian neighborhood falloff. `raw_exponential` is the
/// growth-exponent, winner-relative variant kept for comparison runs; it does
/// not converge and no preset uses it.
enum class UpdateRule { standard, raw_exponential };

struct SomConfig {
  Index grid_height = 44;
  Index grid_width = 44;
  Index dim = 196;  // weight-vector length = window^2 * channels
  int n_winners = 5;
  double sigma = 2.0;
  double base_lr = 0.3;
  int epochs = 20;
  std::uint64_t seed = 0;
  bool shuffle = false;  // seeded reshuffle of image order each epoch
  UpdateRule update_rule = UpdateRule::standard;

  void validate() const {
    if (grid_height < 1 || grid_width < 1) throw ConfigError("grid dimensions must be positive");
    if (dim < 1) throw ConfigError("weight dimensionality must be positive");
    if (n_winners < 1 || Index(n_winners) > grid_height * grid_width)
      throw ConfigError("n_winners " + std::to_string(n_winners) + " must be in [1, " +
                        std::to_string(grid_height * grid_width) + "]");
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (!(base_lr > 0.0) || base_lr > 1.0) throw ConfigError("base_lr must be in (0, 1]");
    if (epochs < 0) throw ConfigError("epochs must be non-negative");
  }
};

/// 2D lattice of weight vectors. Row j of `weights` belongs to lattice cell
/// (j / width, j % width).
template <class Scalar>
struct NeuronGrid {
  Index height = 0;
  Index width = 0;
  RowMatrix<Scalar> weights;  // (height * width) x dim

  Index size() const { return height * width; }
  Index dim() const { return weights.cols(); }
  GridCoord coord(Index flat) const { return coord_of_flat(flat, width); }

  template <class T>
  NeuronGrid<T> cast() const {
    return {height, width, weights.template cast<T>()};
  }
};

/// Fresh grid with i.i.d. standard-normal weights; identical bits for
/// identical (config, seed).
template <class Scalar>
NeuronGrid<Scalar> init_grid(const SomConfig& cfg) {
  cfg.validate();
  NeuronGrid<Scalar> grid{cfg.grid_height, cfg.grid_width, {}};
  grid.weights.resize(cfg.grid_height * cfg.grid_width, cfg.dim);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index j = 0; j < grid.weights.rows(); ++j)
    for (Index d = 0; d < grid.weights.cols(); ++d)
      grid.weights(j, d) = static_cast<Scalar>(normal(rng));
  return grid;
}

namespace detail {

template <class Scalar>
void distance_rows(const RowMatrix<Scalar>& weights, const Eigen::VectorXd& patch_d, Index begin,
                   Index end, Eigen::VectorXd& out) {
  for (Index j = begin; j < end; ++j)
    out[j] = std::sqrt(
        (weights.row(j).template cast<double>() - patch_d.transpose()).squaredNorm());
}

/// Runs fn over contiguous chunks of [0, n). Chunk boundaries depend only on
/// (n, threads), so results are reproducible for any thread count as long as
/// fn writes disjoint state.
inline void parallel_chunks(Index n, int threads, const std::function<void(Index, Index)>& fn) {
  const Index workers = std::min<Index>(std::max(threads, 1), std::max<Index>(n, 1));
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  const Index chunk = (n + workers - 1) / workers;
  for (Index w = 1; w < workers; ++w) {
    const Index b = std::min(n, w * chunk);
    const Index e = std::min(n, (w + 1) * chunk);
    if (b < e) pool.emplace_back(fn, b, e);
  }
  fn(0, std::min(n, chunk));
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Euclidean distance from `patch` to every neuron, one entry per flattened
/// lattice index, accumulated in 64-bit regardless of Scalar. The optional
/// thread count splits the row range; the result does not depend on it.
template <class Scalar>
Eigen::VectorXd compute_distances(const PatchRef<Scalar>& patch,
                                  const NeuronGrid<Scalar>& grid, int threads = 1) {
  if (patch.size() != grid.dim())
    throw DimensionError("patch length " + std::to_string(patch.size()) +
                         " != grid weight dim " + std::to_string(grid.dim()));
  const Eigen::VectorXd patch_d = patch.template cast<double>();
  Eigen::VectorXd out(grid.size());
  if (threads > 1 && grid.size() * grid.dim() >= (Index{1} << 18)) {
    detail::parallel_chunks(grid.size(), threads, [&](Index b, Index e) {
      detail::distance_rows(grid.weights, patch_d, b, e, out);
    });
  } else {
    detail::distance_rows(grid.weights, patch_d, 0, grid.size(), out);
  }
  return out;
}

/// Lattice coordinates of the closest neurons, ascending distance.
struct WinnerSet {
  std::vector<GridCoord> coords;  // ties broken by ascending flattened index
  Eigen::VectorXd distances;      // same order, non-decreasing

  Index count() const { return static_cast<Index>(coords.size()); }
};

/// The `count` smallest-distance neurons in ascending (distance, flattened
/// index) order.
inline WinnerSet find_winners(const Eigen::VectorXd& distances, int count, Index grid_width) {
  const Index n = distances.size();
  if (count < 1 || Index(count) > n)
    throw ConfigError("winner count " + std::to_string(count) + " must be in [1, " +
                      std::to_string(n) + "]");
  if (grid_width < 1) throw ConfigError("grid width must be positive");
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::partial_sort(idx.begin(), idx.begin() + count, idx.end(), [&](Index a, Index b) {
    return distances[a] < distances[b] || (distances[a] == distances[b] && a < b);
  });
  WinnerSet ws;
  ws.coords.reserve(static_cast<std::size_t>(count));
  ws.distances.resize(count);
  for (int i = 0; i < count; ++i) {
    ws.coords.push_back(coord_of_flat(idx[static_cast<std::size_t>(i)], grid_width));
    ws.distances[i] = distances[idx[static_cast<std::size_t>(i)]];
  }
  return ws;
}

inline double lattice_sq_distance(const GridCoord& a, const GridCoord& b) {
  const double dr = static_cast<double>(a.row - b.row);
  const double dc = static_cast<double>(a.col - b.col);
  return dr * dr + dc * dc;
}

/// Gaussian falloff exp(-d^2 / (2 sigma^2)) in lattice distance d: exactly 1
/// at the winner itself, strictly decreasing as the neuron moves away.
inline double neighborhood_decay(const GridCoord& winner, const GridCoord& neuron, double sigma) {
  return std::exp(-lattice_sq_distance(winner, neuron) / (2.0 * sigma * sigma));
}

/// Precomputed neighborhood_decay over all lattice offsets, for the training
/// inner loop. Entries are bit-identical to calling neighborhood_decay.
class DecayTable {
 public:
  DecayTable(Index height, Index width, double sigma)
      : row_origin_(height - 1),
        col_origin_(width - 1),
        col_span_(2 * width - 1),
        values_(static_cast<std::size_t>((2 * height - 1) * (2 * width - 1))) {
    for (Index dr = -row_origin_; dr <= row_origin_; ++dr)
      for (Index dc = -col_origin_; dc <= col_origin_; ++dc)
        values_[static_cast<std::size_t>(slot(dr, dc))] =
            neighborhood_decay({dr, dc}, {0, 0}, sigma);
  }

  double operator()(const GridCoord& a, const GridCoord& b) const {
    return values_[static_cast<std::size_t>(slot(a.row - b.row, a.col - b.col))];
  }

 private:
  Index slot(Index dr, Index dc) const {
    return (dr + row_origin_) * col_span_ + (dc + col_origin_);
  }

  Index row_origin_;
  Index col_origin_;
  Index col_span_;
  std::vector<double> values_;
};

/// Learning rate for a zero-based epoch: base_lr * (1 - epoch / epochs), so
/// the final training epoch keeps a strictly positive rate.
inline double lr_at_epoch(double base_lr, int epoch, int epochs) {
  if (epochs < 1) throw ConfigError("lr schedule needs at least one epoch");
  if (epoch < 0 || epoch > epochs)
    throw ConfigError("lr schedule: epoch " + std::to_string(epoch) + " outside [0, " +
                      std::to_string(epochs) + "]");
  return base_lr * (1.0 - static_cast<double>(epoch) / static_cast<double>(epochs));
}

namespace detail {

/// Convex pull of every row toward `patch`: row_j <- (1 - c_j) row_j + c_j p
/// with c_j = coeff(j) computed in double. Coefficients that underflow
/// Scalar's normal range cannot move a normal-range weight, so those rows are
/// skipped (and c == 0 is an exact no-op).
template <class Scalar, class CoeffFn>
void pull_rows(RowMatrix<Scalar>& weights, const PatchRef<Scalar>& patch,
               CoeffFn&& coeff) {
  const auto patch_row = patch.transpose();
  for (Index j = 0; j < weights.rows(); ++j) {
    const Scalar c = static_cast<Scalar>(coeff(j));
    if (!(c >= std::numeric_limits<Scalar>::min())) continue;
    weights.row(j) = (Scalar(1) - c) * weights.row(j) + c * patch_row;
  }
}

/// Literal growth-exponent rule: decay = exp(+d / (2 sigma^2)) with d the
/// unsquared lattice distance, and the delta pushes each neuron away from the
/// winner's weight vector (snapshot taken before the sweep). The winner
/// itself never moves under this rule.
template <class Scalar>
void raw_exponential_update(NeuronGrid<Scalar>& grid, const GridCoord& winner, double lr_epo,
                            double sigma) {
  const Vector<Scalar> winner_w =
      grid.weights.row(flat_of_coord(winner, grid.width));
  for (Index j = 0; j < grid.size(); ++j) {
    const double d = std::sqrt(lattice_sq_distance(winner, grid.coord(j)));
    const Scalar c = static_cast<Scalar>(lr_epo * std::exp(d / (2.0 * sigma * sigma)));
    grid.weights.row(j) += c * (grid.weights.row(j) - winner_w.transpose());
  }
}

}  // namespace detail

/// Moves every neuron toward `patch` by factor lr_epo * decay(winner, neuron);
/// the winner itself moves by exactly lr_epo (a full step at lr_epo = 1 lands
/// on the patch bit-exactly, and lr_epo = 0 leaves the grid untouched).
template <class Scalar>
void update_for_winner(NeuronGrid<Scalar>& grid, const PatchRef<Scalar>& patch,
                       const GridCoord& winner, double lr_epo, double sigma,
                       UpdateRule rule = UpdateRule::standard) {
  if (patch.size() != grid.dim())
    throw DimensionError("patch length " + std::to_string(patch.size()) +
                         " != grid weight dim " + std::to_string(grid.dim()));
  if (rule == UpdateRule::raw_exponential) {
    detail::raw_exponential_update(grid, winner, lr_epo, sigma);
    return;
  }
  detail::pull_rows(grid.weights, patch, [&](Index j) {
    return lr_epo * neighborhood_decay(winner, grid.coord(j), sigma);
  });
}

/// One competitive step: distances, n winners, then the per-winner updates in
/// ascending-distance order. Sequential convex pulls toward a common target
/// compose exactly — after winners 1..n, row j keeps factor prod_i (1 - c_ij)
/// of its old value and the remainder sits on the patch — so the winner loop
/// is realized as a single sweep with the composed coefficient. Returns the
/// winners selected before any update.
template <class Scalar>
WinnerSet train_step(NeuronGrid<Scalar>& grid, const PatchRef<Scalar>& patch,
                     const SomConfig& cfg, double lr_epo, const DecayTable* decay = nullptr,
                     int threads = 1) {
  const Eigen::VectorXd dist = compute_distances<Scalar>(patch, grid, threads);
  WinnerSet winners = find_winners(dist, cfg.n_winners, grid.width);
  if (cfg.update_rule == UpdateRule::raw_exponential) {
    for (const GridCoord& w : winners.coords)
      update_for_winner<Scalar>(grid, patch, w, lr_epo, cfg.sigma, cfg.update_rule);
    return winners;
  }
  detail::pull_rows(grid.weights, patch, [&](Index j) {
    const GridCoord cj = grid.coord(j);
    double keep = 1.0;
    for (const GridCoord& w : winners.coords)
      keep *= 1.0 - lr_epo * (decay ? (*decay)(w, cj) : neighborhood_decay(w, cj, cfg.sigma));
    return 1.0 - keep;
  });
  return winners;
}

struct SomProgress {
  int epoch = 0;  // zero-based, just finished
  int epochs = 0;
  double lr_epo = 0.0;
  double seconds = 0.0;  // wall time of this epoch
};
using SomProgressFn = std::function<void(const SomProgress&)>;

/// Runs epochs x images x patches of train_step over the dataset in storage
/// order (or a seeded reshuffle per epoch when cfg.shuffle), with the
/// per-epoch rate lr_at_epoch(epoch). Deterministic for fixed (seed, config,
/// dataset order).
template <class Scalar>
void train_som(NeuronGrid<Scalar>& grid, const LabeledImageSet& data, const PatchConfig& pcfg,
               const SomConfig& cfg, const SomProgressFn& progress = {}, int threads = 1) {
  cfg.validate();
  if (data.size() == 0) throw DataError("training set is empty");
  pcfg.validate_for(data.height, data.width);
  if (pcfg.patch_dim() != grid.dim())
    throw DimensionError("patch dim " + std::to_string(pcfg.patch_dim()) +
                         " != grid weight dim " + std::to_string(grid.dim()));
  if (grid.height != cfg.grid_height || grid.width != cfg.grid_width)
    throw DimensionError("grid is " + std::to_string(grid.height) + "x" +
                         std::to_string(grid.width) + " but config says " +
                         std::to_string(cfg.grid_height) + "x" + std::to_string(cfg.grid_width));

  const DecayTable decay(grid.height, grid.width, cfg.sigma);
  std::vector<Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 shuffle_rng(cfg.seed);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr_epo = lr_at_epoch(cfg.base_lr, epoch, cfg.epochs);
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (Index i : order) {
      const Image<Scalar> img = normalize_image<Scalar>(data.image(i));
      const PatchSet<Scalar> ps = extract_patches(img, pcfg);
      for (Index p = 0; p < ps.count(); ++p)
        train_step<Scalar>(grid, ps.patches.row(p).transpose(), cfg, lr_epo, &decay, threads);
    }
    if (progress) {
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      progress({epoch, cfg.epochs, lr_epo, dt.count()});
    }
  }
}

/// Mean over all patches of the dataset of the distance to the nearest
/// neuron; a training-progress measure.
template <class Scalar>
double mean_quantization_error(const NeuronGrid<Scalar>& grid, const LabeledImageSet& data,
                               const PatchConfig& pcfg, int threads = 1) {
  if (data.size() == 0) throw DataError("dataset is empty");
  double sum = 0.0;
  Index patches = 0;
  for (Index i = 0; i < data.size(); ++i) {
    const Image<Scalar> img = normalize_image<Scalar>(data.image(i));
    const PatchSet<Scalar> ps = extract_patches(img, pcfg);
    for (Index p = 0; p < ps.count(); ++p) {
      sum += compute_distances<Scalar>(ps.patches.row(p).transpose(), grid, threads).minCoeff();
      ++patches;
    }
  }
  return sum / static_cast<double>(patches);
}

}  // namespace mlsom
