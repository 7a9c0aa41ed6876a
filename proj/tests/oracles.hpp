// Independent reference implementations used only by tests. Everything here
// is plain scalar 64-bit code with no shared paths into the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

// Euclidean distances from one point to every codebook row, scalar loops.
template <class MatrixLike, class VectorLike>
std::vector<double> distances(const VectorLike& point, const MatrixLike& rows) {
  std::vector<double> out(static_cast<std::size_t>(rows.rows()));
  for (std::int64_t j = 0; j < rows.rows(); ++j) {
    double sum = 0.0;
    for (std::int64_t d = 0; d < rows.cols(); ++d) {
      const double diff = static_cast<double>(point[d]) - static_cast<double>(rows(j, d));
      sum += diff * diff;
    }
    out[static_cast<std::size_t>(j)] = std::sqrt(sum);
  }
  return out;
}

// Indices of the k smallest values via a full stable sort by (value, index).
inline std::vector<std::int64_t> top_k(const std::vector<double>& values, int k) {
  std::vector<std::int64_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::int64_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::int64_t a, std::int64_t b) {
    return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)];
  });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

// Straight-line transcription of one training step on a flattened grid:
// distances, ascending sort with index tie-break, top n winners, then for
// each winner in order a full sweep moving every neuron toward the patch by
// lr * exp(-lattice_dist^2 / (2 sigma^2)).
inline void train_step_transcription(std::vector<std::vector<double>>& weights,
                                     const std::vector<double>& patch, std::int64_t grid_width,
                                     int n_winners, double sigma, double lr) {
  const auto n = static_cast<std::int64_t>(weights.size());
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t d = 0; d < patch.size(); ++d) {
      const double diff = patch[d] - weights[static_cast<std::size_t>(j)][d];
      sum += diff * diff;
    }
    dist[static_cast<std::size_t>(j)] = std::sqrt(sum);
  }
  const std::vector<std::int64_t> winners = top_k(dist, n_winners);
  for (const std::int64_t w : winners) {
    const double wr = static_cast<double>(w / grid_width);
    const double wc = static_cast<double>(w % grid_width);
    for (std::int64_t j = 0; j < n; ++j) {
      const double dr = wr - static_cast<double>(j / grid_width);
      const double dc = wc - static_cast<double>(j % grid_width);
      const double decay = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
      auto& row = weights[static_cast<std::size_t>(j)];
      for (std::size_t d = 0; d < patch.size(); ++d)
        row[d] += lr * decay * (patch[d] - row[d]);
    }
  }
}

// Scalar softmax with max subtraction.
inline std::vector<double> softmax(const std::vector<double>& logits) {
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

// argmax with ties resolved to the lowest index.
inline std::size_t argmax(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

// Cross-entropy loss of a zero-bias-free linear softmax model, for finite
// differencing: weights is C x D row-major, bias length C.
inline double linear_ce_loss(const std::vector<double>& weights, const std::vector<double>& bias,
                             const std::vector<double>& x, int label) {
  const std::size_t classes = bias.size();
  const std::size_t dim = x.size();
  std::vector<double> logits(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    double s = bias[c];
    for (std::size_t d = 0; d < dim; ++d) s += weights[c * dim + d] * x[d];
    logits[c] = s;
  }
  const std::vector<double> p = softmax(logits);
  return -std::log(p[static_cast<std::size_t>(label)]);
}

}  // namespace oracle
