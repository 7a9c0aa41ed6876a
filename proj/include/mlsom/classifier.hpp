#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include "mlsom/types.hpp"

namespace mlsom {

/// Linear softmax head over flattened feature maps.
template <class Scalar>
struct LinearClassifier {
  RowMatrix<Scalar> weights;  // num_classes x feature_dim
  Vector<Scalar> bias;        // num_classes

  Index num_classes() const { return weights.rows(); }
  Index feature_dim() const { return weights.cols(); }

  /// Zero-initialized parameters; the objective is convex, so no seed is
  /// involved.
  static LinearClassifier zeros(Index num_classes, Index feature_dim) {
    if (num_classes < 1 || feature_dim < 1)
      throw ConfigError("classifier dimensions must be positive");
    return {RowMatrix<Scalar>::Zero(num_classes, feature_dim), Vector<Scalar>::Zero(num_classes)};
  }
};

struct TrainReport {
  std::vector<double> epoch_loss;            // mean cross-entropy per epoch
  std::vector<double> epoch_train_accuracy;  // running accuracy over each epoch's passes
  double test_accuracy = 0.0;                // filled by the caller after evaluate()
};

namespace detail {

/// Stabilized softmax in 64-bit: max-logit subtraction, then probabilities
/// floored at the smallest normal double so they stay strictly positive and
/// downstream logs stay finite even for logit spreads past +-1e4.
inline Eigen::VectorXd softmax(Eigen::VectorXd logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - m).exp();
  p /= p.sum();
  return p.cwiseMax(std::numeric_limits<double>::min());
}

inline Eigen::VectorXd logits_64(const Eigen::MatrixXd& weights_d, const Eigen::VectorXd& bias_d,
                                 const Eigen::VectorXd& features_d) {
  return weights_d * features_d + bias_d;
}

}  // namespace detail

/// softmax(W x + b) with 64-bit accumulation regardless of Scalar. Entries
/// are strictly positive and sum to 1 within 1e-9.
template <class Scalar>
Eigen::VectorXd forward(const LinearClassifier<Scalar>& clf,
                        const PatchRef<Scalar>& features) {
  if (features.size() != clf.feature_dim())
    throw DimensionError("feature length " + std::to_string(features.size()) +
                         " != classifier dim " + std::to_string(clf.feature_dim()));
  return detail::softmax(detail::logits_64(clf.weights.template cast<double>(),
                                           clf.bias.template cast<double>(),
                                           features.template cast<double>()));
}

/// Negative log-likelihood -log(pred[label]); exactly 0 when pred[label] is 1.
/// Probabilities below 1e-12 are clamped rather than treated as errors.
inline double cross_entropy(const Eigen::VectorXd& pred, Index label) {
  if (label < 0 || label >= pred.size())
    throw DimensionError("label " + std::to_string(label) + " out of range for " +
                         std::to_string(pred.size()) + " classes");
  return -std::log(std::max(pred[label], 1e-12));
}

/// One SGD step on a single example using the analytic softmax-cross-entropy
/// gradient dL/dlogit_c = pred_c - [c == label]. Returns the pre-step loss.
template <class Scalar>
double grad_step(LinearClassifier<Scalar>& clf, const PatchRef<Scalar>& features,
                 Index label, double clf_lr) {
  const Eigen::VectorXd p = forward(clf, features);
  const double loss = cross_entropy(p, label);
  if (!std::isfinite(loss))
    throw TrainingError("non-finite loss on single-example step (label " +
                        std::to_string(label) + ")");
  Eigen::VectorXd g = p;
  g[label] -= 1.0;
  const Eigen::VectorXd x_d = features.template cast<double>();
  clf.weights -= (clf_lr * (g * x_d.transpose())).template cast<Scalar>();
  clf.bias -= (clf_lr * g).template cast<Scalar>();
  return loss;
}

/// Mini-batch SGD with gradients averaged over each batch and a seeded
/// reshuffle of the example order every epoch. Per-epoch train accuracy is
/// accumulated from the forward passes the optimizer already makes (each
/// prediction precedes that batch's update).
template <class Scalar>
TrainReport train_classifier(LinearClassifier<Scalar>& clf, const RowMatrix<Scalar>& features,
                             const std::vector<int>& labels, int epochs, double clf_lr,
                             int batch_size, std::uint64_t seed = 0) {
  if (features.rows() == 0) throw DataError("encoded dataset is empty");
  if (features.rows() != static_cast<Index>(labels.size()))
    throw DimensionError("feature rows " + std::to_string(features.rows()) + " != label count " +
                         std::to_string(labels.size()));
  if (features.cols() != clf.feature_dim())
    throw DimensionError("feature dim " + std::to_string(features.cols()) +
                         " != classifier dim " + std::to_string(clf.feature_dim()));
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  for (int y : labels)
    if (y < 0 || y >= clf.num_classes())
      throw DataError("label " + std::to_string(y) + " outside [0, " +
                      std::to_string(clf.num_classes()) + ")");

  const Index n = features.rows();
  const Index num_classes = clf.num_classes();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);

  TrainReport report;
  Eigen::MatrixXd grad_w(num_classes, clf.feature_dim());
  Eigen::VectorXd grad_b(num_classes);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    Index correct = 0;
    for (Index start = 0; start < n; start += batch_size) {
      const Index stop = std::min<Index>(start + batch_size, n);
      const Eigen::MatrixXd w_d = clf.weights.template cast<double>();
      const Eigen::VectorXd b_d = clf.bias.template cast<double>();
      grad_w.setZero();
      grad_b.setZero();
      for (Index i = start; i < stop; ++i) {
        const Index row = order[static_cast<std::size_t>(i)];
        const Eigen::VectorXd x_d =
            features.row(row).transpose().template cast<double>();
        const Eigen::VectorXd p = detail::softmax(detail::logits_64(w_d, b_d, x_d));
        const int label = labels[static_cast<std::size_t>(row)];
        const double loss = cross_entropy(p, label);
        if (!std::isfinite(loss))
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", example " +
                              std::to_string(row));
        loss_sum += loss;
        Index arg = 0;
        p.maxCoeff(&arg);
        if (arg == label) ++correct;
        Eigen::VectorXd g = p;
        g[label] -= 1.0;
        grad_w.noalias() += g * x_d.transpose();
        grad_b += g;
      }
      const double scale = clf_lr / static_cast<double>(stop - start);
      clf.weights -= (scale * grad_w).template cast<Scalar>();
      clf.bias -= (scale * grad_b).template cast<Scalar>();
    }
    report.epoch_loss.push_back(loss_sum / static_cast<double>(n));
    report.epoch_train_accuracy.push_back(static_cast<double>(correct) /
                                          static_cast<double>(n));
  }
  return report;
}

/// Fraction of examples whose argmax(forward) equals the label; argmax ties
/// resolve to the lowest class index. Optional threads split the example
/// range; the count is exact either way.
template <class Scalar>
double evaluate(const LinearClassifier<Scalar>& clf, const RowMatrix<Scalar>& features,
                const std::vector<int>& labels, int threads = 1) {
  if (features.rows() == 0) throw DataError("evaluation set is empty");
  if (features.rows() != static_cast<Index>(labels.size()))
    throw DimensionError("feature rows != label count");
  const Eigen::MatrixXd w_d = clf.weights.template cast<double>();
  const Eigen::VectorXd b_d = clf.bias.template cast<double>();
  const Index n = features.rows();
  std::vector<Index> correct(static_cast<std::size_t>(std::max(threads, 1)), 0);
  const auto run = [&](Index begin, Index end, Index slot) {
    Index hits = 0;
    for (Index i = begin; i < end; ++i) {
      const Eigen::VectorXd logits = detail::logits_64(
          w_d, b_d, features.row(i).transpose().template cast<double>());
      Index arg = 0;
      logits.maxCoeff(&arg);  // first max: ties go to the lowest class
      if (arg == labels[static_cast<std::size_t>(i)]) ++hits;
    }
    correct[static_cast<std::size_t>(slot)] = hits;
  };
  if (threads > 1) {
    std::vector<std::thread> pool;
    const Index workers = std::min<Index>(threads, std::max<Index>(n, 1));
    const Index chunk = (n + workers - 1) / workers;
    for (Index w = 1; w < workers; ++w) {
      const Index b = std::min(n, w * chunk);
      const Index e = std::min(n, (w + 1) * chunk);
      if (b < e) pool.emplace_back(run, b, e, w);
    }
    run(0, std::min(n, chunk), 0);
    for (auto& t : pool) t.join();
  } else {
    run(0, n, 0);
  }
  const Index total = std::accumulate(correct.begin(), correct.end(), Index{0});
  return static_cast<double>(total) / static_cast<double>(n);
}

}  // namespace mlsom
