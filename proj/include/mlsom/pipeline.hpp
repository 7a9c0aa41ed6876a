#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlsom/classifier.hpp"
#include "mlsom/coding.hpp"
#include "mlsom/data.hpp"
#include "mlsom/som.hpp"

namespace mlsom {

enum class Dataset { mnist, cifar10 };

std::string dataset_name(Dataset d);
Dataset dataset_from_name(const std::string& name);

/// Everything one run needs. Presets carry the published hyper-parameters:
/// MNIST 44x44 grid, window 14, stride 7, n 5, sigma 2, k 20, lr 0.3;
/// CIFAR-10 44x44 grid, window 16, stride 4, n 5, sigma 2, k 100, lr 0.3.
struct RunConfig {
  Dataset dataset = Dataset::mnist;
  std::string data_dir;
  std::string out_dir = "out";
  SomConfig som;
  PatchConfig patch;
  int k = 20;
  bool use_lrf = true;  // false forces window = stride = image side (one patch)
  int clf_epochs = 50;
  double clf_lr = 0.1;
  int batch_size = 64;
  Index subset_train = 0;  // 0 = full set
  Index subset_test = 0;
  int threads = 1;
};

RunConfig preset(Dataset dataset);

/// Resolves the GRF switch and derived fields against the actual image shape
/// (window = stride = image side when use_lrf is false; som.dim always
/// window^2 * channels). Throws ConfigError on incompatible settings.
void resolve_config(RunConfig& cfg, Index image_height, Index image_width, Index channels);

/// Train/test pair as loaded from data_dir by dataset convention.
struct DataPair {
  LabeledImageSet train;
  LabeledImageSet test;
};
DataPair load_dataset(Dataset dataset, const std::string& data_dir);

/// Feature maps of a whole set, flattened and cached as classifier input.
struct EncodedSet {
  RowMatrix<float> features;  // N x (grid_height * grid_width), entries {0, 1}
  std::vector<int> labels;
};
EncodedSet encode_dataset(const NeuronGrid<float>& grid, const LabeledImageSet& set,
                          const PatchConfig& pcfg, int k, int threads = 1);

struct RunSummary {
  RunConfig config;  // as executed, after resolve_config
  TrainReport report;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double som_seconds = 0.0;
  double encode_seconds = 0.0;
  double clf_seconds = 0.0;
  double total_seconds = 0.0;
  std::string grid_path;
  std::string classifier_path;
  std::string report_path;
};

/// A summary plus the trained state it came from.
struct PipelineResult {
  RunSummary summary;
  NeuronGrid<float> grid;
  LinearClassifier<float> classifier;
};

/// The full pipeline on pre-loaded data: train SOM, encode both splits, train
/// the linear head, evaluate. Writes no files.
PipelineResult run_pipeline(const RunConfig& cfg, const DataPair& data,
                            std::ostream* log = nullptr);

/// load -> subset -> run_pipeline -> write grid checkpoint, classifier
/// checkpoint, and report JSON under cfg.out_dir.
RunSummary run_train(const RunConfig& cfg, std::ostream* log = nullptr);

struct AblationRow {
  std::string name;
  bool use_lrf = false;
  int n_winners = 1;
  int k = 1;
  double test_accuracy = 0.0;
};

/// The four-variant ladder sharing one seed and budget: single-winner GRF
/// baseline, multi-winner GRF, multi-winner LRF, and multi-winner LRF with
/// multi-code k.
std::vector<AblationRow> run_ablation(const RunConfig& base, const DataPair& data,
                                      std::ostream* log = nullptr);

nlohmann::json config_to_json(const RunConfig& cfg);
nlohmann::json summary_to_json(const RunSummary& summary);
nlohmann::json ablation_to_json(const RunConfig& base, const std::vector<AblationRow>& rows);

}  // namespace mlsom
