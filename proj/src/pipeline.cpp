#include "mlsom/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "mlsom/checkpoint.hpp"

namespace mlsom {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string dataset_name(Dataset d) { return d == Dataset::mnist ? "mnist" : "cifar10"; }

Dataset dataset_from_name(const std::string& name) {
  if (name == "mnist") return Dataset::mnist;
  if (name == "cifar10") return Dataset::cifar10;
  throw ConfigError("unknown dataset '" + name + "' (expected mnist or cifar10)");
}

RunConfig preset(Dataset dataset) {
  RunConfig cfg;
  cfg.dataset = dataset;
  cfg.som.grid_height = 44;
  cfg.som.grid_width = 44;
  cfg.som.n_winners = 5;
  cfg.som.sigma = 2.0;
  cfg.som.base_lr = 0.3;
  if (dataset == Dataset::mnist) {
    cfg.patch = PatchConfig{14, 7, 1};
    cfg.k = 20;
    cfg.som.epochs = 20;
  } else {
    cfg.patch = PatchConfig{16, 4, 3};
    cfg.k = 100;
    cfg.som.epochs = 200;
  }
  cfg.som.dim = cfg.patch.patch_dim();
  return cfg;
}

void resolve_config(RunConfig& cfg, Index image_height, Index image_width, Index channels) {
  cfg.patch.channels = channels;
  if (!cfg.use_lrf) {
    if (image_height != image_width)
      throw ConfigError("global receptive field requires square images");
    cfg.patch.window = image_height;
    cfg.patch.stride = image_height;
  }
  cfg.patch.validate_for(image_height, image_width);
  cfg.som.dim = cfg.patch.patch_dim();
  cfg.som.validate();
  if (cfg.k < 1 || Index(cfg.k) > cfg.som.grid_height * cfg.som.grid_width)
    throw ConfigError("k " + std::to_string(cfg.k) + " must be in [1, " +
                      std::to_string(cfg.som.grid_height * cfg.som.grid_width) + "]");
  if (cfg.clf_epochs < 0) throw ConfigError("classifier epochs must be non-negative");
  if (!(cfg.clf_lr > 0.0)) throw ConfigError("classifier lr must be positive");
  if (cfg.batch_size < 1) throw ConfigError("batch size must be positive");
  if (cfg.threads < 1) cfg.threads = 1;
}

namespace {

std::string find_existing(const std::vector<std::string>& candidates, const char* what) {
  for (const auto& c : candidates)
    if (fs::exists(c)) return c;
  std::string msg = std::string("missing ") + what + "; tried:";
  for (const auto& c : candidates) msg += " " + c;
  throw DataError(msg);
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

DataPair load_dataset(Dataset dataset, const std::string& data_dir) {
  if (data_dir.empty()) throw DataError("no data directory given (flag --data-dir or MLSOM_DATA_DIR)");
  const fs::path dir(data_dir);
  if (dataset == Dataset::mnist) {
    const auto p = [&](const char* a) { return (dir / a).string(); };
    DataPair pair;
    pair.train = load_mnist(
        find_existing({p("train-images-idx3-ubyte"), p("train-images.idx3-ubyte")},
                      "MNIST train images"),
        find_existing({p("train-labels-idx1-ubyte"), p("train-labels.idx1-ubyte")},
                      "MNIST train labels"));
    pair.test = load_mnist(
        find_existing({p("t10k-images-idx3-ubyte"), p("t10k-images.idx3-ubyte")},
                      "MNIST test images"),
        find_existing({p("t10k-labels-idx1-ubyte"), p("t10k-labels.idx1-ubyte")},
                      "MNIST test labels"));
    return pair;
  }
  const fs::path sub = fs::exists(dir / "cifar-10-batches-bin") ? dir / "cifar-10-batches-bin" : dir;
  std::vector<std::string> train_batches;
  for (int b = 1; b <= 5; ++b)
    train_batches.push_back(
        find_existing({(sub / ("data_batch_" + std::to_string(b) + ".bin")).string()},
                      "CIFAR-10 train batch"));
  DataPair pair;
  pair.train = load_cifar10(train_batches);
  pair.test = load_cifar10({find_existing({(sub / "test_batch.bin").string()}, "CIFAR-10 test batch")});
  return pair;
}

EncodedSet encode_dataset(const NeuronGrid<float>& grid, const LabeledImageSet& set,
                          const PatchConfig& pcfg, int k, int threads) {
  if (set.size() == 0) throw DataError("cannot encode an empty set");
  EncodedSet out;
  out.features.resize(set.size(), grid.size());
  out.labels = set.labels;
  detail::parallel_chunks(set.size(), threads, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      const Image<float> img = normalize_image<float>(set.image(i));
      const FeatureMap map = encode_image<float>(img, grid, pcfg, k, /*threads=*/1);
      out.features.row(i) = map.flatten<float>().transpose();
    }
  });
  return out;
}

PipelineResult run_pipeline(const RunConfig& cfg_in, const DataPair& data, std::ostream* log) {
  const auto t_start = std::chrono::steady_clock::now();
  RunConfig cfg = cfg_in;
  resolve_config(cfg, data.train.height, data.train.width, data.train.channels);

  RunSummary s;
  s.config = cfg;

  NeuronGrid<float> grid = init_grid<float>(cfg.som);
  const auto t_som = std::chrono::steady_clock::now();
  const SomProgressFn progress = [&](const SomProgress& p) {
    if (log)
      (*log) << "som epoch " << (p.epoch + 1) << "/" << p.epochs << "  lr " << std::setprecision(4)
             << p.lr_epo << "  " << std::fixed << std::setprecision(1) << p.seconds << "s\n"
             << std::defaultfloat << std::setprecision(6);
  };
  train_som(grid, data.train, cfg.patch, cfg.som, progress, cfg.threads);
  s.som_seconds = seconds_since(t_som);

  const auto t_enc = std::chrono::steady_clock::now();
  const EncodedSet train_enc = encode_dataset(grid, data.train, cfg.patch, cfg.k, cfg.threads);
  const EncodedSet test_enc = encode_dataset(grid, data.test, cfg.patch, cfg.k, cfg.threads);
  s.encode_seconds = seconds_since(t_enc);
  if (log)
    (*log) << "encoded " << train_enc.features.rows() << " train + " << test_enc.features.rows()
           << " test images (k=" << cfg.k << ") in " << std::fixed << std::setprecision(1)
           << s.encode_seconds << "s\n"
           << std::defaultfloat << std::setprecision(6);

  const auto t_clf = std::chrono::steady_clock::now();
  LinearClassifier<float> clf =
      LinearClassifier<float>::zeros(data.train.num_classes, grid.size());
  s.report = train_classifier(clf, train_enc.features, train_enc.labels, cfg.clf_epochs,
                              cfg.clf_lr, cfg.batch_size, cfg.som.seed);
  s.clf_seconds = seconds_since(t_clf);

  s.train_accuracy = evaluate(clf, train_enc.features, train_enc.labels, cfg.threads);
  s.test_accuracy = evaluate(clf, test_enc.features, test_enc.labels, cfg.threads);
  s.report.test_accuracy = s.test_accuracy;
  s.total_seconds = seconds_since(t_start);
  if (log)
    (*log) << "train accuracy " << std::fixed << std::setprecision(4) << s.train_accuracy
           << "  test accuracy " << s.test_accuracy << std::defaultfloat << std::setprecision(6)
           << "\n";

  return {std::move(s), std::move(grid), std::move(clf)};
}

RunSummary run_train(const RunConfig& cfg, std::ostream* log) {
  DataPair data = load_dataset(cfg.dataset, cfg.data_dir);
  if (cfg.subset_train > 0) data.train = subset(data.train, cfg.subset_train, cfg.som.seed);
  if (cfg.subset_test > 0) data.test = subset(data.test, cfg.subset_test, cfg.som.seed + 1);

  PipelineResult result = run_pipeline(cfg, data, log);
  RunSummary& s = result.summary;

  fs::create_directories(cfg.out_dir);
  s.grid_path = (fs::path(cfg.out_dir) / "grid.mlsom").string();
  s.classifier_path = (fs::path(cfg.out_dir) / "classifier.mlclf").string();
  s.report_path = (fs::path(cfg.out_dir) / "report.json").string();
  save_grid(result.grid, s.grid_path);
  save_classifier(result.classifier, s.classifier_path);
  std::ofstream out(s.report_path);
  if (!out) throw DataError("cannot open " + s.report_path + " for writing");
  out << summary_to_json(s).dump(2) << "\n";
  return s;
}

std::vector<AblationRow> run_ablation(const RunConfig& base, const DataPair& data,
                                      std::ostream* log) {
  std::vector<AblationRow> rows = {
      {"som", false, 1, 1, 0.0},
      {"som+multi-winner", false, base.som.n_winners, 1, 0.0},
      {"som+multi-winner+lrf", true, base.som.n_winners, 1, 0.0},
      {"mlsom", true, base.som.n_winners, base.k, 0.0},
  };
  for (auto& row : rows) {
    RunConfig cfg = base;
    cfg.use_lrf = row.use_lrf;
    cfg.som.n_winners = row.n_winners;
    cfg.k = row.k;
    if (log) (*log) << "== variant " << row.name << "\n";
    row.test_accuracy = run_pipeline(cfg, data, log).summary.test_accuracy;
  }
  return rows;
}

json config_to_json(const RunConfig& cfg) {
  return json{{"dataset", dataset_name(cfg.dataset)},
              {"data_dir", cfg.data_dir},
              {"out_dir", cfg.out_dir},
              {"grid_height", cfg.som.grid_height},
              {"grid_width", cfg.som.grid_width},
              {"dim", cfg.som.dim},
              {"n_winners", cfg.som.n_winners},
              {"sigma", cfg.som.sigma},
              {"base_lr", cfg.som.base_lr},
              {"epochs_som", cfg.som.epochs},
              {"seed", cfg.som.seed},
              {"shuffle", cfg.som.shuffle},
              {"update_rule",
               cfg.som.update_rule == UpdateRule::standard ? "standard" : "raw-exponential"},
              {"window", cfg.patch.window},
              {"stride", cfg.patch.stride},
              {"channels", cfg.patch.channels},
              {"k", cfg.k},
              {"use_lrf", cfg.use_lrf},
              {"epochs_clf", cfg.clf_epochs},
              {"clf_lr", cfg.clf_lr},
              {"batch_size", cfg.batch_size},
              {"subset_train", cfg.subset_train},
              {"subset_test", cfg.subset_test},
              {"threads", cfg.threads}};
}

json summary_to_json(const RunSummary& s) {
  return json{{"report_version", 1},
              {"command", "train"},
              {"config", config_to_json(s.config)},
              {"classifier",
               {{"epoch_loss", s.report.epoch_loss},
                {"epoch_train_accuracy", s.report.epoch_train_accuracy}}},
              {"results",
               {{"train_accuracy", s.train_accuracy}, {"test_accuracy", s.test_accuracy}}},
              {"artifacts", {{"grid", s.grid_path}, {"classifier", s.classifier_path}}},
              {"wall_time",
               {{"som_seconds", s.som_seconds},
                {"encode_seconds", s.encode_seconds},
                {"classifier_seconds", s.clf_seconds},
                {"total_seconds", s.total_seconds}}}};
}

json ablation_to_json(const RunConfig& base, const std::vector<AblationRow>& rows) {
  json out{{"report_version", 1},
           {"command", "ablate"},
           {"config", config_to_json(base)},
           {"rows", json::array()}};
  for (const auto& r : rows)
    out["rows"].push_back({{"name", r.name},
                           {"use_lrf", r.use_lrf},
                           {"n_winners", r.n_winners},
                           {"k", r.k},
                           {"test_accuracy", r.test_accuracy}});
  return out;
}

}  // namespace mlsom
