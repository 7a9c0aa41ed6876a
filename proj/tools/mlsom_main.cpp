#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "mlsom/checkpoint.hpp"
#include "mlsom/pipeline.hpp"
#include "mlsom/viz.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mlsom;

// Raw option values. Defaults mirror the preset values shared by both
// datasets; per-dataset fields (window, stride, k, epochs-som) are applied
// only when given on the command line or in a config file.
struct CommonOpts {
  std::string preset = "mnist";
  std::string data_dir;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  Index subset_train = 0;
  Index subset_test = 0;
  int epochs_som = 0;
  int epochs_clf = 50;
  int n_winners = 5;
  int k = 0;
  double sigma = 2.0;
  double lr = 0.3;
  double clf_lr = 0.1;
  int batch = 64;
  Index window = 0;
  Index stride = 0;
  Index grid_height = 44;
  Index grid_width = 44;
  bool no_lrf = false;
  bool shuffle = false;
  std::string update_rule = "standard";
  int threads = 1;
  std::string config_file;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--preset", o.preset, "Hyper-parameter preset")
      ->check(CLI::IsMember({"mnist", "cifar10"}));
  cmd->add_option("--data-dir", o.data_dir, "Dataset directory")->envname("MLSOM_DATA_DIR");
  cmd->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--subset", o.subset_train, "Stratified train subset size (0 = full)");
  cmd->add_option("--subset-test", o.subset_test, "Stratified test subset size (0 = full)");
  cmd->add_option("--epochs-som", o.epochs_som, "SOM training epochs");
  cmd->add_option("--epochs-clf", o.epochs_clf, "Classifier training epochs")->capture_default_str();
  cmd->add_option("--n", o.n_winners, "Winners updated per patch during training")->capture_default_str();
  cmd->add_option("--k", o.k, "Winners per patch during coding");
  cmd->add_option("--sigma", o.sigma, "Neighborhood radius")->capture_default_str();
  cmd->add_option("--lr", o.lr, "Base SOM learning rate")->capture_default_str();
  cmd->add_option("--clf-lr", o.clf_lr, "Classifier learning rate")->capture_default_str();
  cmd->add_option("--batch", o.batch, "Classifier mini-batch size")->capture_default_str();
  cmd->add_option("--window", o.window, "Sliding window side");
  cmd->add_option("--stride", o.stride, "Sliding window stride");
  cmd->add_option("--grid-height", o.grid_height, "Lattice rows")->capture_default_str();
  cmd->add_option("--grid-width", o.grid_width, "Lattice cols")->capture_default_str();
  cmd->add_flag("--no-lrf", o.no_lrf, "Global receptive field (window = stride = image side)");
  cmd->add_flag("--shuffle", o.shuffle, "Reshuffle image order each SOM epoch (seeded)");
  cmd->add_option("--update-rule", o.update_rule, "Weight update rule")->capture_default_str()
      ->check(CLI::IsMember({"standard", "raw-exponential"}));
  cmd->add_option("--threads", o.threads, "Worker thread cap")->capture_default_str();
  cmd->add_option("--config", o.config_file, "Key=value config file (CLI flags win)");
}

// Expands `--config file` into trailing --key=value tokens for every file key
// not already present on the command line, so explicit flags keep precedence.
std::vector<std::string> expand_config_file(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  const auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config file " + path + " line " + std::to_string(line_no) +
                        ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config")
      throw ConfigError("config file " + path + " line " + std::to_string(line_no) +
                        ": bad key");
    if (!given(key)) args.push_back("--" + key + "=" + value);
  }
  return args;
}

RunConfig make_config(CLI::App* cmd, const CommonOpts& o) {
  RunConfig cfg = preset(dataset_from_name(o.preset));
  if (!o.data_dir.empty()) cfg.data_dir = o.data_dir;
  cfg.out_dir = o.out_dir;
  cfg.som.seed = o.seed;
  cfg.som.grid_height = o.grid_height;
  cfg.som.grid_width = o.grid_width;
  cfg.som.n_winners = o.n_winners;
  cfg.som.sigma = o.sigma;
  cfg.som.base_lr = o.lr;
  cfg.som.shuffle = o.shuffle;
  cfg.som.update_rule =
      o.update_rule == "standard" ? UpdateRule::standard : UpdateRule::raw_exponential;
  if (cmd->count("--epochs-som") > 0) cfg.som.epochs = o.epochs_som;
  if (cmd->count("--window") > 0) cfg.patch.window = o.window;
  if (cmd->count("--stride") > 0) cfg.patch.stride = o.stride;
  if (cmd->count("--k") > 0) cfg.k = o.k;
  cfg.use_lrf = !o.no_lrf;
  cfg.clf_epochs = o.epochs_clf;
  cfg.clf_lr = o.clf_lr;
  cfg.batch_size = o.batch;
  cfg.subset_train = o.subset_train;
  cfg.subset_test = o.subset_test;
  cfg.threads = o.threads;
  cfg.som.dim = cfg.patch.patch_dim();
  return cfg;
}

void print_kv(const std::string& key, const std::string& value) {
  std::cout << "  " << std::left << std::setw(22) << key << value << "\n";
}

void print_summary(const RunSummary& s) {
  std::cout << "train summary\n";
  print_kv("dataset", dataset_name(s.config.dataset));
  print_kv("grid", std::to_string(s.config.som.grid_height) + "x" +
                       std::to_string(s.config.som.grid_width));
  print_kv("window/stride", std::to_string(s.config.patch.window) + "/" +
                                std::to_string(s.config.patch.stride));
  print_kv("n/k/sigma/lr", std::to_string(s.config.som.n_winners) + "/" +
                               std::to_string(s.config.k) + "/" +
                               std::to_string(s.config.som.sigma) + "/" +
                               std::to_string(s.config.som.base_lr));
  print_kv("epochs som/clf", std::to_string(s.config.som.epochs) + "/" +
                                 std::to_string(s.config.clf_epochs));
  print_kv("seed", std::to_string(s.config.som.seed));
  {
    std::ostringstream acc;
    acc << std::fixed << std::setprecision(4) << s.train_accuracy;
    print_kv("train accuracy", acc.str());
  }
  {
    std::ostringstream acc;
    acc << std::fixed << std::setprecision(4) << s.test_accuracy;
    print_kv("test accuracy", acc.str());
  }
  {
    std::ostringstream t;
    t << std::fixed << std::setprecision(1) << s.total_seconds << "s (som "
      << s.som_seconds << "s, encode " << s.encode_seconds << "s, clf " << s.clf_seconds << "s)";
    print_kv("wall time", t.str());
  }
  print_kv("grid checkpoint", s.grid_path);
  print_kv("classifier", s.classifier_path);
  print_kv("report", s.report_path);
}

int cmd_train(CLI::App* cmd, const CommonOpts& o) {
  const RunConfig cfg = make_config(cmd, o);
  const RunSummary s = run_train(cfg, &std::cout);
  print_summary(s);
  return 0;
}

int cmd_ablate(CLI::App* cmd, const CommonOpts& o) {
  const RunConfig base = make_config(cmd, o);
  DataPair data = load_dataset(base.dataset, base.data_dir);
  if (base.subset_train > 0) data.train = subset(data.train, base.subset_train, base.som.seed);
  if (base.subset_test > 0) data.test = subset(data.test, base.subset_test, base.som.seed + 1);
  const auto rows = run_ablation(base, data, &std::cout);

  fs::create_directories(base.out_dir);
  const std::string path = (fs::path(base.out_dir) / "ablation.json").string();
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << ablation_to_json(base, rows).dump(2) << "\n";

  std::cout << "ablation ladder\n";
  std::cout << "  " << std::left << std::setw(24) << "variant" << std::setw(8) << "lrf"
            << std::setw(6) << "n" << std::setw(6) << "k" << "test accuracy\n";
  for (const auto& r : rows)
    std::cout << "  " << std::left << std::setw(24) << r.name << std::setw(8)
              << (r.use_lrf ? "yes" : "no") << std::setw(6) << r.n_winners << std::setw(6) << r.k
              << std::fixed << std::setprecision(4) << r.test_accuracy << "\n";
  std::cout << "  report " << path << "\n";
  return 0;
}

void require_matching_window(const RunConfig& cfg, const NeuronGrid<float>& grid) {
  if (cfg.patch.patch_dim() != grid.dim())
    throw ConfigError("checkpoint weight dim " + std::to_string(grid.dim()) +
                      " does not match window^2 * channels = " +
                      std::to_string(cfg.patch.patch_dim()) +
                      " (set --window/--preset to match the checkpoint)");
}

int cmd_encode(CLI::App* cmd, const CommonOpts& o, const std::string& ckpt,
               const std::string& split, Index start, Index count) {
  RunConfig cfg = make_config(cmd, o);
  const NeuronGrid<float> grid = load_grid(ckpt);
  DataPair data = load_dataset(cfg.dataset, cfg.data_dir);
  const LabeledImageSet& set = split == "train" ? data.train : data.test;
  resolve_config(cfg, set.height, set.width, set.channels);
  require_matching_window(cfg, grid);
  if (start < 0 || start >= set.size())
    throw ConfigError("--start " + std::to_string(start) + " outside [0, " +
                      std::to_string(set.size()) + ")");
  const Index stop = std::min<Index>(start + std::max<Index>(count, 1), set.size());
  fs::create_directories(cfg.out_dir);
  for (Index i = start; i < stop; ++i) {
    const Image<float> img = normalize_image<float>(set.image(i));
    const FeatureMap map = encode_image<float>(img, grid, cfg.patch, cfg.k, cfg.threads);
    std::ostringstream name;
    name << "featmap_" << split << "_" << std::setw(5) << std::setfill('0') << i << ".pgm";
    const std::string path = (fs::path(cfg.out_dir) / name.str()).string();
    write_feature_map_pgm(map, path);
    std::cout << path << "  label " << set.labels[static_cast<std::size_t>(i)] << "  popcount "
              << map.popcount() << "\n";
  }
  return 0;
}

int cmd_eval(CLI::App* cmd, const CommonOpts& o, const std::string& grid_ckpt,
             const std::string& clf_ckpt) {
  RunConfig cfg = make_config(cmd, o);
  const NeuronGrid<float> grid = load_grid(grid_ckpt);
  const LinearClassifier<float> clf = load_classifier(clf_ckpt);
  DataPair data = load_dataset(cfg.dataset, cfg.data_dir);
  if (cfg.subset_test > 0) data.test = subset(data.test, cfg.subset_test, cfg.som.seed + 1);
  resolve_config(cfg, data.test.height, data.test.width, data.test.channels);
  require_matching_window(cfg, grid);
  const EncodedSet enc = encode_dataset(grid, data.test, cfg.patch, cfg.k, cfg.threads);
  const double acc = evaluate(clf, enc.features, enc.labels, cfg.threads);
  std::cout << "test accuracy " << std::fixed << std::setprecision(4) << acc << " ("
            << enc.features.rows() << " images)\n";
  return 0;
}

int cmd_viz(CLI::App* cmd, const CommonOpts& o, const std::string& ckpt, Index image_index) {
  RunConfig cfg = make_config(cmd, o);
  const NeuronGrid<float> grid = load_grid(ckpt);
  require_matching_window(cfg, grid);
  fs::create_directories(cfg.out_dir);
  const std::string sheet =
      (fs::path(cfg.out_dir) / (cfg.patch.channels == 1 ? "grid_sheet.pgm" : "grid_sheet.ppm"))
          .string();
  render_grid(grid, cfg.patch, sheet);
  std::cout << sheet << "\n";

  if (image_index >= 0) {
    DataPair data = load_dataset(cfg.dataset, cfg.data_dir);
    if (image_index >= data.test.size())
      throw ConfigError("--image-index " + std::to_string(image_index) + " outside test set of " +
                        std::to_string(data.test.size()));
    const auto view = data.test.image(image_index);
    const Image<float> img = normalize_image<float>(view);
    const FeatureMap map = encode_image<float>(img, grid, cfg.patch, cfg.k, cfg.threads);
    std::ostringstream name;
    name << "overlay_" << std::setw(5) << std::setfill('0') << image_index << ".ppm";
    const std::string path = (fs::path(cfg.out_dir) / name.str()).string();
    render_feature_overlay(view, map, path);
    std::cout << path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mlsom: multi-winner multi-code self-organizing map"};
  app.require_subcommand(1);

  CommonOpts train_o, ablate_o, encode_o, eval_o, viz_o;
  std::string encode_ckpt, encode_split = "test";
  Index encode_start = 0, encode_count = 1;
  std::string eval_grid, eval_clf;
  std::string viz_ckpt;
  Index viz_image_index = -1;

  CLI::App* train = app.add_subcommand("train", "Train SOM + classifier, write checkpoints");
  add_common(train, train_o);

  CLI::App* ablate = app.add_subcommand("ablate", "Run the four-variant ablation ladder");
  add_common(ablate, ablate_o);

  CLI::App* encode = app.add_subcommand("encode", "Dump feature maps as PGM images");
  add_common(encode, encode_o);
  encode->add_option("--checkpoint", encode_ckpt, "Grid checkpoint")->required();
  encode->add_option("--split", encode_split, "Data split")->capture_default_str()
      ->check(CLI::IsMember({"train", "test"}));
  encode->add_option("--start", encode_start, "First image index")->capture_default_str();
  encode->add_option("--count", encode_count, "Number of images")->capture_default_str();

  CLI::App* eval = app.add_subcommand("eval", "Evaluate checkpoints on the test split");
  add_common(eval, eval_o);
  eval->add_option("--checkpoint", eval_grid, "Grid checkpoint")->required();
  eval->add_option("--classifier", eval_clf, "Classifier checkpoint")->required();

  CLI::App* viz = app.add_subcommand("viz", "Render neuron tiles and feature-map overlays");
  add_common(viz, viz_o);
  viz->add_option("--checkpoint", viz_ckpt, "Grid checkpoint")->required();
  viz->add_option("--image-index", viz_image_index, "Also overlay this test image");

  try {
    std::vector<std::string> args = expand_config_file(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11's vector overload pops from the back
    app.parse(std::move(args));
    if (train->parsed()) return cmd_train(train, train_o);
    if (ablate->parsed()) return cmd_ablate(ablate, ablate_o);
    if (encode->parsed())
      return cmd_encode(encode, encode_o, encode_ckpt, encode_split, encode_start, encode_count);
    if (eval->parsed()) return cmd_eval(eval, eval_o, eval_grid, eval_clf);
    if (viz->parsed()) return cmd_viz(viz, viz_o, viz_ckpt, viz_image_index);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
