// Drives the installed binary end to end on fixture data. The binary path
// comes from the MLSOM_CLI environment variable (set by ctest).
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("mlsom_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string cli_path() {
  const char* env = std::getenv("MLSOM_CLI");
  REQUIRE_MESSAGE(env != nullptr, "MLSOM_CLI must point at the mlsom binary");
  return env;
}

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args, const TempDir& scratch) {
  const std::string log = scratch.file("cli_out_" + std::to_string(std::rand()) + ".log");
  const std::string cmd = '"' + cli_path() + "\" " + args + " > \"" + log + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  std::ifstream in(log, std::ios::binary);
  RunResult r;
  r.output.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

void write_fixture(const TempDir& dir) {
  synth::write_idx_pair(dir.str(), "train", synth::make_glyphs(20, 313));
  synth::write_idx_pair(dir.str(), "t10k", synth::make_glyphs(6, 314));
}

}  // namespace

TEST_CASE("train smoke run writes three artifacts and exits 0") {
  TempDir data, out;
  write_fixture(data);
  const std::string args = "train --data-dir \"" + data.str() + "\" --out-dir \"" + out.str() +
                           "\" --subset 100 --epochs-som 1 --epochs-clf 5"
                           " --grid-height 8 --grid-width 8 --seed 4 --threads 2";
  const RunResult r = run_cli(args, out);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out.file("grid.mlsom")));
  CHECK(fs::exists(out.file("classifier.mlclf")));
  CHECK(fs::exists(out.file("report.json")));

  std::ifstream in(out.file("report.json"));
  const nlohmann::json report = nlohmann::json::parse(in);
  CHECK(report["report_version"] == 1);
  CHECK(report["config"]["subset_train"] == 100);
  CHECK(report["config"]["grid_height"] == 8);

  SUBCASE("eval reproduces an accuracy from the written checkpoints") {
    const RunResult ev = run_cli("eval --data-dir \"" + data.str() + "\" --checkpoint \"" +
                                     out.file("grid.mlsom") + "\" --classifier \"" +
                                     out.file("classifier.mlclf") + "\" --grid-height 8" +
                                     " --grid-width 8",
                                 out);
    CHECK(ev.exit_code == 0);
    CHECK(ev.output.find("test accuracy") != std::string::npos);
  }

  SUBCASE("encode dumps feature-map PGMs with popcounts") {
    const RunResult enc = run_cli("encode --data-dir \"" + data.str() + "\" --checkpoint \"" +
                                      out.file("grid.mlsom") + "\" --out-dir \"" + out.str() +
                                      "\" --start 0 --count 2",
                                  out);
    CHECK(enc.exit_code == 0);
    CHECK(fs::exists(out.file("featmap_test_00000.pgm")));
    CHECK(fs::exists(out.file("featmap_test_00001.pgm")));
    CHECK(enc.output.find("popcount") != std::string::npos);
  }

  SUBCASE("viz renders the neuron sheet and an overlay") {
    const RunResult vz = run_cli("viz --data-dir \"" + data.str() + "\" --checkpoint \"" +
                                     out.file("grid.mlsom") + "\" --out-dir \"" + out.str() +
                                     "\" --image-index 3",
                                 out);
    CHECK(vz.exit_code == 0);
    CHECK(fs::exists(out.file("grid_sheet.pgm")));
    CHECK(fs::exists(out.file("overlay_00003.ppm")));
  }
}

TEST_CASE("stride incompatibility exits with the config code and message") {
  TempDir data, out;
  write_fixture(data);
  const RunResult r = run_cli("train --data-dir \"" + data.str() + "\" --out-dir \"" + out.str() +
                                  "\" --window 14 --stride 5 --epochs-som 1",
                              out);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("stride incompatibility") != std::string::npos);
}

TEST_CASE("missing data directory exits with the data code") {
  TempDir out;
  const RunResult r = run_cli("train --data-dir \"" + out.file("nonexistent") + "\"", out);
  CHECK(r.exit_code == 3);
}

TEST_CASE("corrupt checkpoint reports bad magic and exits nonzero") {
  TempDir data, out;
  write_fixture(data);
  std::ofstream(out.file("junk.mlsom"), std::ios::binary) << "XXXXXXXXXXXXXXXXXXXX";
  const RunResult r = run_cli("viz --data-dir \"" + data.str() + "\" --checkpoint \"" +
                                  out.file("junk.mlsom") + "\" --out-dir \"" + out.str() + "\"",
                              out);
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("bad magic") != std::string::npos);
}

TEST_CASE("ablate emits four rows and a json report") {
  TempDir data, out;
  write_fixture(data);
  const RunResult r = run_cli("ablate --data-dir \"" + data.str() + "\" --out-dir \"" + out.str() +
                                  "\" --subset 100 --subset-test 40 --epochs-som 1"
                                  " --epochs-clf 5 --grid-height 8 --grid-width 8 --threads 2",
                              out);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out.file("ablation.json")));
  std::ifstream in(out.file("ablation.json"));
  const nlohmann::json report = nlohmann::json::parse(in);
  REQUIRE(report["rows"].size() == 4);
  CHECK(report["rows"][0]["name"] == "som");
  CHECK(report["rows"][3]["name"] == "mlsom");
  CHECK(r.output.find("ablation ladder") != std::string::npos);
}

TEST_CASE("config file values apply with command-line flags winning") {
  TempDir data, out;
  write_fixture(data);
  {
    std::ofstream cfg(out.file("run.cfg"));
    cfg << "grid-height=9\ngrid-width=9\nepochs-som=1\nepochs-clf=4\nsubset=60\n";
  }
  const RunResult r = run_cli("train --data-dir \"" + data.str() + "\" --out-dir \"" + out.str() +
                                  "\" --config \"" + out.file("run.cfg") + "\" --epochs-clf 6",
                              out);
  CHECK(r.exit_code == 0);
  std::ifstream in(out.file("report.json"));
  const nlohmann::json report = nlohmann::json::parse(in);
  CHECK(report["config"]["grid_height"] == 9);   // from the file
  CHECK(report["config"]["epochs_clf"] == 6);    // flag overrides the file
  CHECK(report["config"]["subset_train"] == 60);
}

TEST_CASE("unknown flags and absent subcommands are parse errors") {
  TempDir out;
  CHECK(run_cli("train --definitely-not-a-flag", out).exit_code != 0);
  CHECK(run_cli("", out).exit_code != 0);
  CHECK(run_cli("--help", out).exit_code == 0);
}
