#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(DEEPIM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("deepim_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& extra = "") {
  const fs::path path = dir / "exp.conf";
  std::ofstream out(path);
  out << "[experiment]\n"
         "seed = 42\n"
         "budgets = 0.1, 0.2\n"
         "budget_kind = count\n"
         "rounds = 20\n"
         "methods = deepim, celf, degree_topk\n"
         "[graph]\n"
         "source = erdos-renyi\n"
         "nodes = 30\n"
         "edges = 90\n"
         "[diffusion]\n"
         "model = ic\n"
         "[corpus]\n"
         "fractions = 0.1, 0.3\n"
         "sets_per_fraction = 6\n"
         "rounds = 10\n"
         "degree_biased = true\n"
         "[model]\n"
         "encoder_hidden = 32, 16\n"
         "attn_layers = 2\n"
         "heads = 2\n"
         "head_dim = 8\n"
         "student_hidden = 12\n"
         "[train]\n"
         "pretrain_epochs = 10\n"
         "epochs = 2\n"
         "batch = 8\n"
         "[infer]\n"
         "iterations = 5\n"
         "[baseline]\n"
         "rounds = 20\n"
      << extra;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// report.csv ends each row with a wall-time column; strip it before
// comparing runs.
std::string drop_last_column(const std::string& csv) {
  std::stringstream in(csv), out;
  std::string line;
  while (std::getline(in, line)) {
    out << line.substr(0, line.rfind(',')) << "\n";
  }
  return out.str();
}

void run_full_pipeline(const fs::path& dir, const fs::path& cfg) {
  const std::string base = "--config " + cfg.string() + " --out " + dir.string();
  for (const char* stage :
       {"gen-graph", "gen-data", "train", "infer", "baseline", "evaluate",
        "report"}) {
    CAPTURE(stage);
    REQUIRE(run_cli(base + " " + stage) == 0);
  }
}

}  // namespace

TEST_CASE("stage chain produces every artifact") {
  const fs::path dir = fresh_dir("chain");
  run_full_pipeline(dir, write_config(dir));
  for (const char* name :
       {"graph.bin", "graph.json", "corpus.bin", "corpus.json", "bundle.bin",
        "bundle.json", "train_report.json", "eval.json", "timings.json",
        "report.csv", "report.txt"}) {
    CAPTURE(name);
    CHECK(fs::exists(dir / name));
  }
  CHECK(fs::exists(dir / "seeds" / "deepim_b10.json"));
  CHECK(fs::exists(dir / "seeds" / "deepim_b10_trajectory.csv"));
  CHECK(fs::exists(dir / "seeds" / "celf_b20.json"));
  CHECK(fs::exists(dir / "seeds" / "degree_topk_b10.json"));
  fs::remove_all(dir);
}

TEST_CASE("identical config and seed reproduce every artifact bit for bit") {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  run_full_pipeline(a, write_config(a));
  run_full_pipeline(b, write_config(b));

  for (const char* name : {"graph.bin", "corpus.bin", "bundle.bin", "eval.json"}) {
    CAPTURE(name);
    CHECK(slurp(a / name) == slurp(b / name));
  }
  for (const auto& entry : fs::directory_iterator(a / "seeds")) {
    CAPTURE(entry.path().filename().string());
    CHECK(slurp(entry.path()) == slurp(b / "seeds" / entry.path().filename()));
  }
  CHECK(drop_last_column(slurp(a / "report.csv")) ==
        drop_last_column(slurp(b / "report.csv")));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("a different seed changes the artifacts") {
  const fs::path a = fresh_dir("seed_a");
  const fs::path b = fresh_dir("seed_b");
  const fs::path cfg_a = write_config(a);
  const fs::path cfg_b = write_config(b);
  const std::string base_a = "--config " + cfg_a.string() + " --out " + a.string();
  const std::string base_b =
      "--config " + cfg_b.string() + " --out " + b.string() + " --seed 43";
  for (const std::string& base : {base_a, base_b}) {
    REQUIRE(run_cli(base + " gen-graph") == 0);
    REQUIRE(run_cli(base + " gen-data") == 0);
  }
  CHECK(slurp(a / "graph.bin") != slurp(b / "graph.bin"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("config errors exit with code 2") {
  const fs::path dir = fresh_dir("cfg_err");

  SUBCASE("missing required key") {
    std::ofstream(dir / "bad.conf") << "[graph]\nsource = file\n";
    CHECK(run_cli("--config " + (dir / "bad.conf").string() + " --out " +
                  dir.string() + " gen-graph") == 2);
  }
  SUBCASE("nonexistent config file") {
    CHECK(run_cli("--config " + (dir / "nope.conf").string() + " --out " +
                  dir.string() + " gen-graph") == 2);
  }
  SUBCASE("budget outside (0,1]") {
    const fs::path cfg = write_config(dir, "[experiment]\nbudgets = 1.5\n");
    REQUIRE(run_cli("--config " + cfg.string() + " --out " + dir.string() +
                    " gen-graph") == 0);
    CHECK(run_cli("--config " + cfg.string() + " --out " + dir.string() +
                  " baseline") == 2);
  }
  SUBCASE("empty methods list") {
    const fs::path cfg = write_config(dir, "[experiment]\nmethods =\n");
    CHECK(run_cli("--config " + cfg.string() + " --out " + dir.string() +
                  " report") == 2);
  }
  SUBCASE("unknown stage") {
    CHECK(run_cli("--out " + dir.string() + " frobnicate") == 2);
  }
  fs::remove_all(dir);
}

TEST_CASE("missing upstream artifacts exit with code 3 and name the stage") {
  const fs::path dir = fresh_dir("missing");
  const fs::path cfg = write_config(dir);
  const std::string base = "--config " + cfg.string() + " --out " + dir.string();

  CHECK(run_cli(base + " gen-data") == 3);  // no graph yet
  REQUIRE(run_cli(base + " gen-graph") == 0);
  CHECK(run_cli(base + " train") == 3);     // no corpus yet
  CHECK(run_cli(base + " infer") == 3);     // no bundle yet
  CHECK(run_cli(base + " evaluate") == 3);  // no seed sets yet

  const std::string cmd = std::string(DEEPIM_CLI_PATH) + " " + base +
                          " train 2> " + (dir / "err.txt").string();
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 3);
  CHECK(slurp(dir / "err.txt").find("gen-data") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("stale artifacts are rejected with exit code 3") {
  const fs::path dir = fresh_dir("stale");
  const fs::path cfg = write_config(dir);
  const std::string base = "--config " + cfg.string() + " --out " + dir.string();
  REQUIRE(run_cli(base + " gen-graph") == 0);
  REQUIRE(run_cli(base + " gen-data") == 0);

  // Regenerate the graph with a different structure; the corpus on disk
  // now belongs to the old one.
  const fs::path cfg2 = write_config(dir, "[graph]\nnodes = 31\n");
  REQUIRE(run_cli("--config " + cfg2.string() + " --out " + dir.string() +
                  " gen-graph") == 0);
  CHECK(run_cli("--config " + cfg2.string() + " --out " + dir.string() +
                " train") == 3);
  fs::remove_all(dir);
}
