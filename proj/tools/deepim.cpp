// Batch pipeline driver: graph prep, corpus generation, training,
// latent-space inference, classical baselines, evaluation, reporting,
// and runtime measurement. Stages communicate through versioned
// artifacts in the output directory; each artifact carries a JSON
// manifest with its input hashes so stale inputs are caught early.
//
// Wall-clock times are confined to timings.json, timing.csv, and the
// report's time column; every other artifact is a pure function of the
// config and seed.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "deepim/baselines.hpp"
#include "deepim/config.hpp"
#include "deepim/dataset.hpp"
#include "deepim/diffusion.hpp"
#include "deepim/graph.hpp"
#include "deepim/hash.hpp"
#include "deepim/inference.hpp"
#include "deepim/models.hpp"
#include "deepim/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace deepim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitArtifact = 3;

/// Missing or stale upstream artifacts (exit code 3).
struct ArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

struct Ctx {
  Config cfg;
  fs::path out;
  std::uint64_t seed = 42;

  fs::path graph_bin() const { return out / "graph.bin"; }
  fs::path graph_manifest() const { return out / "graph.json"; }
  fs::path corpus_bin() const { return out / "corpus.bin"; }
  fs::path corpus_manifest() const { return out / "corpus.json"; }
  fs::path bundle_bin() const { return out / "bundle.bin"; }
  fs::path bundle_manifest() const { return out / "bundle.json"; }
  fs::path train_report() const { return out / "train_report.json"; }
  fs::path seeds_dir() const { return out / "seeds"; }
  fs::path eval_json() const { return out / "eval.json"; }
  fs::path timings() const { return out / "timings.json"; }

  // Seed domains: stages draw from disjoint streams of the master seed,
  // so e.g. evaluation rounds never replay corpus rounds.
  std::uint64_t graph_seed() const { return hash_mix(seed, 0x6772); }
  std::uint64_t corpus_seed() const { return hash_mix(seed, 0xc07b); }
  std::uint64_t train_seed() const { return hash_mix(seed, 0x7a17); }
  std::uint64_t baseline_seed() const { return hash_mix(seed, 0xba5e); }
  std::uint64_t eval_seed() const { return hash_mix(seed, 0xe7a1); }
};

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
  }
  fs::rename(tmp, path);
}

void write_json(const fs::path& path, const json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

json read_json(const fs::path& path, const std::string& producing_stage) {
  std::ifstream in(path);
  if (!in) {
    throw ArtifactError("missing artifact " + path.string() + "; run the '" +
                        producing_stage + "' stage first");
  }
  json j;
  in >> j;
  return j;
}

std::uint64_t file_fingerprint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("missing artifact " + path.string());
  Fnv1a f;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    f.add_bytes(buf, std::size_t(in.gcount()));
  }
  return f.state;
}

void record_timing(const Ctx& ctx, const std::string& stage, double seconds) {
  json j = json::object();
  if (fs::exists(ctx.timings())) {
    std::ifstream in(ctx.timings());
    in >> j;
  }
  j[stage] = seconds;
  write_json(ctx.timings(), j);
}

DiffusionSpec diffusion_from_config(const Config& cfg) {
  DiffusionSpec spec;
  spec.model = diffusion_model_from_string(cfg.get_or("diffusion.model", "ic"));
  spec.lt_threshold_low = cfg.get_real_or("diffusion.lt_low", 0.3);
  spec.lt_threshold_high = cfg.get_real_or("diffusion.lt_high", 0.6);
  spec.sis_infect_prob = cfg.get_real_or("diffusion.sis_infect", 0.001);
  spec.sis_recover_prob = cfg.get_real_or("diffusion.sis_recover", 0.001);
  spec.sis_horizon = std::uint32_t(cfg.get_int_or("diffusion.sis_horizon", 100));
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad diffusion config: ") + e.what());
  }
  return spec;
}

json diffusion_manifest(const DiffusionSpec& spec) {
  json j{{"model", to_string(spec.model)}};
  if (spec.model == DiffusionModel::LT) {
    j["lt_low"] = spec.lt_threshold_low;
    j["lt_high"] = spec.lt_threshold_high;
  } else if (spec.model == DiffusionModel::SIS) {
    j["infect"] = spec.sis_infect_prob;
    j["recover"] = spec.sis_recover_prob;
    j["horizon"] = spec.sis_horizon;
  }
  return j;
}

ModelArch arch_from_config(const Config& cfg) {
  ModelArch a;
  a.encoder_hidden = cfg.get_int_list_or("model.encoder_hidden", a.encoder_hidden);
  a.attn_layers = int(cfg.get_int_or("model.attn_layers", a.attn_layers));
  a.heads = int(cfg.get_int_or("model.heads", a.heads));
  a.head_dim = int(cfg.get_int_or("model.head_dim", a.head_dim));
  a.student_hidden = cfg.get_int_list_or("model.student_hidden", a.student_hidden);
  a.xi = cfg.get_real_or("model.xi", a.xi);
  try {
    a.norm = attn_norm_from_string(cfg.get_or("model.norm", "gate"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return a;
}

Graph load_graph_artifact(const Ctx& ctx) {
  if (!fs::exists(ctx.graph_bin())) {
    throw ArtifactError("missing artifact " + ctx.graph_bin().string() +
                        "; run the 'gen-graph' stage first");
  }
  return load_graph(ctx.graph_bin());
}

void check_hash(std::uint64_t expected, std::uint64_t actual,
                const std::string& what) {
  if (expected != actual) {
    throw ArtifactError("stale artifact: " + what +
                        " was produced for different inputs (hash mismatch); "
                        "re-run the upstream stages");
  }
}

struct Budget {
  double fraction;
  BudgetConstraint constraint;
  std::string label;  // e.g. "b10" for 10%
};

std::vector<Budget> budgets_from_config(const Config& cfg, const Graph& g) {
  const std::vector<double> fractions =
      cfg.get_real_list_or("experiment.budgets", {0.01, 0.05, 0.10, 0.20});
  const std::string kind = cfg.get_or("experiment.budget_kind", "count");
  std::vector<Budget> out;
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw ConfigError("experiment.budgets entries must lie in (0, 1]");
    }
    Budget b;
    b.fraction = f;
    const auto k = std::max<std::uint32_t>(
        1, std::uint32_t(std::lround(f * double(g.node_count()))));
    if (kind == "count") {
      b.constraint = BudgetConstraint::count(k);
    } else if (kind == "degree-sum") {
      // Budget = the degree mass of the top f-fraction by count, so the
      // two rules are comparable at the same nominal percentage.
      std::vector<double> costs = degree_costs(g);
      std::sort(costs.begin(), costs.end(), std::greater<>());
      double mass = 0.0;
      for (std::uint32_t i = 0; i < k; ++i) mass += costs[i];
      b.constraint = BudgetConstraint::degree_sum(std::max(mass, 1.0));
    } else {
      throw ConfigError("experiment.budget_kind must be count or degree-sum");
    }
    std::ostringstream label;
    label << "b" << std::setfill('0') << std::setw(2)
          << int(std::lround(f * 100));
    b.label = label.str();
    out.push_back(std::move(b));
  }
  return out;
}

json seed_artifact(const std::string& method, const Budget& b, const Graph& g,
                   const SeedSet& seeds) {
  json j;
  j["method"] = method;
  j["budget_fraction"] = b.fraction;
  j["budget_kind"] = to_string(b.constraint.kind);
  j["budget_k"] = b.constraint.k;
  j["graph_hash"] = g.structure_hash();
  j["node_ids"] = seeds.indices();
  return j;
}

// ---- stages ----------------------------------------------------------

int cmd_gen_graph(Ctx& ctx) {
  Stopwatch sw;
  const std::string source = ctx.cfg.get_or("graph.source", "file");
  Graph g;
  json manifest;
  if (source == "file") {
    const fs::path path = ctx.cfg.get("graph.path");
    const bool directed = ctx.cfg.get_bool_or("graph.directed", false);
    EdgeListStats stats;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open graph.path: " + path.string());
    g = load_edge_list(in, directed, &stats);
    manifest["source"] = path.string();
    manifest["directed"] = directed;
    manifest["dropped_self_loops"] = stats.dropped_self_loops;
    manifest["dropped_duplicates"] = stats.dropped_duplicates;
  } else if (source == "erdos-renyi") {
    const auto n = NodeId(ctx.cfg.get_int("graph.nodes"));
    const auto m = std::uint64_t(ctx.cfg.get_int("graph.edges"));
    g = erdos_renyi(n, m, ctx.graph_seed());
    manifest["source"] = "erdos-renyi";
    manifest["rng_seed"] = ctx.graph_seed();
  } else {
    throw ConfigError("graph.source must be file or erdos-renyi");
  }
  save_graph(g, ctx.graph_bin());
  manifest["nodes"] = g.node_count();
  manifest["edges"] = g.edge_count();
  manifest["structure_hash"] = g.structure_hash();
  manifest["undirected_input"] = g.loaded_undirected();
  write_json(ctx.graph_manifest(), manifest);
  record_timing(ctx, "gen-graph", sw.seconds());
  std::cout << "graph: " << g.node_count() << " nodes, " << g.edge_count()
            << " directed edges -> " << ctx.graph_bin().string() << "\n";
  return kExitOk;
}

int cmd_gen_data(Ctx& ctx) {
  Stopwatch sw;
  Graph g = load_graph_artifact(ctx);
  const DiffusionSpec spec = diffusion_from_config(ctx.cfg);
  const std::vector<double> fractions =
      ctx.cfg.get_real_list_or("corpus.fractions", {0.01, 0.05, 0.10, 0.20});
  const auto sets = std::uint32_t(ctx.cfg.get_int_or("corpus.sets_per_fraction", 256));
  const auto rounds = std::uint32_t(ctx.cfg.get_int_or("corpus.rounds", 100));
  const bool biased = ctx.cfg.get_bool_or("corpus.degree_biased", false);

  TrainingCorpus corpus;
  try {
    corpus = build_corpus(g, spec, fractions, sets, rounds, ctx.corpus_seed(), biased);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad corpus config: ") + e.what());
  }
  save_corpus(corpus, ctx.corpus_bin());

  json manifest;
  manifest["graph_hash"] = g.structure_hash();
  manifest["diffusion"] = diffusion_manifest(spec);
  manifest["fractions"] = fractions;
  manifest["sets_per_fraction"] = sets;
  manifest["rounds"] = rounds;
  manifest["degree_biased"] = biased;
  manifest["rng_seed"] = ctx.corpus_seed();
  manifest["pairs"] = corpus.pairs.size();
  manifest["file_hash"] = file_fingerprint(ctx.corpus_bin());
  write_json(ctx.corpus_manifest(), manifest);
  record_timing(ctx, "gen-data", sw.seconds());
  std::cout << "corpus: " << corpus.pairs.size() << " pairs -> "
            << ctx.corpus_bin().string() << "\n";
  return kExitOk;
}

int cmd_train(Ctx& ctx) {
  Stopwatch sw;
  Graph g = load_graph_artifact(ctx);
  if (!fs::exists(ctx.corpus_bin())) {
    throw ArtifactError("missing artifact " + ctx.corpus_bin().string() +
                        "; run the 'gen-data' stage first");
  }
  TrainingCorpus corpus = load_corpus(ctx.corpus_bin());
  check_hash(g.structure_hash(), corpus.graph_hash, "corpus");

  const ModelArch arch = arch_from_config(ctx.cfg);
  TrainConfig tc;
  tc.epochs = int(ctx.cfg.get_int_or("train.epochs", 300));
  tc.pretrain_epochs = int(ctx.cfg.get_int_or("train.pretrain_epochs", 0));
  tc.batch_size = int(ctx.cfg.get_int_or("train.batch", 32));
  tc.lr = ctx.cfg.get_real_or("train.lr", 0.001);
  tc.w_rec = ctx.cfg.get_real_or("train.w_rec", 1.0);
  tc.w_pred = ctx.cfg.get_real_or("train.w_pred", 1.0);
  tc.w_distill = ctx.cfg.get_real_or("train.w_distill", 1.0);
  try {
    tc.target = pred_target_from_string(ctx.cfg.get_or("train.target", "per-node"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  tc.surrogate_on_reconstruction =
      ctx.cfg.get_bool_or("train.surrogate_on_reconstruction", true);
  tc.rng_seed = ctx.train_seed();
  try {
    tc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad train config: ") + e.what());
  }

  TrainResult res = train(g, corpus, arch, tc);
  save_bundle(res.bundle, ctx.bundle_bin());

  json manifest;
  manifest["graph_hash"] = g.structure_hash();
  manifest["corpus_hash"] = file_fingerprint(ctx.corpus_bin());
  manifest["bundle_fingerprint"] = bundle_fingerprint(res.bundle);
  manifest["epochs"] = tc.epochs;
  manifest["pretrain_epochs"] = tc.pretrain_epochs;
  manifest["batch"] = tc.batch_size;
  manifest["lr"] = tc.lr;
  manifest["weights"] = {tc.w_rec, tc.w_pred, tc.w_distill};
  manifest["target"] = to_string(tc.target);
  manifest["surrogate_on_reconstruction"] = tc.surrogate_on_reconstruction;
  manifest["attention_norm"] = to_string(arch.norm);
  manifest["head_merge"] = "concat between layers, average after the last";
  manifest["rng_seed"] = tc.rng_seed;
  write_json(ctx.bundle_manifest(), manifest);

  json report;
  report["recon_auc"] = res.report.recon_auc;
  report["surrogate_spread_mae"] = res.report.surrogate_spread_mae;
  report["student_teacher_rel_err"] = res.report.student_teacher_rel_err;
  json epochs = json::array();
  for (const EpochStats& e : res.report.epochs) {
    epochs.push_back({{"rec", e.rec},
                      {"pred", e.pred},
                      {"distill", e.distill},
                      {"total", e.total}});
  }
  report["epochs"] = std::move(epochs);
  write_json(ctx.train_report(), report);
  record_timing(ctx, "train", sw.seconds());
  std::cout << "train: recon AUC " << res.report.recon_auc << ", spread MAE "
            << res.report.surrogate_spread_mae << " -> "
            << ctx.bundle_bin().string() << "\n";
  return kExitOk;
}

int cmd_infer(Ctx& ctx) {
  Stopwatch sw;
  Graph g = load_graph_artifact(ctx);
  if (!fs::exists(ctx.bundle_bin())) {
    throw ArtifactError("missing artifact " + ctx.bundle_bin().string() +
                        "; run the 'train' stage first");
  }
  ModelBundle bundle = load_bundle(ctx.bundle_bin());
  check_hash(g.structure_hash(), bundle.graph_hash, "bundle");
  if (!fs::exists(ctx.corpus_bin())) {
    throw ArtifactError("missing artifact " + ctx.corpus_bin().string() +
                        "; run the 'gen-data' stage first");
  }
  TrainingCorpus corpus = load_corpus(ctx.corpus_bin());
  check_hash(g.structure_hash(), corpus.graph_hash, "corpus");

  InferenceConfig ic;
  ic.iterations = int(ctx.cfg.get_int_or("infer.iterations", 300));
  ic.lr = ctx.cfg.get_real_or("infer.lr", 0.0001);
  // restarts > 0 adds that many extra searches from high-spread training
  // sets (plus the top-decile mean) and keeps the model-preferred result.
  const int restarts = int(ctx.cfg.get_int_or("infer.restarts", 0));
  try {
    ic.scorer = scorer_from_string(ctx.cfg.get_or("infer.scorer", "teacher"));
    ic.validate();
    if (restarts < 0) throw std::invalid_argument("restarts must be >= 0");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad infer config: ") + e.what());
  }

  fs::create_directories(ctx.seeds_dir());
  for (const Budget& b : budgets_from_config(ctx.cfg, g)) {
    Stopwatch bsw;
    InferenceResult res =
        restarts > 0 ? infer_multistart(bundle, g, b.constraint, ic, corpus, restarts)
                     : infer(bundle, g, b.constraint, ic, corpus);
    json j = seed_artifact("deepim", b, g, res.seeds);
    j["scorer"] = to_string(ic.scorer);
    j["iterations"] = ic.iterations;
    write_json(ctx.seeds_dir() / ("deepim_" + b.label + ".json"), j);

    std::ostringstream traj;
    traj << "iteration,score\n";
    for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
      traj << i << "," << res.trajectory[i] << "\n";
    }
    write_text_atomic(ctx.seeds_dir() / ("deepim_" + b.label + "_trajectory.csv"),
                      traj.str());
    record_timing(ctx, "infer." + b.label, bsw.seconds());
    std::cout << "infer " << b.label << ": " << res.seeds.count
              << " seeds\n";
  }
  record_timing(ctx, "infer", sw.seconds());
  return kExitOk;
}

int cmd_baseline(Ctx& ctx) {
  Stopwatch sw;
  Graph g = load_graph_artifact(ctx);
  const DiffusionSpec spec = diffusion_from_config(ctx.cfg);
  const auto rounds = std::uint32_t(ctx.cfg.get_int_or("baseline.rounds", 100));
  const auto rr_sets = std::uint32_t(ctx.cfg.get_int_or("baseline.rr_sets", 20000));
  std::vector<std::string> methods = ctx.cfg.get_list_or(
      "experiment.methods", {"deepim", "greedy", "celf", "degree_topk"});
  if (methods.empty()) throw ConfigError("experiment.methods must be nonempty");

  fs::create_directories(ctx.seeds_dir());
  for (const Budget& b : budgets_from_config(ctx.cfg, g)) {
    for (const std::string& method : methods) {
      if (method == "deepim") continue;  // handled by the infer stage
      Stopwatch msw;
      BaselineResult res;
      if (method == "greedy") {
        res = greedy(g, b.constraint, spec, rounds, ctx.baseline_seed());
      } else if (method == "celf") {
        res = celf(g, b.constraint, spec, rounds, ctx.baseline_seed());
      } else if (method == "degree_topk") {
        res = degree_topk(g, b.constraint);
      } else if (method == "ris") {
        if (b.constraint.kind != BudgetConstraint::Kind::Count ||
            spec.model != DiffusionModel::IC) {
          throw ConfigError("ris supports only count budgets under ic");
        }
        res = ris_greedy(g, std::uint32_t(std::llround(b.constraint.k)), rr_sets,
                         spec, ctx.baseline_seed());
      } else {
        throw ConfigError("unknown baseline method: " + method);
      }
      json j = seed_artifact(res.method, b, g, res.seeds);
      j["estimated_spread"] = res.estimated_spread;
      j["evaluations"] = res.evaluations;
      j["marginal_gains"] = res.marginal_gains;
      write_json(ctx.seeds_dir() / (res.method + "_" + b.label + ".json"), j);
      record_timing(ctx, "baseline." + res.method + "." + b.label, msw.seconds());
      std::cout << "baseline " << res.method << " " << b.label << ": "
                << res.seeds.count << " seeds\n";
    }
  }
  record_timing(ctx, "baseline", sw.seconds());
  return kExitOk;
}

int cmd_evaluate(Ctx& ctx) {
  Stopwatch sw;
  Graph g = load_graph_artifact(ctx);
  const DiffusionSpec spec = diffusion_from_config(ctx.cfg);
  const auto rounds = std::uint32_t(ctx.cfg.get_int_or("experiment.rounds", 100));
  if (!fs::exists(ctx.seeds_dir())) {
    throw ArtifactError("missing seed sets in " + ctx.seeds_dir().string() +
                        "; run the 'infer' and 'baseline' stages first");
  }
  // Evaluation must never replay training randomness.
  if (fs::exists(ctx.corpus_manifest())) {
    const json cm = read_json(ctx.corpus_manifest(), "gen-data");
    if (cm.contains("rng_seed") &&
        cm["rng_seed"].get<std::uint64_t>() == ctx.eval_seed()) {
      throw ArtifactError("evaluation seed collides with the corpus seed");
    }
  }

  json rows = json::array();
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(ctx.seeds_dir())) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw ArtifactError("no seed sets found in " + ctx.seeds_dir().string());
  }

  for (const fs::path& file : files) {
    const json j = read_json(file, "infer/baseline");
    check_hash(g.structure_hash(), j["graph_hash"].get<std::uint64_t>(),
               file.filename().string());
    const auto ids = j["node_ids"].get<std::vector<NodeId>>();
    const SeedSet seeds = SeedSet::from_indices(g.node_count(), ids);
    // One shared world panel per budget: every method at a given budget
    // is scored under identical randomness.
    const std::uint64_t panel_seed =
        hash_mix(ctx.eval_seed(), std::uint64_t(
            std::llround(j["budget_fraction"].get<double>() * 1000000)));
    SpreadEstimate est = mc_estimate(g, seeds, spec, rounds, panel_seed);
    json row;
    row["method"] = j["method"];
    row["budget_fraction"] = j["budget_fraction"];
    row["budget_kind"] = j["budget_kind"];
    row["seed_count"] = seeds.count;
    row["mean_spread"] = est.mean_spread;
    row["stddev"] = est.spread_stddev;
    row["pct_infected"] = 100.0 * est.mean_spread / double(g.node_count());
    rows.push_back(std::move(row));
  }

  json out;
  out["graph_hash"] = g.structure_hash();
  out["diffusion"] = diffusion_manifest(spec);
  out["rounds"] = rounds;
  out["eval_seed"] = ctx.eval_seed();
  out["rows"] = std::move(rows);
  write_json(ctx.eval_json(), out);
  record_timing(ctx, "evaluate", sw.seconds());
  std::cout << "evaluate: " << files.size() << " seed sets -> "
            << ctx.eval_json().string() << "\n";
  return kExitOk;
}

int cmd_report(Ctx& ctx) {
  const std::vector<std::string> methods = ctx.cfg.get_list_or(
      "experiment.methods", {"deepim", "greedy", "celf", "degree_topk"});
  if (methods.empty()) throw ConfigError("experiment.methods must be nonempty");
  const json eval = read_json(ctx.eval_json(), "evaluate");
  json timings = json::object();
  if (fs::exists(ctx.timings())) {
    std::ifstream in(ctx.timings());
    in >> timings;
  }

  std::ostringstream csv, txt;
  csv << "method,budget_pct,seed_count,pct_infected,stddev,wall_time_sec\n";
  txt << std::left << std::setw(14) << "method" << std::setw(12) << "budget"
      << std::setw(8) << "seeds" << std::setw(12) << "infected%"
      << std::setw(10) << "stddev" << "time(s)\n";
  for (const json& row : eval["rows"]) {
    const std::string method = row["method"];
    const double frac = row["budget_fraction"];
    std::ostringstream label;
    label << "b" << std::setfill('0') << std::setw(2)
          << int(std::lround(frac * 100));
    std::string tkey = method == "deepim" ? "infer." + label.str()
                                          : "baseline." + method + "." + label.str();
    const double secs = timings.contains(tkey) ? timings[tkey].get<double>() : 0.0;
    csv << method << "," << frac * 100 << "," << row["seed_count"] << ","
        << std::fixed << std::setprecision(3) << row["pct_infected"].get<double>()
        << "," << row["stddev"].get<double>() << "," << std::setprecision(4)
        << secs << "\n";
    csv.unsetf(std::ios::fixed);
    std::ostringstream pct;
    pct << int(std::lround(frac * 100)) << "%";
    txt << std::left << std::setw(14) << method << std::setw(12) << pct.str()
        << std::setw(8) << row["seed_count"].get<int>() << std::setw(12)
        << std::fixed << std::setprecision(2) << row["pct_infected"].get<double>()
        << std::setw(10) << row["stddev"].get<double>() << std::setprecision(3)
        << secs << "\n";
    txt.unsetf(std::ios::fixed);
  }
  write_text_atomic(ctx.out / "report.csv", csv.str());
  write_text_atomic(ctx.out / "report.txt", txt.str());
  std::cout << txt.str();
  return kExitOk;
}

int cmd_timing(Ctx& ctx) {
  const std::vector<int> sizes =
      ctx.cfg.get_int_list_or("timing.sizes", {1000, 5000, 10000});
  if (sizes.empty()) throw ConfigError("timing.sizes must be nonempty");
  const int iterations = int(ctx.cfg.get_int_or("timing.iterations", 30));
  const int epochs = int(ctx.cfg.get_int_or("timing.epochs", 2));

  std::ostringstream csv;
  csv << "nodes,teacher_sec,student_sec\n";
  double prev_teacher = 0.0;
  bool monotone = true;
  for (int n : sizes) {
    if (n < 10) throw ConfigError("timing sizes must be >= 10");
    Graph g = erdos_renyi(NodeId(n), std::uint64_t(n) * 5,
                          hash_mix(ctx.seed, std::uint64_t(n)));
    const DiffusionSpec spec = DiffusionSpec::ic();
    TrainingCorpus corpus = build_corpus(g, spec, {0.1}, 8, 10,
                                         hash_mix(ctx.corpus_seed(), n));
    ModelArch arch;
    arch.encoder_hidden = {256, 256};
    arch.student_hidden = {128};
    TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = 8;
    tc.rng_seed = ctx.train_seed();
    TrainResult tr = train(g, corpus, arch, tc);

    InferenceConfig icfg;
    icfg.iterations = iterations;
    const BudgetConstraint budget = BudgetConstraint::count(
        std::max<std::uint32_t>(1, std::uint32_t(n / 10)));

    icfg.scorer = InferenceConfig::Scorer::Teacher;
    Stopwatch t_teacher;
    infer(tr.bundle, g, budget, icfg, corpus);
    const double teacher_sec = t_teacher.seconds();

    icfg.scorer = InferenceConfig::Scorer::Student;
    Stopwatch t_student;
    infer(tr.bundle, g, budget, icfg, corpus);
    const double student_sec = t_student.seconds();

    csv << n << "," << teacher_sec << "," << student_sec << "\n";
    std::cout << "timing n=" << n << ": teacher " << teacher_sec
              << "s, student " << student_sec << "s\n";
    if (student_sec >= teacher_sec) {
      std::cerr << "timing violation: student scorer not faster at n=" << n
                << "\n";
      write_text_atomic(ctx.out / "timing.csv", csv.str());
      return 1;
    }
    if (teacher_sec < prev_teacher) monotone = false;
    prev_teacher = teacher_sec;
  }
  write_text_atomic(ctx.out / "timing.csv", csv.str());
  if (!monotone) {
    std::cout << "note: teacher runtime not monotone across sizes\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"influence-maximization laboratory pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "run";
  std::uint64_t seed = 42;
  bool seed_given = false;
  app.add_option("--config", config_path, "experiment config file");
  app.add_option("--out", out_dir, "output directory (default: run)");
  app.add_option("--seed", seed, "master rng seed (overrides config)")
      ->each([&](const std::string&) { seed_given = true; });

  const char* stages[] = {"gen-graph", "gen-data", "train",  "infer",
                          "baseline",  "evaluate", "report", "timing"};
  for (const char* s : stages) app.add_subcommand(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    Ctx ctx;
    if (!config_path.empty()) ctx.cfg = Config::parse_file(config_path);
    ctx.out = out_dir;
    ctx.seed = seed_given ? seed : ctx.cfg.get_seed_or("experiment.seed", seed);
    fs::create_directories(ctx.out);

    const std::string stage = app.get_subcommands().front()->get_name();
    if (stage == "gen-graph") return cmd_gen_graph(ctx);
    if (stage == "gen-data") return cmd_gen_data(ctx);
    if (stage == "train") return cmd_train(ctx);
    if (stage == "infer") return cmd_infer(ctx);
    if (stage == "baseline") return cmd_baseline(ctx);
    if (stage == "evaluate") return cmd_evaluate(ctx);
    if (stage == "report") return cmd_report(ctx);
    if (stage == "timing") return cmd_timing(ctx);
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ArtifactError& e) {
    std::cerr << "artifact error: " << e.what() << "\n";
    return kExitArtifact;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
