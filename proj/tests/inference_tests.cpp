#include <numeric>
#include <random>

#include "deepim/inference.hpp"
#include "deepim/trainer.hpp"
#include "doctest.h"

using namespace deepim;

namespace {

ModelArch tiny_arch() {
  ModelArch a;
  a.encoder_hidden = {32, 16};
  a.attn_layers = 2;
  a.heads = 2;
  a.head_dim = 8;
  a.student_hidden = {12};
  return a;
}

Graph star(NodeId leaves) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId v = 1; v <= leaves; ++v) {
    edges.emplace_back(0, v);
    edges.emplace_back(v, 0);
  }
  return Graph::from_edges(leaves + 1, std::move(edges), true);
}

struct Trained {
  Graph g = erdos_renyi(20, 60, 3);
  TrainingCorpus corpus =
      build_corpus(g, DiffusionSpec::ic(), {0.2, 0.5}, 4, 10, 5);
  ModelBundle bundle;

  Trained() {
    TrainConfig cfg;
    cfg.pretrain_epochs = 40;
    cfg.epochs = 3;
    cfg.rng_seed = 2;
    bundle = train(g, corpus, tiny_arch(), cfg).bundle;
  }
};

}  // namespace

TEST_CASE("budget constraint validation and satisfaction") {
  Graph g = erdos_renyi(5, 10, 1);
  CHECK_THROWS_AS(BudgetConstraint::count(0).validate(g), std::invalid_argument);
  CHECK_THROWS_AS(BudgetConstraint::generic({1, 1, 1}, 1.0).validate(g),
                  std::invalid_argument);
  CHECK_THROWS_AS(BudgetConstraint::generic({1, 1, 1, 1, -1}, 1.0).validate(g),
                  std::invalid_argument);
  // No node affordable.
  CHECK_THROWS_AS(BudgetConstraint::generic({5, 5, 5, 5, 5}, 1.0).validate(g),
                  std::invalid_argument);

  BudgetConstraint c = BudgetConstraint::count(2);
  CHECK(c.satisfied(SeedSet::from_indices(5, {0, 3}), g));
  CHECK(!c.satisfied(SeedSet::from_indices(5, {0, 1, 3}), g));
  CHECK(c.node_costs(g) == std::vector<double>(5, 1.0));
  CHECK(to_string(BudgetConstraint::Kind::DegreeSum) == "degree-sum");
}

TEST_CASE("count projection keeps the top probabilities") {
  Graph g = erdos_renyi(3, 4, 1);
  SeedSet s = project_phi({0.9, 0.1, 0.5}, BudgetConstraint::count(2), g);
  CHECK(s == SeedSet::from_indices(3, {0, 2}));
  // Ties break toward the lower id.
  SeedSet t = project_phi({0.5, 0.5, 0.5}, BudgetConstraint::count(2), g);
  CHECK(t == SeedSet::from_indices(3, {0, 1}));
  CHECK_THROWS_AS(project_phi({0.5, 0.5}, BudgetConstraint::count(1), g),
                  std::invalid_argument);
}

TEST_CASE("degree-sum projection favors cheap leaves over the hub") {
  Graph g = star(6);  // hub costs 6, each leaf costs 1
  std::vector<double> x(7, 0.5);
  x[0] = 0.9;  // hub has the best probability but a poor ratio
  SeedSet s = project_phi(x, BudgetConstraint::degree_sum(4.0), g);
  CHECK(s == SeedSet::from_indices(7, {1, 2, 3, 4}));
  CHECK(BudgetConstraint::degree_sum(4.0).satisfied(s, g));
}

TEST_CASE("zero-cost nodes ride along for free") {
  Graph g = Graph::from_edges(3, {{0, 1}});  // out-degrees 1, 0, 0
  SeedSet s = project_phi({0.9, 0.4, 0.3}, BudgetConstraint::degree_sum(1.0), g);
  CHECK(s == SeedSet::all(3));
}

TEST_CASE("projection output is always feasible") {
  std::mt19937_64 rng(8);
  Graph g = erdos_renyi(30, 120, 4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(30);
    for (double& v : x) v = std::uniform_real_distribution<double>(0, 1)(rng);
    const double k = std::uniform_real_distribution<double>(1.0, 40.0)(rng);
    for (auto c : {BudgetConstraint::count(std::uint32_t(k)),
                   BudgetConstraint::degree_sum(k)}) {
      SeedSet s = project_phi(x, c, g);
      CHECK(c.satisfied(s, g));
    }
  }
}

TEST_CASE("inference config validation") {
  InferenceConfig c;
  CHECK_NOTHROW(c.validate());
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.iterations = 10;
  c.lr = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(scorer_from_string("student") == InferenceConfig::Scorer::Student);
  CHECK(to_string(InferenceConfig::Scorer::Teacher) == "teacher");
  CHECK_THROWS_AS(scorer_from_string("oracle"), std::invalid_argument);
}

TEST_CASE("initial latent is the mean encoded corpus point") {
  Trained t;
  ag::Matrix z = init_latent(t.bundle, t.corpus);
  REQUIRE(z.rows() == 1);
  REQUIRE(z.cols() == 16);

  // Single-pair corpus: the mean is just that pair's encoding.
  TrainingCorpus one = t.corpus;
  one.pairs.resize(1);
  ag::Matrix x = ag::Matrix::Zero(1, 20);
  for (NodeId id : one.pairs[0].seed_indices) x(0, id) = 1.0;
  CHECK(init_latent(t.bundle, one) == encode_value(t.bundle, x));

  // Permutation invariance of the mean.
  TrainingCorpus shuffled = t.corpus;
  std::reverse(shuffled.pairs.begin(), shuffled.pairs.end());
  ag::Matrix zs = init_latent(t.bundle, shuffled);
  CHECK((zs - z).cwiseAbs().maxCoeff() < 1e-12);

  TrainingCorpus empty = t.corpus;
  empty.pairs.clear();
  CHECK_THROWS_AS(init_latent(t.bundle, empty), std::invalid_argument);
}

TEST_CASE("latent search returns a feasible set of the requested size") {
  Trained t;
  InferenceConfig cfg;
  cfg.iterations = 20;
  for (std::uint32_t k : {1u, 4u, 20u}) {
    auto c = BudgetConstraint::count(k);
    InferenceResult r = infer(t.bundle, t.g, c, cfg, t.corpus);
    CHECK(r.seeds.count == k);
    CHECK(c.satisfied(r.seeds, t.g));
    CHECK(r.trajectory.size() == 20);
  }
  auto ds = BudgetConstraint::degree_sum(9.0);
  InferenceResult r = infer(t.bundle, t.g, ds, cfg, t.corpus);
  CHECK(ds.satisfied(r.seeds, t.g));
}

TEST_CASE("inference leaves the model untouched and repeats exactly") {
  Trained t;
  const std::uint64_t before = bundle_fingerprint(t.bundle);
  InferenceConfig cfg;
  cfg.iterations = 15;
  InferenceResult a = infer(t.bundle, t.g, BudgetConstraint::count(5), cfg, t.corpus);
  CHECK(bundle_fingerprint(t.bundle) == before);
  InferenceResult b = infer(t.bundle, t.g, BudgetConstraint::count(5), cfg, t.corpus);
  CHECK(a.seeds == b.seeds);
  CHECK(a.trajectory == b.trajectory);
}

TEST_CASE("multi-start search keeps the model-preferred feasible set") {
  Trained t;
  InferenceConfig cfg;
  cfg.iterations = 15;
  const auto c = BudgetConstraint::count(4);
  CHECK_THROWS_AS(infer_multistart(t.bundle, t.g, c, cfg, t.corpus, -1),
                  std::invalid_argument);

  InferenceResult a = infer_multistart(t.bundle, t.g, c, cfg, t.corpus, 3);
  CHECK(a.seeds.count == 4);
  CHECK(c.satisfied(a.seeds, t.g));
  InferenceResult b = infer_multistart(t.bundle, t.g, c, cfg, t.corpus, 3);
  CHECK(a.seeds == b.seeds);

  // Selection never scores below the single-start result.
  const AttnGraph attn = AttnGraph::build(t.g);
  auto model_score = [&](const SeedSet& s) {
    ag::Matrix x = ag::Matrix::Zero(20, 1);
    for (NodeId v : s.indices()) x(v, 0) = 1.0;
    return tau_value(t.bundle, attn, x).sum();
  };
  InferenceResult single = infer(t.bundle, t.g, c, cfg, t.corpus);
  CHECK(model_score(a.seeds) >= model_score(single.seeds) - 1e-12);
}

TEST_CASE("student scorer also yields feasible seeds") {
  Trained t;
  InferenceConfig cfg;
  cfg.iterations = 15;
  cfg.scorer = InferenceConfig::Scorer::Student;
  InferenceResult r = infer(t.bundle, t.g, BudgetConstraint::count(5), cfg, t.corpus);
  CHECK(r.seeds.count == 5);
}

TEST_CASE("inference rejects a bundle from another graph") {
  Trained t;
  Graph other = erdos_renyi(20, 60, 99);
  InferenceConfig cfg;
  cfg.iterations = 5;
  CHECK_THROWS_AS(infer(t.bundle, other, BudgetConstraint::count(2), cfg, t.corpus),
                  std::invalid_argument);
}
