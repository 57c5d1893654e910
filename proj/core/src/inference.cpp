#include "deepim/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace deepim {

BudgetConstraint BudgetConstraint::count(std::uint32_t k) {
  BudgetConstraint c;
  c.kind = Kind::Count;
  c.k = double(k);
  return c;
}

BudgetConstraint BudgetConstraint::degree_sum(double k) {
  BudgetConstraint c;
  c.kind = Kind::DegreeSum;
  c.k = k;
  return c;
}

BudgetConstraint BudgetConstraint::generic(std::vector<double> cost, double k) {
  BudgetConstraint c;
  c.kind = Kind::GenericCost;
  c.cost = std::move(cost);
  c.k = k;
  return c;
}

std::string to_string(BudgetConstraint::Kind k) {
  switch (k) {
    case BudgetConstraint::Kind::Count: return "count";
    case BudgetConstraint::Kind::DegreeSum: return "degree-sum";
    case BudgetConstraint::Kind::GenericCost: return "generic-cost";
  }
  return "?";
}

std::vector<double> BudgetConstraint::node_costs(const Graph& g) const {
  switch (kind) {
    case Kind::Count: return std::vector<double>(g.node_count(), 1.0);
    case Kind::DegreeSum: return degree_costs(g);
    case Kind::GenericCost: return cost;
  }
  throw std::logic_error("unreachable");
}

void BudgetConstraint::validate(const Graph& g) const {
  if (!(k > 0.0)) throw std::invalid_argument("budget k must be positive");
  if (kind == Kind::GenericCost) {
    if (cost.size() != g.node_count()) {
      throw std::invalid_argument("cost vector length does not match graph");
    }
    for (double c : cost) {
      if (!(c >= 0.0)) throw std::invalid_argument("node costs must be >= 0");
    }
  }
  const std::vector<double> costs = node_costs(g);
  const bool affordable =
      std::any_of(costs.begin(), costs.end(), [&](double c) { return c <= k; });
  if (!affordable) {
    throw std::invalid_argument("infeasible budget: no node is affordable");
  }
}

bool BudgetConstraint::satisfied(const SeedSet& seeds, const Graph& g) const {
  const std::vector<double> costs = node_costs(g);
  double total = 0.0;
  for (NodeId i = 0; i < seeds.size(); ++i) {
    if (seeds.mask[i]) total += costs[i];
  }
  return total <= k;
}

SeedSet project_phi(const std::vector<double>& x, const BudgetConstraint& c,
                    const Graph& g) {
  if (x.size() != g.node_count()) {
    throw std::invalid_argument("probability vector length does not match graph");
  }
  c.validate(g);
  const NodeId n = g.node_count();
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<NodeId> chosen;
  if (c.kind == BudgetConstraint::Kind::Count) {
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      if (x[a] != x[b]) return x[a] > x[b];
      return a < b;
    });
    const auto k = std::min<std::size_t>(std::size_t(std::llround(c.k)), n);
    chosen.assign(order.begin(), order.begin() + std::ptrdiff_t(k));
  } else {
    const std::vector<double> costs = c.node_costs(g);
    // Zero-cost nodes are free; order them ahead of everything by
    // probability, then spend the budget by probability-per-cost.
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      const bool fa = costs[a] == 0.0, fb = costs[b] == 0.0;
      if (fa != fb) return fa;
      if (fa && fb) {
        if (x[a] != x[b]) return x[a] > x[b];
        return a < b;
      }
      const double ra = x[a] / costs[a], rb = x[b] / costs[b];
      if (ra != rb) return ra > rb;
      return a < b;
    });
    double total = 0.0;
    for (NodeId id : order) {
      if (costs[id] == 0.0) {
        chosen.push_back(id);
      } else if (total + costs[id] <= c.k) {
        total += costs[id];
        chosen.push_back(id);
      }
    }
  }
  return SeedSet::from_indices(n, chosen);
}

void InferenceConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

std::string to_string(InferenceConfig::Scorer s) {
  return s == InferenceConfig::Scorer::Teacher ? "teacher" : "student";
}

InferenceConfig::Scorer scorer_from_string(const std::string& s) {
  if (s == "teacher") return InferenceConfig::Scorer::Teacher;
  if (s == "student") return InferenceConfig::Scorer::Student;
  throw std::invalid_argument("unknown scorer: " + s);
}

ag::Matrix init_latent(ModelBundle& bundle, const TrainingCorpus& corpus) {
  if (corpus.pairs.empty()) throw std::invalid_argument("corpus is empty");
  const NodeId n = bundle.node_count;
  if (corpus.node_count != n) {
    throw std::invalid_argument("corpus node count does not match bundle");
  }
  ag::Matrix xs = ag::Matrix::Zero(Eigen::Index(corpus.pairs.size()), Eigen::Index(n));
  for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
    for (NodeId id : corpus.pairs[i].seed_indices) xs(Eigen::Index(i), id) = 1.0;
  }
  ag::Matrix z = encode_value(bundle, xs);
  return z.colwise().mean();
}

InferenceResult infer(ModelBundle& bundle, const Graph& g,
                      const BudgetConstraint& c, const InferenceConfig& cfg,
                      const TrainingCorpus& corpus, const ag::Matrix* warm_start) {
  cfg.validate();
  c.validate(g);
  if (bundle.graph_hash != g.structure_hash()) {
    throw std::invalid_argument("bundle was trained on a different graph");
  }
  const NodeId n = g.node_count();
  const double target = cfg.target_spread > 0.0 ? cfg.target_spread : double(n);
  const AttnGraph attn = AttnGraph::build(g);

  ag::Matrix z = warm_start ? *warm_start : init_latent(bundle, corpus);
  if (z.rows() != 1 || int(z.cols()) != bundle.ae.latent_dim()) {
    throw std::invalid_argument("warm-start latent has the wrong shape");
  }
  ag::AdamState zopt;
  InferenceResult res;
  res.trajectory.reserve(std::size_t(cfg.iterations));

  for (int it = 0; it < cfg.iterations; ++it) {
    ag::Tape t;
    TapedBundle tb(t, bundle, false);  // parameters frozen
    ag::Var zv = t.leaf(z, true);
    ag::Var xhat = tb.decode(zv);

    const ag::Matrix& xv = t.value(xhat);
    std::vector<double> probs(n);
    for (NodeId i = 0; i < n; ++i) probs[i] = xv(0, i);
    SeedSet projected = project_phi(probs, c, g);

    ag::Matrix xbin = ag::Matrix::Zero(1, Eigen::Index(n));
    for (NodeId i = 0; i < n; ++i) xbin(0, i) = projected.mask[i];
    // Anchor the relaxation to its own feasible rounding, and pull the
    // scorer's spread estimate toward the target.
    ag::Var loss = t.bce_loss(xhat, t.leaf(std::move(xbin)), ag::Reduction::Sum);

    double score;
    if (cfg.scorer == InferenceConfig::Scorer::Teacher) {
      ag::Var y = soft_spread(t, tb.tau(attn, t.transpose(xhat)));
      score = t.value(y)(0, 0);
      loss = t.add(loss, t.mse_loss(y, t.scalar(target), ag::Reduction::Sum));
    } else {
      ag::Var y = tb.student(zv);
      score = t.value(y)(0, 0);
      loss = t.add(loss, t.mse_loss(y, t.scalar(target), ag::Reduction::Sum));
    }
    res.trajectory.push_back(score);

    if (!std::isfinite(t.value(loss)(0, 0))) {
      throw std::runtime_error("inference diverged (non-finite loss) at iteration " +
                               std::to_string(it));
    }
    t.backward(loss);
    ag::adam_step(z, t.grad(zv), zopt, cfg.lr);
  }

  ag::Matrix xv = decode_value(bundle, z);
  std::vector<double> probs(n);
  for (NodeId i = 0; i < n; ++i) probs[i] = xv(0, i);
  res.seeds = project_phi(probs, c, g);
  res.z_final = std::move(z);
  return res;
}

InferenceResult infer_multistart(ModelBundle& bundle, const Graph& g,
                                 const BudgetConstraint& c,
                                 const InferenceConfig& cfg,
                                 const TrainingCorpus& corpus,
                                 int extra_starts) {
  if (extra_starts < 0) throw std::invalid_argument("extra_starts must be >= 0");
  const NodeId n = g.node_count();

  std::vector<ag::Matrix> starts;
  starts.push_back(init_latent(bundle, corpus));

  std::vector<const TrainingPair*> ranked;
  ranked.reserve(corpus.pairs.size());
  for (const auto& p : corpus.pairs) ranked.push_back(&p);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const TrainingPair* a, const TrainingPair* b) {
                     return a->spread > b->spread;
                   });
  auto one_hot = [n](const TrainingPair& p) {
    ag::Matrix x = ag::Matrix::Zero(1, Eigen::Index(n));
    for (NodeId id : p.seed_indices) x(0, id) = 1.0;
    return x;
  };
  if (!ranked.empty()) {
    const std::size_t decile = std::max<std::size_t>(1, ranked.size() / 10);
    ag::Matrix xs = ag::Matrix::Zero(Eigen::Index(decile), Eigen::Index(n));
    for (std::size_t i = 0; i < decile; ++i) {
      for (NodeId id : ranked[i]->seed_indices) xs(Eigen::Index(i), id) = 1.0;
    }
    starts.push_back(encode_value(bundle, xs).colwise().mean());
    for (std::size_t j = 0; j < std::size_t(extra_starts) && j < ranked.size(); ++j) {
      starts.push_back(encode_value(bundle, one_hot(*ranked[j])));
    }
  }

  const AttnGraph attn = AttnGraph::build(g);

  // Greedy-by-marginals candidate: rank nodes by the surrogate's singleton
  // soft spread and project that ranking onto the budget. The encoded set
  // also joins the starts; the set itself stays in the selection pool
  // because the autoencoder cannot always represent it.
  std::vector<double> singleton(n);
  for (NodeId v = 0; v < n; ++v) {
    ag::Matrix x = ag::Matrix::Zero(Eigen::Index(n), 1);
    x(v, 0) = 1.0;
    singleton[v] = tau_value(bundle, attn, x).sum();
  }
  const SeedSet heuristic = project_phi(singleton, c, g);
  ag::Matrix heuristic_x = ag::Matrix::Zero(1, Eigen::Index(n));
  for (NodeId v : heuristic.indices()) heuristic_x(0, v) = 1.0;
  const ag::Matrix heuristic_z = encode_value(bundle, heuristic_x);
  starts.push_back(heuristic_z);
  auto score_set = [&](const SeedSet& s) {
    if (cfg.scorer == InferenceConfig::Scorer::Student) {
      ag::Matrix x = ag::Matrix::Zero(1, Eigen::Index(n));
      for (NodeId v : s.indices()) x(0, v) = 1.0;
      return student_value(bundle, encode_value(bundle, x));
    }
    ag::Matrix x = ag::Matrix::Zero(Eigen::Index(n), 1);
    for (NodeId v : s.indices()) x(v, 0) = 1.0;
    return tau_value(bundle, attn, x).sum();
  };

  InferenceResult best;
  best.seeds = heuristic;
  best.z_final = heuristic_z;
  double best_score = score_set(heuristic);
  for (const ag::Matrix& z0 : starts) {
    InferenceResult r = infer(bundle, g, c, cfg, corpus, &z0);
    const double s = score_set(r.seeds);
    if (s > best_score) {
      best_score = s;
      best = std::move(r);
    }
  }
  return best;
}

}  // namespace deepim
