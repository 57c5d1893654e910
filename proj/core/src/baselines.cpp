#include "deepim/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <queue>
#include <random>
#include <stdexcept>

#include "deepim/hash.hpp"

namespace deepim {

namespace {

constexpr std::uint64_t kIcTag = 0x6963;  // must match the simulator's keying

double elapsed_sec(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

SpreadEvaluator::SpreadEvaluator(const Graph& g, const DiffusionSpec& spec,
                                 std::uint32_t rounds, std::uint64_t rng_seed)
    : g_(g), spec_(spec), rounds_(rounds), rng_seed_(rng_seed) {
  if (rounds < 1) throw std::invalid_argument("evaluator needs rounds >= 1");
  spec.validate();
  if (spec.model == DiffusionModel::IC) {
    live_offsets_.resize(rounds);
    live_targets_.resize(rounds);
    for (std::uint32_t r = 0; r < rounds; ++r) {
      const std::uint64_t key = hash_mix(hash_mix(rng_seed, r), kIcTag);
      auto& offs = live_offsets_[r];
      auto& tgts = live_targets_[r];
      offs.assign(g.node_count() + 1, 0);
      for (NodeId u = 0; u < g.node_count(); ++u) {
        offs[u] = std::uint32_t(tgts.size());
        std::uint64_t edge_id = g.out_edge_begin(u);
        for (NodeId v : g.out_neighbors(u)) {
          if (hash_unit(key, edge_id) < 1.0 / double(g.in_degree(v))) {
            tgts.push_back(v);
          }
          ++edge_id;
        }
      }
      offs[g.node_count()] = std::uint32_t(tgts.size());
    }
  } else if (spec.model == DiffusionModel::LT) {
    thresholds_.resize(rounds);
    for (std::uint32_t r = 0; r < rounds; ++r) {
      thresholds_[r] = draw_lt_thresholds(g, spec, hash_mix(rng_seed, r));
    }
  }
}

double SpreadEvaluator::evaluate(const SeedSet& seeds) {
  ++evals_;
  double sum = 0.0;
  if (spec_.model == DiffusionModel::IC) {
    std::vector<std::uint8_t> reached(g_.node_count());
    std::vector<NodeId> stack;
    for (std::uint32_t r = 0; r < rounds_; ++r) {
      const auto& offs = live_offsets_[r];
      const auto& tgts = live_targets_[r];
      std::fill(reached.begin(), reached.end(), 0);
      stack.clear();
      std::uint32_t n_reached = 0;
      for (NodeId i = 0; i < g_.node_count(); ++i) {
        if (seeds.mask[i]) {
          reached[i] = 1;
          ++n_reached;
          stack.push_back(i);
        }
      }
      while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        for (std::uint32_t e = offs[u]; e < offs[u + 1]; ++e) {
          NodeId v = tgts[e];
          if (!reached[v]) {
            reached[v] = 1;
            ++n_reached;
            stack.push_back(v);
          }
        }
      }
      sum += n_reached;
    }
  } else if (spec_.model == DiffusionModel::LT) {
    for (std::uint32_t r = 0; r < rounds_; ++r) {
      sum += lt_simulate(g_, seeds, thresholds_[r]).spread;
    }
  } else {
    for (std::uint32_t r = 0; r < rounds_; ++r) {
      sum += sis_simulate(g_, seeds, spec_, hash_mix(rng_seed_, r)).spread;
    }
  }
  return sum / double(rounds_);
}

namespace {

struct GreedyState {
  SeedSet selected;
  double spent = 0.0;
  double base_spread = 0.0;
};

bool budget_done(const BudgetConstraint& c, const GreedyState& s,
                 const std::vector<double>& costs) {
  if (c.kind == BudgetConstraint::Kind::Count) {
    return s.selected.count >= std::uint32_t(std::llround(c.k)) ||
           s.selected.count >= s.selected.size();
  }
  for (NodeId v = 0; v < s.selected.size(); ++v) {
    if (!s.selected.mask[v] && s.spent + costs[v] <= c.k) return false;
  }
  return true;
}

BaselineResult hill_climb(const Graph& g, const BudgetConstraint& c,
                          const DiffusionSpec& spec, std::uint32_t rounds,
                          std::uint64_t rng_seed, bool lazy) {
  c.validate(g);
  const auto t0 = std::chrono::steady_clock::now();
  SpreadEvaluator eval(g, spec, rounds, rng_seed);
  const std::vector<double> costs = c.node_costs(g);
  const NodeId n = g.node_count();

  GreedyState s;
  s.selected = SeedSet(n);
  s.base_spread = eval.evaluate(s.selected);

  BaselineResult res;
  res.method = lazy ? "celf" : "greedy";

  if (!lazy) {
    while (!budget_done(c, s, costs)) {
      NodeId best = n;
      double best_gain = -1.0;
      for (NodeId v = 0; v < n; ++v) {
        if (s.selected.mask[v] || s.spent + costs[v] > c.k) continue;
        SeedSet trial = s.selected;
        trial.mask[v] = 1;
        ++trial.count;
        const double gain = eval.evaluate(trial) - s.base_spread;
        if (gain > best_gain) {
          best_gain = gain;
          best = v;
        }
      }
      if (best == n) break;
      s.selected.mask[best] = 1;
      ++s.selected.count;
      s.spent += costs[best];
      s.base_spread += best_gain;
      res.marginal_gains.push_back(best_gain);
    }
  } else {
    // (gain, id) max-queue; id ascending on ties so equal-gain picks
    // match plain greedy's lowest-id rule.
    // An entry carries the selected-set size at which its gain was
    // computed; it is trustworthy only if nothing was added since.
    struct Entry {
      double gain;
      NodeId v;
      std::uint32_t stamp;
    };
    auto cmp = [](const Entry& a, const Entry& b) {
      if (a.gain != b.gain) return a.gain < b.gain;
      return a.v > b.v;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> pq(cmp);
    for (NodeId v = 0; v < n; ++v) {
      if (costs[v] > c.k) continue;
      SeedSet trial = s.selected;
      trial.mask[v] = 1;
      ++trial.count;
      pq.push({eval.evaluate(trial) - s.base_spread, v, 0});
    }
    while (!budget_done(c, s, costs) && !pq.empty()) {
      Entry top = pq.top();
      pq.pop();
      if (s.selected.mask[top.v] || s.spent + costs[top.v] > c.k) continue;
      if (top.stamp == s.selected.count) {
        s.selected.mask[top.v] = 1;
        ++s.selected.count;
        s.spent += costs[top.v];
        s.base_spread += top.gain;
        res.marginal_gains.push_back(top.gain);
      } else {
        SeedSet trial = s.selected;
        trial.mask[top.v] = 1;
        ++trial.count;
        pq.push({eval.evaluate(trial) - s.base_spread, top.v, s.selected.count});
      }
    }
  }

  res.seeds = s.selected;
  res.estimated_spread = s.base_spread;
  res.evaluations = eval.eval_count();
  res.wall_time_sec = elapsed_sec(t0);
  return res;
}

}  // namespace

BaselineResult greedy(const Graph& g, const BudgetConstraint& c,
                      const DiffusionSpec& spec, std::uint32_t rounds,
                      std::uint64_t rng_seed) {
  return hill_climb(g, c, spec, rounds, rng_seed, false);
}

BaselineResult celf(const Graph& g, const BudgetConstraint& c,
                    const DiffusionSpec& spec, std::uint32_t rounds,
                    std::uint64_t rng_seed) {
  return hill_climb(g, c, spec, rounds, rng_seed, true);
}

BaselineResult degree_topk(const Graph& g, const BudgetConstraint& c) {
  c.validate(g);
  const auto t0 = std::chrono::steady_clock::now();
  const NodeId n = g.node_count();
  const std::vector<double> costs = c.node_costs(g);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    const std::uint64_t da = std::uint64_t(g.out_degree(a)) + g.in_degree(a);
    const std::uint64_t db = std::uint64_t(g.out_degree(b)) + g.in_degree(b);
    if (da != db) return da > db;
    return a < b;
  });

  BaselineResult res;
  res.method = "degree_topk";
  std::vector<NodeId> chosen;
  double spent = 0.0;
  const bool is_count = c.kind == BudgetConstraint::Kind::Count;
  const auto limit = is_count ? std::uint64_t(std::llround(c.k))
                              : std::uint64_t(n);
  for (NodeId v : order) {
    if (is_count) {
      if (chosen.size() >= limit) break;
      chosen.push_back(v);
    } else if (spent + costs[v] <= c.k) {
      spent += costs[v];
      chosen.push_back(v);
    }
  }
  res.seeds = SeedSet::from_indices(n, chosen);
  res.wall_time_sec = elapsed_sec(t0);
  return res;
}

BaselineResult ris_greedy(const Graph& g, std::uint32_t k,
                          std::uint32_t num_rr_sets, const DiffusionSpec& spec,
                          std::uint64_t rng_seed) {
  if (spec.model != DiffusionModel::IC) {
    throw std::invalid_argument("RIS sampling implemented for IC only");
  }
  if (num_rr_sets < 1) throw std::invalid_argument("need at least one RR set");
  if (k < 1 || k > g.node_count()) {
    throw std::invalid_argument("RIS budget k out of range");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const NodeId n = g.node_count();

  // rr_of_node[v] = indices of RR sets containing v.
  std::vector<std::vector<std::uint32_t>> rr_of_node(n);
  std::vector<std::uint8_t> in_set(n);
  std::vector<NodeId> members, stack;
  for (std::uint32_t i = 0; i < num_rr_sets; ++i) {
    std::mt19937_64 rng(hash_mix(rng_seed, i, 0x7272));  // "rr"
    std::uniform_int_distribution<NodeId> pick_root(0, n - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const NodeId root = pick_root(rng);
    members.clear();
    stack.assign(1, root);
    in_set[root] = 1;
    members.push_back(root);
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      const double p = 1.0 / double(g.in_degree(v));
      for (NodeId u : g.in_neighbors(v)) {
        if (!in_set[u] && unit(rng) < p) {
          in_set[u] = 1;
          members.push_back(u);
          stack.push_back(u);
        }
      }
    }
    for (NodeId v : members) {
      rr_of_node[v].push_back(i);
      in_set[v] = 0;
    }
  }

  // Greedy max coverage over the RR collection.
  std::vector<std::uint8_t> covered(num_rr_sets, 0);
  std::vector<std::uint32_t> gain(n);
  for (NodeId v = 0; v < n; ++v) gain[v] = std::uint32_t(rr_of_node[v].size());

  BaselineResult res;
  res.method = "ris_greedy";
  std::vector<NodeId> chosen;
  std::uint32_t total_covered = 0;
  std::vector<std::uint8_t> taken(n, 0);
  for (std::uint32_t pick = 0; pick < k; ++pick) {
    NodeId best = 0;
    std::uint32_t best_gain = 0;
    bool found = false;
    for (NodeId v = 0; v < n; ++v) {
      if (taken[v]) continue;
      if (!found || gain[v] > best_gain) {
        best = v;
        best_gain = gain[v];
        found = true;
      }
    }
    if (!found) break;
    taken[best] = 1;
    chosen.push_back(best);
    std::uint32_t newly = 0;
    for (std::uint32_t i : rr_of_node[best]) {
      if (!covered[i]) {
        covered[i] = 1;
        ++newly;
      }
    }
    total_covered += newly;
    res.marginal_gains.push_back(double(n) * double(newly) / double(num_rr_sets));
    // Refresh stale gains lazily by recount (desk scale keeps this cheap).
    for (NodeId v = 0; v < n; ++v) {
      if (taken[v]) continue;
      std::uint32_t cnt = 0;
      for (std::uint32_t i : rr_of_node[v]) {
        if (!covered[i]) ++cnt;
      }
      gain[v] = cnt;
    }
  }

  res.seeds = SeedSet::from_indices(n, chosen);
  res.estimated_spread =
      double(n) * double(total_covered) / double(num_rr_sets);
  res.wall_time_sec = elapsed_sec(t0);
  return res;
}

}  // namespace deepim
