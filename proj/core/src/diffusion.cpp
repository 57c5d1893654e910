#include "deepim/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "deepim/hash.hpp"

namespace deepim {

std::string to_string(DiffusionModel m) {
  switch (m) {
    case DiffusionModel::IC: return "ic";
    case DiffusionModel::LT: return "lt";
    case DiffusionModel::SIS: return "sis";
  }
  return "?";
}

DiffusionModel diffusion_model_from_string(const std::string& s) {
  if (s == "ic") return DiffusionModel::IC;
  if (s == "lt") return DiffusionModel::LT;
  if (s == "sis") return DiffusionModel::SIS;
  throw std::invalid_argument("unknown diffusion model: " + s);
}

void DiffusionSpec::validate() const {
  auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in01(lt_threshold_low) || !in01(lt_threshold_high) ||
      lt_threshold_low > lt_threshold_high) {
    throw std::invalid_argument("LT thresholds must satisfy 0 <= low <= high <= 1");
  }
  if (!in01(sis_infect_prob) || !in01(sis_recover_prob)) {
    throw std::invalid_argument("SIS probabilities must lie in [0, 1]");
  }
  if (sis_horizon < 1) throw std::invalid_argument("SIS horizon must be >= 1");
}

DiffusionSpec DiffusionSpec::lt(double lo, double hi) {
  DiffusionSpec s;
  s.model = DiffusionModel::LT;
  s.lt_threshold_low = lo;
  s.lt_threshold_high = hi;
  s.validate();
  return s;
}

DiffusionSpec DiffusionSpec::sis(double infect, double recover, std::uint32_t horizon) {
  DiffusionSpec s;
  s.model = DiffusionModel::SIS;
  s.sis_infect_prob = infect;
  s.sis_recover_prob = recover;
  s.sis_horizon = horizon;
  s.validate();
  return s;
}

SeedSet SeedSet::from_indices(NodeId n, const std::vector<NodeId>& ids) {
  SeedSet s(n);
  for (NodeId id : ids) {
    if (id >= n) throw std::out_of_range("seed index out of range");
    if (!s.mask[id]) {
      s.mask[id] = 1;
      ++s.count;
    }
  }
  return s;
}

SeedSet SeedSet::all(NodeId n) {
  SeedSet s(n);
  std::fill(s.mask.begin(), s.mask.end(), 1);
  s.count = n;
  return s;
}

std::vector<NodeId> SeedSet::indices() const {
  std::vector<NodeId> out;
  out.reserve(count);
  for (NodeId i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

namespace {

void check_seeds(const Graph& g, const SeedSet& seeds) {
  if (seeds.size() != g.node_count()) {
    throw std::invalid_argument("seed vector length does not match graph");
  }
}

constexpr std::uint64_t kIcTag = 0x6963;   // coin key domain separators
constexpr std::uint64_t kLtTag = 0x6c74;
constexpr std::uint64_t kSisTag = 0x736973;

}  // namespace

InfectionOutcome ic_simulate(const Graph& g, const SeedSet& seeds,
                             std::uint64_t world_seed) {
  check_seeds(g, seeds);
  InfectionOutcome out;
  out.infected.assign(g.node_count(), 0);
  std::vector<NodeId> frontier = seeds.indices();
  for (NodeId s : frontier) out.infected[s] = 1;
  out.spread = seeds.count;

  const std::uint64_t key = hash_mix(world_seed, kIcTag);
  std::vector<NodeId> next;
  while (!frontier.empty()) {
    next.clear();
    for (NodeId u : frontier) {
      std::uint64_t edge_id = g.out_edge_begin(u);
      for (NodeId v : g.out_neighbors(u)) {
        // Coin attached to the edge, not the draw order: S vs T comparisons
        // under one world_seed share per-edge outcomes.
        if (!out.infected[v] &&
            hash_unit(key, edge_id) < 1.0 / double(g.in_degree(v))) {
          out.infected[v] = 1;
          ++out.spread;
          next.push_back(v);
        }
        ++edge_id;
      }
    }
    frontier.swap(next);
  }
  out.final_infected = out.infected;
  out.final_count = out.spread;
  return out;
}

InfectionOutcome lt_simulate(const Graph& g, const SeedSet& seeds,
                             const std::vector<double>& thresholds) {
  check_seeds(g, seeds);
  if (thresholds.size() != g.node_count()) {
    throw std::invalid_argument("threshold vector length does not match graph");
  }
  for (double t : thresholds) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw std::invalid_argument("LT threshold out of [0, 1]");
    }
  }
  InfectionOutcome out;
  out.infected.assign(g.node_count(), 0);
  std::vector<double> weight_in(g.node_count(), 0.0);
  std::vector<NodeId> frontier = seeds.indices();
  for (NodeId s : frontier) out.infected[s] = 1;
  out.spread = seeds.count;

  std::vector<NodeId> next;
  while (!frontier.empty()) {
    next.clear();
    for (NodeId u : frontier) {
      for (NodeId v : g.out_neighbors(u)) {
        if (out.infected[v]) continue;
        weight_in[v] += 1.0 / double(g.in_degree(v));
        if (weight_in[v] >= thresholds[v]) {
          out.infected[v] = 1;
          ++out.spread;
          next.push_back(v);
        }
      }
    }
    frontier.swap(next);
  }
  out.final_infected = out.infected;
  out.final_count = out.spread;
  return out;
}

std::vector<double> draw_lt_thresholds(const Graph& g, const DiffusionSpec& spec,
                                       std::uint64_t rng_seed) {
  std::vector<double> t(g.node_count());
  const std::uint64_t key = hash_mix(rng_seed, kLtTag);
  const double lo = spec.lt_threshold_low, hi = spec.lt_threshold_high;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    t[v] = lo + (hi - lo) * hash_unit(key, v);
  }
  return t;
}

InfectionOutcome sis_simulate(const Graph& g, const SeedSet& seeds,
                              const DiffusionSpec& spec, std::uint64_t rng_seed) {
  check_seeds(g, seeds);
  spec.validate();
  InfectionOutcome out;
  out.infected.assign(g.node_count(), 0);
  out.final_infected.assign(g.node_count(), 0);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    out.final_infected[i] = seeds.mask[i];
    out.infected[i] = seeds.mask[i];
  }
  out.spread = seeds.count;

  std::mt19937_64 rng(hash_mix(rng_seed, kSisTag));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double p = spec.sis_infect_prob;
  const double q = spec.sis_recover_prob;
  // With p small, skip directly to the next successful neighbor instead of
  // drawing one coin per edge.
  const double log1mp = p > 0.0 && p < 1.0 ? std::log1p(-p) : 0.0;

  std::vector<std::uint8_t> next = out.final_infected;
  for (std::uint32_t step = 0; step < spec.sis_horizon; ++step) {
    bool any = false;
    for (NodeId u = 0; u < g.node_count(); ++u) {
      if (!out.final_infected[u]) continue;
      any = true;
      auto nbrs = g.out_neighbors(u);
      if (p >= 1.0) {
        for (NodeId v : nbrs) {
          next[v] = 1;
          if (!out.infected[v]) {
            out.infected[v] = 1;
            ++out.spread;
          }
        }
      } else if (p > 0.0) {
        std::size_t j = std::size_t(std::floor(std::log(1.0 - unit(rng)) / log1mp));
        while (j < nbrs.size()) {
          NodeId v = nbrs[j];
          next[v] = 1;
          if (!out.infected[v]) {
            out.infected[v] = 1;
            ++out.spread;
          }
          j += 1 + std::size_t(std::floor(std::log(1.0 - unit(rng)) / log1mp));
        }
      }
      if (unit(rng) < q) next[u] = 0;
    }
    if (!any) break;
    std::copy(next.begin(), next.end(), out.final_infected.begin());
  }
  out.final_count = 0;
  for (auto f : out.final_infected) out.final_count += f;
  return out;
}

InfectionOutcome simulate(const Graph& g, const SeedSet& seeds,
                          const DiffusionSpec& spec, std::uint64_t round_seed) {
  switch (spec.model) {
    case DiffusionModel::IC:
      return ic_simulate(g, seeds, round_seed);
    case DiffusionModel::LT:
      return lt_simulate(g, seeds, draw_lt_thresholds(g, spec, round_seed));
    case DiffusionModel::SIS:
      return sis_simulate(g, seeds, spec, round_seed);
  }
  throw std::logic_error("unreachable");
}

SpreadEstimate mc_estimate(const Graph& g, const SeedSet& seeds,
                           const DiffusionSpec& spec, std::uint32_t rounds,
                           std::uint64_t rng_seed) {
  if (rounds < 1) throw std::invalid_argument("mc_estimate: rounds must be >= 1");
  check_seeds(g, seeds);
  spec.validate();

  SpreadEstimate est;
  est.rounds = rounds;
  est.node_frequency.assign(g.node_count(), 0.0);
  double sum = 0.0, sum_sq = 0.0;
  for (std::uint32_t r = 0; r < rounds; ++r) {
    InfectionOutcome o = simulate(g, seeds, spec, hash_mix(rng_seed, r));
    sum += o.spread;
    sum_sq += double(o.spread) * double(o.spread);
    for (NodeId i = 0; i < g.node_count(); ++i) {
      est.node_frequency[i] += o.infected[i];
    }
  }
  for (double& f : est.node_frequency) f /= rounds;
  est.mean_spread = sum / rounds;
  if (rounds > 1) {
    double var = (sum_sq - sum * sum / rounds) / (rounds - 1);
    est.spread_stddev = std::sqrt(std::max(0.0, var));
  }
  return est;
}

double exact_ic_spread(const Graph& g, const SeedSet& seeds) {
  check_seeds(g, seeds);
  const std::uint64_t m = g.edge_count();
  if (m > 20) {
    throw std::invalid_argument(
        "exact_ic_spread enumerates 2^|E| worlds and refuses |E| > 20");
  }
  // Flatten the edge list once; world w keeps edge e live iff bit e is set.
  struct E { NodeId u, v; double p; };
  std::vector<E> edges;
  edges.reserve(m);
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (NodeId v : g.out_neighbors(u)) {
      edges.push_back({u, v, 1.0 / double(g.in_degree(v))});
    }
  }

  const std::vector<NodeId> seed_ids = seeds.indices();
  double expected = 0.0;
  std::vector<std::uint8_t> reached(g.node_count());
  std::vector<NodeId> stack;
  std::vector<std::vector<NodeId>> live_adj(g.node_count());
  for (std::uint64_t world = 0; world < (1ULL << m); ++world) {
    double prob = 1.0;
    for (auto& a : live_adj) a.clear();
    for (std::uint64_t e = 0; e < m; ++e) {
      if (world & (1ULL << e)) {
        prob *= edges[e].p;
        live_adj[edges[e].u].push_back(edges[e].v);
      } else {
        prob *= 1.0 - edges[e].p;
      }
    }
    std::fill(reached.begin(), reached.end(), 0);
    stack.assign(seed_ids.begin(), seed_ids.end());
    for (NodeId s : seed_ids) reached[s] = 1;
    std::uint32_t n_reached = std::uint32_t(seed_ids.size());
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId v : live_adj[u]) {
        if (!reached[v]) {
          reached[v] = 1;
          ++n_reached;
          stack.push_back(v);
        }
      }
    }
    expected += prob * n_reached;
  }
  return expected;
}

}  // namespace deepim
