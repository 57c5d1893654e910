#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepim/diffusion.hpp"
#include "deepim/inference.hpp"

namespace deepim {

/// Spread estimator over a fixed panel of random worlds, shared across
/// every query: comparisons between candidate sets (and between greedy
/// and CELF) are exact, not statistical. IC worlds are materialized as
/// live-edge adjacency, LT worlds as threshold vectors; SIS re-simulates
/// per world with per-world seeds.
class SpreadEvaluator {
 public:
  SpreadEvaluator(const Graph& g, const DiffusionSpec& spec, std::uint32_t rounds,
                  std::uint64_t rng_seed);

  double evaluate(const SeedSet& seeds);
  std::uint64_t eval_count() const { return evals_; }
  const Graph& graph() const { return g_; }

 private:
  const Graph& g_;
  DiffusionSpec spec_;
  std::uint32_t rounds_;
  std::uint64_t rng_seed_;
  std::uint64_t evals_ = 0;
  // IC: per-world live out-adjacency in CSR form.
  std::vector<std::vector<std::uint32_t>> live_offsets_;
  std::vector<std::vector<NodeId>> live_targets_;
  // LT: per-world thresholds.
  std::vector<std::vector<double>> thresholds_;
};

struct BaselineResult {
  std::string method;
  SeedSet seeds;
  double estimated_spread = 0.0;
  std::vector<double> marginal_gains;
  std::uint64_t evaluations = 0;
  double wall_time_sec = 0.0;  // reported separately; never hashed
};

/// Hill-climbing: repeatedly add the affordable node with the largest
/// marginal gain on the shared world panel; ties to the lower id.
BaselineResult greedy(const Graph& g, const BudgetConstraint& c,
                      const DiffusionSpec& spec, std::uint32_t rounds,
                      std::uint64_t rng_seed);

/// Lazy greedy: stale gains in a max-priority queue, only the top gets
/// re-evaluated. Whenever the panel spread is submodular (always true for
/// live-edge worlds, i.e. IC) the selected set equals greedy's exactly,
/// with fewer evaluations; fixed-threshold worlds carry no such guarantee.
BaselineResult celf(const Graph& g, const BudgetConstraint& c,
                    const DiffusionSpec& spec, std::uint32_t rounds,
                    std::uint64_t rng_seed);

/// Highest total-degree affordable nodes; ties to the lower id.
BaselineResult degree_topk(const Graph& g, const BudgetConstraint& c);

/// Reverse-reachable set sampling: k nodes by greedy max coverage over
/// num_rr_sets sampled RR sets; spread estimate |V| * covered fraction.
/// IC only.
BaselineResult ris_greedy(const Graph& g, std::uint32_t k,
                          std::uint32_t num_rr_sets, const DiffusionSpec& spec,
                          std::uint64_t rng_seed);

}  // namespace deepim
