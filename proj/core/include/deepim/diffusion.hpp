#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepim/graph.hpp"

namespace deepim {

enum class DiffusionModel { IC, LT, SIS };

std::string to_string(DiffusionModel m);
DiffusionModel diffusion_model_from_string(const std::string& s);

/// IC is the weighted-cascade variant: edge (u,v) succeeds with 1/in_degree(v).
/// LT draws per-node thresholds uniformly from [threshold_low, threshold_high]
/// with edge weights 1/in_degree(v). SIS runs a fixed horizon.
struct DiffusionSpec {
  DiffusionModel model = DiffusionModel::IC;
  double lt_threshold_low = 0.3;
  double lt_threshold_high = 0.6;
  double sis_infect_prob = 0.001;
  double sis_recover_prob = 0.001;
  std::uint32_t sis_horizon = 100;

  void validate() const;

  static DiffusionSpec ic() { return {}; }
  static DiffusionSpec lt(double lo = 0.3, double hi = 0.6);
  static DiffusionSpec sis(double infect = 0.001, double recover = 0.001,
                           std::uint32_t horizon = 100);
};

/// Length-|V| seed indicator.
struct SeedSet {
  explicit SeedSet(NodeId n) : mask(n, 0) {}
  SeedSet() = default;

  static SeedSet from_indices(NodeId n, const std::vector<NodeId>& ids);
  static SeedSet all(NodeId n);

  std::vector<std::uint8_t> mask;
  std::uint32_t count = 0;

  NodeId size() const { return static_cast<NodeId>(mask.size()); }
  std::vector<NodeId> indices() const;
  bool operator==(const SeedSet&) const = default;
};

struct InfectionOutcome {
  std::vector<std::uint8_t> infected;        // ever infected
  std::uint32_t spread = 0;                  // = count of infected flags
  std::vector<std::uint8_t> final_infected;  // SIS: infected at the last step
  std::uint32_t final_count = 0;
};

struct SpreadEstimate {
  double mean_spread = 0.0;
  double spread_stddev = 0.0;  // sample stddev over rounds
  std::uint32_t rounds = 0;
  std::vector<double> node_frequency;
};

/// One IC realization. Coins are derived from hash(world_seed, edge id),
/// so two seed sets simulated under the same world_seed share per-edge
/// outcomes exactly (common random numbers).
InfectionOutcome ic_simulate(const Graph& g, const SeedSet& seeds,
                             std::uint64_t world_seed);

/// Deterministic LT fixpoint for the given thresholds; edge weights are
/// 1/in_degree(v). Throws if any threshold leaves [0, 1].
InfectionOutcome lt_simulate(const Graph& g, const SeedSet& seeds,
                             const std::vector<double>& thresholds);

std::vector<double> draw_lt_thresholds(const Graph& g, const DiffusionSpec& spec,
                                       std::uint64_t rng_seed);

/// SIS for exactly spec.sis_horizon synchronous steps. `infected` /
/// `spread` report ever-infected; `final_*` the last-step state.
InfectionOutcome sis_simulate(const Graph& g, const SeedSet& seeds,
                              const DiffusionSpec& spec, std::uint64_t rng_seed);

InfectionOutcome simulate(const Graph& g, const SeedSet& seeds,
                          const DiffusionSpec& spec, std::uint64_t round_seed);

/// Monte-Carlo estimate over `rounds` independent simulations; round r uses
/// seed hash(rng_seed, r), so results are bit-reproducible.
SpreadEstimate mc_estimate(const Graph& g, const SeedSet& seeds,
                           const DiffusionSpec& spec, std::uint32_t rounds,
                           std::uint64_t rng_seed);

/// Exact expected IC spread by enumerating all 2^|E| live-edge worlds.
/// Refuses graphs with more than 20 edges.
double exact_ic_spread(const Graph& g, const SeedSet& seeds);

}  // namespace deepim
