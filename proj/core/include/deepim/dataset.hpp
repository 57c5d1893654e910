#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "deepim/diffusion.hpp"
#include "deepim/graph.hpp"

namespace deepim {

/// One supervised example: seed indicator x, empirical per-node infection
/// frequency, and the mean spread from mc_estimate.
struct TrainingPair {
  std::vector<NodeId> seed_indices;
  std::vector<double> node_frequency;
  double spread = 0.0;

  SeedSet seeds(NodeId n) const { return SeedSet::from_indices(n, seed_indices); }
};

struct TrainingCorpus {
  std::uint64_t graph_hash = 0;
  NodeId node_count = 0;
  DiffusionSpec spec;
  std::vector<double> fractions;
  std::uint32_t sets_per_fraction = 0;
  std::uint32_t rounds = 0;
  std::uint64_t rng_seed = 0;
  bool degree_biased = false;
  std::vector<TrainingPair> pairs;
};

/// `count` independent seed sets of round(fraction * |V|) distinct nodes.
/// Uniform by default; degree_biased samples without replacement with
/// probability proportional to degree + 1.
std::vector<SeedSet> sample_seed_sets(const Graph& g, double fraction,
                                      std::uint32_t count, std::uint64_t rng_seed,
                                      bool degree_biased = false);

TrainingCorpus build_corpus(const Graph& g, const DiffusionSpec& spec,
                            const std::vector<double>& fractions,
                            std::uint32_t sets_per_fraction, std::uint32_t rounds,
                            std::uint64_t rng_seed, bool degree_biased = false);

void save_corpus(const TrainingCorpus& c, const std::filesystem::path& path);
TrainingCorpus load_corpus(const std::filesystem::path& path);

}  // namespace deepim
