#include "deepim/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "deepim/hash.hpp"

namespace deepim {

std::vector<SeedSet> sample_seed_sets(const Graph& g, double fraction,
                                      std::uint32_t count, std::uint64_t rng_seed,
                                      bool degree_biased) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("seed fraction must lie in (0, 1]");
  }
  const NodeId n = g.node_count();
  const auto k = static_cast<NodeId>(std::lround(fraction * double(n)));
  if (k == 0) {
    throw std::invalid_argument("seed fraction rounds to an empty seed set");
  }

  std::vector<double> weight;
  if (degree_biased) {
    weight.resize(n);
    for (NodeId i = 0; i < n; ++i) {
      weight[i] = double(g.out_degree(i)) + double(g.in_degree(i)) + 1.0;
    }
  }

  std::vector<SeedSet> sets;
  sets.reserve(count);
  for (std::uint32_t s = 0; s < count; ++s) {
    std::mt19937_64 rng(hash_mix(rng_seed, s, 0x5eed));
    std::vector<NodeId> ids;
    if (!degree_biased) {
      // Partial Fisher-Yates over [0, n).
      std::vector<NodeId> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      for (NodeId i = 0; i < k; ++i) {
        std::uniform_int_distribution<NodeId> pick(i, n - 1);
        std::swap(perm[i], perm[pick(rng)]);
        ids.push_back(perm[i]);
      }
    } else {
      std::vector<double> w = weight;
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (NodeId i = 0; i < k; ++i) {
        double total = std::accumulate(w.begin(), w.end(), 0.0);
        double target = unit(rng) * total;
        NodeId chosen = n - 1;
        for (NodeId j = 0; j < n; ++j) {
          target -= w[j];
          if (target <= 0.0 && w[j] > 0.0) {
            chosen = j;
            break;
          }
        }
        ids.push_back(chosen);
        w[chosen] = 0.0;
      }
    }
    sets.push_back(SeedSet::from_indices(n, ids));
  }
  return sets;
}

TrainingCorpus build_corpus(const Graph& g, const DiffusionSpec& spec,
                            const std::vector<double>& fractions,
                            std::uint32_t sets_per_fraction, std::uint32_t rounds,
                            std::uint64_t rng_seed, bool degree_biased) {
  spec.validate();
  if (fractions.empty()) throw std::invalid_argument("no seed fractions given");

  TrainingCorpus corpus;
  corpus.graph_hash = g.structure_hash();
  corpus.node_count = g.node_count();
  corpus.spec = spec;
  corpus.fractions = fractions;
  corpus.sets_per_fraction = sets_per_fraction;
  corpus.rounds = rounds;
  corpus.rng_seed = rng_seed;
  corpus.degree_biased = degree_biased;

  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    auto sets = sample_seed_sets(g, fractions[fi], sets_per_fraction,
                                 hash_mix(rng_seed, fi, 0xf4ac), degree_biased);
    for (std::size_t si = 0; si < sets.size(); ++si) {
      SpreadEstimate est = mc_estimate(g, sets[si], spec, rounds,
                                       hash_mix(rng_seed, fi * 100003 + si, 0x3c));
      TrainingPair pair;
      pair.seed_indices = sets[si].indices();
      pair.node_frequency = std::move(est.node_frequency);
      pair.spread = est.mean_spread;
      corpus.pairs.push_back(std::move(pair));
    }
  }
  return corpus;
}

namespace {
constexpr std::uint32_t kCorpusMagic = 0x444D4944;  // "DIMD"
constexpr std::uint32_t kCorpusVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("corpus file truncated");
  return v;
}
}  // namespace

void save_corpus(const TrainingCorpus& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus: " + path.string());
  write_pod(out, kCorpusMagic);
  write_pod(out, kCorpusVersion);
  write_pod(out, c.graph_hash);
  write_pod(out, c.node_count);
  write_pod(out, static_cast<std::uint8_t>(c.spec.model));
  write_pod(out, c.spec.lt_threshold_low);
  write_pod(out, c.spec.lt_threshold_high);
  write_pod(out, c.spec.sis_infect_prob);
  write_pod(out, c.spec.sis_recover_prob);
  write_pod(out, c.spec.sis_horizon);
  write_pod(out, std::uint32_t(c.fractions.size()));
  for (double f : c.fractions) write_pod(out, f);
  write_pod(out, c.sets_per_fraction);
  write_pod(out, c.rounds);
  write_pod(out, c.rng_seed);
  write_pod(out, static_cast<std::uint8_t>(c.degree_biased));
  write_pod(out, std::uint64_t(c.pairs.size()));
  for (const auto& p : c.pairs) {
    write_pod(out, std::uint32_t(p.seed_indices.size()));
    out.write(reinterpret_cast<const char*>(p.seed_indices.data()),
              std::streamsize(p.seed_indices.size() * sizeof(NodeId)));
    write_pod(out, std::uint8_t(p.node_frequency.empty() ? 0 : 1));
    if (!p.node_frequency.empty()) {
      out.write(reinterpret_cast<const char*>(p.node_frequency.data()),
                std::streamsize(p.node_frequency.size() * sizeof(double)));
    }
    write_pod(out, p.spread);
  }
  if (!out) throw std::runtime_error("corpus write failed");
}

TrainingCorpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus: " + path.string());
  if (read_pod<std::uint32_t>(in) != kCorpusMagic) {
    throw std::runtime_error("not a corpus file: " + path.string());
  }
  if (read_pod<std::uint32_t>(in) != kCorpusVersion) {
    throw std::runtime_error("unsupported corpus version");
  }
  TrainingCorpus c;
  c.graph_hash = read_pod<std::uint64_t>(in);
  c.node_count = read_pod<NodeId>(in);
  c.spec.model = static_cast<DiffusionModel>(read_pod<std::uint8_t>(in));
  c.spec.lt_threshold_low = read_pod<double>(in);
  c.spec.lt_threshold_high = read_pod<double>(in);
  c.spec.sis_infect_prob = read_pod<double>(in);
  c.spec.sis_recover_prob = read_pod<double>(in);
  c.spec.sis_horizon = read_pod<std::uint32_t>(in);
  auto nf = read_pod<std::uint32_t>(in);
  c.fractions.resize(nf);
  for (auto& f : c.fractions) f = read_pod<double>(in);
  c.sets_per_fraction = read_pod<std::uint32_t>(in);
  c.rounds = read_pod<std::uint32_t>(in);
  c.rng_seed = read_pod<std::uint64_t>(in);
  c.degree_biased = read_pod<std::uint8_t>(in) != 0;
  auto np = read_pod<std::uint64_t>(in);
  c.pairs.resize(np);
  for (auto& p : c.pairs) {
    auto k = read_pod<std::uint32_t>(in);
    p.seed_indices.resize(k);
    in.read(reinterpret_cast<char*>(p.seed_indices.data()),
            std::streamsize(k * sizeof(NodeId)));
    if (read_pod<std::uint8_t>(in)) {
      p.node_frequency.resize(c.node_count);
      in.read(reinterpret_cast<char*>(p.node_frequency.data()),
              std::streamsize(c.node_count * sizeof(double)));
    }
    p.spread = read_pod<double>(in);
    if (!in) throw std::runtime_error("corpus file truncated");
  }
  return c;
}

}  // namespace deepim
