#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepim/dataset.hpp"
#include "deepim/models.hpp"

namespace deepim {

/// Budget rule for seed selection: a per-node cost F(v) and a budget k,
/// with the constraint sum_i F(v_i) * x_i <= k.
struct BudgetConstraint {
  enum class Kind { Count, DegreeSum, GenericCost };

  Kind kind = Kind::Count;
  double k = 0.0;
  std::vector<double> cost;  // GenericCost only

  static BudgetConstraint count(std::uint32_t k);
  static BudgetConstraint degree_sum(double k);
  static BudgetConstraint generic(std::vector<double> cost, double k);

  /// Per-node cost vector for this rule on g (all ones for Count).
  std::vector<double> node_costs(const Graph& g) const;
  /// Throws if k <= 0, the cost vector is malformed, or no node is
  /// affordable.
  void validate(const Graph& g) const;
  bool satisfied(const SeedSet& seeds, const Graph& g) const;
};

std::string to_string(BudgetConstraint::Kind k);

/// Projection onto the feasible set: Count keeps the k highest-probability
/// nodes (ties to the lower id); cost rules take zero-cost nodes first
/// (ordered by probability), then greedily add nodes by probability/cost
/// ratio while the total cost stays within k. Output is always feasible.
SeedSet project_phi(const std::vector<double>& x, const BudgetConstraint& c,
                    const Graph& g);

struct InferenceConfig {
  enum class Scorer { Teacher, Student };

  int iterations = 300;
  double lr = 0.0001;
  Scorer scorer = Scorer::Teacher;
  /// Spread the optimizer pulls toward; <= 0 means |V|.
  double target_spread = -1.0;

  void validate() const;
};

std::string to_string(InferenceConfig::Scorer s);
InferenceConfig::Scorer scorer_from_string(const std::string& s);

struct InferenceResult {
  SeedSet seeds;
  /// Scorer value per iteration (teacher soft spread of the relaxed
  /// decode, or the student's estimate).
  std::vector<double> trajectory;
  /// The optimized latent, usable as a warm start for a related budget.
  ag::Matrix z_final;
};

/// Mean of the encoded training seed vectors: the optimizer's starting z.
ag::Matrix init_latent(ModelBundle& bundle, const TrainingCorpus& corpus);

/// Latent-space projected gradient search. Each iteration decodes z to a
/// relaxed seed vector, projects it to a feasible binary set, and descends
/// the loss BCE(decode(z), projected set) + (target - score)^2 with Adam
/// on z alone; model parameters stay frozen. Returns the projection of the
/// final decode. Starts from init_latent unless a warm-start latent is
/// given. Throws on non-finite loss, naming the iteration.
InferenceResult infer(ModelBundle& bundle, const Graph& g,
                      const BudgetConstraint& c, const InferenceConfig& cfg,
                      const TrainingCorpus& corpus,
                      const ag::Matrix* warm_start = nullptr);

/// Multi-start wrapper around infer. Runs the search from the corpus-mean
/// latent, the mean latent of the top-spread decile, the encodings of the
/// `extra_starts` highest-spread training sets, and the encoded projection
/// of the surrogate's singleton scores (which also competes directly,
/// since the autoencoder cannot always represent it), then keeps the
/// candidate the frozen scorer values highest. The selection uses only the
/// trained models, never a simulator.
InferenceResult infer_multistart(ModelBundle& bundle, const Graph& g,
                                 const BudgetConstraint& c,
                                 const InferenceConfig& cfg,
                                 const TrainingCorpus& corpus,
                                 int extra_starts = 5);

}  // namespace deepim
