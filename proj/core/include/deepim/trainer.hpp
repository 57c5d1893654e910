#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepim/dataset.hpp"
#include "deepim/models.hpp"

namespace deepim {

/// What the spread-prediction loss supervises: the per-node infection
/// probabilities against the empirical frequencies, or just the scalar
/// spread against the Monte-Carlo mean.
enum class PredTarget { PerNode, Scalar };

std::string to_string(PredTarget t);
PredTarget pred_target_from_string(const std::string& s);

struct TrainConfig {
  int epochs = 300;
  /// Reconstruction-only warmup epochs before the joint epochs. These skip
  /// the surrogate pass entirely, so they are much cheaper per epoch and
  /// let the autoencoder converge before the coupled losses kick in.
  int pretrain_epochs = 0;
  int batch_size = 32;
  double lr = 0.001;
  double w_rec = 1.0;
  double w_pred = 1.0;
  double w_distill = 1.0;
  PredTarget target = PredTarget::PerNode;
  /// Feed the surrogate the reconstruction decode(encode(x)) rather than
  /// the raw seed vector (the joint objective couples the two models
  /// through this path; raw input kept as an ablation).
  bool surrogate_on_reconstruction = true;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct EpochStats {
  double rec = 0.0;
  double pred = 0.0;
  double distill = 0.0;
  double total = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  /// Mean per-pair ranking AUC of decode(encode(x)) against x.
  double recon_auc = 0.0;
  /// Mean |soft spread - MC spread| over the corpus.
  double surrogate_spread_mae = 0.0;
  /// Median relative gap between the student and the teacher soft spread.
  double student_teacher_rel_err = 0.0;
};

struct TrainResult {
  ModelBundle bundle;
  TrainReport report;
};

/// Prediction loss for one sample: per-node BCE of tau against the pair's
/// empirical frequencies, or scalar squared error of sum(tau) against the
/// MC spread. Throws if per-node mode is requested without frequencies.
ag::Var pred_loss(ag::Tape& t, PredTarget mode, ag::Var tau,
                  const TrainingPair& pair);

/// Joint optimization of the autoencoder, the monotone surrogate, and the
/// distilled student: w_rec * BCE(decode(encode(x)), x) + w_pred *
/// pred_loss + w_distill * MSE(student(z detached), soft spread detached),
/// Adam at cfg.lr, with the surrogate's constrained weights projected onto
/// [0, inf) after every step. Runs cfg.pretrain_epochs reconstruction-only
/// warmup epochs before the joint ones. Deterministic for a fixed
/// cfg.rng_seed. Throws on non-finite loss, naming the epoch.
TrainResult train(const Graph& g, const TrainingCorpus& corpus,
                  const ModelArch& arch, const TrainConfig& cfg);

/// Area under the ROC curve of scores against binary labels; 0.5 on ties.
double ranking_auc(const std::vector<double>& scores,
                   const std::vector<std::uint8_t>& labels);

}  // namespace deepim
