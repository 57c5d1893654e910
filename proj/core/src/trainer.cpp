#include "deepim/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "deepim/hash.hpp"

namespace deepim {

std::string to_string(PredTarget t) {
  return t == PredTarget::PerNode ? "per-node" : "scalar";
}

PredTarget pred_target_from_string(const std::string& s) {
  if (s == "per-node") return PredTarget::PerNode;
  if (s == "scalar") return PredTarget::Scalar;
  throw std::invalid_argument("unknown prediction target: " + s);
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (pretrain_epochs < 0) {
    throw std::invalid_argument("pretrain epochs must be >= 0");
  }
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (w_rec < 0.0 || w_pred < 0.0 || w_distill < 0.0) {
    throw std::invalid_argument("loss weights must be nonnegative");
  }
  if (w_rec == 0.0 && w_pred == 0.0 && w_distill == 0.0) {
    throw std::invalid_argument("at least one loss weight must be positive");
  }
}

ag::Var pred_loss(ag::Tape& t, PredTarget mode, ag::Var tau,
                  const TrainingPair& pair) {
  const Eigen::Index n = t.value(tau).rows();
  if (mode == PredTarget::PerNode) {
    if (pair.node_frequency.empty()) {
      throw std::invalid_argument(
          "per-node prediction target needs node frequencies in the corpus");
    }
    if (Eigen::Index(pair.node_frequency.size()) != n) {
      throw std::invalid_argument("frequency vector length does not match tau");
    }
    ag::Matrix target(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) target(i, 0) = pair.node_frequency[std::size_t(i)];
    return t.bce_loss(tau, t.leaf(std::move(target)));
  }
  return t.mse_loss(t.reduce_sum(tau), t.scalar(pair.spread));
}

double ranking_auc(const std::vector<double>& scores,
                   const std::vector<std::uint8_t>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("ranking_auc: size mismatch or empty input");
  }
  double pos = 0, neg = 0, wins = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  for (auto l : labels) (l ? pos : neg) += 1.0;
  if (pos == 0 || neg == 0) return 0.5;
  return wins / (pos * neg);
}

namespace {

ag::Matrix seed_column(const TrainingPair& pair, NodeId n) {
  ag::Matrix x = ag::Matrix::Zero(n, 1);
  for (NodeId id : pair.seed_indices) x(id, 0) = 1.0;
  return x;
}

}  // namespace

TrainResult train(const Graph& g, const TrainingCorpus& corpus,
                  const ModelArch& arch, const TrainConfig& cfg) {
  cfg.validate();
  if (corpus.pairs.empty()) throw std::invalid_argument("training corpus is empty");
  if (corpus.node_count != g.node_count()) {
    throw std::invalid_argument("corpus node count does not match graph");
  }
  if (corpus.graph_hash != g.structure_hash()) {
    throw std::invalid_argument("corpus was built for a different graph");
  }

  TrainResult res;
  res.bundle = ModelBundle::init(g, arch, cfg.rng_seed);
  ModelBundle& bundle = res.bundle;
  const AttnGraph attn = AttnGraph::build(g);
  const NodeId n = g.node_count();
  const std::size_t npairs = corpus.pairs.size();

  std::vector<ag::AdamState> opt;
  std::mt19937_64 shuffle_rng(hash_mix(cfg.rng_seed, 0x7472));  // "tr"

  std::vector<std::size_t> order(npairs);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.pretrain_epochs + cfg.epochs; ++epoch) {
    const bool warmup = epoch < cfg.pretrain_epochs;
    const double w_rec = warmup && cfg.w_rec == 0.0 ? 1.0 : cfg.w_rec;
    const bool need_surrogate =
        !warmup && (cfg.w_pred > 0.0 || cfg.w_distill > 0.0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochStats stats;
    std::size_t batches = 0;

    for (std::size_t start = 0; start < npairs; start += std::size_t(cfg.batch_size)) {
      const std::size_t bsz = std::min(std::size_t(cfg.batch_size), npairs - start);
      ag::Tape t;
      TapedBundle tb(t, bundle, true);
      if (opt.empty()) opt.resize(tb.params().size());

      ag::Matrix xb{Eigen::Index(bsz), Eigen::Index(n)};
      for (std::size_t i = 0; i < bsz; ++i) {
        xb.row(Eigen::Index(i)) = seed_column(corpus.pairs[order[start + i]], n).transpose();
      }
      ag::Var x = t.leaf(xb);
      ag::Var z = tb.encode(x);
      ag::Var xhat = tb.decode(z);
      ag::Var loss = t.scalar(0.0);
      double rec_v = 0.0, pred_v = 0.0, dist_v = 0.0;

      if (w_rec > 0.0) {
        ag::Var rec = t.bce_loss(xhat, x);
        rec_v = t.value(rec)(0, 0);
        loss = t.add(loss, t.scale(rec, w_rec));
      }

      if (need_surrogate) {
        ag::Var pred_sum = t.scalar(0.0);
        ag::Matrix teacher_y(Eigen::Index(bsz), 1);
        for (std::size_t i = 0; i < bsz; ++i) {
          const TrainingPair& pair = corpus.pairs[order[start + i]];
          ag::Var xi = cfg.surrogate_on_reconstruction
                           ? t.transpose(t.gather_rows(xhat, {int(i)}))
                           : t.leaf(seed_column(pair, n));
          ag::Var tau = tb.tau(attn, xi);
          teacher_y(Eigen::Index(i), 0) = t.value(tau).sum();
          if (cfg.w_pred > 0.0) {
            pred_sum = t.add(pred_sum, pred_loss(t, cfg.target, tau, pair));
          }
        }
        if (cfg.w_pred > 0.0) {
          ag::Var pred = t.scale(pred_sum, 1.0 / double(bsz));
          pred_v = t.value(pred)(0, 0);
          loss = t.add(loss, t.scale(pred, cfg.w_pred));
        }
        if (cfg.w_distill > 0.0) {
          // Both the latent input and the teacher targets are detached:
          // distillation trains only the student.
          ag::Var ys = tb.student(t.leaf(t.value(z)));
          ag::Var dist = t.mse_loss(ys, t.leaf(std::move(teacher_y)));
          dist_v = t.value(dist)(0, 0);
          loss = t.add(loss, t.scale(dist, cfg.w_distill));
        }
      }

      const double total = t.value(loss)(0, 0);
      if (!std::isfinite(total)) {
        throw std::runtime_error("training diverged (non-finite loss) at epoch " +
                                 std::to_string(epoch));
      }
      stats.rec += rec_v;
      stats.pred += pred_v;
      stats.distill += dist_v;
      stats.total += total;
      ++batches;

      t.backward(loss);
      const auto& params = tb.params();
      for (std::size_t p = 0; p < params.size(); ++p) {
        // Untouched parameters (e.g. student with w_distill=0) get no grad.
        if (!t.has_grad(params[p].var)) continue;
        ag::adam_step(*params[p].param, t.grad(params[p].var), opt[p], cfg.lr);
      }
      bundle.surrogate.clamp_constrained();
    }

    stats.rec /= double(batches);
    stats.pred /= double(batches);
    stats.distill /= double(batches);
    stats.total /= double(batches);
    res.report.epochs.push_back(stats);
  }

  // Post-training diagnostics over the whole corpus.
  double auc_sum = 0.0, mae_sum = 0.0;
  std::vector<double> rel_errs;
  for (const TrainingPair& pair : corpus.pairs) {
    ag::Matrix x = seed_column(pair, n);
    ag::Matrix z = encode_value(bundle, x.transpose());
    ag::Matrix xhat = decode_value(bundle, z);
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n);
    for (NodeId i = 0; i < n; ++i) {
      scores[i] = xhat(0, i);
      labels[i] = x(i, 0) > 0.5 ? 1 : 0;
    }
    auc_sum += ranking_auc(scores, labels);

    ag::Matrix xin = cfg.surrogate_on_reconstruction ? ag::Matrix(xhat.transpose()) : x;
    const double y_soft = tau_value(bundle, attn, xin).sum();
    mae_sum += std::abs(y_soft - pair.spread);
    const double ys = student_value(bundle, z);
    rel_errs.push_back(std::abs(ys - y_soft) / std::max(y_soft, 1.0));
  }
  res.report.recon_auc = auc_sum / double(npairs);
  res.report.surrogate_spread_mae = mae_sum / double(npairs);
  std::sort(rel_errs.begin(), rel_errs.end());
  res.report.student_teacher_rel_err = rel_errs[rel_errs.size() / 2];
  return res;
}

}  // namespace deepim
