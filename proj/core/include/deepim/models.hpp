#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "deepim/autograd.hpp"
#include "deepim/graph.hpp"

namespace deepim {

struct AffineLayer {
  ag::Matrix w;  // in x out
  ag::Matrix b;  // 1 x out
};

/// Seed-set autoencoder: encoder |V| -> hidden... -> latent with sigmoid on
/// the last layer, decoder mirrors it back to a (0,1)^|V| relaxation.
/// Hidden activations are relu.
struct AutoencoderParams {
  std::vector<AffineLayer> encoder;
  std::vector<AffineLayer> decoder;

  int latent_dim() const { return int(encoder.back().w.cols()); }
};

enum class AttnNorm {
  /// Per-edge sigmoid gate scaled by 1/(in_degree+1). Every map in the
  /// aggregation is non-decreasing on nonnegative inputs, so the spread
  /// estimate is provably monotone in the seed vector once all weights
  /// are clamped nonnegative.
  MonotoneGate,
  /// Classic softmax attention over in-edges (ablation option; softmax
  /// renormalization can trade neighbors off against each other, so the
  /// monotonicity guarantee does not extend to it).
  Softmax,
};

std::string to_string(AttnNorm n);
AttnNorm attn_norm_from_string(const std::string& s);

struct AttnHead {
  ag::Matrix w;      // in_dim x head_dim
  ag::Matrix b;      // 1 x head_dim
  ag::Matrix a_src;  // head_dim x 1
  ag::Matrix a_dst;  // head_dim x 1
  ag::Matrix a_b;    // 1 x 1
};

/// Spread surrogate: stacked multi-head attention over in-neighbors (self
/// edge included), heads concatenated after the first layer and averaged
/// after the last, then a per-node affine + sigmoid producing the infection
/// probability tau. All weights except the scalar output bias are kept
/// nonnegative by projection (clamping the output bias too would floor
/// every tau at 0.5, and the bias does not affect monotonicity).
struct SurrogateParams {
  std::vector<std::vector<AttnHead>> layers;  // [layer][head]
  ag::Matrix out_w;  // head_dim x 1
  ag::Matrix out_b;  // 1 x 1, unconstrained
  double xi = 0.5;   // threshold for the hard spread count
  AttnNorm norm = AttnNorm::MonotoneGate;

  /// Throws std::logic_error naming the tensor if any constrained entry
  /// is negative.
  void check_nonneg() const;
  /// Projects every constrained tensor onto [0, inf).
  void clamp_constrained();
};

struct StudentParams {
  std::vector<AffineLayer> layers;  // relu hidden, softplus output (1 col)
};

struct ModelArch {
  std::vector<int> encoder_hidden = {512, 1024, 1024, 1024};
  int attn_layers = 2;
  int heads = 4;
  int head_dim = 64;
  std::vector<int> student_hidden = {512, 128};
  double xi = 0.5;
  AttnNorm norm = AttnNorm::MonotoneGate;
};

struct ModelBundle {
  NodeId node_count = 0;
  std::uint64_t graph_hash = 0;
  ModelArch arch;
  AutoencoderParams ae;
  SurrogateParams surrogate;
  StudentParams student;

  static ModelBundle init(const Graph& g, const ModelArch& arch,
                          std::uint64_t rng_seed);

  /// Visits every parameter tensor with a stable name, in a fixed order.
  void visit_params(const std::function<void(const std::string&, ag::Matrix&)>& fn);
  void visit_params(
      const std::function<void(const std::string&, const ag::Matrix&)>& fn) const;
};

/// Attention-time view of a graph: in-edges plus one self edge per node,
/// grouped by destination, with the 1/(in_degree+1) normalizer per edge.
struct AttnGraph {
  int node_count = 0;
  std::vector<int> src;
  std::vector<int> dst;
  ag::Matrix edge_scale;  // E x 1

  static AttnGraph build(const Graph& g);
};

/// Binds a bundle's parameters as (optionally tracked) leaves on one tape
/// and exposes the model forward passes. Construct one per tape.
class TapedBundle {
 public:
  TapedBundle(ag::Tape& tape, ModelBundle& bundle, bool track_params);

  /// x: batch x |V| -> batch x latent_dim.
  ag::Var encode(ag::Var x);
  /// z: batch x latent_dim -> batch x |V|, entries in (0,1).
  ag::Var decode(ag::Var z);
  /// x: |V| x 1 (binary or relaxed) -> tau: |V| x 1 in (0,1). Verifies the
  /// nonnegativity invariant of the constrained surrogate weights.
  ag::Var tau(const AttnGraph& g, ag::Var x);
  /// z: batch x latent_dim -> batch x 1, nonnegative.
  ag::Var student(ag::Var z);

  /// (name, parameter matrix, its leaf) for every tensor, training order.
  struct ParamBinding {
    std::string name;
    ag::Matrix* param;
    ag::Var var;
  };
  const std::vector<ParamBinding>& params() const { return params_; }

 private:
  ag::Var var_of(const ag::Matrix* m) const;

  ag::Tape& tape_;
  ModelBundle& bundle_;
  std::vector<ParamBinding> params_;
};

/// Differentiable spread score: sum of tau.
ag::Var soft_spread(ag::Tape& t, ag::Var tau);

/// Hard spread: count of tau entries >= xi.
std::uint32_t hard_spread(const ag::Matrix& tau, double xi);

/// Untracked single-input forwards (fresh throwaway tape inside).
ag::Matrix encode_value(ModelBundle& b, const ag::Matrix& x);
ag::Matrix decode_value(ModelBundle& b, const ag::Matrix& z);
ag::Matrix tau_value(ModelBundle& b, const AttnGraph& g, const ag::Matrix& x);
double student_value(ModelBundle& b, const ag::Matrix& z);

/// Versioned binary checkpoint of every named tensor plus metadata.
void save_bundle(const ModelBundle& b, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

/// FNV fingerprint over metadata and all parameter bytes.
std::uint64_t bundle_fingerprint(const ModelBundle& b);

}  // namespace deepim
