#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace deepim::ag {

using Matrix = Eigen::MatrixXd;

struct Var {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

enum class Reduction { Mean, Sum };

/// Reverse-mode tape over dense double matrices. Every op records a
/// backward rule; backward() walks the tape once in reverse creation
/// order (which is a reverse topological order by construction).
class Tape {
 public:
  /// New leaf. Gradients accumulate only when requires_grad is set.
  Var leaf(Matrix value, bool requires_grad = false);
  Var scalar(double value, bool requires_grad = false);

  const Matrix& value(Var v) const;
  /// Gradient of a tracked leaf/op output; throws if untracked or before backward().
  const Matrix& grad(Var v) const;
  /// True once backward() has deposited a gradient on v.
  bool has_grad(Var v) const;
  bool tracked(Var v) const;

  Var matmul(Var a, Var b);
  Var transpose(Var a);
  /// Elementwise add; b may also be a 1 x cols row vector (bias broadcast)
  /// or 1 x 1 scalar.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double c);
  /// Elementwise product; b may be rows x 1 (column broadcast across a's
  /// columns) or 1 x 1.
  Var mul(Var a, Var b);
  Var concat_cols(const std::vector<Var>& parts);
  Var gather_rows(Var a, std::vector<int> rows);

  Var sigmoid(Var a);
  Var relu(Var a);
  Var leaky_relu(Var a, double slope = 0.2);
  Var softplus(Var a);

  /// Rows of `a` summed per segment id; segments index [0, num_segments).
  Var segment_sum(Var a, std::vector<int> segments, int num_segments);
  /// Softmax over single-column `a` within each segment (numerically
  /// stabilized per segment).
  Var segment_softmax(Var a, std::vector<int> segments, int num_segments);

  Var reduce_sum(Var a);
  /// Binary cross-entropy of predictions in (0,1) against targets; inputs
  /// clamped to [1e-7, 1-1e-7] inside the logs.
  Var bce_loss(Var pred, Var target, Reduction r = Reduction::Mean);
  Var mse_loss(Var pred, Var target, Reduction r = Reduction::Mean);

  /// Populates gradients of every tracked node reachable from `loss`
  /// (a 1x1 value). Throws if called twice without a fresh forward pass.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::function<void(Tape&, const Matrix&)> backward_fn;  // empty for leaves
  };

  Var push(Matrix value, bool requires_grad,
           std::function<void(Tape&, const Matrix&)> fn);
  void accumulate(int idx, const Matrix& g);
  Node& node(Var v);
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

struct AdamState {
  Matrix m, v;
  long step = 0;
};

/// Standard Adam update (beta1 0.9, beta2 0.999, eps 1e-8). Initializes
/// state lazily to the parameter shape.
void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Projects every entry onto [0, inf).
void clamp_nonneg(Matrix& m);

}  // namespace deepim::ag
