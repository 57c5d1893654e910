#include "deepim/autograd.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace deepim::ag {

namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

[[noreturn]] void shape_error(const char* op, const Matrix& a, const Matrix& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_of(a) +
                              " vs " + shape_of(b));
}

constexpr double kProbEps = 1e-7;

}  // namespace

Tape::Node& Tape::node(Var v) {
  if (!v.valid() || std::size_t(v.idx) >= nodes_.size()) {
    throw std::out_of_range("invalid tape variable");
  }
  return nodes_[std::size_t(v.idx)];
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || std::size_t(v.idx) >= nodes_.size()) {
    throw std::out_of_range("invalid tape variable");
  }
  return nodes_[std::size_t(v.idx)];
}

Var Tape::push(Matrix value, bool requires_grad,
               std::function<void(Tape&, const Matrix&)> fn) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backward_fn = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{int(nodes_.size()) - 1};
}

void Tape::accumulate(int idx, const Matrix& g) {
  Node& n = nodes_[std::size_t(idx)];
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

Var Tape::leaf(Matrix value, bool requires_grad) {
  return push(std::move(value), requires_grad, nullptr);
}

Var Tape::scalar(double value, bool requires_grad) {
  Matrix m(1, 1);
  m(0, 0) = value;
  return leaf(std::move(m), requires_grad);
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

bool Tape::tracked(Var v) const { return node(v).requires_grad; }

const Matrix& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (!n.requires_grad) throw std::logic_error("grad of untracked variable");
  if (n.grad.size() == 0) throw std::logic_error("grad read before backward()");
  return n.grad;
}

bool Tape::has_grad(Var v) const { return node(v).grad.size() != 0; }

Var Tape::matmul(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (A.cols() != B.rows()) shape_error("matmul", A, B);
  bool track = tracked(a) || tracked(b);
  int ia = a.idx, ib = b.idx;
  return push(A * B, track, [ia, ib](Tape& t, const Matrix& g) {
    if (t.nodes_[std::size_t(ia)].requires_grad) {
      t.accumulate(ia, g * t.nodes_[std::size_t(ib)].value.transpose());
    }
    if (t.nodes_[std::size_t(ib)].requires_grad) {
      t.accumulate(ib, t.nodes_[std::size_t(ia)].value.transpose() * g);
    }
  });
}

Var Tape::transpose(Var a) {
  bool track = tracked(a);
  int ia = a.idx;
  return push(value(a).transpose(), track, [ia](Tape& t, const Matrix& g) {
    if (t.nodes_[std::size_t(ia)].requires_grad) t.accumulate(ia, g.transpose());
  });
}

Var Tape::add(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  bool track = tracked(a) || tracked(b);
  int ia = a.idx, ib = b.idx;
  Matrix out;
  enum class Mode { Same, Row, Scalar } mode;
  if (B.rows() == A.rows() && B.cols() == A.cols()) {
    mode = Mode::Same;
    out = A + B;
  } else if (B.rows() == 1 && B.cols() == 1) {
    mode = Mode::Scalar;
    out = A.array() + B(0, 0);
  } else if (B.rows() == 1 && B.cols() == A.cols()) {
    mode = Mode::Row;
    out = A.rowwise() + B.row(0);
  } else {
    shape_error("add", A, B);
  }
  return push(std::move(out), track, [ia, ib, mode](Tape& t, const Matrix& g) {
    if (t.nodes_[std::size_t(ia)].requires_grad) t.accumulate(ia, g);
    if (t.nodes_[std::size_t(ib)].requires_grad) {
      switch (mode) {
        case Mode::Same: t.accumulate(ib, g); break;
        case Mode::Scalar: {
          Matrix s(1, 1);
          s(0, 0) = g.sum();
          t.accumulate(ib, s);
          break;
        }
        case Mode::Row: t.accumulate(ib, g.colwise().sum()); break;
      }
    }
  });
}

Var Tape::sub(Var a, Var b) { return add(a, scale(b, -1.0)); }

Var Tape::scale(Var a, double c) {
  bool track = tracked(a);
  int ia = a.idx;
  return push(value(a) * c, track, [ia, c](Tape& t, const Matrix& g) {
    if (t.nodes_[std::size_t(ia)].requires_grad) t.accumulate(ia, g * c);
  });
}

Var Tape::mul(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  bool track = tracked(a) || tracked(b);
  int ia = a.idx, ib = b.idx;
  enum class Mode { Same, Col, Scalar } mode;
  Matrix out;
  if (B.rows() == A.rows() && B.cols() == A.cols()) {
    mode = Mode::Same;
    out = A.cwiseProduct(B);
  } else if (B.rows() == 1 && B.cols() == 1) {
    mode = Mode::Scalar;
    out = A * B(0, 0);
  } else if (B.rows() == A.rows() && B.cols() == 1) {
    mode = Mode::Col;
    out = A.array().colwise() * B.col(0).array();
  } else {
    shape_error("mul", A, B);
  }
  return push(std::move(out), track, [ia, ib, mode](Tape& t, const Matrix& g) {
    const Matrix& A = t.nodes_[std::size_t(ia)].value;
    const Matrix& B = t.nodes_[std::size_t(ib)].value;
    if (t.nodes_[std::size_t(ia)].requires_grad) {
      switch (mode) {
        case Mode::Same: t.accumulate(ia, g.cwiseProduct(B)); break;
        case Mode::Scalar: t.accumulate(ia, g * B(0, 0)); break;
        case Mode::Col:
          t.accumulate(ia, Matrix(g.array().colwise() * B.col(0).array()));
          break;
      }
    }
    if (t.nodes_[std::size_t(ib)].requires_grad) {
      switch (mode) {
        case Mode::Same: t.accumulate(ib, g.cwiseProduct(A)); break;
        case Mode::Scalar: {
          Matrix s(1, 1);
          s(0, 0) = g.cwiseProduct(A).sum();
          t.accumulate(ib, s);
          break;
        }
        case Mode::Col:
          t.accumulate(ib, Matrix(g.cwiseProduct(A).rowwise().sum()));
          break;
      }
    }
  });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  bool track = false;
  for (Var p : parts) {
    if (value(p).rows() != rows) shape_error("concat_cols", value(parts[0]), value(p));
    cols += value(p).cols();
    track = track || tracked(p);
  }
  Matrix out(rows, cols);
  std::vector<int> idx;
  std::vector<Eigen::Index> widths;
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Matrix& m = value(p);
    out.middleCols(at, m.cols()) = m;
    idx.push_back(p.idx);
    widths.push_back(m.cols());
    at += m.cols();
  }
  return push(std::move(out), track,
              [idx, widths](Tape& t, const Matrix& g) {
                Eigen::Index at = 0;
                for (std::size_t i = 0; i < idx.size(); ++i) {
                  if (t.nodes_[std::size_t(idx[i])].requires_grad) {
                    t.accumulate(idx[i], g.middleCols(at, widths[i]));
                  }
                  at += widths[i];
                }
              });
}

Var Tape::gather_rows(Var a, std::vector<int> rows) {
  const Matrix& A = value(a);
  Matrix out(Eigen::Index(rows.size()), A.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= A.rows()) {
      throw std::out_of_range("gather_rows: index out of range");
    }
    out.row(Eigen::Index(i)) = A.row(rows[i]);
  }
  bool track = tracked(a);
  int ia = a.idx;
  return push(std::move(out), track,
              [ia, rows = std::move(rows)](Tape& t, const Matrix& g) {
                if (!t.nodes_[std::size_t(ia)].requires_grad) return;
                Matrix acc = Matrix::Zero(t.nodes_[std::size_t(ia)].value.rows(),
                                          t.nodes_[std::size_t(ia)].value.cols());
                for (std::size_t i = 0; i < rows.size(); ++i) {
                  acc.row(rows[i]) += g.row(Eigen::Index(i));
                }
                t.accumulate(ia, acc);
              });
}

Var Tape::sigmoid(Var a) {
  Matrix out = value(a).unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  bool track = tracked(a);
  int ia = a.idx, self = int(nodes_.size());
  return push(std::move(out), track, [ia, self](Tape& t, const Matrix& g) {
    if (!t.nodes_[std::size_t(ia)].requires_grad) return;
    const Matrix& y = t.nodes_[std::size_t(self)].value;
    t.accumulate(ia, Matrix(g.array() * y.array() * (1.0 - y.array())));
  });
}

Var Tape::relu(Var a) {
  Matrix out = value(a).cwiseMax(0.0);
  bool track = tracked(a);
  int ia = a.idx;
  return push(std::move(out), track, [ia](Tape& t, const Matrix& g) {
    if (!t.nodes_[std::size_t(ia)].requires_grad) return;
    const Matrix& x = t.nodes_[std::size_t(ia)].value;
    t.accumulate(ia, Matrix((x.array() > 0.0).select(g, Matrix::Zero(g.rows(), g.cols()))));
  });
}

Var Tape::leaky_relu(Var a, double slope) {
  const Matrix& A = value(a);
  Matrix out = A.unaryExpr([slope](double x) { return x > 0.0 ? x : slope * x; });
  bool track = tracked(a);
  int ia = a.idx;
  return push(std::move(out), track, [ia, slope](Tape& t, const Matrix& g) {
    if (!t.nodes_[std::size_t(ia)].requires_grad) return;
    const Matrix& x = t.nodes_[std::size_t(ia)].value;
    Matrix dg(g.rows(), g.cols());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      dg(i) = x(i) > 0.0 ? g(i) : slope * g(i);
    }
    t.accumulate(ia, dg);
  });
}

Var Tape::softplus(Var a) {
  Matrix out = value(a).unaryExpr([](double x) {
    // log(1 + e^x), overflow-safe
    return x > 30.0 ? x : std::log1p(std::exp(x));
  });
  bool track = tracked(a);
  int ia = a.idx;
  return push(std::move(out), track, [ia](Tape& t, const Matrix& g) {
    if (!t.nodes_[std::size_t(ia)].requires_grad) return;
    const Matrix& x = t.nodes_[std::size_t(ia)].value;
    Matrix dg = x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    t.accumulate(ia, Matrix(g.array() * dg.array()));
  });
}

Var Tape::segment_sum(Var a, std::vector<int> segments, int num_segments) {
  const Matrix& A = value(a);
  if (Eigen::Index(segments.size()) != A.rows()) {
    throw std::invalid_argument("segment_sum: segment ids must match row count");
  }
  Matrix out = Matrix::Zero(num_segments, A.cols());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i] < 0 || segments[i] >= num_segments) {
      throw std::out_of_range("segment_sum: segment id out of range");
    }
    out.row(segments[i]) += A.row(Eigen::Index(i));
  }
  bool track = tracked(a);
  int ia = a.idx;
  return push(std::move(out), track,
              [ia, segments = std::move(segments)](Tape& t, const Matrix& g) {
                if (!t.nodes_[std::size_t(ia)].requires_grad) return;
                Matrix acc(Eigen::Index(segments.size()), g.cols());
                for (std::size_t i = 0; i < segments.size(); ++i) {
                  acc.row(Eigen::Index(i)) = g.row(segments[i]);
                }
                t.accumulate(ia, acc);
              });
}

Var Tape::segment_softmax(Var a, std::vector<int> segments, int num_segments) {
  const Matrix& A = value(a);
  if (A.cols() != 1) throw std::invalid_argument("segment_softmax expects one column");
  if (Eigen::Index(segments.size()) != A.rows()) {
    throw std::invalid_argument("segment_softmax: segment ids must match row count");
  }
  std::vector<double> seg_max(std::size_t(num_segments),
                              -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i] < 0 || segments[i] >= num_segments) {
      throw std::out_of_range("segment_softmax: segment id out of range");
    }
    seg_max[std::size_t(segments[i])] =
        std::max(seg_max[std::size_t(segments[i])], A(Eigen::Index(i), 0));
  }
  std::vector<double> seg_den(std::size_t(num_segments), 0.0);
  Matrix out(A.rows(), 1);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    out(Eigen::Index(i), 0) =
        std::exp(A(Eigen::Index(i), 0) - seg_max[std::size_t(segments[i])]);
    seg_den[std::size_t(segments[i])] += out(Eigen::Index(i), 0);
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    out(Eigen::Index(i), 0) /= seg_den[std::size_t(segments[i])];
  }
  bool track = tracked(a);
  int ia = a.idx, self = int(nodes_.size());
  return push(std::move(out), track,
              [ia, self, segments = std::move(segments), num_segments](
                  Tape& t, const Matrix& g) {
                if (!t.nodes_[std::size_t(ia)].requires_grad) return;
                const Matrix& y = t.nodes_[std::size_t(self)].value;
                std::vector<double> seg_dot(std::size_t(num_segments), 0.0);
                for (std::size_t i = 0; i < segments.size(); ++i) {
                  seg_dot[std::size_t(segments[i])] +=
                      y(Eigen::Index(i), 0) * g(Eigen::Index(i), 0);
                }
                Matrix acc(y.rows(), 1);
                for (std::size_t i = 0; i < segments.size(); ++i) {
                  acc(Eigen::Index(i), 0) =
                      y(Eigen::Index(i), 0) *
                      (g(Eigen::Index(i), 0) - seg_dot[std::size_t(segments[i])]);
                }
                t.accumulate(ia, acc);
              });
}

Var Tape::reduce_sum(Var a) {
  Matrix out(1, 1);
  out(0, 0) = value(a).sum();
  bool track = tracked(a);
  int ia = a.idx;
  return push(std::move(out), track, [ia](Tape& t, const Matrix& g) {
    if (!t.nodes_[std::size_t(ia)].requires_grad) return;
    const Matrix& x = t.nodes_[std::size_t(ia)].value;
    t.accumulate(ia, Matrix(Matrix::Constant(x.rows(), x.cols(), g(0, 0))));
  });
}

Var Tape::bce_loss(Var pred, Var target, Reduction r) {
  const Matrix& P = value(pred);
  const Matrix& T = value(target);
  if (P.rows() != T.rows() || P.cols() != T.cols()) shape_error("bce_loss", P, T);
  const double inv = r == Reduction::Mean ? 1.0 / double(P.size()) : 1.0;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < P.size(); ++i) {
    double p = std::clamp(P(i), kProbEps, 1.0 - kProbEps);
    loss -= T(i) * std::log(p) + (1.0 - T(i)) * std::log(1.0 - p);
  }
  Matrix out(1, 1);
  out(0, 0) = loss * inv;
  bool track = tracked(pred) || tracked(target);
  int ip = pred.idx, it = target.idx;
  return push(std::move(out), track, [ip, it, inv](Tape& t, const Matrix& g) {
    const Matrix& P = t.nodes_[std::size_t(ip)].value;
    const Matrix& T = t.nodes_[std::size_t(it)].value;
    const double s = g(0, 0) * inv;
    if (t.nodes_[std::size_t(ip)].requires_grad) {
      Matrix dp(P.rows(), P.cols());
      for (Eigen::Index i = 0; i < P.size(); ++i) {
        double p = std::clamp(P(i), kProbEps, 1.0 - kProbEps);
        dp(i) = s * (p - T(i)) / (p * (1.0 - p));
      }
      t.accumulate(ip, dp);
    }
    if (t.nodes_[std::size_t(it)].requires_grad) {
      Matrix dt(P.rows(), P.cols());
      for (Eigen::Index i = 0; i < P.size(); ++i) {
        double p = std::clamp(P(i), kProbEps, 1.0 - kProbEps);
        dt(i) = s * (std::log(1.0 - p) - std::log(p));
      }
      t.accumulate(it, dt);
    }
  });
}

Var Tape::mse_loss(Var pred, Var target, Reduction r) {
  const Matrix& P = value(pred);
  const Matrix& T = value(target);
  if (P.rows() != T.rows() || P.cols() != T.cols()) shape_error("mse_loss", P, T);
  const double inv = r == Reduction::Mean ? 1.0 / double(P.size()) : 1.0;
  Matrix out(1, 1);
  out(0, 0) = (P - T).squaredNorm() * inv;
  bool track = tracked(pred) || tracked(target);
  int ip = pred.idx, it = target.idx;
  return push(std::move(out), track, [ip, it, inv](Tape& t, const Matrix& g) {
    const Matrix& P = t.nodes_[std::size_t(ip)].value;
    const Matrix& T = t.nodes_[std::size_t(it)].value;
    Matrix d = 2.0 * inv * g(0, 0) * (P - T);
    if (t.nodes_[std::size_t(ip)].requires_grad) t.accumulate(ip, d);
    if (t.nodes_[std::size_t(it)].requires_grad) t.accumulate(it, Matrix(-d));
  });
}

void Tape::backward(Var loss) {
  if (backward_done_) {
    throw std::logic_error("backward() called twice on the same tape");
  }
  const Node& ln = node(loss);
  if (ln.value.rows() != 1 || ln.value.cols() != 1) {
    throw std::invalid_argument("backward() expects a scalar loss");
  }
  backward_done_ = true;
  accumulate(loss.idx, Matrix::Ones(1, 1));
  for (int i = loss.idx; i >= 0; --i) {
    Node& n = nodes_[std::size_t(i)];
    if (n.grad.size() == 0 || !n.backward_fn) continue;
    n.backward_fn(*this, n.grad);
  }
}

void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols()) {
    shape_error("adam_step", param, grad);
  }
  if (state.m.size() == 0) {
    state.m = Matrix::Zero(param.rows(), param.cols());
    state.v = Matrix::Zero(param.rows(), param.cols());
    state.step = 0;
  }
  ++state.step;
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v.array() + (1.0 - beta2) * grad.array().square();
  const double bc1 = 1.0 - std::pow(beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(beta2, double(state.step));
  param.array() -=
      lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + eps);
}

void clamp_nonneg(Matrix& m) { m = m.cwiseMax(0.0); }

}  // namespace deepim::ag
