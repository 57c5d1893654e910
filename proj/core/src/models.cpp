#include "deepim/models.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "deepim/hash.hpp"

namespace deepim {

std::string to_string(AttnNorm n) {
  return n == AttnNorm::MonotoneGate ? "gate" : "softmax";
}

AttnNorm attn_norm_from_string(const std::string& s) {
  if (s == "gate") return AttnNorm::MonotoneGate;
  if (s == "softmax") return AttnNorm::Softmax;
  throw std::invalid_argument("unknown attention normalizer: " + s);
}

namespace {

ag::Matrix glorot(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / double(rows + cols)));
  ag::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = dist(rng);
  return m;
}

// Surrogate tensors live on [0, inf); start them strictly inside so the
// projection never has to rescue the initial point and finite-difference
// probes stay in the valid region.
ag::Matrix nonneg_init(int rows, int cols, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.05 * hi, hi);
  ag::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = dist(rng);
  return m;
}

void check_tensor_nonneg(const ag::Matrix& m, const std::string& name) {
  if (m.size() > 0 && m.minCoeff() < 0.0) {
    throw std::logic_error("surrogate weight invariant violated: " + name +
                           " has a negative entry");
  }
}

}  // namespace

void SurrogateParams::check_nonneg() const {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t h = 0; h < layers[l].size(); ++h) {
      const std::string tag =
          "attn" + std::to_string(l) + ".head" + std::to_string(h);
      check_tensor_nonneg(layers[l][h].w, tag + ".w");
      check_tensor_nonneg(layers[l][h].b, tag + ".b");
      check_tensor_nonneg(layers[l][h].a_src, tag + ".a_src");
      check_tensor_nonneg(layers[l][h].a_dst, tag + ".a_dst");
      check_tensor_nonneg(layers[l][h].a_b, tag + ".a_b");
    }
  }
  check_tensor_nonneg(out_w, "out.w");
}

void SurrogateParams::clamp_constrained() {
  for (auto& layer : layers) {
    for (auto& h : layer) {
      ag::clamp_nonneg(h.w);
      ag::clamp_nonneg(h.b);
      ag::clamp_nonneg(h.a_src);
      ag::clamp_nonneg(h.a_dst);
      ag::clamp_nonneg(h.a_b);
    }
  }
  ag::clamp_nonneg(out_w);
}

ModelBundle ModelBundle::init(const Graph& g, const ModelArch& arch,
                              std::uint64_t rng_seed) {
  if (arch.encoder_hidden.empty() || arch.attn_layers < 1 || arch.heads < 1 ||
      arch.head_dim < 1) {
    throw std::invalid_argument("model architecture must be nonempty");
  }
  ModelBundle b;
  b.node_count = g.node_count();
  b.graph_hash = g.structure_hash();
  b.arch = arch;

  std::mt19937_64 rng(hash_mix(rng_seed, 0x6d6f64));  // "mod"

  std::vector<int> enc_dims;
  enc_dims.push_back(int(g.node_count()));
  enc_dims.insert(enc_dims.end(), arch.encoder_hidden.begin(),
                  arch.encoder_hidden.end());
  for (std::size_t i = 0; i + 1 < enc_dims.size(); ++i) {
    b.ae.encoder.push_back({glorot(enc_dims[i], enc_dims[i + 1], rng),
                            ag::Matrix::Zero(1, enc_dims[i + 1])});
  }
  for (std::size_t i = enc_dims.size() - 1; i > 0; --i) {
    b.ae.decoder.push_back({glorot(enc_dims[i], enc_dims[i - 1], rng),
                            ag::Matrix::Zero(1, enc_dims[i - 1])});
  }

  b.surrogate.xi = arch.xi;
  b.surrogate.norm = arch.norm;
  int in_dim = 1;
  for (int l = 0; l < arch.attn_layers; ++l) {
    std::vector<AttnHead> heads;
    const double scale = std::sqrt(2.0 / double(in_dim + arch.head_dim));
    for (int h = 0; h < arch.heads; ++h) {
      AttnHead head;
      head.w = nonneg_init(in_dim, arch.head_dim, scale, rng);
      head.b = nonneg_init(1, arch.head_dim, 0.1, rng);
      head.a_src = nonneg_init(arch.head_dim, 1, scale, rng);
      head.a_dst = nonneg_init(arch.head_dim, 1, scale, rng);
      head.a_b = nonneg_init(1, 1, 0.1, rng);
      heads.push_back(std::move(head));
    }
    b.surrogate.layers.push_back(std::move(heads));
    // heads concatenate between layers, average after the last
    in_dim = l + 1 < arch.attn_layers ? arch.heads * arch.head_dim : arch.head_dim;
  }
  b.surrogate.out_w =
      nonneg_init(arch.head_dim, 1, std::sqrt(2.0 / double(arch.head_dim)), rng);
  b.surrogate.out_b = ag::Matrix::Zero(1, 1);

  std::vector<int> st_dims;
  st_dims.push_back(b.ae.latent_dim());
  st_dims.insert(st_dims.end(), arch.student_hidden.begin(),
                 arch.student_hidden.end());
  st_dims.push_back(1);
  for (std::size_t i = 0; i + 1 < st_dims.size(); ++i) {
    b.student.layers.push_back({glorot(st_dims[i], st_dims[i + 1], rng),
                                ag::Matrix::Zero(1, st_dims[i + 1])});
  }
  return b;
}

namespace {

template <typename Bundle, typename Fn>
void visit_params_impl(Bundle& b, const Fn& fn) {
  for (std::size_t i = 0; i < b.ae.encoder.size(); ++i) {
    fn("enc" + std::to_string(i) + ".w", b.ae.encoder[i].w);
    fn("enc" + std::to_string(i) + ".b", b.ae.encoder[i].b);
  }
  for (std::size_t i = 0; i < b.ae.decoder.size(); ++i) {
    fn("dec" + std::to_string(i) + ".w", b.ae.decoder[i].w);
    fn("dec" + std::to_string(i) + ".b", b.ae.decoder[i].b);
  }
  for (std::size_t l = 0; l < b.surrogate.layers.size(); ++l) {
    for (std::size_t h = 0; h < b.surrogate.layers[l].size(); ++h) {
      const std::string tag =
          "attn" + std::to_string(l) + ".head" + std::to_string(h);
      fn(tag + ".w", b.surrogate.layers[l][h].w);
      fn(tag + ".b", b.surrogate.layers[l][h].b);
      fn(tag + ".a_src", b.surrogate.layers[l][h].a_src);
      fn(tag + ".a_dst", b.surrogate.layers[l][h].a_dst);
      fn(tag + ".a_b", b.surrogate.layers[l][h].a_b);
    }
  }
  fn("out.w", b.surrogate.out_w);
  fn("out.b", b.surrogate.out_b);
  for (std::size_t i = 0; i < b.student.layers.size(); ++i) {
    fn("stu" + std::to_string(i) + ".w", b.student.layers[i].w);
    fn("stu" + std::to_string(i) + ".b", b.student.layers[i].b);
  }
}

}  // namespace

void ModelBundle::visit_params(
    const std::function<void(const std::string&, ag::Matrix&)>& fn) {
  visit_params_impl(*this, fn);
}

void ModelBundle::visit_params(
    const std::function<void(const std::string&, const ag::Matrix&)>& fn) const {
  visit_params_impl(*this, fn);
}

AttnGraph AttnGraph::build(const Graph& g) {
  AttnGraph ag;
  ag.node_count = int(g.node_count());
  const std::uint64_t e = g.edge_count() + g.node_count();
  ag.src.reserve(e);
  ag.dst.reserve(e);
  ag.edge_scale.resize(Eigen::Index(e), 1);
  Eigen::Index at = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const double scale = 1.0 / double(g.in_degree(v) + 1);
    for (NodeId u : g.in_neighbors(v)) {
      ag.src.push_back(int(u));
      ag.dst.push_back(int(v));
      ag.edge_scale(at++, 0) = scale;
    }
    ag.src.push_back(int(v));
    ag.dst.push_back(int(v));
    ag.edge_scale(at++, 0) = scale;
  }
  return ag;
}

TapedBundle::TapedBundle(ag::Tape& tape, ModelBundle& bundle, bool track_params)
    : tape_(tape), bundle_(bundle) {
  bundle_.visit_params([&](const std::string& name, ag::Matrix& m) {
    params_.push_back({name, &m, tape_.leaf(m, track_params)});
  });
}

ag::Var TapedBundle::var_of(const ag::Matrix* m) const {
  for (const auto& p : params_) {
    if (p.param == m) return p.var;
  }
  throw std::logic_error("parameter not bound to this tape");
}

namespace {

ag::Var mlp_forward(ag::Tape& t, const TapedBundle& tb,
                    const std::vector<AffineLayer>& layers, ag::Var x,
                    ag::Var (ag::Tape::*last_act)(ag::Var),
                    const std::function<ag::Var(const ag::Matrix*)>& var_of) {
  ag::Var h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = t.add(t.matmul(h, var_of(&layers[i].w)), var_of(&layers[i].b));
    h = i + 1 < layers.size() ? t.relu(h) : (t.*last_act)(h);
  }
  (void)tb;
  return h;
}

}  // namespace

ag::Var TapedBundle::encode(ag::Var x) {
  if (tape_.value(x).cols() != Eigen::Index(bundle_.node_count)) {
    throw std::invalid_argument("encode: input width does not match |V|");
  }
  return mlp_forward(tape_, *this, bundle_.ae.encoder, x, &ag::Tape::sigmoid,
                     [this](const ag::Matrix* m) { return var_of(m); });
}

ag::Var TapedBundle::decode(ag::Var z) {
  if (tape_.value(z).cols() != bundle_.ae.latent_dim()) {
    throw std::invalid_argument("decode: input width does not match latent dim");
  }
  return mlp_forward(tape_, *this, bundle_.ae.decoder, z, &ag::Tape::sigmoid,
                     [this](const ag::Matrix* m) { return var_of(m); });
}

ag::Var TapedBundle::student(ag::Var z) {
  if (tape_.value(z).cols() != bundle_.ae.latent_dim()) {
    throw std::invalid_argument("student: input width does not match latent dim");
  }
  return mlp_forward(tape_, *this, bundle_.student.layers, z, &ag::Tape::softplus,
                     [this](const ag::Matrix* m) { return var_of(m); });
}

ag::Var TapedBundle::tau(const AttnGraph& g, ag::Var x) {
  bundle_.surrogate.check_nonneg();
  if (tape_.value(x).rows() != g.node_count || tape_.value(x).cols() != 1) {
    throw std::invalid_argument("tau: seed vector must be |V| x 1");
  }
  ag::Tape& t = tape_;
  const auto& layers = bundle_.surrogate.layers;
  ag::Var edge_scale = t.leaf(g.edge_scale);

  ag::Var h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::vector<ag::Var> head_outs;
    for (const AttnHead& head : layers[l]) {
      ag::Var hw = t.add(t.matmul(h, var_of(&head.w)), var_of(&head.b));
      ag::Var s_src = t.matmul(hw, var_of(&head.a_src));
      ag::Var s_dst = t.matmul(hw, var_of(&head.a_dst));
      ag::Var logits = t.add(t.add(t.gather_rows(s_src, g.src),
                                   t.gather_rows(s_dst, g.dst)),
                             var_of(&head.a_b));
      ag::Var coef;
      if (bundle_.surrogate.norm == AttnNorm::MonotoneGate) {
        coef = t.mul(t.sigmoid(logits), edge_scale);
      } else {
        coef = t.segment_softmax(t.leaky_relu(logits), g.dst, g.node_count);
      }
      ag::Var msg = t.mul(t.gather_rows(hw, g.src), coef);
      head_outs.push_back(t.relu(t.segment_sum(msg, g.dst, g.node_count)));
    }
    if (l + 1 < layers.size()) {
      h = t.concat_cols(head_outs);
    } else {
      ag::Var sum = head_outs[0];
      for (std::size_t i = 1; i < head_outs.size(); ++i) {
        sum = t.add(sum, head_outs[i]);
      }
      h = t.scale(sum, 1.0 / double(head_outs.size()));
    }
  }
  return t.sigmoid(t.add(t.matmul(h, var_of(&bundle_.surrogate.out_w)),
                         var_of(&bundle_.surrogate.out_b)));
}

ag::Var soft_spread(ag::Tape& t, ag::Var tau) { return t.reduce_sum(tau); }

std::uint32_t hard_spread(const ag::Matrix& tau, double xi) {
  std::uint32_t n = 0;
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    if (tau(i) >= xi) ++n;
  }
  return n;
}

ag::Matrix encode_value(ModelBundle& b, const ag::Matrix& x) {
  ag::Tape t;
  TapedBundle tb(t, b, false);
  return t.value(tb.encode(t.leaf(x)));
}

ag::Matrix decode_value(ModelBundle& b, const ag::Matrix& z) {
  ag::Tape t;
  TapedBundle tb(t, b, false);
  return t.value(tb.decode(t.leaf(z)));
}

ag::Matrix tau_value(ModelBundle& b, const AttnGraph& g, const ag::Matrix& x) {
  ag::Tape t;
  TapedBundle tb(t, b, false);
  return t.value(tb.tau(g, t.leaf(x)));
}

double student_value(ModelBundle& b, const ag::Matrix& z) {
  ag::Tape t;
  TapedBundle tb(t, b, false);
  return t.value(tb.student(t.leaf(z)))(0, 0);
}

namespace {

constexpr std::uint32_t kBundleMagic = 0x444D4D42;  // "BMMD"
constexpr std::uint32_t kBundleVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint file truncated");
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod(out, std::uint32_t(s.size()));
  out.write(s.data(), std::streamsize(s.size()));
}

std::string read_string(std::istream& in) {
  auto n = read_pod<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), std::streamsize(n));
  if (!in) throw std::runtime_error("checkpoint file truncated");
  return s;
}

void write_dims(std::ostream& out, const std::vector<int>& dims) {
  write_pod(out, std::uint32_t(dims.size()));
  for (int d : dims) write_pod(out, std::int32_t(d));
}

std::vector<int> read_dims(std::istream& in) {
  std::vector<int> dims(read_pod<std::uint32_t>(in));
  for (int& d : dims) d = read_pod<std::int32_t>(in);
  return dims;
}

}  // namespace

void save_bundle(const ModelBundle& b, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  write_pod(out, kBundleMagic);
  write_pod(out, kBundleVersion);
  write_pod(out, b.node_count);
  write_pod(out, b.graph_hash);
  write_dims(out, b.arch.encoder_hidden);
  write_pod(out, std::int32_t(b.arch.attn_layers));
  write_pod(out, std::int32_t(b.arch.heads));
  write_pod(out, std::int32_t(b.arch.head_dim));
  write_dims(out, b.arch.student_hidden);
  write_pod(out, b.arch.xi);
  write_pod(out, std::uint8_t(b.arch.norm));
  write_pod(out, b.surrogate.xi);
  write_pod(out, std::uint8_t(b.surrogate.norm));
  std::uint32_t n_tensors = 0;
  b.visit_params([&](const std::string&, const ag::Matrix&) { ++n_tensors; });
  write_pod(out, n_tensors);
  b.visit_params([&](const std::string& name, const ag::Matrix& m) {
    write_string(out, name);
    write_pod(out, std::int64_t(m.rows()));
    write_pod(out, std::int64_t(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()),
              std::streamsize(std::size_t(m.size()) * sizeof(double)));
  });
  if (!out) throw std::runtime_error("checkpoint write failed");
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  if (read_pod<std::uint32_t>(in) != kBundleMagic) {
    throw std::runtime_error("not a model checkpoint: " + path.string());
  }
  if (read_pod<std::uint32_t>(in) != kBundleVersion) {
    throw std::runtime_error("unsupported checkpoint version");
  }
  auto node_count = read_pod<NodeId>(in);
  auto graph_hash = read_pod<std::uint64_t>(in);
  ModelArch arch;
  arch.encoder_hidden = read_dims(in);
  arch.attn_layers = read_pod<std::int32_t>(in);
  arch.heads = read_pod<std::int32_t>(in);
  arch.head_dim = read_pod<std::int32_t>(in);
  arch.student_hidden = read_dims(in);
  arch.xi = read_pod<double>(in);
  arch.norm = static_cast<AttnNorm>(read_pod<std::uint8_t>(in));

  // Rebuild the shape skeleton, then overwrite tensor contents by name.
  Graph shape_only = Graph::from_edges(node_count, {});
  ModelBundle b = ModelBundle::init(shape_only, arch, 0);
  b.graph_hash = graph_hash;
  b.surrogate.xi = read_pod<double>(in);
  b.surrogate.norm = static_cast<AttnNorm>(read_pod<std::uint8_t>(in));

  auto n_tensors = read_pod<std::uint32_t>(in);
  std::uint32_t seen = 0;
  b.visit_params([&](const std::string& name, ag::Matrix& m) {
    if (seen++ >= n_tensors) throw std::runtime_error("checkpoint tensor count mismatch");
    std::string stored = read_string(in);
    if (stored != name) {
      throw std::runtime_error("checkpoint tensor order mismatch: expected " +
                               name + ", found " + stored);
    }
    auto rows = read_pod<std::int64_t>(in);
    auto cols = read_pod<std::int64_t>(in);
    if (rows != m.rows() || cols != m.cols()) {
      throw std::runtime_error("checkpoint tensor shape mismatch on " + name);
    }
    in.read(reinterpret_cast<char*>(m.data()),
            std::streamsize(std::size_t(m.size()) * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint file truncated");
  });
  if (seen != n_tensors) throw std::runtime_error("checkpoint tensor count mismatch");
  return b;
}

std::uint64_t bundle_fingerprint(const ModelBundle& b) {
  Fnv1a f;
  f.add(b.node_count);
  f.add(b.graph_hash);
  f.add(b.surrogate.xi);
  f.add(std::uint8_t(b.surrogate.norm));
  b.visit_params([&](const std::string& name, const ag::Matrix& m) {
    f.add_bytes(name.data(), name.size());
    f.add_bytes(m.data(), std::size_t(m.size()) * sizeof(double));
  });
  return f.state;
}

}  // namespace deepim
