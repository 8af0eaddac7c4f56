#include "gadnr/model.hpp"

#include <cmath>

#include "gadnr/errors.hpp"
#include "gadnr/kernels.hpp"
#include "gadnr/rng.hpp"

namespace gadnr {

EncoderKind encoder_kind_from_string(const std::string& s) {
  if (s == "gcn-symmetric") return EncoderKind::gcn_symmetric;
  if (s == "sage-mean") return EncoderKind::sage_mean;
  if (s == "mlp") return EncoderKind::mlp;
  throw ConfigError("unknown encoder kind '" + s + "'");
}
Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + s + "'");
}
CovMode cov_mode_from_string(const std::string& s) {
  if (s == "full") return CovMode::full;
  if (s == "diagonal") return CovMode::diagonal;
  throw ConfigError("unknown cov mode '" + s + "'");
}
NeighborDecoder neighbor_decoder_from_string(const std::string& s) {
  if (s == "gaussian-kl") return NeighborDecoder::gaussian_kl;
  if (s == "hungarian-ot") return NeighborDecoder::hungarian_ot;
  throw ConfigError("unknown neighbor decoder '" + s + "'");
}
std::string to_string(EncoderKind k) {
  switch (k) {
    case EncoderKind::gcn_symmetric: return "gcn-symmetric";
    case EncoderKind::sage_mean: return "sage-mean";
    case EncoderKind::mlp: return "mlp";
  }
  return "?";
}
std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }
std::string to_string(CovMode m) { return m == CovMode::full ? "full" : "diagonal"; }
std::string to_string(NeighborDecoder d) {
  return d == NeighborDecoder::gaussian_kl ? "gaussian-kl" : "hungarian-ot";
}

void ModelConfig::validate() const {
  if (input_dim < 1) throw ConfigError("model: input_dim must be >= 1");
  if (latent_dim < 1) throw ConfigError("model: latent_dim must be >= 1");
  if (q_samples < 2) throw ConfigError("model: q_samples must be >= 2");
  if (c <= 0.0) throw ConfigError("model: covariance regularizer c must be > 0");
  if (hidden() < 1) throw ConfigError("model: mlp_hidden must be >= 1");
}

void ModelParams::zero_grads() {
  for (auto& t : trainable) t.zero_grad();
}

std::vector<ad::DTensor*> ModelParams::all_trainable() {
  std::vector<ad::DTensor*> out;
  out.reserve(trainable.size());
  for (auto& t : trainable) out.push_back(&t);
  return out;
}

namespace {

struct ParamBuilder {
  std::vector<ad::DTensor>& store;
  int add(const std::string& name, int rows, int cols) {
    store.emplace_back(name, Matrix(rows, cols));
    return static_cast<int>(store.size() - 1);
  }
  MlpRef add_mlp(const std::string& name, int in, int hidden, int out) {
    MlpRef m;
    m.w1 = add(name + "_w1", in, hidden);
    m.b1 = add(name + "_b1", 1, hidden);
    m.w2 = add(name + "_w2", hidden, out);
    m.b2 = add(name + "_b2", 1, out);
    return m;
  }
};

}  // namespace

ModelParams make_param_skeleton(const ModelConfig& cfg) {
  cfg.validate();
  ModelParams p;
  const int d0 = cfg.h0_dim();
  const int lat = cfg.latent_dim;
  const int hid = cfg.hidden();
  p.trainable.reserve(32);
  ParamBuilder b{p.trainable};
  p.enc_w = b.add("enc_w", d0, lat);
  if (cfg.encoder == EncoderKind::sage_mean) p.enc_w_neigh = b.add("enc_w_neigh", d0, lat);
  p.enc_b = b.add("enc_b", 1, lat);
  p.psi_x = b.add_mlp("psi_x", lat, hid, d0);
  p.psi_d = b.add_mlp("psi_d", lat, hid, 1);
  p.phi_mu = b.add_mlp("phi_mu", lat, hid, lat);
  p.phi_sigma = b.add_mlp("phi_sigma", lat, hid, lat);
  p.fnn = b.add_mlp("fnn", lat, hid, d0);
  if (cfg.use_projection()) p.xi = Matrix(cfg.input_dim, lat);
  return p;
}

ModelParams init_params(const ModelConfig& cfg) {
  ModelParams p = make_param_skeleton(cfg);
  Rng rng(derive_seed(cfg.seed, seed_role::model_init));
  if (cfg.use_projection()) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.input_dim));
    for (auto& v : p.xi.data) v = scale * rng.normal();
  }
  for (auto& t : p.trainable) {
    // Fan-in is the weight's row count; biases share their layer's limit via
    // the matching output width convention (1xn bias follows n-in weight).
    const int fan_in = t.value.rows > 1 ? t.value.rows : t.value.cols;
    const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : t.value.data) v = (2.0 * rng.uniform() - 1.0) * limit;
  }
  return p;
}

NeighborhoodTargets neighborhood_targets(const NeighborIndex& index, const Matrix& h0) {
  const int n = static_cast<int>(index.offsets.size()) - 1;
  const int p = h0.cols;
  NeighborhoodTargets out;
  out.moments.resize(n);
  out.isolated.assign(n, 0);
  std::vector<double> centered(static_cast<std::size_t>(p));
  for (int u = 0; u < n; ++u) {
    const int d = index.degree(u);
    if (d == 0) {
      out.isolated[u] = 1;
      continue;
    }
    Moments& m = out.moments[u];
    m.mean = Matrix(1, p);
    for (const int* v = index.begin(u); v != index.end(u); ++v)
      kernels::axpy(m.mean.row(0), 1.0 / d, h0.row(*v), static_cast<std::size_t>(p));
    m.cov = Matrix(p, p);
    if (d == 1) continue;
    for (const int* v = index.begin(u); v != index.end(u); ++v) {
      kernels::sub(centered.data(), h0.row(*v), m.mean.row(0), static_cast<std::size_t>(p));
      for (int a = 0; a < p; ++a)
        kernels::axpy(m.cov.row(a), centered[a] / (d - 1), centered.data(),
                      static_cast<std::size_t>(p));
    }
  }
  return out;
}

ModelInputs prepare_inputs(const AttributedGraph& g, const ModelParams& params,
                           const ModelConfig& cfg) {
  if (g.features.cols != cfg.input_dim)
    throw ConfigError("model: config input_dim " + std::to_string(cfg.input_dim) +
                      " does not match graph feature dim " + std::to_string(g.features.cols));
  ModelInputs in;
  in.graph = &g;
  in.index = build_index(g);
  switch (cfg.encoder) {
    case EncoderKind::gcn_symmetric:
      in.adjacency = normalized_adjacency(g, AdjacencyMode::symmetric);
      break;
    case EncoderKind::sage_mean:
      in.adjacency = normalized_adjacency(g, AdjacencyMode::row_mean);
      break;
    case EncoderKind::mlp:
      break;
  }
  in.h0 = cfg.use_projection() ? matmul(g.features, params.xi) : g.features;
  in.targets = neighborhood_targets(in.index, in.h0);
  in.degree_target.resize(g.num_nodes);
  for (int u = 0; u < g.num_nodes; ++u) in.degree_target[u] = in.index.degree(u);
  return in;
}

NoiseFn seeded_noise(std::uint64_t noise_seed) {
  return [noise_seed](int node, int rows, int cols) {
    Rng rng(derive_seed(noise_seed, seed_role::node_noise, static_cast<std::uint64_t>(node)));
    Matrix m(rows, cols);
    for (auto& v : m.data) v = rng.normal();
    return m;
  };
}

double LossBreakdown::total(double lambda_x, double lambda_d, double lambda_n) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < feat.size(); ++i)
    acc += lambda_x * feat[i] + lambda_d * degree[i] + lambda_n * neighbor[i];
  return acc;
}

namespace {

ad::Val activate(ad::Tape& tape, Activation act, ad::Val x) {
  return act == Activation::relu ? tape.relu(x) : tape.tanh(x);
}

}  // namespace

ad::Val mlp_apply(ad::Tape& tape, ModelParams& params, const MlpRef& mlp, ad::Val x,
                  Activation act) {
  auto& t = params.trainable;
  ad::Val h = tape.add_bias_row(tape.matmul(x, tape.leaf(t[mlp.w1])), tape.leaf(t[mlp.b1]));
  h = activate(tape, act, h);
  return tape.add_bias_row(tape.matmul(h, tape.leaf(t[mlp.w2])), tape.leaf(t[mlp.b2]));
}

std::pair<ad::Val, ad::Val> encode(ad::Tape& tape, const ModelInputs& in, ModelParams& params,
                                   const ModelConfig& cfg) {
  auto& t = params.trainable;
  const ad::Val h0 = tape.constant(in.h0);
  ad::Val pre = -1;
  switch (cfg.encoder) {
    case EncoderKind::gcn_symmetric:
      pre = tape.sparse_matmul(in.adjacency, tape.matmul(h0, tape.leaf(t[params.enc_w])));
      break;
    case EncoderKind::sage_mean: {
      const ad::Val self = tape.matmul(h0, tape.leaf(t[params.enc_w]));
      const ad::Val agg =
          tape.sparse_matmul(in.adjacency, tape.matmul(h0, tape.leaf(t[params.enc_w_neigh])));
      pre = tape.add(self, agg);
      break;
    }
    case EncoderKind::mlp:
      pre = tape.matmul(h0, tape.leaf(t[params.enc_w]));
      break;
    default:
      throw ConfigError("model: unknown encoder");
  }
  const ad::Val h1 = activate(tape, cfg.activation, tape.add_bias_row(pre, tape.leaf(t[params.enc_b])));
  return {h0, h1};
}

ad::Val decode_self(ad::Tape& tape, ModelParams& params, const ModelConfig& cfg, ad::Val h1) {
  return mlp_apply(tape, params, params.psi_x, h1, cfg.activation);
}

ad::Val decode_degree(ad::Tape& tape, ModelParams& params, const ModelConfig& cfg, ad::Val h1) {
  return mlp_apply(tape, params, params.psi_d, h1, cfg.activation);
}

namespace {

// mu_bar / cov_bar from a block of decoded samples (qxd0 tape node).
std::pair<ad::Val, ad::Val> sample_moments(ad::Tape& tape, ad::Val block, const ModelConfig& cfg) {
  const int q = tape.value(block).rows;
  const ad::Val mu_bar = tape.mean_rows(block);
  const ad::Val centered =
      tape.sub(block, tape.gather_rows(mu_bar, std::vector<int>(static_cast<std::size_t>(q), 0)));
  ad::Val cov_bar = tape.scale(tape.matmul_tn(centered, centered), 1.0 / (q - 1));
  if (cfg.cov_mode == CovMode::diagonal) cov_bar = tape.diag_mask(cov_bar);
  return {mu_bar, cov_bar};
}

// Reparameterized samples for one gathered set of rows: FNN(mu + std .* eps).
ad::Val decode_samples(ad::Tape& tape, ModelParams& params, const ModelConfig& cfg, ad::Val mu_rows,
                       ad::Val std_rows, Matrix noise) {
  const ad::Val z = tape.add(mu_rows, tape.mul(std_rows, tape.constant(std::move(noise))));
  return mlp_apply(tape, params, params.fnn, z, cfg.activation);
}

}  // namespace

std::pair<ad::Val, ad::Val> decode_neighborhood(ad::Tape& tape, ad::Val h1_u, ModelParams& params,
                                                const ModelConfig& cfg, const Matrix& noise) {
  if (noise.rows < 2) throw ConfigError("decode_neighborhood: needs q_samples >= 2");
  const int q = noise.rows;
  const ad::Val mu_hat = mlp_apply(tape, params, params.phi_mu, h1_u, cfg.activation);
  const ad::Val sg =
      tape.clamp(mlp_apply(tape, params, params.phi_sigma, h1_u, cfg.activation), -10.0, 10.0);
  const ad::Val std_hat = tape.exp(tape.scale(sg, 0.5));
  const std::vector<int> zeros(static_cast<std::size_t>(q), 0);
  const ad::Val samples = decode_samples(tape, params, cfg, tape.gather_rows(mu_hat, zeros),
                                         tape.gather_rows(std_hat, zeros), noise);
  return sample_moments(tape, samples, cfg);
}

ad::Val ot_neighbor_loss(ad::Tape& tape, ad::Val decoded_samples, const ModelInputs& in,
                         int node) {
  const int d = in.index.degree(node);
  if (d == 0) throw NumericError("ot_neighbor_loss: node has no neighbors");
  Matrix targets(d, in.h0.cols);
  int r = 0;
  for (const int* v = in.index.begin(node); v != in.index.end(node); ++v, ++r)
    std::copy_n(in.h0.row(*v), in.h0.cols, targets.row(r));
  return tape.hungarian_ot(decoded_samples, targets);
}

ForwardPass per_node_losses(const ModelInputs& in, ModelParams& params, const ModelConfig& cfg,
                            const NoiseFn& noise) {
  cfg.validate();
  const int n = in.graph->num_nodes;
  ForwardPass fp;
  ad::Tape& tape = fp.tape;

  auto [h0, h1] = encode(tape, in, params, cfg);
  fp.h0 = h0;
  fp.h1 = h1;

  // Self and degree heads, whole graph at once.
  const ad::Val h_hat = decode_self(tape, params, cfg, h1);
  fp.lx_vec = tape.rowwise_sqnorm(tape.sub(h0, h_hat));

  Matrix deg(n, 1);
  for (int u = 0; u < n; ++u) deg(u, 0) = in.degree_target[u];
  const ad::Val d_hat = decode_degree(tape, params, cfg, h1);
  fp.ld_vec = tape.rowwise_sqnorm(tape.sub(d_hat, tape.constant(std::move(deg))));

  // Neighborhood head: batch the Gaussian parameters and the sample
  // transform over all nodes, then slice per node for moments/matching.
  const ad::Val mu_all = mlp_apply(tape, params, params.phi_mu, h1, cfg.activation);
  const ad::Val sg_all =
      tape.clamp(mlp_apply(tape, params, params.phi_sigma, h1, cfg.activation), -10.0, 10.0);
  const ad::Val std_all = tape.exp(tape.scale(sg_all, 0.5));

  const bool ot_mode = cfg.neighbor_decoder == NeighborDecoder::hungarian_ot;
  std::vector<int> row_of_node;  // node id repeated per sample
  std::vector<int> offset(n + 1, 0);
  for (int u = 0; u < n; ++u) {
    int q = 0;
    if (!in.targets.isolated[u]) q = ot_mode ? in.index.degree(u) : cfg.q_samples;
    offset[u + 1] = offset[u] + q;
    row_of_node.insert(row_of_node.end(), static_cast<std::size_t>(q), u);
  }
  const int total_rows = offset[n];

  ad::Val samples = -1;
  if (total_rows > 0) {
    Matrix eps(total_rows, cfg.latent_dim);
    for (int u = 0; u < n; ++u) {
      const int q = offset[u + 1] - offset[u];
      if (q == 0) continue;
      const Matrix e = noise(u, q, cfg.latent_dim);
      std::copy(e.data.begin(), e.data.end(), eps.data.begin() +
                static_cast<std::size_t>(offset[u]) * cfg.latent_dim);
    }
    samples = decode_samples(tape, params, cfg, tape.gather_rows(mu_all, row_of_node),
                             tape.gather_rows(std_all, row_of_node), std::move(eps));
  }

  const ad::Val zero_scalar = tape.constant(Matrix(1, 1));
  std::vector<ad::Val> per_node(static_cast<std::size_t>(n), zero_scalar);
  for (int u = 0; u < n; ++u) {
    if (in.targets.isolated[u]) continue;
    try {
      const int q = offset[u + 1] - offset[u];
      std::vector<int> rows(static_cast<std::size_t>(q));
      for (int i = 0; i < q; ++i) rows[static_cast<std::size_t>(i)] = offset[u] + i;
      const ad::Val block = tape.gather_rows(samples, std::move(rows));
      if (ot_mode) {
        per_node[u] = ot_neighbor_loss(tape, block, in, u);
      } else {
        per_node[u] =
            tape.gaussian_kl_samples(in.targets.moments[u].mean, in.targets.moments[u].cov, block,
                                     cfg.c, cfg.cov_mode == CovMode::diagonal);
      }
    } catch (const NumericError& e) {
      throw NumericError("node " + std::to_string(u) + ": " + e.what());
    }
  }
  fp.ln_vec = tape.stack_scalars(per_node);

  fp.breakdown.feat.assign(tape.value(fp.lx_vec).data.begin(), tape.value(fp.lx_vec).data.end());
  fp.breakdown.degree.assign(tape.value(fp.ld_vec).data.begin(), tape.value(fp.ld_vec).data.end());
  fp.breakdown.neighbor.assign(tape.value(fp.ln_vec).data.begin(),
                               tape.value(fp.ln_vec).data.end());
  return fp;
}

ad::Val total_loss(ForwardPass& fp, double lambda_x, double lambda_d, double lambda_n) {
  if (lambda_x < 0 || lambda_d < 0 || lambda_n < 0)
    throw ConfigError("total_loss: loss weights must be >= 0");
  ad::Tape& t = fp.tape;
  const ad::Val wx = t.scale(t.sum(fp.lx_vec), lambda_x);
  const ad::Val wd = t.scale(t.sum(fp.ld_vec), lambda_d);
  const ad::Val wn = t.scale(t.sum(fp.ln_vec), lambda_n);
  return t.add(wx, t.add(wd, wn));
}

}  // namespace gadnr
