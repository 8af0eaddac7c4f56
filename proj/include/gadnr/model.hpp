#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gadnr/gaussian.hpp"
#include "gadnr/graph.hpp"
#include "gadnr/tape.hpp"

namespace gadnr {

enum class EncoderKind { gcn_symmetric, sage_mean, mlp };
enum class Activation { relu, tanh };
enum class CovMode { full, diagonal };
enum class NeighborDecoder { gaussian_kl, hungarian_ot };

EncoderKind encoder_kind_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);
CovMode cov_mode_from_string(const std::string& s);
NeighborDecoder neighbor_decoder_from_string(const std::string& s);
std::string to_string(EncoderKind k);
std::string to_string(Activation a);
std::string to_string(CovMode m);
std::string to_string(NeighborDecoder d);

struct ModelConfig {
  int input_dim = 0;    // feature dimension k
  int latent_dim = 16;  // representation dimension p
  EncoderKind encoder = EncoderKind::gcn_symmetric;
  int q_samples = 10;  // reparameterization sample count
  CovMode cov_mode = CovMode::full;
  double c = 1e-2;  // covariance regularizer added as cI
  Activation activation = Activation::relu;
  int mlp_hidden = 0;  // decoder MLP hidden width; 0 means latent_dim
  int projection_threshold = 256;
  NeighborDecoder neighbor_decoder = NeighborDecoder::gaussian_kl;
  std::uint64_t seed = 0;

  int hidden() const { return mlp_hidden > 0 ? mlp_hidden : latent_dim; }
  // The fixed random projection is applied only to high-dimensional inputs.
  bool use_projection() const { return input_dim > projection_threshold; }
  // Dimension of h^(0): projected inputs live in latent space, raw ones keep k.
  int h0_dim() const { return use_projection() ? latent_dim : input_dim; }
  void validate() const;
};

// Two-layer MLP as indices into ModelParams::trainable.
struct MlpRef {
  int w1 = -1, b1 = -1, w2 = -1, b2 = -1;
};

struct ModelParams {
  Matrix xi;  // frozen kxp projection; empty when bypassed
  std::vector<ad::DTensor> trainable;
  int enc_w = -1, enc_w_neigh = -1, enc_b = -1;
  MlpRef psi_x, psi_d, phi_mu, phi_sigma, fnn;

  void zero_grads();
  std::vector<ad::DTensor*> all_trainable();
};

// Deterministic given config.seed: xi from a Gaussian scaled by 1/sqrt(k),
// trainable weights fan-in-scaled uniform, one shared draw stream.
ModelParams init_params(const ModelConfig& config);
// Same layout with zero values (checkpoint loading target).
ModelParams make_param_skeleton(const ModelConfig& config);

// Stop-gradient neighborhood moments: mean/cov of each node's neighbor rows
// in h0, n-1 denominator, zero cov for degree 1, isolated nodes flagged.
struct NeighborhoodTargets {
  std::vector<Moments> moments;  // empty matrices for isolated nodes
  std::vector<char> isolated;
};
NeighborhoodTargets neighborhood_targets(const NeighborIndex& index, const Matrix& h0);

// Everything about a graph the forward pass needs, computed once.
struct ModelInputs {
  const AttributedGraph* graph = nullptr;
  NeighborIndex index;
  ad::SparseMatrix adjacency;
  Matrix h0;  // Nxh0_dim, plain values (never differentiated)
  NeighborhoodTargets targets;
  std::vector<double> degree_target;
};
ModelInputs prepare_inputs(const AttributedGraph& g, const ModelParams& params,
                           const ModelConfig& config);

// Per-node reparameterization noise source. rowsxcols standard normal.
using NoiseFn = std::function<Matrix(int node, int rows, int cols)>;
NoiseFn seeded_noise(std::uint64_t noise_seed);

struct LossBreakdown {
  std::vector<double> feat, degree, neighbor;
  double total(double lambda_x, double lambda_d, double lambda_n) const;
};

struct ForwardPass {
  ad::Tape tape;
  ad::Val h0 = -1;  // constant Nxh0_dim
  ad::Val h1 = -1;  // encoded Nxp
  ad::Val lx_vec = -1, ld_vec = -1, ln_vec = -1;  // Nx1 each
  LossBreakdown breakdown;
};

// One message-passing layer: h1 = act(UPDATE(h0, AGG(h0))).
std::pair<ad::Val, ad::Val> encode(ad::Tape& tape, const ModelInputs& in, ModelParams& params,
                                   const ModelConfig& config);

ad::Val mlp_apply(ad::Tape& tape, ModelParams& params, const MlpRef& mlp, ad::Val x,
                  Activation act);

ad::Val decode_self(ad::Tape& tape, ModelParams& params, const ModelConfig& config, ad::Val h1);
ad::Val decode_degree(ad::Tape& tape, ModelParams& params, const ModelConfig& config, ad::Val h1);

// Single-node Gaussian decode: (mu_bar 1xh0_dim, cov_bar h0_dimxh0_dim)
// from q reparameterized samples pushed through the sample transform.
std::pair<ad::Val, ad::Val> decode_neighborhood(ad::Tape& tape, ad::Val h1_u, ModelParams& params,
                                                const ModelConfig& config, const Matrix& noise);

// Hungarian-matching neighbor loss for one node (optimal-transport ablation).
ad::Val ot_neighbor_loss(ad::Tape& tape, ad::Val decoded_samples, const ModelInputs& in, int node);

// Full forward: all three per-node loss vectors on one tape.
ForwardPass per_node_losses(const ModelInputs& in, ModelParams& params, const ModelConfig& config,
                            const NoiseFn& noise);

// Weighted sum of the three per-node loss vectors; returns a 1x1 tape node.
ad::Val total_loss(ForwardPass& fp, double lambda_x, double lambda_d, double lambda_n);

}  // namespace gadnr
