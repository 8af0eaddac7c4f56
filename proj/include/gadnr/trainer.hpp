#pragma once
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gadnr/model.hpp"

namespace gadnr {

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double lambda_x = 0.8;
  double lambda_d = 0.5;
  double lambda_n = 0.001;
  std::uint64_t seed = 0;
  std::string checkpoint_path;    // written when non-empty
  std::string loss_history_path;  // written when non-empty

  void validate() const;
};

// Anomaly-score weights; negative entries mean "copy the training
// weight", which is the default.
struct ScoreConfig {
  double lambda_x = -1.0;
  double lambda_d = -1.0;
  double lambda_n = -1.0;

  ScoreConfig resolved(const TrainConfig& tc) const;
  void validate() const;
};

struct AdamState {
  std::vector<Matrix> m, v;
  long step = 0;
};
AdamState make_adam_state(const std::vector<ad::DTensor*>& params);

// Textbook Adam with bias correction; reads each param's accumulated grad.
void adam_step(const std::vector<ad::DTensor*>& params, AdamState& state, double lr, double beta1,
               double beta2, double epsilon);

struct EpochLoss {
  int epoch;
  double total, feat, degree, neighbor;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLoss> history;
};

// Full-batch Adam for the configured epochs. Fresh reparameterization noise
// each epoch; deterministic given the seeds. Non-finite losses abort with
// the offending epoch and node.
TrainResult train(const AttributedGraph& g, const ModelConfig& mc, const TrainConfig& tc);

// One forward pass with fixed scoring noise; score = lambda' · per-node loss.
std::vector<double> score_nodes(const AttributedGraph& g, ModelParams& params,
                                const ModelConfig& mc, const ScoreConfig& sc, std::uint64_t seed);
// Same pass, returning the raw per-node loss terms too.
std::pair<std::vector<double>, LossBreakdown> score_nodes_with_breakdown(
    const AttributedGraph& g, ModelParams& params, const ModelConfig& mc, const ScoreConfig& sc,
    std::uint64_t seed);

enum class AblationVariant { full, no_feat, no_degree, no_neighbor };
AblationVariant ablation_variant_from_string(const std::string& s);
std::string to_string(AblationVariant v);

struct AblateStats {
  std::vector<double> per_seed_auc;
  double mean = 0.0;
  double stddev = 0.0;
};

// Trains and scores each variant with the corresponding (lambda, lambda')
// pair zeroed, over n_seeds shared seeds (base_seed, base_seed+1, ...).
std::map<std::string, AblateStats> ablate(const AttributedGraph& g, const ModelConfig& mc,
                                          const TrainConfig& tc,
                                          const std::vector<AblationVariant>& variants,
                                          int n_seeds);

// Versioned JSON checkpoint ("GADNR1") with the config echo, the training
// loss weights, and all weight matrices.
struct Checkpoint {
  ModelParams params;
  ModelConfig config;
  double lambda_x = 0.8, lambda_d = 0.5, lambda_n = 0.001;
};
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const ModelConfig& config, double lambda_x = 0.8, double lambda_d = 0.5,
                     double lambda_n = 0.001);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// CSV: epoch,total,feat,degree,neighbor
void write_loss_history(const std::filesystem::path& path, const std::vector<EpochLoss>& history);

}  // namespace gadnr
