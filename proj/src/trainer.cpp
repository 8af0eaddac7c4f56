#include "gadnr/trainer.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

#include "gadnr/errors.hpp"
#include "gadnr/eval.hpp"
#include "gadnr/kernels.hpp"
#include "gadnr/rng.hpp"

namespace gadnr {

using nlohmann::json;

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (learning_rate <= 0) throw ConfigError("train: learning_rate must be > 0");
  if (lambda_x < 0 || lambda_d < 0 || lambda_n < 0)
    throw ConfigError("train: loss weights must be >= 0");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
    throw ConfigError("train: adam betas must lie in [0, 1)");
}

ScoreConfig ScoreConfig::resolved(const TrainConfig& tc) const {
  ScoreConfig r = *this;
  if (r.lambda_x < 0) r.lambda_x = tc.lambda_x;
  if (r.lambda_d < 0) r.lambda_d = tc.lambda_d;
  if (r.lambda_n < 0) r.lambda_n = tc.lambda_n;
  return r;
}

void ScoreConfig::validate() const {
  if (lambda_x < 0 || lambda_d < 0 || lambda_n < 0)
    throw ConfigError("score: weights must be >= 0 (unresolved defaults?)");
}

AdamState make_adam_state(const std::vector<ad::DTensor*>& params) {
  AdamState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const ad::DTensor* p : params) {
    s.m.emplace_back(p->value.rows, p->value.cols);
    s.v.emplace_back(p->value.rows, p->value.cols);
  }
  return s;
}

void adam_step(const std::vector<ad::DTensor*>& params, AdamState& state, double lr, double beta1,
               double beta2, double epsilon) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& value = params[i]->value;
    const Matrix& grad = params[i]->grad;
    Matrix& m = state.m[i];
    Matrix& v = state.v[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grad.data[j];
      m.data[j] = beta1 * m.data[j] + (1.0 - beta1) * g;
      v.data[j] = beta2 * v.data[j] + (1.0 - beta2) * g * g;
      const double m_hat = m.data[j] / bc1;
      const double v_hat = v.data[j] / bc2;
      value.data[j] -= lr * m_hat / (std::sqrt(v_hat) + epsilon);
    }
    if (!all_finite(value))
      throw NumericError("adam_step: non-finite parameter '" + params[i]->name + "'");
  }
}

TrainResult train(const AttributedGraph& g, const ModelConfig& mc, const TrainConfig& tc) {
  mc.validate();
  tc.validate();
  TrainResult out;
  out.params = init_params(mc);
  const ModelInputs inputs = prepare_inputs(g, out.params, mc);
  const std::vector<ad::DTensor*> trainable = out.params.all_trainable();
  AdamState adam = make_adam_state(trainable);

  out.history.reserve(tc.epochs);
  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    try {
      const NoiseFn noise = seeded_noise(
          derive_seed(tc.seed, seed_role::train_noise, static_cast<std::uint64_t>(epoch)));
      ForwardPass fp = per_node_losses(inputs, out.params, mc, noise);
      const ad::Val loss = total_loss(fp, tc.lambda_x, tc.lambda_d, tc.lambda_n);
      EpochLoss row;
      row.epoch = epoch;
      row.total = fp.tape.scalar(loss);
      row.feat = kernels::sum(fp.breakdown.feat.data(), fp.breakdown.feat.size());
      row.degree = kernels::sum(fp.breakdown.degree.data(), fp.breakdown.degree.size());
      row.neighbor = kernels::sum(fp.breakdown.neighbor.data(), fp.breakdown.neighbor.size());
      out.history.push_back(row);

      out.params.zero_grads();
      fp.tape.backward(loss);
      adam_step(trainable, adam, tc.learning_rate, tc.beta1, tc.beta2, tc.epsilon);
    } catch (const NumericError& e) {
      throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what());
    }
  }

  if (!tc.checkpoint_path.empty())
    save_checkpoint(tc.checkpoint_path, out.params, mc, tc.lambda_x, tc.lambda_d, tc.lambda_n);
  if (!tc.loss_history_path.empty()) write_loss_history(tc.loss_history_path, out.history);
  return out;
}

std::pair<std::vector<double>, LossBreakdown> score_nodes_with_breakdown(
    const AttributedGraph& g, ModelParams& params, const ModelConfig& mc, const ScoreConfig& sc,
    std::uint64_t seed) {
  sc.validate();
  const ModelInputs inputs = prepare_inputs(g, params, mc);
  const NoiseFn noise = seeded_noise(derive_seed(seed, seed_role::score_noise));
  ForwardPass fp = per_node_losses(inputs, params, mc, noise);
  std::vector<double> scores(static_cast<std::size_t>(g.num_nodes));
  for (int u = 0; u < g.num_nodes; ++u)
    scores[u] = sc.lambda_x * fp.breakdown.feat[u] + sc.lambda_d * fp.breakdown.degree[u] +
                sc.lambda_n * fp.breakdown.neighbor[u];
  return {std::move(scores), std::move(fp.breakdown)};
}

std::vector<double> score_nodes(const AttributedGraph& g, ModelParams& params,
                                const ModelConfig& mc, const ScoreConfig& sc, std::uint64_t seed) {
  return score_nodes_with_breakdown(g, params, mc, sc, seed).first;
}

AblationVariant ablation_variant_from_string(const std::string& s) {
  if (s == "full") return AblationVariant::full;
  if (s == "no-feat") return AblationVariant::no_feat;
  if (s == "no-degree") return AblationVariant::no_degree;
  if (s == "no-neighbor") return AblationVariant::no_neighbor;
  throw ConfigError("unknown ablation variant '" + s + "'");
}

std::string to_string(AblationVariant v) {
  switch (v) {
    case AblationVariant::full: return "full";
    case AblationVariant::no_feat: return "no-feat";
    case AblationVariant::no_degree: return "no-degree";
    case AblationVariant::no_neighbor: return "no-neighbor";
  }
  return "?";
}

std::map<std::string, AblateStats> ablate(const AttributedGraph& g, const ModelConfig& mc,
                                          const TrainConfig& tc,
                                          const std::vector<AblationVariant>& variants,
                                          int n_seeds) {
  if (variants.empty()) throw ConfigError("ablate: variant list is empty");
  if (n_seeds < 1) throw ConfigError("ablate: need at least one seed");
  if (!g.labels) throw DataError("ablate: graph has no anomaly labels");

  std::map<std::string, AblateStats> out;
  for (const AblationVariant variant : variants) {
    TrainConfig vtc = tc;
    vtc.checkpoint_path.clear();
    vtc.loss_history_path.clear();
    switch (variant) {
      case AblationVariant::full: break;
      case AblationVariant::no_feat: vtc.lambda_x = 0; break;
      case AblationVariant::no_degree: vtc.lambda_d = 0; break;
      case AblationVariant::no_neighbor: vtc.lambda_n = 0; break;
    }
    AblateStats stats;
    for (int s = 0; s < n_seeds; ++s) {
      ModelConfig vmc = mc;
      vmc.seed = tc.seed + static_cast<std::uint64_t>(s);
      vtc.seed = vmc.seed;
      TrainResult tr = train(g, vmc, vtc);
      const ScoreConfig sc = ScoreConfig{}.resolved(vtc);  // zeroed pair carries over
      const std::vector<double> scores = score_nodes(g, tr.params, vmc, sc, vtc.seed);
      stats.per_seed_auc.push_back(roc_auc(scores, *g.labels));
    }
    double mean = 0.0;
    for (double a : stats.per_seed_auc) mean += a;
    mean /= stats.per_seed_auc.size();
    double var = 0.0;
    for (double a : stats.per_seed_auc) var += (a - mean) * (a - mean);
    stats.mean = mean;
    stats.stddev = stats.per_seed_auc.size() > 1
                       ? std::sqrt(var / (stats.per_seed_auc.size() - 1))
                       : 0.0;
    out[to_string(variant)] = std::move(stats);
  }
  return out;
}

namespace {

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
  const auto& data = j.at("data");
  if (data.size() != m.size()) throw DataError("checkpoint: matrix size mismatch");
  m.data = data.get<std::vector<double>>();
  return m;
}

json config_to_json(const ModelConfig& c) {
  return json{{"input_dim", c.input_dim},
              {"latent_dim", c.latent_dim},
              {"encoder", to_string(c.encoder)},
              {"q_samples", c.q_samples},
              {"cov_mode", to_string(c.cov_mode)},
              {"c", c.c},
              {"activation", to_string(c.activation)},
              {"mlp_hidden", c.mlp_hidden},
              {"projection_threshold", c.projection_threshold},
              {"neighbor_decoder", to_string(c.neighbor_decoder)},
              {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.input_dim = j.at("input_dim").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.encoder = encoder_kind_from_string(j.at("encoder").get<std::string>());
  c.q_samples = j.at("q_samples").get<int>();
  c.cov_mode = cov_mode_from_string(j.at("cov_mode").get<std::string>());
  c.c = j.at("c").get<double>();
  c.activation = activation_from_string(j.at("activation").get<std::string>());
  c.mlp_hidden = j.at("mlp_hidden").get<int>();
  c.projection_threshold = j.at("projection_threshold").get<int>();
  c.neighbor_decoder = neighbor_decoder_from_string(j.at("neighbor_decoder").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const ModelConfig& config, double lambda_x, double lambda_d,
                     double lambda_n) {
  json j;
  j["magic"] = "GADNR1";
  j["model_config"] = config_to_json(config);
  j["train_lambdas"] = json{{"lambda_x", lambda_x}, {"lambda_d", lambda_d},
                            {"lambda_n", lambda_n}};
  json weights = json::object();
  for (const auto& t : params.trainable) weights[t.name] = matrix_to_json(t.value);
  j["weights"] = std::move(weights);
  if (!params.xi.empty()) j["xi"] = matrix_to_json(params.xi);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint: " + path.string());
  out << j.dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("checkpoint parse error: " + std::string(e.what()));
  }
  if (j.value("magic", "") != std::string("GADNR1"))
    throw DataError("checkpoint: bad magic (expected GADNR1)");
  Checkpoint ck;
  ck.config = config_from_json(j.at("model_config"));
  ck.params = make_param_skeleton(ck.config);
  if (j.contains("train_lambdas")) {
    const json& l = j.at("train_lambdas");
    ck.lambda_x = l.at("lambda_x").get<double>();
    ck.lambda_d = l.at("lambda_d").get<double>();
    ck.lambda_n = l.at("lambda_n").get<double>();
  }
  const json& weights = j.at("weights");
  for (auto& t : ck.params.trainable) {
    if (!weights.contains(t.name)) throw DataError("checkpoint: missing weight '" + t.name + "'");
    Matrix m = matrix_from_json(weights.at(t.name));
    if (!m.same_shape(t.value)) throw DataError("checkpoint: shape mismatch for '" + t.name + "'");
    t.value = std::move(m);
  }
  if (ck.config.use_projection()) {
    if (!j.contains("xi")) throw DataError("checkpoint: missing projection matrix");
    ck.params.xi = matrix_from_json(j.at("xi"));
  }
  return ck;
}

void write_loss_history(const std::filesystem::path& path, const std::vector<EpochLoss>& history) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write loss history: " + path.string());
  out.precision(17);
  out << "epoch,total,feat,degree,neighbor\n";
  for (const EpochLoss& r : history)
    out << r.epoch << ',' << r.total << ',' << r.feat << ',' << r.degree << ',' << r.neighbor
        << '\n';
}

}  // namespace gadnr
