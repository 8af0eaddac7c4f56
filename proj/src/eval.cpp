#include "gadnr/eval.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gadnr/errors.hpp"
#include "gadnr/rng.hpp"
#include "gadnr/synth.hpp"

namespace gadnr {

using nlohmann::json;

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DataError("roc_auc: score/label size mismatch");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("roc_auc: labels must be 0 or 1");
    n_pos += static_cast<std::size_t>(y);
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw DataError("roc_auc: need at least one positive and one negative label");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average ranks within tie groups; accumulate the positive rank sum.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);  // 1-based
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

std::vector<BenchRow> bench_decoder(int n_nodes, const std::vector<double>& avg_degrees,
                                    const std::vector<NeighborDecoder>& modes,
                                    const ModelConfig& base_config, const TrainConfig& train_config,
                                    int measured_epochs, int warmup_epochs, std::uint64_t seed) {
  if (measured_epochs < 3) throw ConfigError("bench: need at least 3 measured epochs");
  using clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;

  for (const double degree : avg_degrees) {
    // Single-community graph: edge probability d / (N - 1) hits the target
    // average degree in expectation.
    const double p = degree / static_cast<double>(n_nodes - 1);
    const AttributedGraph g =
        generate_sbm({n_nodes}, p, 0.0, base_config.input_dim, 0.0, seed);
    const NeighborIndex idx = build_index(g);
    double measured = 0.0;
    for (int u = 0; u < g.num_nodes; ++u) measured += idx.degree(u);
    measured /= g.num_nodes;

    for (const NeighborDecoder mode : modes) {
      ModelConfig mc = base_config;
      mc.neighbor_decoder = mode;
      mc.seed = seed;
      ModelParams params = init_params(mc);
      const ModelInputs inputs = prepare_inputs(g, params, mc);
      const std::vector<ad::DTensor*> trainable = params.all_trainable();
      AdamState adam = make_adam_state(trainable);

      std::vector<double> times;
      for (int epoch = 0; epoch < warmup_epochs + measured_epochs; ++epoch) {
        const NoiseFn noise = seeded_noise(
            derive_seed(train_config.seed, seed_role::train_noise,
                        static_cast<std::uint64_t>(epoch)));
        const auto t0 = clock::now();
        ForwardPass fp = per_node_losses(inputs, params, mc, noise);
        const ad::Val loss =
            total_loss(fp, train_config.lambda_x, train_config.lambda_d, train_config.lambda_n);
        params.zero_grads();
        fp.tape.backward(loss);
        adam_step(trainable, adam, train_config.learning_rate, train_config.beta1,
                  train_config.beta2, train_config.epsilon);
        const auto t1 = clock::now();
        if (epoch >= warmup_epochs)
          times.push_back(std::chrono::duration<double>(t1 - t0).count());
      }
      std::sort(times.begin(), times.end());
      rows.push_back({degree, measured, to_string(mode), times[times.size() / 2]});
    }
  }
  return rows;
}

void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write benchmark csv: " + path.string());
  out.precision(17);
  out << "degree,mode,seconds_per_epoch\n";
  for (const BenchRow& r : rows)
    out << r.target_avg_degree << ',' << r.mode << ',' << r.seconds_per_epoch << '\n';
}

void write_ranked_scores(const std::filesystem::path& path, std::span<const double> scores,
                         const std::optional<std::vector<int>>& labels) {
  if (labels && labels->size() != scores.size())
    throw DataError("ranked scores: label count mismatch");
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  std::ofstream out(path);
  if (!out) throw DataError("cannot write score file: " + path.string());
  out.precision(17);
  out << "node_id,score,label\n";
  for (int u : order)
    out << u << ',' << scores[u] << ',' << (labels ? (*labels)[u] : -1) << '\n';
}

std::vector<ScoreRow> read_ranked_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open score file: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("node_id,score,label", 0) != 0)
    throw DataError(path.string() + ": missing node_id,score,label header");
  std::vector<ScoreRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, score, label;
    if (!std::getline(ss, id, ',') || !std::getline(ss, score, ',') || !std::getline(ss, label))
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    try {
      rows.push_back({std::stoi(id), std::stod(score), std::stoi(label)});
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    }
  }
  return rows;
}

void write_metrics(const std::filesystem::path& path, double auc, int n_nodes, int n_anomalies,
                   std::uint64_t seed, const std::string& config_echo_json) {
  json j;
  j["auc"] = auc;
  j["n_nodes"] = n_nodes;
  j["n_anomalies"] = n_anomalies;
  j["seed"] = seed;
  try {
    j["config"] = json::parse(config_echo_json.empty() ? "{}" : config_echo_json);
  } catch (const json::exception&) {
    j["config"] = config_echo_json;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write metrics: " + path.string());
  out << j.dump(2) << '\n';
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  for (double v : values) r.mean += v;
  r.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double var = 0.0;
    for (double v : values) var += (v - r.mean) * (v - r.mean);
    r.stddev = std::sqrt(var / static_cast<double>(values.size() - 1));
  }
  return r;
}

}  // namespace gadnr
