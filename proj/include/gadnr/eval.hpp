#pragma once
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gadnr/trainer.hpp"

namespace gadnr {

// Area under the ROC curve via rank sums with average ranks for ties;
// equals P(score_pos > score_neg) + 1/2 P(tie). Anomalies (label 1) are the
// positive class. Throws DataError when only one class is present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct BenchRow {
  double target_avg_degree;
  double measured_avg_degree;
  std::string mode;
  double seconds_per_epoch;  // median over measured epochs after warm-up
};

// Per-epoch wall-clock cost of the two neighbor decoders on synthetic
// graphs of fixed node count and varying density. Timing covers forward,
// loss, backward and the optimizer step; graph construction and parameter
// init are excluded.
std::vector<BenchRow> bench_decoder(int n_nodes, const std::vector<double>& avg_degrees,
                                    const std::vector<NeighborDecoder>& modes,
                                    const ModelConfig& base_config, const TrainConfig& train_config,
                                    int measured_epochs, int warmup_epochs, std::uint64_t seed);

void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows);

// Ranked score file: node_id,score,label sorted by descending score
// (ties by ascending node id). label is -1 when the graph is unlabeled.
void write_ranked_scores(const std::filesystem::path& path, std::span<const double> scores,
                         const std::optional<std::vector<int>>& labels);

struct ScoreRow {
  int node_id;
  double score;
  int label;  // -1 when unknown
};
std::vector<ScoreRow> read_ranked_scores(const std::filesystem::path& path);

// Metrics JSON: {auc, n_nodes, n_anomalies, seed, config} with the caller's
// config echo embedded verbatim.
void write_metrics(const std::filesystem::path& path, double auc, int n_nodes, int n_anomalies,
                   std::uint64_t seed, const std::string& config_echo_json);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};
MeanStd mean_std(std::span<const double> values);

}  // namespace gadnr
