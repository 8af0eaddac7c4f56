// gadnr: graph anomaly detection via neighborhood reconstruction.
// Subcommands cover the full pipeline: synth, inject, train, score, eval,
// ablate, bench. Every option can also come from a TOML config file
// (--config run.toml, keys under [subcommand] sections); command-line flags
// win over config values, and unknown config keys are a hard error.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "gadnr/errors.hpp"
#include "gadnr/eval.hpp"
#include "gadnr/graph.hpp"
#include "gadnr/kernels.hpp"
#include "gadnr/rng.hpp"
#include "gadnr/synth.hpp"
#include "gadnr/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gadnr;

namespace {

struct ModelOpts {
  int latent_dim = 16;
  std::string encoder = "gcn-symmetric";
  int q_samples = 10;
  std::string cov_mode = "full";
  double c = 1e-2;
  std::string activation = "relu";
  int mlp_hidden = 0;
  int projection_threshold = 256;
  std::string neighbor_decoder = "gaussian-kl";
};

void add_model_options(CLI::App* cmd, ModelOpts& o) {
  cmd->add_option("--latent-dim", o.latent_dim, "Representation dimension p")
      ->capture_default_str();
  cmd->add_option("--encoder", o.encoder, "Encoder: gcn-symmetric, sage-mean or mlp")
      ->capture_default_str();
  cmd->add_option("--q-samples", o.q_samples, "Reparameterization sample count")
      ->capture_default_str();
  cmd->add_option("--cov-mode", o.cov_mode, "Decoded covariance: full or diagonal")
      ->capture_default_str();
  cmd->add_option("--cov-reg", o.c, "Covariance regularizer c added as cI")
      ->capture_default_str();
  cmd->add_option("--activation", o.activation, "MLP activation: relu or tanh")
      ->capture_default_str();
  cmd->add_option("--mlp-hidden", o.mlp_hidden, "Decoder MLP hidden width (0: latent-dim)")
      ->capture_default_str();
  cmd->add_option("--projection-threshold", o.projection_threshold,
                  "Apply the fixed random projection when k exceeds this")
      ->capture_default_str();
  cmd->add_option("--neighbor-decoder", o.neighbor_decoder,
                  "Neighbor loss: gaussian-kl or hungarian-ot")
      ->capture_default_str();
}

ModelConfig to_model_config(const ModelOpts& o, int input_dim, std::uint64_t seed) {
  ModelConfig c;
  c.input_dim = input_dim;
  c.latent_dim = o.latent_dim;
  c.encoder = encoder_kind_from_string(o.encoder);
  c.q_samples = o.q_samples;
  c.cov_mode = cov_mode_from_string(o.cov_mode);
  c.c = o.c;
  c.activation = activation_from_string(o.activation);
  c.mlp_hidden = o.mlp_hidden;
  c.projection_threshold = o.projection_threshold;
  c.neighbor_decoder = neighbor_decoder_from_string(o.neighbor_decoder);
  c.seed = seed;
  return c;
}

struct TrainOpts {
  int epochs = 100;
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double lambda_x = 0.8;
  double lambda_d = 0.5;
  double lambda_n = 0.001;
};

void add_train_options(CLI::App* cmd, TrainOpts& o) {
  cmd->add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--beta1", o.beta1, "Adam beta1")->capture_default_str();
  cmd->add_option("--beta2", o.beta2, "Adam beta2")->capture_default_str();
  cmd->add_option("--adam-eps", o.epsilon, "Adam epsilon")->capture_default_str();
  cmd->add_option("--lambda-x", o.lambda_x, "Self-reconstruction loss weight")
      ->capture_default_str();
  cmd->add_option("--lambda-d", o.lambda_d, "Degree-reconstruction loss weight")
      ->capture_default_str();
  cmd->add_option("--lambda-n", o.lambda_n, "Neighborhood-reconstruction loss weight")
      ->capture_default_str();
}

TrainConfig to_train_config(const TrainOpts& o, std::uint64_t seed) {
  TrainConfig c;
  c.epochs = o.epochs;
  c.learning_rate = o.lr;
  c.beta1 = o.beta1;
  c.beta2 = o.beta2;
  c.epsilon = o.epsilon;
  c.lambda_x = o.lambda_x;
  c.lambda_d = o.lambda_d;
  c.lambda_n = o.lambda_n;
  c.seed = seed;
  return c;
}

json model_config_echo(const ModelConfig& c) {
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

json train_config_echo(const TrainConfig& c) {
  return json{{"epochs", c.epochs},        {"learning_rate", c.learning_rate},
              {"beta1", c.beta1},          {"beta2", c.beta2},
              {"epsilon", c.epsilon},      {"lambda_x", c.lambda_x},
              {"lambda_d", c.lambda_d},    {"lambda_n", c.lambda_n},
              {"seed", c.seed}};
}

AttributedGraph load_bundle_reporting(const std::string& dir) {
  GraphBuildStats stats;
  AttributedGraph g = load_bundle(dir, &stats);
  if (stats.dropped_self_loops || stats.dropped_duplicates)
    std::cerr << "warning: dropped " << stats.dropped_self_loops << " self-loops and "
              << stats.dropped_duplicates << " duplicate edges while loading " << dir << "\n";
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GAD-NR graph anomaly detection toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; [subcommand] sections hold the keys");
  app.allow_config_extras(CLI::config_extras_mode::error);

  // --- synth -------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a labeled SBM bundle")->configurable();
  synth->fallthrough();
  std::string synth_out;
  std::vector<int> blocks = {250, 250};
  double p_in = 0.05, p_out = 0.005, feature_shift = 1.0;
  int feature_dim = 16;
  std::uint64_t synth_seed = 0;
  synth->add_option("--out", synth_out, "Output bundle directory")->required();
  synth->add_option("--blocks", blocks, "Block sizes")->capture_default_str();
  synth->add_option("--p-in", p_in, "Intra-block edge probability")->capture_default_str();
  synth->add_option("--p-out", p_out, "Inter-block edge probability")->capture_default_str();
  synth->add_option("--feature-dim", feature_dim, "Feature dimension k")->capture_default_str();
  synth->add_option("--feature-shift", feature_shift, "Block mean separation")
      ->capture_default_str();
  synth->add_option("--seed", synth_seed, "Random seed")->capture_default_str();

  // --- inject ------------------------------------------------------------
  auto* inject = app.add_subcommand("inject", "Apply one anomaly injector to a bundle")->configurable();
  inject->fallthrough();
  std::string inject_in, inject_out;
  InjectionSpec spec;
  inject->add_option("--in", inject_in, "Input bundle directory")->required();
  inject->add_option("--out", inject_out, "Output bundle directory")->required();
  inject->add_option("--kind", spec.kind, "contextual, structural or joint")->required();
  inject->add_option("--n", spec.n, "Anomaly count (contextual/joint) or clique count")
      ->capture_default_str();
  inject->add_option("--q-cand", spec.q_cand, "Contextual candidate-pool size")
      ->capture_default_str();
  inject->add_option("--m", spec.m, "Clique size (structural) or fan-out (joint)")
      ->capture_default_str();
  inject->add_option("--seed", spec.seed, "Random seed")->capture_default_str();

  // --- train ---------------------------------------------------------- --
  auto* train_cmd = app.add_subcommand("train", "Train GAD-NR and write a checkpoint")->configurable();
  train_cmd->fallthrough();
  std::string train_in, checkpoint_out, loss_history_out;
  ModelOpts train_model;
  TrainOpts train_opts;
  std::uint64_t train_seed = 0;
  train_cmd->add_option("--in", train_in, "Input bundle directory")->required();
  train_cmd->add_option("--checkpoint", checkpoint_out, "Checkpoint output path")->required();
  train_cmd->add_option("--loss-history", loss_history_out, "Loss history CSV path");
  add_model_options(train_cmd, train_model);
  add_train_options(train_cmd, train_opts);
  train_cmd->add_option("--seed", train_seed, "Random seed")->capture_default_str();

  // --- score ---------------------------------------------------------- --
  auto* score_cmd = app.add_subcommand("score", "Score nodes with a trained checkpoint")->configurable();
  score_cmd->fallthrough();
  std::string score_in, score_ckpt, score_out;
  double sl_x = -1, sl_d = -1, sl_n = -1;
  std::uint64_t score_seed = 0;
  score_cmd->add_option("--in", score_in, "Input bundle directory")->required();
  score_cmd->add_option("--checkpoint", score_ckpt, "Trained checkpoint")->required();
  score_cmd->add_option("--out", score_out, "Ranked score CSV path")->required();
  score_cmd->add_option("--lambda-x", sl_x, "Scoring weight (default: training value)");
  score_cmd->add_option("--lambda-d", sl_d, "Scoring weight (default: training value)");
  score_cmd->add_option("--lambda-n", sl_n, "Scoring weight (default: training value)");
  score_cmd->add_option("--seed", score_seed, "Seed for the scoring forward pass")
      ->capture_default_str();

  // --- eval ----------------------------------------------------------- --
  auto* eval_cmd = app.add_subcommand("eval", "Compute ROC-AUC metrics from a score file")->configurable();
  eval_cmd->fallthrough();
  std::string eval_scores, eval_out;
  std::uint64_t eval_seed = 0;
  eval_cmd->add_option("--scores", eval_scores, "Ranked score CSV (with labels)")->required();
  eval_cmd->add_option("--out", eval_out, "Metrics JSON path")->required();
  eval_cmd->add_option("--seed", eval_seed, "Seed echoed into the metrics file")
      ->capture_default_str();

  // --- ablate --------------------------------------------------------- --
  auto* ablate_cmd =
      app.add_subcommand("ablate", "Loss-component ablation sweep over shared seeds")->configurable();
  ablate_cmd->fallthrough();
  std::string ablate_in, ablate_out;
  std::vector<std::string> variant_names = {"full", "no-feat", "no-degree", "no-neighbor"};
  int ablate_seeds = 5;
  ModelOpts ablate_model;
  TrainOpts ablate_opts;
  std::uint64_t ablate_seed = 0;
  ablate_cmd->add_option("--in", ablate_in, "Labeled bundle directory")->required();
  ablate_cmd->add_option("--out", ablate_out, "Results JSON path")->required();
  ablate_cmd
      ->add_option("--variants", variant_names, "Subset of: full no-feat no-degree no-neighbor")
      ->capture_default_str();
  ablate_cmd->add_option("--seeds", ablate_seeds, "Seeds per variant")->capture_default_str();
  add_model_options(ablate_cmd, ablate_model);
  add_train_options(ablate_cmd, ablate_opts);
  ablate_cmd->add_option("--seed", ablate_seed, "Base seed")->capture_default_str();

  // --- bench ---------------------------------------------------------- --
  auto* bench_cmd =
      app.add_subcommand("bench", "Per-epoch timing of the two neighbor decoders")->configurable();
  bench_cmd->fallthrough();
  std::string bench_out;
  int bench_nodes = 2000, bench_feature_dim = 16, bench_epochs = 3, bench_warmup = 1;
  std::vector<double> bench_degrees = {5, 20, 50};
  std::vector<std::string> bench_modes = {"gaussian-kl", "hungarian-ot"};
  ModelOpts bench_model;
  TrainOpts bench_train;
  std::uint64_t bench_seed = 0;
  bench_cmd->add_option("--out", bench_out, "Benchmark CSV path")->required();
  bench_cmd->add_option("--nodes", bench_nodes, "Node count")->capture_default_str();
  bench_cmd->add_option("--degrees", bench_degrees, "Average degrees to sweep")
      ->capture_default_str();
  bench_cmd->add_option("--modes", bench_modes, "Decoders to time")->capture_default_str();
  bench_cmd->add_option("--feature-dim", bench_feature_dim, "Synthetic feature dimension")
      ->capture_default_str();
  bench_cmd->add_option("--epochs", bench_epochs, "Measured epochs (median reported)")
      ->capture_default_str();
  bench_cmd->add_option("--warmup", bench_warmup, "Warm-up epochs")->capture_default_str();
  add_model_options(bench_cmd, bench_model);
  bench_cmd->add_option("--seed", bench_seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);

    if (*synth) {
      const AttributedGraph g =
          generate_sbm(blocks, p_in, p_out, feature_dim, feature_shift, synth_seed);
      const auto files = save_bundle(g, synth_out);
      std::cout << "wrote " << files.size() << " files to " << synth_out << " (N=" << g.num_nodes
                << ", |E|=" << g.num_edges() << ", k=" << g.feature_dim() << ")\n";
    } else if (*inject) {
      if (spec.kind != "contextual" && spec.kind != "structural" && spec.kind != "joint")
        throw ConfigError("unknown injection kind '" + spec.kind + "'");
      const AttributedGraph g = load_bundle_reporting(inject_in);
      const AttributedGraph out = apply_injection(g, spec);
      save_bundle(out, inject_out);
      std::cout << "injected " << spec.kind << ": " << out.num_anomalies()
                << " anomalous nodes, |E| " << g.num_edges() << " -> " << out.num_edges() << "\n";
    } else if (*train_cmd) {
      const AttributedGraph g = load_bundle_reporting(train_in);
      const ModelConfig mc = to_model_config(train_model, g.feature_dim(), train_seed);
      TrainConfig tc = to_train_config(train_opts, train_seed);
      tc.checkpoint_path = checkpoint_out;
      tc.loss_history_path = loss_history_out;
      const TrainResult r = train(g, mc, tc);
      std::cout << "trained " << tc.epochs << " epochs; total loss " << r.history.front().total
                << " -> " << r.history.back().total << "; checkpoint " << checkpoint_out << "\n";
    } else if (*score_cmd) {
      const AttributedGraph g = load_bundle_reporting(score_in);
      Checkpoint ck = load_checkpoint(score_ckpt);
      ScoreConfig sc;
      sc.lambda_x = sl_x >= 0 ? sl_x : ck.lambda_x;
      sc.lambda_d = sl_d >= 0 ? sl_d : ck.lambda_d;
      sc.lambda_n = sl_n >= 0 ? sl_n : ck.lambda_n;
      const std::vector<double> scores = score_nodes(g, ck.params, ck.config, sc, score_seed);
      write_ranked_scores(score_out, scores, g.labels);
      std::cout << "scored " << g.num_nodes << " nodes -> " << score_out << "\n";
    } else if (*eval_cmd) {
      const auto rows = read_ranked_scores(eval_scores);
      std::vector<double> scores;
      std::vector<int> labels;
      for (const auto& r : rows) {
        if (r.label < 0) throw DataError("eval: score file has no labels (label column is -1)");
        scores.push_back(r.score);
        labels.push_back(r.label);
      }
      const double auc = roc_auc(scores, labels);
      int n_anom = 0;
      for (int y : labels) n_anom += y;
      write_metrics(eval_out, auc, static_cast<int>(rows.size()), n_anom, eval_seed,
                    json{{"scores", eval_scores}}.dump());
      std::cout << "auc " << auc << " over " << rows.size() << " nodes (" << n_anom
                << " anomalies) -> " << eval_out << "\n";
    } else if (*ablate_cmd) {
      const AttributedGraph g = load_bundle_reporting(ablate_in);
      std::vector<AblationVariant> variants;
      for (const auto& name : variant_names)
        variants.push_back(ablation_variant_from_string(name));
      const ModelConfig mc = to_model_config(ablate_model, g.feature_dim(), ablate_seed);
      const TrainConfig tc = to_train_config(ablate_opts, ablate_seed);
      const auto stats = ablate(g, mc, tc, variants, ablate_seeds);
      json out;
      out["seeds"] = ablate_seeds;
      out["model_config"] = model_config_echo(mc);
      out["train_config"] = train_config_echo(tc);
      json per_variant = json::object();
      for (const auto& [name, s] : stats) {
        per_variant[name] =
            json{{"mean", s.mean}, {"std", s.stddev}, {"per_seed", s.per_seed_auc}};
        std::cout << name << ": auc " << s.mean << " +/- " << s.stddev << "\n";
      }
      out["variants"] = std::move(per_variant);
      std::ofstream f(ablate_out);
      if (!f) throw DataError("cannot write ablation results: " + ablate_out);
      f << out.dump(2) << '\n';
    } else if (*bench_cmd) {
      std::vector<NeighborDecoder> modes;
      for (const auto& m : bench_modes) modes.push_back(neighbor_decoder_from_string(m));
      const ModelConfig mc = to_model_config(bench_model, bench_feature_dim, bench_seed);
      const TrainConfig tc = to_train_config(bench_train, bench_seed);
      const auto rows =
          bench_decoder(bench_nodes, bench_degrees, modes, mc, tc, bench_epochs, bench_warmup,
                        bench_seed);
      write_bench_csv(bench_out, rows);
      std::cout << "kernel dispatch: " << kernels::isa_name(kernels::active_isa()) << "\n";
      for (const auto& r : rows)
        std::cout << "degree " << r.target_avg_degree << " (measured " << r.measured_avg_degree
                  << ") " << r.mode << ": " << r.seconds_per_epoch << " s/epoch\n";
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help exits cleanly
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
