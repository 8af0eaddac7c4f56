#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gadnr/errors.hpp"
#include "gadnr/eval.hpp"
#include "gadnr/synth.hpp"
#include "gadnr/trainer.hpp"

using namespace gadnr;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny_model(int k) {
  ModelConfig c;
  c.input_dim = k;
  c.latent_dim = 4;
  c.q_samples = 4;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("adam_step") {
  ad::DTensor w("w", Matrix(1, 1, 2.0));
  const std::vector<ad::DTensor*> params = {&w};
  AdamState state = make_adam_state(params);

  SUBCASE("zero gradient is a fixed point") {
    w.zero_grad();
    adam_step(params, state, 0.1, 0.9, 0.999, 1e-8);
    CHECK(w.value(0, 0) == 2.0);
    CHECK(state.step == 1);
  }
  SUBCASE("bias-corrected first step is approximately -lr * sign(g)") {
    w.grad(0, 0) = 0.37;
    adam_step(params, state, 0.01, 0.9, 0.999, 1e-8);
    // m_hat = g, v_hat = g^2 -> update = -lr * g / (|g| + eps)
    CHECK(w.value(0, 0) == doctest::Approx(2.0 - 0.01).epsilon(1e-6));
  }
  SUBCASE("step counter advances across calls") {
    w.grad(0, 0) = 1.0;
    adam_step(params, state, 0.01, 0.9, 0.999, 1e-8);
    adam_step(params, state, 0.01, 0.9, 0.999, 1e-8);
    CHECK(state.step == 2);
  }
}

TEST_CASE("train: precondition, determinism, descent") {
  const AttributedGraph g = generate_sbm({10, 10}, 0.3, 0.05, 4, 1.0, 3);
  const ModelConfig mc = tiny_model(4);

  SUBCASE("epochs = 0 is rejected") {
    TrainConfig tc;
    tc.epochs = 0;
    CHECK_THROWS_AS((void)train(g, mc, tc), ConfigError);
  }
  SUBCASE("same seed twice gives an identical loss history") {
    TrainConfig tc;
    tc.epochs = 5;
    tc.seed = 11;
    const TrainResult a = train(g, mc, tc);
    const TrainResult b = train(g, mc, tc);
    REQUIRE(a.history.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(a.history[i].total == b.history[i].total);
      CHECK(a.history[i].neighbor == b.history[i].neighbor);
    }
    for (std::size_t i = 0; i < a.params.trainable.size(); ++i)
      CHECK(a.params.trainable[i].value.data == b.params.trainable[i].value.data);
  }
  SUBCASE("feature-only objective descends on a quadratic-dominated regime") {
    TrainConfig tc;
    tc.epochs = 20;
    tc.learning_rate = 1e-3;
    tc.lambda_x = 1.0;
    tc.lambda_d = 0.0;
    tc.lambda_n = 0.0;
    tc.seed = 5;
    const TrainResult r = train(g, mc, tc);
    CHECK(r.history.back().total < r.history.front().total);
  }
}

TEST_CASE("train aborts on non-finite loss with epoch diagnostics") {
  const AttributedGraph g = generate_sbm({8, 8}, 0.4, 0.1, 3, 1.0, 2);
  const ModelConfig mc = tiny_model(3);
  TrainConfig tc;
  tc.epochs = 10;
  tc.learning_rate = 1e80;  // guaranteed blow-up
  try {
    (void)train(g, mc, tc);
    FAIL("divergent training did not abort");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("train writes checkpoint and loss history") {
  const fs::path dir = fs::temp_directory_path() / "gadnr_test_train";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const AttributedGraph g = generate_sbm({8, 8}, 0.4, 0.1, 3, 1.0, 2);
  const ModelConfig mc = tiny_model(3);
  TrainConfig tc;
  tc.epochs = 3;
  tc.checkpoint_path = (dir / "model.ckpt").string();
  tc.loss_history_path = (dir / "loss.csv").string();
  const TrainResult r = train(g, mc, tc);

  Checkpoint ck = load_checkpoint(tc.checkpoint_path);
  CHECK(ck.config.latent_dim == mc.latent_dim);
  CHECK(ck.lambda_x == tc.lambda_x);
  CHECK(ck.lambda_n == tc.lambda_n);
  REQUIRE(ck.params.trainable.size() == r.params.trainable.size());
  for (std::size_t i = 0; i < ck.params.trainable.size(); ++i)
    CHECK(ck.params.trainable[i].value.data == r.params.trainable[i].value.data);

  std::ifstream in(tc.loss_history_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch,total,feat,degree,neighbor");
  int rows = 0;
  for (std::string line; std::getline(in, line);) rows += !line.empty();
  CHECK(rows == 3);
}

TEST_CASE("scores from a reloaded checkpoint match the in-memory model exactly") {
  const fs::path dir = fs::temp_directory_path() / "gadnr_test_ckpt_score";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const AttributedGraph g = generate_sbm({10, 10}, 0.3, 0.05, 4, 1.0, 15);
  const ModelConfig mc = tiny_model(4);
  TrainConfig tc;
  tc.epochs = 4;
  tc.seed = 9;
  TrainResult r = train(g, mc, tc);
  save_checkpoint(dir / "m.ckpt", r.params, mc, tc.lambda_x, tc.lambda_d, tc.lambda_n);
  Checkpoint ck = load_checkpoint(dir / "m.ckpt");
  const ScoreConfig sc = ScoreConfig{}.resolved(tc);
  CHECK(score_nodes(g, r.params, mc, sc, 3) == score_nodes(g, ck.params, ck.config, sc, 3));
}

TEST_CASE("checkpoint rejects foreign files") {
  const fs::path dir = fs::temp_directory_path() / "gadnr_test_ckpt";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "bad.ckpt");
    out << "{\"magic\": \"OTHER\"}\n";
  }
  CHECK_THROWS_AS((void)load_checkpoint(dir / "bad.ckpt"), DataError);
  {
    std::ofstream out(dir / "garbage.ckpt");
    out << "not json";
  }
  CHECK_THROWS_AS((void)load_checkpoint(dir / "garbage.ckpt"), DataError);
}

TEST_CASE("score_nodes") {
  const AttributedGraph g = generate_sbm({10, 10}, 0.3, 0.05, 4, 1.0, 9);
  const ModelConfig mc = tiny_model(4);
  TrainConfig tc;
  tc.epochs = 3;
  tc.seed = 1;
  TrainResult r = train(g, mc, tc);

  SUBCASE("all-zero weights give all-zero scores") {
    const ScoreConfig sc{0, 0, 0};
    for (double s : score_nodes(g, r.params, mc, sc, 1)) CHECK(s == 0.0);
  }
  SUBCASE("component isolation and exact decomposition") {
    const ScoreConfig sc{1, 0, 0};
    auto [scores, breakdown] = score_nodes_with_breakdown(g, r.params, mc, sc, 1);
    for (int u = 0; u < g.num_nodes; ++u) CHECK(scores[u] == breakdown.feat[u]);

    const ScoreConfig mixed{0.8, 0.5, 0.001};
    auto [s2, b2] = score_nodes_with_breakdown(g, r.params, mc, mixed, 1);
    for (int u = 0; u < g.num_nodes; ++u)
      CHECK(s2[u] == 0.8 * b2.feat[u] + 0.5 * b2.degree[u] + 0.001 * b2.neighbor[u]);
  }
  SUBCASE("positive scaling preserves the ranking") {
    const ScoreConfig sc{0.8, 0.5, 0.001};
    const ScoreConfig scaled{0.8 * 3, 0.5 * 3, 0.001 * 3};
    const auto a = score_nodes(g, r.params, mc, sc, 4);
    const auto b = score_nodes(g, r.params, mc, scaled, 4);
    std::vector<int> oa(a.size()), ob(b.size());
    std::iota(oa.begin(), oa.end(), 0);
    std::iota(ob.begin(), ob.end(), 0);
    std::sort(oa.begin(), oa.end(), [&](int x, int y) { return a[x] > a[y]; });
    std::sort(ob.begin(), ob.end(), [&](int x, int y) { return b[x] > b[y]; });
    CHECK(oa == ob);
  }
  SUBCASE("scoring is deterministic given the seed") {
    const ScoreConfig sc{0.8, 0.5, 0.001};
    CHECK(score_nodes(g, r.params, mc, sc, 21) == score_nodes(g, r.params, mc, sc, 21));
  }
}

TEST_CASE("ablate input validation and shape") {
  AttributedGraph g = generate_sbm({12, 12}, 0.3, 0.05, 4, 1.0, 6);
  const ModelConfig mc = tiny_model(4);
  TrainConfig tc;
  tc.epochs = 2;

  SUBCASE("empty variant list") {
    CHECK_THROWS_AS((void)ablate(g, mc, tc, {}, 1), ConfigError);
  }
  SUBCASE("missing labels") {
    AttributedGraph unlabeled = g;
    unlabeled.labels.reset();
    CHECK_THROWS_AS((void)ablate(unlabeled, mc, tc, {AblationVariant::full}, 1), DataError);
  }
  SUBCASE("runs every variant over shared seeds") {
    AttributedGraph injected = inject_structural(g, 1, 3, 5);
    const auto stats = ablate(injected, mc, tc,
                              {AblationVariant::full, AblationVariant::no_neighbor}, 2);
    REQUIRE(stats.size() == 2);
    for (const auto& [name, s] : stats) {
      CHECK(s.per_seed_auc.size() == 2);
      for (double a : s.per_seed_auc) {
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
      }
    }
  }
}
