// Exercises the installed binary end to end: help surfaces, exit codes,
// and the documented file formats.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(GADNR_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 512> buf;
  while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path work_dir() {
  const fs::path p = fs::temp_directory_path() / "gadnr_test_cli";
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("help lists every subcommand and option defaults") {
  const RunResult top = run("--help");
  CHECK(top.exit_code == 0);
  for (const char* sub : {"synth", "inject", "train", "score", "eval", "ablate", "bench"})
    CHECK(top.output.find(sub) != std::string::npos);

  const RunResult train_help = run("train --help");
  CHECK(train_help.exit_code == 0);
  for (const char* opt : {"--latent-dim", "--encoder", "--q-samples", "--cov-mode", "--cov-reg",
                          "--activation", "--mlp-hidden", "--projection-threshold",
                          "--neighbor-decoder", "--epochs", "--lr", "--lambda-x", "--lambda-d",
                          "--lambda-n", "--seed"})
    CHECK(train_help.output.find(opt) != std::string::npos);
  CHECK(train_help.output.find("0.8") != std::string::npos);    // lambda-x default
  CHECK(train_help.output.find("0.001") != std::string::npos);  // lambda-n default

  const RunResult inject_help = run("inject --help");
  CHECK(inject_help.exit_code == 0);
  CHECK(inject_help.output.find("--q-cand") != std::string::npos);

  // Every subcommand has a working help page with a seed knob.
  for (const char* sub : {"synth", "inject", "train", "score", "eval", "ablate", "bench"}) {
    const RunResult h = run(std::string(sub) + " --help");
    CHECK(h.exit_code == 0);
    CHECK(h.output.find("--seed") != std::string::npos);
  }
}

TEST_CASE("exit codes: config 2, data 3") {
  const fs::path dir = work_dir();
  CHECK(run("synth --out " + (dir / "g").string() + " --no-such-flag 1").exit_code == 2);
  CHECK(run("inject --in " + (dir / "missing").string() + " --out " + (dir / "o").string() +
            " --kind joint")
            .exit_code == 3);
  CHECK(run("inject --in " + (dir / "missing").string() + " --out " + (dir / "o").string() +
            " --kind bogus")
            .exit_code == 2);
  CHECK(run("train --in x --checkpoint y --epochs 0").exit_code == 3);  // missing bundle first
}

TEST_CASE("pipeline through the binary") {
  const fs::path dir = work_dir();
  const std::string base = (dir / "base").string();
  const std::string inj = (dir / "inj").string();
  CHECK(run("synth --out " + base + " --blocks 40 40 --seed 3").exit_code == 0);
  CHECK(run("inject --in " + base + " --out " + inj + " --kind structural --n 2 --m 3 --seed 4")
            .exit_code == 0);
  CHECK(run("train --in " + inj + " --checkpoint " + (dir / "m.ckpt").string() +
            " --epochs 4 --latent-dim 4 --seed 5")
            .exit_code == 0);
  CHECK(run("score --in " + inj + " --checkpoint " + (dir / "m.ckpt").string() + " --out " +
            (dir / "s.csv").string() + " --seed 5")
            .exit_code == 0);
  const RunResult ev =
      run("eval --scores " + (dir / "s.csv").string() + " --out " + (dir / "m.json").string());
  CHECK(ev.exit_code == 0);
  CHECK(ev.output.find("auc") != std::string::npos);

  std::ifstream scores(dir / "s.csv");
  std::string header;
  std::getline(scores, header);
  CHECK(header == "node_id,score,label");

  // Unlabeled bundle scores carry the -1 sentinel and eval rejects them.
  const std::string plain = (dir / "plain").string();
  fs::create_directories(plain);
  fs::copy(base + "/edges.txt", plain + "/edges.txt");
  fs::copy(base + "/features.csv", plain + "/features.csv");
  CHECK(run("score --in " + plain + " --checkpoint " + (dir / "m.ckpt").string() + " --out " +
            (dir / "s2.csv").string())
            .exit_code == 0);
  CHECK(run("eval --scores " + (dir / "s2.csv").string() + " --out " + (dir / "x.json").string())
            .exit_code == 3);
}

TEST_CASE("config file: values load, flags win, unknown keys rejected") {
  const fs::path dir = work_dir();
  {
    std::ofstream cfg(dir / "run.toml");
    cfg << "[synth]\nout = \"" << (dir / "from_cfg").string() << "\"\nblocks = [30, 30]\nseed = 8\n";
  }
  CHECK(run("synth --config " + (dir / "run.toml").string()).exit_code == 0);
  CHECK(fs::exists(dir / "from_cfg" / "manifest.json"));

  CHECK(run("synth --config " + (dir / "run.toml").string() + " --out " +
            (dir / "override").string())
            .exit_code == 0);
  CHECK(fs::exists(dir / "override" / "manifest.json"));

  {
    std::ofstream cfg(dir / "bad.toml");
    cfg << "[synth]\nout = \"x\"\nmisspelled = 1\n";
  }
  CHECK(run("synth --config " + (dir / "bad.toml").string()).exit_code == 2);
}
