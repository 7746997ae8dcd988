#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bot/config.hpp"
#include "bot/dqn.hpp"
#include "bot/errors.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path kTmp{"cli_tmp"};

void reset_tmp() {
    fs::remove_all(kTmp);
    fs::create_directories(kTmp);
}

int run_cli(const std::string& args) {
    fs::create_directories(kTmp);
    const std::string cmd = std::string(BOT_CLI_PATH) + " " + args + " > " +
                            (kTmp / "stdout.txt").string() + " 2> " +
                            (kTmp / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string cli_stdout() { return slurp(kTmp / "stdout.txt"); }
std::string cli_stderr() { return slurp(kTmp / "stderr.txt"); }

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

void write_small_config(const fs::path& p) {
    std::ofstream f(p);
    f << R"({
  "scenario": {"steps_per_leg": 6},
  "dqn": {"hidden_sizes": [16, 16], "batch_size": 32, "episodes": 120}
})";
}

}  // namespace

TEST_CASE("config files overlay defaults and reject unknown keys") {
    reset_tmp();

    const bot::AppConfig defaults = bot::load_config("");
    CHECK(defaults.scenario.steps_per_leg == 12);
    CHECK(defaults.dqn.episodes == 50000);

    const fs::path cfg_path = kTmp / "cfg.json";
    write_small_config(cfg_path);
    const bot::AppConfig cfg = bot::load_config(cfg_path.string());
    CHECK(cfg.scenario.steps_per_leg == 6);
    CHECK(cfg.scenario.d_max == 26.0);
    CHECK(cfg.dqn.hidden_sizes == std::vector<int>{16, 16});
    CHECK(cfg.dqn.batch_size == 32);
    CHECK(cfg.dqn.episodes == 120);
    CHECK(cfg.dqn.learning_rate == 3e-4);

    {
        std::ofstream f(kTmp / "bad1.json");
        f << R"({"scenario": {"steps": 3}})";
    }
    CHECK_THROWS_AS(bot::load_config((kTmp / "bad1.json").string()), bot::ConfigError);
    {
        std::ofstream f(kTmp / "bad2.json");
        f << R"({"network": {}})";
    }
    CHECK_THROWS_AS(bot::load_config((kTmp / "bad2.json").string()), bot::ConfigError);
    {
        std::ofstream f(kTmp / "bad3.json");
        f << R"({"dqn": {"episodes": "many"}})";
    }
    CHECK_THROWS_AS(bot::load_config((kTmp / "bad3.json").string()), bot::ConfigError);
    CHECK_THROWS_AS(bot::load_config((kTmp / "missing.json").string()), bot::ConfigError);

    std::ostringstream os;
    bot::print_effective_config(os, "train", cfg, {{"beta", "0.7"}, {"seed", "1"}});
    const std::string text = os.str();
    CHECK(text.find("# effective-config") != std::string::npos);
    CHECK(text.find("scenario.steps_per_leg = 6") != std::string::npos);
    CHECK(text.find("dqn.hidden_sizes = 16,16") != std::string::npos);
    CHECK(text.find("# train.beta = 0.7") != std::string::npos);
}

TEST_CASE("train subcommand writes a loadable checkpoint and a log, reproducibly") {
    reset_tmp();
    const fs::path cfg_path = kTmp / "cfg.json";
    write_small_config(cfg_path);

    const std::string base = " train --beta 0.7 --seed 5 --config " + cfg_path.string();
    REQUIRE(run_cli(base + " --out " + (kTmp / "a" / "model.ckpt").string()) == 0);
    CHECK(cli_stdout().find("# effective-config") != std::string::npos);

    const bot::DqnModel m = bot::load_checkpoint((kTmp / "a" / "model.ckpt").string());
    CHECK(m.beta == 0.7);
    CHECK(m.net.sizes() == std::vector<int>{12, 16, 16, 16});

    const std::string log = slurp(kTmp / "a" / "model.ckpt.log.csv");
    CHECK(count_lines(log) == 121);  // header plus one row per episode
    CHECK(log.rfind("episode,epsilon,loss,reward_ma_100", 0) == 0);

    REQUIRE(run_cli(base + " --out " + (kTmp / "b" / "model.ckpt").string()) == 0);
    CHECK(slurp(kTmp / "a" / "model.ckpt") == slurp(kTmp / "b" / "model.ckpt"));
    CHECK(slurp(kTmp / "a" / "model.ckpt.log.csv") ==
          slurp(kTmp / "b" / "model.ckpt.log.csv"));

    // the flag overrides the config file value
    REQUIRE(run_cli(base + " --episodes 40 --out " + (kTmp / "c.ckpt").string()) == 0);
    CHECK(count_lines(slurp(kTmp / "c.ckpt.log.csv")) == 41);
}

TEST_CASE("eval subcommand compares policies deterministically") {
    reset_tmp();
    const std::string base = " eval --policy ptb,ito,random --episodes 40 --seed 11";
    REQUIRE(run_cli(base + " --out-dir " + (kTmp / "e1").string()) == 0);
    REQUIRE(run_cli(base + " --out-dir " + (kTmp / "e2").string()) == 0);

    const std::string summary = slurp(kTmp / "e1" / "summary.csv");
    CHECK(summary.rfind("metric,ptb,ito,random,best", 0) == 0);
    CHECK(summary == slurp(kTmp / "e2" / "summary.csv"));

    const std::string episodes = slurp(kTmp / "e1" / "episodes.csv");
    CHECK(count_lines(episodes) == 1 + 3 * 40);
    CHECK(episodes == slurp(kTmp / "e2" / "episodes.csv"));

    CHECK(cli_stdout().find("avg_euclidean_dist") != std::string::npos);
}

TEST_CASE("eval drives a trained model under its own reward weighting") {
    reset_tmp();
    const fs::path cfg_path = kTmp / "cfg.json";
    write_small_config(cfg_path);
    const fs::path model = kTmp / "model.ckpt";
    REQUIRE(run_cli(" train --beta 0.6 --episodes 60 --seed 2 --config " +
                    cfg_path.string() + " --out " + model.string()) == 0);

    REQUIRE(run_cli(" eval --policy ptb,dqn --model " + model.string() +
                    " --episodes 20 --seed 3 --config " + cfg_path.string() +
                    " --out-dir " + (kTmp / "e").string()) == 0);
    const std::string summary = slurp(kTmp / "e" / "summary.csv");
    CHECK(summary.rfind("metric,ptb,dqn,best", 0) == 0);

    CHECK(run_cli(" eval --policy dqn --episodes 5") != 0);
    CHECK(cli_stderr().find("error:") != std::string::npos);
}

TEST_CASE("demo subcommand writes the full trace") {
    reset_tmp();
    const std::string base = " demo --policy ptb --seed 3";
    REQUIRE(run_cli(base + " --out-dir " + (kTmp / "d1").string()) == 0);
    REQUIRE(run_cli(base + " --out-dir " + (kTmp / "d2").string()) == 0);

    const std::string trace = slurp(kTmp / "d1" / "trace_ptb_3.csv");
    CHECK(count_lines(trace) == 1 + 25);
    CHECK(trace == slurp(kTmp / "d2" / "trace_ptb_3.csv"));
    CHECK(cli_stdout().find("reward") != std::string::npos);
}

TEST_CASE("sweep subcommand trains and compares one model per weighting") {
    reset_tmp();
    const fs::path cfg_path = kTmp / "cfg.json";
    write_small_config(cfg_path);

    REQUIRE(run_cli(" sweep --betas 0.3,0.7 --episodes 60 --eval-episodes 20 --seed 4"
                    " --config " +
                    cfg_path.string() + " --out-dir " + (kTmp / "s").string()) == 0);
    CHECK(fs::exists(kTmp / "s" / "model_beta0.3.ckpt"));
    CHECK(fs::exists(kTmp / "s" / "model_beta0.7.ckpt"));
    const std::string summary = slurp(kTmp / "s" / "summary.csv");
    CHECK(summary.rfind("metric,dqn_beta0.3,dqn_beta0.7,best", 0) == 0);
    CHECK(count_lines(slurp(kTmp / "s" / "episodes.csv")) == 1 + 2 * 20);

    const bot::DqnModel m3 =
        bot::load_checkpoint((kTmp / "s" / "model_beta0.3.ckpt").string());
    CHECK(m3.beta == 0.3);
}

TEST_CASE("bad invocations exit with an error message") {
    reset_tmp();
    CHECK(run_cli("") != 0);
    CHECK(run_cli(" train --episodes 5") != 0);           // missing required beta
    CHECK(run_cli(" train --beta 1.5 --episodes 5") != 0);
    CHECK(run_cli(" eval --policy bogus --episodes 5") != 0);
    CHECK(run_cli(" eval --policy ptb --bogus-flag 1") != 0);
    CHECK(run_cli(" frobnicate") != 0);

    {
        std::ofstream f(kTmp / "bad.json");
        f << R"({"dqn": {"episode": 5}})";
    }
    CHECK(run_cli(" train --beta 0.5 --episodes 5 --config " +
                  (kTmp / "bad.json").string()) != 0);
    CHECK(cli_stderr().find("unknown config key") != std::string::npos);
}
