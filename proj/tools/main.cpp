#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bot/config.hpp"
#include "bot/csv.hpp"
#include "bot/dqn.hpp"
#include "bot/errors.hpp"
#include "bot/eval.hpp"
#include "bot/policies.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string beta_tag(double beta) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", beta);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw bot::ConfigError("cannot open output file: " + path.string());
    return f;
}

void write_train_log(const fs::path& path, const std::vector<bot::TrainLogRow>& log) {
    auto f = open_out(path);
    f << "episode,epsilon,loss,reward_ma_100\n";
    for (const auto& row : log)
        f << row.episode << "," << bot::fmt_g17(row.epsilon) << ","
          << bot::fmt_g17(row.loss) << "," << bot::fmt_g17(row.reward_ma100) << "\n";
    if (!f) throw bot::ConfigError("failed writing " + path.string());
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
};

int cmd_train(const CommonOpts& common, double beta, long episodes_flag, bool has_episodes,
              std::uint64_t seed, const std::string& out) {
    bot::AppConfig cfg = bot::load_config(common.config_path);
    if (has_episodes) cfg.dqn.episodes = episodes_flag;

    bot::print_effective_config(std::cout, "train", cfg,
                                {{"beta", bot::fmt_g17(beta)},
                                 {"seed", std::to_string(seed)},
                                 {"out", out},
                                 {"config", common.config_path}});

    const fs::path out_path(out);
    const auto sink = [&](long, const bot::DqnModel& model) {
        if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
        bot::save_checkpoint(out_path.string(), model);
    };
    const bot::TrainResult result = bot::train(cfg.scenario, cfg.dqn, beta, seed, sink);
    write_train_log(out_path.string() + ".log.csv", result.log);

    std::cout << "trained " << cfg.dqn.episodes << " episodes, final reward ma100 = "
              << bot::fmt_fixed(result.log.back().reward_ma100) << "\n";
    std::cout << "checkpoint: " << out_path.string() << "\n";
    std::cout << "log: " << out_path.string() + ".log.csv" << "\n";
    return 0;
}

int cmd_eval(const CommonOpts& common, const std::string& policy_list,
             const std::string& model_path, long episodes, std::uint64_t seed,
             double beta_report, int workers) {
    bot::AppConfig cfg = bot::load_config(common.config_path);

    bot::print_effective_config(std::cout, "eval", cfg,
                                {{"policy", policy_list},
                                 {"model", model_path},
                                 {"episodes", std::to_string(episodes)},
                                 {"seed", std::to_string(seed)},
                                 {"beta_report", bot::fmt_g17(beta_report)},
                                 {"workers", std::to_string(workers)},
                                 {"out_dir", common.out_dir}});

    std::vector<std::unique_ptr<bot::Policy>> owned;
    std::vector<bot::Policy*> policies;
    for (const auto& name : split_list(policy_list)) {
        owned.push_back(bot::make_policy(name, cfg.scenario, model_path));
        policies.push_back(owned.back().get());
    }
    if (policies.empty()) throw bot::ConfigError("no policies given");

    bot::EvalConfig ec;
    ec.episodes = episodes;
    ec.base_seed = seed;
    ec.beta_report = beta_report;
    ec.workers = workers;

    const bot::ComparisonTable table = bot::compare(policies, ec, cfg.scenario);
    bot::print_comparison(std::cout, table);

    auto sf = open_out(fs::path(common.out_dir) / "summary.csv");
    bot::write_summary_csv(sf, table);
    auto ef = open_out(fs::path(common.out_dir) / "episodes.csv");
    bot::write_episodes_csv(ef, table);
    std::cout << "wrote " << (fs::path(common.out_dir) / "summary.csv").string() << " and "
              << (fs::path(common.out_dir) / "episodes.csv").string() << "\n";
    return 0;
}

int cmd_demo(const CommonOpts& common, const std::string& policy_name,
             const std::string& model_path, std::uint64_t seed, double beta_report) {
    bot::AppConfig cfg = bot::load_config(common.config_path);

    bot::print_effective_config(std::cout, "demo", cfg,
                                {{"policy", policy_name},
                                 {"model", model_path},
                                 {"seed", std::to_string(seed)},
                                 {"beta_report", bot::fmt_g17(beta_report)},
                                 {"out_dir", common.out_dir}});

    auto policy = bot::make_policy(policy_name, cfg.scenario, model_path);
    const bot::EpisodeOutcome outcome =
        bot::demo_episode(*policy, seed, cfg.scenario, beta_report);

    const fs::path trace_path = fs::path(common.out_dir) /
                                ("trace_" + policy_name + "_" + std::to_string(seed) +
                                 ".csv");
    auto tf = open_out(trace_path);
    bot::write_trace_csv(tf, outcome);

    std::cout << "action = " << outcome.action << "\n";
    std::cout << "euclidean_dist = " << bot::fmt_g17(outcome.d_E) << "\n";
    std::cout << "mahalanobis_dist = " << bot::fmt_g17(outcome.d_M) << "\n";
    std::cout << "reward = " << bot::fmt_g17(outcome.reward) << "\n";
    std::cout << "diverged = " << (outcome.diverged ? 1 : 0) << "\n";
    std::cout << "trace: " << trace_path.string() << "\n";
    return 0;
}

int cmd_sweep(const CommonOpts& common, const std::string& betas_list, long episodes_flag,
              bool has_episodes, long eval_episodes, std::uint64_t seed, int workers) {
    bot::AppConfig cfg = bot::load_config(common.config_path);
    if (has_episodes) cfg.dqn.episodes = episodes_flag;

    bot::print_effective_config(std::cout, "sweep", cfg,
                                {{"betas", betas_list},
                                 {"eval_episodes", std::to_string(eval_episodes)},
                                 {"seed", std::to_string(seed)},
                                 {"workers", std::to_string(workers)},
                                 {"out_dir", common.out_dir}});

    std::vector<double> betas;
    for (const auto& tok : split_list(betas_list)) {
        try {
            betas.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw bot::ConfigError("bad beta value: " + tok);
        }
        if (betas.back() < 0.0 || betas.back() > 1.0)
            throw bot::ConfigError("beta must be in [0, 1]: " + tok);
    }
    if (betas.empty()) throw bot::ConfigError("no betas given");

    std::vector<std::unique_ptr<bot::Policy>> owned;
    std::vector<bot::Policy*> policies;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        const double beta = betas[i];
        const std::uint64_t train_seed = seed + static_cast<std::uint64_t>(i);
        const fs::path ckpt =
            fs::path(common.out_dir) / ("model_beta" + beta_tag(beta) + ".ckpt");
        std::cout << "training beta=" << beta_tag(beta) << " seed=" << train_seed << "\n";
        const bot::TrainResult result =
            bot::train(cfg.scenario, cfg.dqn, beta, train_seed, nullptr);
        fs::create_directories(common.out_dir);
        bot::save_checkpoint(ckpt.string(), result.model);
        write_train_log(ckpt.string() + ".log.csv", result.log);
        owned.push_back(std::make_unique<bot::DqnPolicy>(result.model,
                                                         "dqn_beta" + beta_tag(beta)));
        policies.push_back(owned.back().get());
    }

    bot::EvalConfig ec;
    ec.episodes = eval_episodes;
    ec.base_seed = seed;
    ec.workers = workers;

    const bot::ComparisonTable table = bot::compare(policies, ec, cfg.scenario);
    bot::print_comparison(std::cout, table);
    auto sf = open_out(fs::path(common.out_dir) / "summary.csv");
    bot::write_summary_csv(sf, table);
    auto ef = open_out(fs::path(common.out_dir) / "episodes.csv");
    bot::write_episodes_csv(ef, table);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bearings-only tracking workbench"};
    app.require_subcommand(1);

    CommonOpts common;

    // train
    auto* train = app.add_subcommand("train", "train a DQN agent");
    double tr_beta = 0.5;
    long tr_episodes = 0;
    std::uint64_t tr_seed = 1;
    std::string tr_out = "model.ckpt";
    train->add_option("--beta", tr_beta, "Pareto reward weighting")
        ->required()
        ->check(CLI::Range(0.0, 1.0));
    auto* tr_ep_opt = train->add_option("--episodes", tr_episodes, "training episodes")
                          ->check(CLI::PositiveNumber);
    train->add_option("--seed", tr_seed, "master seed");
    train->add_option("--out", tr_out, "checkpoint output path");
    train->add_option("--config", common.config_path, "JSON config file");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate policies over Monte Carlo episodes");
    std::string ev_policies;
    std::string ev_model;
    long ev_episodes = 5000;
    std::uint64_t ev_seed = 0;
    double ev_beta_report = 0.5;
    int ev_workers = 1;
    eval->add_option("--policy", ev_policies, "comma list of ptb|ito|dqn|random")
        ->required();
    eval->add_option("--model", ev_model, "checkpoint for the dqn policy");
    eval->add_option("--episodes", ev_episodes, "evaluation episodes")
        ->check(CLI::PositiveNumber);
    eval->add_option("--seed", ev_seed, "base seed");
    eval->add_option("--beta-report", ev_beta_report,
                     "reward weighting for baseline policies")
        ->check(CLI::Range(0.0, 1.0));
    eval->add_option("--workers", ev_workers, "parallel episode workers")
        ->check(CLI::PositiveNumber);
    eval->add_option("--config", common.config_path, "JSON config file");
    eval->add_option("--out-dir", common.out_dir, "directory for CSV outputs");

    // demo
    auto* demo = app.add_subcommand("demo", "export one full episode trace");
    std::string dm_policy;
    std::string dm_model;
    std::uint64_t dm_seed = 0;
    double dm_beta_report = 0.5;
    demo->add_option("--policy", dm_policy, "one of ptb|ito|dqn|random")->required();
    demo->add_option("--model", dm_model, "checkpoint for the dqn policy");
    demo->add_option("--seed", dm_seed, "episode seed");
    demo->add_option("--beta-report", dm_beta_report,
                     "reward weighting for baseline policies")
        ->check(CLI::Range(0.0, 1.0));
    demo->add_option("--config", common.config_path, "JSON config file");
    demo->add_option("--out-dir", common.out_dir, "directory for CSV outputs");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "train and compare agents across betas");
    std::string sw_betas;
    long sw_episodes = 0;
    long sw_eval_episodes = 5000;
    std::uint64_t sw_seed = 1;
    int sw_workers = 1;
    sweep->add_option("--betas", sw_betas, "comma list of beta values")->required();
    auto* sw_ep_opt = sweep->add_option("--episodes", sw_episodes,
                                        "training episodes per beta")
                          ->check(CLI::PositiveNumber);
    sweep->add_option("--eval-episodes", sw_eval_episodes, "evaluation episodes")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--seed", sw_seed, "master seed");
    sweep->add_option("--workers", sw_workers, "parallel episode workers")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--config", common.config_path, "JSON config file");
    sweep->add_option("--out-dir", common.out_dir, "directory for outputs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed())
            return cmd_train(common, tr_beta, tr_episodes, tr_ep_opt->count() > 0, tr_seed,
                             tr_out);
        if (eval->parsed())
            return cmd_eval(common, ev_policies, ev_model, ev_episodes, ev_seed,
                            ev_beta_report, ev_workers);
        if (demo->parsed())
            return cmd_demo(common, dm_policy, dm_model, dm_seed, dm_beta_report);
        if (sweep->parsed())
            return cmd_sweep(common, sw_betas, sw_episodes, sw_ep_opt->count() > 0,
                             sw_eval_episodes, sw_seed, sw_workers);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
