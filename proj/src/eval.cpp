#include "bot/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>

#include "bot/csv.hpp"
#include "bot/errors.hpp"

namespace bot {

namespace {

double policy_beta(Policy& policy, const EvalConfig& cfg) {
    return policy.reward_beta().value_or(cfg.beta_report);
}

void run_range(Policy& policy, const EvalConfig& eval_cfg, const ScenarioConfig& scenario,
               double beta, long begin, long end, std::vector<EpisodeRecord>& out) {
    Environment env(scenario, RewardParams{beta, 1e-9});
    for (long i = begin; i < end; ++i) {
        const std::uint64_t seed = eval_cfg.base_seed + static_cast<std::uint64_t>(i);
        const ObsVec obs = env.reset(seed);
        DecisionPoint dp{obs, env.belief(), env.observer()};
        Rng policy_rng = substream(seed, Stream::policy);
        const int action = policy.act(dp, policy_rng);
        const EpisodeOutcome oc = env.step(action);
        out[static_cast<std::size_t>(i)] =
            {i, oc.d_E, oc.d_M, oc.reward, oc.action, oc.diverged};
    }
}

MetricStats stats_of(const std::vector<double>& xs) {
    MetricStats s;
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
        s.min = std::min(s.min, x);
        s.max = std::max(s.max, x);
    }
    const double n = static_cast<double>(xs.size());
    s.mean = sum / n;
    if (xs.size() > 1) {
        double sq = 0.0;
        for (double x : xs) sq += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(sq / (n - 1.0));
    }
    return s;
}

}  // namespace

MetricsSummary summarize(const std::vector<EpisodeRecord>& records) {
    if (records.empty()) throw UsageError("cannot summarize zero episodes");
    std::vector<double> de, dm, rw;
    de.reserve(records.size());
    dm.reserve(records.size());
    rw.reserve(records.size());
    MetricsSummary s;
    for (const auto& r : records) {
        de.push_back(r.d_E);
        dm.push_back(r.d_M);
        rw.push_back(r.reward);
        if (r.diverged) s.divergences += 1;
    }
    s.d_E = stats_of(de);
    s.d_M = stats_of(dm);
    s.reward = stats_of(rw);
    s.episodes = static_cast<long>(records.size());
    return s;
}

EvalResult run_monte_carlo(Policy& policy, const EvalConfig& eval_cfg,
                           const ScenarioConfig& scenario) {
    if (eval_cfg.episodes < 1) throw ConfigError("episodes must be >= 1");
    const int workers = std::max(1, eval_cfg.workers);
    const double beta = policy_beta(policy, eval_cfg);

    std::vector<EpisodeRecord> records(static_cast<std::size_t>(eval_cfg.episodes));
    if (workers == 1) {
        run_range(policy, eval_cfg, scenario, beta, 0, eval_cfg.episodes, records);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (eval_cfg.episodes + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const long begin = w * chunk;
            const long end = std::min(eval_cfg.episodes, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back([&, begin, end] {
                run_range(policy, eval_cfg, scenario, beta, begin, end, records);
            });
        }
        for (auto& t : pool) t.join();
    }

    EvalResult result;
    result.policy = policy.name();
    result.records = std::move(records);
    result.summary = summarize(result.records);
    return result;
}

ComparisonTable compare(const std::vector<Policy*>& policies, const EvalConfig& eval_cfg,
                        const ScenarioConfig& scenario) {
    if (policies.size() < 1) throw ConfigError("compare needs at least one policy");
    ComparisonTable table;
    for (Policy* p : policies)
        table.columns.push_back(run_monte_carlo(*p, eval_cfg, scenario));
    return table;
}

EpisodeOutcome demo_episode(Policy& policy, std::uint64_t seed,
                            const ScenarioConfig& scenario, double beta_report) {
    const double beta = policy.reward_beta().value_or(beta_report);
    Environment env(scenario, RewardParams{beta, 1e-9});
    const ObsVec obs = env.reset(seed);
    DecisionPoint dp{obs, env.belief(), env.observer()};
    Rng policy_rng = substream(seed, Stream::policy);
    return env.step(policy.act(dp, policy_rng));
}

namespace {

struct SummaryRow {
    const char* name;
    bool higher_is_better;
    double (*get)(const MetricsSummary&);
};

constexpr SummaryRow kRows[] = {
    {"avg_euclidean_dist", false, [](const MetricsSummary& s) { return s.d_E.mean; }},
    {"std_euclidean_dist", false, [](const MetricsSummary& s) { return s.d_E.std; }},
    {"min_euclidean_dist", false, [](const MetricsSummary& s) { return s.d_E.min; }},
    {"max_euclidean_dist", false, [](const MetricsSummary& s) { return s.d_E.max; }},
    {"avg_mahalanobis_dist", false, [](const MetricsSummary& s) { return s.d_M.mean; }},
    {"std_mahalanobis_dist", false, [](const MetricsSummary& s) { return s.d_M.std; }},
    {"min_mahalanobis_dist", false, [](const MetricsSummary& s) { return s.d_M.min; }},
    {"max_mahalanobis_dist", false, [](const MetricsSummary& s) { return s.d_M.max; }},
    {"avg_reward", true, [](const MetricsSummary& s) { return s.reward.mean; }},
    {"std_reward", false, [](const MetricsSummary& s) { return s.reward.std; }},
    {"min_reward", true, [](const MetricsSummary& s) { return s.reward.min; }},
    {"max_reward", true, [](const MetricsSummary& s) { return s.reward.max; }},
    {"divergences", false,
     [](const MetricsSummary& s) { return static_cast<double>(s.divergences); }},
    {"episodes", false,
     [](const MetricsSummary& s) { return static_cast<double>(s.episodes); }},
};

std::size_t best_column(const SummaryRow& row, const ComparisonTable& table) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < table.columns.size(); ++c) {
        const double v = row.get(table.columns[c].summary);
        const double bv = row.get(table.columns[best].summary);
        if (row.higher_is_better ? v > bv : v < bv) best = c;
    }
    return best;
}

}  // namespace

void write_summary_csv(std::ostream& os, const ComparisonTable& table) {
    os << "metric";
    for (const auto& col : table.columns) os << "," << col.policy;
    os << ",best\n";
    for (const auto& row : kRows) {
        os << row.name;
        for (const auto& col : table.columns) os << "," << fmt_g17(row.get(col.summary));
        os << "," << table.columns[best_column(row, table)].policy << "\n";
    }
}

void write_episodes_csv(std::ostream& os, const ComparisonTable& table) {
    os << "policy,episode,euclidean_dist,mahalanobis_dist,reward,action,diverged\n";
    for (const auto& col : table.columns) {
        for (const auto& r : col.records) {
            os << col.policy << "," << r.index << "," << fmt_g17(r.d_E) << ","
               << fmt_g17(r.d_M) << "," << fmt_g17(r.reward) << "," << r.action << ","
               << (r.diverged ? 1 : 0) << "\n";
        }
    }
}

void write_trace_csv(std::ostream& os, const EpisodeOutcome& outcome) {
    os << "step,leg,action_id,rel_x,rel_y,rel_vx,rel_vy,obs_x,obs_y,obs_vx,obs_vy,"
          "bearing,mean_x,mean_y,mean_vx,mean_vy,P11,P12,P13,P14,P22,P23,P24,P33,P34,"
          "P44\n";
    for (const auto& t : outcome.trace) {
        os << t.step << "," << t.leg << "," << t.action_id;
        for (int i = 0; i < 4; ++i) os << "," << fmt_g17(t.true_rel[i]);
        os << "," << fmt_g17(t.observer.position[0]) << ","
           << fmt_g17(t.observer.position[1]) << "," << fmt_g17(t.observer.velocity[0])
           << "," << fmt_g17(t.observer.velocity[1]);
        os << "," << fmt_g17(t.bearing);
        for (int i = 0; i < 4; ++i) os << "," << fmt_g17(t.belief.mean[i]);
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) os << "," << fmt_g17(t.belief.cov(i, j));
        os << "\n";
    }
}

void print_comparison(std::ostream& os, const ComparisonTable& table) {
    constexpr int kNameWidth = 22;
    constexpr int kColWidth = 14;
    os << std::left << std::setw(kNameWidth) << "metric";
    for (const auto& col : table.columns)
        os << std::right << std::setw(kColWidth) << col.policy;
    os << "\n";
    for (const auto& row : kRows) {
        os << std::left << std::setw(kNameWidth) << row.name;
        const std::size_t best = best_column(row, table);
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            std::string cell = fmt_fixed(row.get(table.columns[c].summary));
            if (c == best && table.columns.size() > 1) cell += "*";
            os << std::right << std::setw(kColWidth) << cell;
        }
        os << "\n";
    }
}

}  // namespace bot
