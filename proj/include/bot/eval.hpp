#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bot/env.hpp"
#include "bot/policies.hpp"

namespace bot {

struct MetricStats {
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct MetricsSummary {
    MetricStats d_E;
    MetricStats d_M;
    MetricStats reward;
    long divergences = 0;
    long episodes = 0;
};

struct EvalConfig {
    long episodes = 5000;
    std::uint64_t base_seed = 0;
    double beta_report = 0.5;  // reward weighting for policies without their own
    int workers = 1;
};

struct EpisodeRecord {
    long index = 0;
    double d_E = 0.0;
    double d_M = 0.0;
    double reward = 0.0;
    int action = 0;
    bool diverged = false;
};

struct EvalResult {
    std::string policy;
    MetricsSummary summary;
    std::vector<EpisodeRecord> records;
};

// Paired-seed Monte Carlo: episode i runs on seed base_seed + i, so every
// policy sees the same geometry and the same sub-step-indexed noise.
EvalResult run_monte_carlo(Policy& policy, const EvalConfig& eval_cfg,
                           const ScenarioConfig& scenario);

MetricsSummary summarize(const std::vector<EpisodeRecord>& records);

struct ComparisonTable {
    std::vector<EvalResult> columns;
};

ComparisonTable compare(const std::vector<Policy*>& policies, const EvalConfig& eval_cfg,
                        const ScenarioConfig& scenario);

// One full-trace episode for figure-style plotting.
EpisodeOutcome demo_episode(Policy& policy, std::uint64_t seed,
                            const ScenarioConfig& scenario, double beta_report);

void write_summary_csv(std::ostream& os, const ComparisonTable& table);
void write_episodes_csv(std::ostream& os, const ComparisonTable& table);
void write_trace_csv(std::ostream& os, const EpisodeOutcome& outcome);
void print_comparison(std::ostream& os, const ComparisonTable& table);

}  // namespace bot
