#pragma once

#include <cstdint>
#include <vector>

#include "bot/ckf.hpp"
#include "bot/models.hpp"

namespace bot {

// Policy input, fixed layout: position estimate (2), velocity estimate (2),
// position covariance P11 P12 P22 (3), velocity covariance P33 P34 P44 (3),
// cos z, sin z (2). Physical units; scaling happens in the network adapter.
using ObsVec = Eigen::Matrix<double, 12, 1>;

inline constexpr int kNumActions = 16;

// Action ids are 1..16, heading (j-1) * 2*pi/16 measured east-anticlockwise.
double action_heading(int action_id);

ObsVec build_observation(const GaussianBelief& belief, double z);

struct RewardParams {
    double beta = 0.5;
    double distance_floor = 1e-9;
};

double euclidean_distance(const Vec2& a, const Vec2& b);

// sqrt(e' P^-1 e) via linear solve; jitters once on a singular block.
double mahalanobis_distance(const Vec2& est, const Vec2& truth, const Mat2& P_pos);

// r = -max(d_E, floor)^beta * max(d_M, floor)^(1-beta), always <= 0.
double reward(double d_E, double d_M, const RewardParams& params);

struct TraceRecord {
    int step = 0;       // 0..2M, 0 is the reset measurement
    int leg = 1;        // 1 or 2
    int action_id = 0;  // 0 on leg 1, chosen id on leg 2
    RelativeState true_rel = RelativeState::Zero();
    PlatformState observer;
    double bearing = 0.0;
    GaussianBelief belief;
};

struct EpisodeOutcome {
    double d_E = 0.0;
    double d_M = 0.0;
    double reward = 0.0;
    int action = 0;
    bool diverged = false;
    std::vector<TraceRecord> trace;
};

// Two-leg episode: reset samples a scenario, runs leg 1 perpendicular to the
// first bearing (side chosen by coin), filtering every sub-step; step takes
// the single leg-2 heading decision and returns the terminal outcome.
class Environment {
  public:
    Environment(ScenarioConfig cfg, RewardParams rp);

    ObsVec reset(std::uint64_t episode_seed);
    EpisodeOutcome step(int action_id);

    const GaussianBelief& belief() const { return belief_; }
    const PlatformState& observer() const { return observer_; }
    double last_bearing() const { return last_bearing_; }
    const ScenarioConfig& config() const { return cfg_; }

  private:
    void run_sub_step(double T, int step_index, int leg, int action_id,
                      const Vec2& v_next);

    ScenarioConfig cfg_;
    RewardParams rp_;
    bool awaiting_decision_ = false;

    RelativeState true_rel_ = RelativeState::Zero();
    PlatformState observer_;
    GaussianBelief belief_;
    double last_bearing_ = 0.0;
    std::vector<TraceRecord> trace_;

    Rng process_rng_{0};
    Rng measure_rng_{0};
};

}  // namespace bot
