#include "bot/env.hpp"

#include <cmath>

#include "bot/angles.hpp"
#include "bot/errors.hpp"

namespace bot {

double action_heading(int action_id) {
    if (action_id < 1 || action_id > kNumActions)
        throw UsageError("action id out of range");
    return (action_id - 1) * kTwoPi / kNumActions;
}

ObsVec build_observation(const GaussianBelief& belief, double z) {
    ObsVec o;
    const Mat4& P = belief.cov;
    o << belief.mean[0], belief.mean[1], belief.mean[2], belief.mean[3],
        P(0, 0), P(0, 1), P(1, 1), P(2, 2), P(2, 3), P(3, 3),
        std::cos(z), std::sin(z);
    return o;
}

double euclidean_distance(const Vec2& a, const Vec2& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double mahalanobis_distance(const Vec2& est, const Vec2& truth, const Mat2& P_pos) {
    const Vec2 e = est - truth;
    Eigen::LDLT<Mat2> ldlt(P_pos);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        const double jitter = 1e-9 * P_pos.trace() / 2.0;
        ldlt.compute(P_pos + jitter * Mat2::Identity());
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
            throw FilterHealthError("position covariance is not positive definite");
    }
    const double q = e.dot(ldlt.solve(e));
    return std::sqrt(std::max(q, 0.0));
}

double reward(double d_E, double d_M, const RewardParams& params) {
    const double de = std::max(d_E, params.distance_floor);
    const double dm = std::max(d_M, params.distance_floor);
    return -std::pow(de, params.beta) * std::pow(dm, 1.0 - params.beta);
}

Environment::Environment(ScenarioConfig cfg, RewardParams rp)
    : cfg_(std::move(cfg)), rp_(rp) {
    cfg_.validate();
    if (rp_.beta < 0.0 || rp_.beta > 1.0) throw ConfigError("beta must be in [0, 1]");
    if (rp_.distance_floor <= 0.0) throw ConfigError("distance_floor must be > 0");
}

// One time step: the observer moves with v_next (the heading change enters the
// filter through U), the true state propagates with process noise, and the
// belief runs predict plus bearing update.
void Environment::run_sub_step(double T, int step_index, int leg, int action_id,
                               const Vec2& v_next) {
    const PlatformState prev = observer_;
    const PlatformState next{prev.position + T * v_next, v_next};

    true_rel_ =
        propagate_relative(true_rel_, prev, next, T, cfg_.process_noise_q, process_rng_);

    const Mat4 F = transition_matrix(T);
    const Vec4 U = next.as_vec() - F * prev.as_vec();
    belief_ = ckf::predict(belief_, U, F, process_noise_cov(T, cfg_.process_noise_q));

    observer_ = next;
    last_bearing_ = measure_bearing(true_rel_, cfg_.bearing_noise_sigma, measure_rng_);
    belief_ = ckf::update(belief_, last_bearing_, cfg_.bearing_noise_sigma);

    trace_.push_back(
        {step_index, leg, action_id, true_rel_, observer_, last_bearing_, belief_});
}

ObsVec Environment::reset(std::uint64_t episode_seed) {
    Rng scenario_rng = substream(episode_seed, Stream::scenario);
    process_rng_ = substream(episode_seed, Stream::process_noise);
    measure_rng_ = substream(episode_seed, Stream::measurement_noise);
    Rng coin_rng = substream(episode_seed, Stream::leg1_coin);

    const Scenario sc = sample_scenario(cfg_, scenario_rng);
    observer_ = sc.observer;
    true_rel_ = sc.target_abs;
    true_rel_.head<2>() -= observer_.position;

    const double z0 = measure_bearing(true_rel_, cfg_.bearing_noise_sigma, measure_rng_);
    belief_ = ckf::initialize(z0, cfg_);
    last_bearing_ = z0;

    const bool left = coin_rng.uniform01() < 0.5;
    const double heading1 = wrap_angle(z0 + (left ? kPi / 2.0 : -kPi / 2.0));
    observer_.velocity =
        cfg_.platform_speed * Vec2{std::cos(heading1), std::sin(heading1)};
    true_rel_.tail<2>() -= observer_.velocity;

    trace_.clear();
    trace_.push_back({0, 1, 0, true_rel_, observer_, z0, belief_});

    for (int k = 1; k <= cfg_.steps_per_leg; ++k)
        run_sub_step(cfg_.sample_interval, k, 1, 0, observer_.velocity);

    awaiting_decision_ = true;
    return build_observation(belief_, last_bearing_);
}

EpisodeOutcome Environment::step(int action_id) {
    if (!awaiting_decision_)
        throw UsageError("step called without a pending decision; call reset first");
    const double heading = action_heading(action_id);
    awaiting_decision_ = false;

    const Vec2 v_new = cfg_.platform_speed * Vec2{std::cos(heading), std::sin(heading)};

    EpisodeOutcome out;
    out.action = action_id;

    GaussianBelief valid_belief = belief_;
    RelativeState valid_true = true_rel_;
    try {
        for (int k = 1; k <= cfg_.steps_per_leg; ++k) {
            run_sub_step(cfg_.sample_interval, cfg_.steps_per_leg + k, 2, action_id,
                         v_new);
            valid_belief = belief_;
            valid_true = true_rel_;
        }
    } catch (const FilterError&) {
        out.diverged = true;
    }

    const Vec2 est = valid_belief.mean.head<2>();
    const Vec2 truth = valid_true.head<2>();
    out.d_E = euclidean_distance(est, truth);
    out.d_M = mahalanobis_distance(est, truth, valid_belief.cov.topLeftCorner<2, 2>());
    out.reward = reward(out.d_E, out.d_M, rp_);
    out.trace = trace_;
    return out;
}

}  // namespace bot
