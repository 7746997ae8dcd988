#include "bot/policies.hpp"

#include <cmath>
#include <limits>

#include "bot/angles.hpp"
#include "bot/errors.hpp"

namespace bot {

int nearest_action(double heading) {
    int best = 1;
    double best_dist = std::abs(wrap_angle(heading - action_heading(1)));
    for (int a = 2; a <= kNumActions; ++a) {
        const double d = std::abs(wrap_angle(heading - action_heading(a)));
        if (d < best_dist) {
            best = a;
            best_dist = d;
        }
    }
    return best;
}

int ptb_action(const GaussianBelief& belief, const ScenarioConfig& cfg) {
    const double los = std::atan2(belief.mean[1], belief.mean[0]);
    const int a_plus = nearest_action(wrap_angle(los + kPi / 2.0));
    const int a_minus = nearest_action(wrap_angle(los - kPi / 2.0));

    const double horizon = cfg.steps_per_leg * cfg.sample_interval;
    const Vec2 predicted = belief.mean.head<2>() + horizon * belief.mean.tail<2>();

    auto toward = [&](int a) {
        const double th = action_heading(a);
        return std::cos(th) * predicted[0] + std::sin(th) * predicted[1];
    };
    const double s_plus = toward(a_plus), s_minus = toward(a_minus);
    if (s_plus > s_minus) return a_plus;
    if (s_minus > s_plus) return a_minus;
    return std::min(a_plus, a_minus);
}

int ito_action(const GaussianBelief& belief, const PlatformState& observer,
               double sigma_nu, int M, const ScenarioConfig& cfg) {
    const Mat2 P_pos = belief.cov.topLeftCorner<2, 2>();
    const Mat2 J = P_pos.inverse();
    const double inv_var = 1.0 / (sigma_nu * sigma_nu);
    const double T = cfg.sample_interval;

    int best = 1;
    double best_det = -std::numeric_limits<double>::infinity();
    for (int a = 1; a <= kNumActions; ++a) {
        const double th = action_heading(a);
        const Vec2 v_cand{cfg.platform_speed * std::cos(th),
                          cfg.platform_speed * std::sin(th)};
        // Relative velocity after the heading change, then straight CV motion.
        Vec2 pos = belief.mean.head<2>();
        const Vec2 vel = belief.mean.tail<2>() + (observer.velocity - v_cand);

        Mat2 S = J;
        for (int k = 1; k <= M; ++k) {
            pos += T * vel;
            const double r2 = std::max(pos.squaredNorm(), 1e-6);
            const Vec2 H{-pos[1] / r2, pos[0] / r2};
            S += inv_var * (H * H.transpose());
        }
        const double det = S.determinant();
        if (det > best_det) {
            best = a;
            best_det = det;
        }
    }
    return best;
}

int random_action(Rng& rng) {
    return static_cast<int>(rng.uniform_int(kNumActions)) + 1;
}

int dqn_action(const ObsVec& obs, const DqnModel& model) {
    const Eigen::VectorXd q = model.net.forward(model.norm.apply(obs));
    if (q.size() != kNumActions) throw ConfigError("model output size mismatch");
    int best = 1;
    for (int a = 2; a <= kNumActions; ++a)
        if (q[a - 1] > q[best - 1]) best = a;
    return best;
}

std::unique_ptr<Policy> make_policy(const std::string& name, const ScenarioConfig& cfg,
                                    const std::string& model_path) {
    if (name == "ptb") return std::make_unique<PtbPolicy>(cfg);
    if (name == "ito") return std::make_unique<ItoPolicy>(cfg);
    if (name == "random") return std::make_unique<RandomPolicy>();
    if (name == "dqn") {
        if (model_path.empty())
            throw ConfigError("policy dqn requires a model checkpoint path");
        return std::make_unique<DqnPolicy>(load_checkpoint(model_path));
    }
    throw ConfigError("unknown policy: " + name);
}

}  // namespace bot
