#include "bot/models.hpp"

#include <cmath>

#include "bot/angles.hpp"
#include "bot/errors.hpp"

namespace bot {

void ScenarioConfig::validate() const {
    if (steps_per_leg < 1) throw ConfigError("steps_per_leg must be >= 1");
    if (platform_speed <= 0.0) throw ConfigError("platform_speed must be > 0");
    if (d_min <= 0.0 || d_max < d_min) throw ConfigError("require 0 < d_min <= d_max");
    if (bearing_noise_sigma <= 0.0) throw ConfigError("bearing_noise_sigma must be > 0");
    if (process_noise_q < 0.0) throw ConfigError("process_noise_q must be >= 0");
    if (nominal_range <= 0.0) throw ConfigError("nominal_range must be > 0");
    if (range_sigma <= 0.0) throw ConfigError("range_sigma must be > 0");
    if (v_max <= 0.0) throw ConfigError("v_max must be > 0");
    if (sample_interval <= 0.0) throw ConfigError("sample_interval must be > 0");
}

Mat4 transition_matrix(double T) {
    Mat4 F = Mat4::Identity();
    F(0, 2) = T;
    F(1, 3) = T;
    return F;
}

Mat4 process_noise_cov(double T, double q) {
    Mat4 Q = Mat4::Zero();
    const double t3 = q * T * T * T / 3.0;
    const double t2 = q * T * T / 2.0;
    const double t1 = q * T;
    Q(0, 0) = Q(1, 1) = t3;
    Q(2, 2) = Q(3, 3) = t1;
    Q(0, 2) = Q(2, 0) = t2;
    Q(1, 3) = Q(3, 1) = t2;
    return Q;
}

RelativeState propagate_relative(const RelativeState& x, const PlatformState& obs_prev,
                                 const PlatformState& obs_next, double T, double q,
                                 Rng& rng) {
    const Mat4 F = transition_matrix(T);
    const Vec4 U = obs_next.as_vec() - F * obs_prev.as_vec();
    RelativeState out = F * x - U;
    if (q > 0.0) {
        const Mat4 Q = process_noise_cov(T, q);
        Eigen::LLT<Mat4> llt(Q);
        Vec4 n;
        n << rng.normal(), rng.normal(), rng.normal(), rng.normal();
        out += llt.matrixL() * n;
    }
    return out;
}

double measure_bearing(const RelativeState& x, double sigma_nu, Rng& rng) {
    if (x[0] == 0.0 && x[1] == 0.0)
        throw InvalidGeometry("bearing undefined at zero range");
    double z = std::atan2(x[1], x[0]);
    if (sigma_nu > 0.0) z += sigma_nu * rng.normal();
    return wrap_angle(z);
}

std::vector<PlatformState> run_leg(const PlatformState& start, double heading, int M,
                                   double speed) {
    const Vec2 v{speed * std::cos(heading), speed * std::sin(heading)};
    std::vector<PlatformState> states;
    states.reserve(static_cast<std::size_t>(M) + 1);
    states.push_back({start.position, v});
    for (int k = 1; k <= M; ++k)
        states.push_back({start.position + static_cast<double>(k) * v, v});
    return states;
}

Scenario sample_scenario(const ScenarioConfig& cfg, Rng& rng) {
    const double target_heading = rng.uniform(0.0, kTwoPi);
    const double range = rng.uniform(cfg.d_min, cfg.d_max);
    const double obs_bearing = rng.uniform(0.0, kTwoPi);

    Scenario s;
    s.target_abs << 0.0, 0.0, cfg.platform_speed * std::cos(target_heading),
        cfg.platform_speed * std::sin(target_heading);
    s.observer.position = range * Vec2{std::cos(obs_bearing), std::sin(obs_bearing)};
    s.observer.velocity.setZero();
    return s;
}

}  // namespace bot
