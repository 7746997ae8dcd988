#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bot/rng.hpp"

namespace bot {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

// Relative target-minus-observer state, ordered [x, y, vx, vy] everywhere.
using RelativeState = Vec4;

struct PlatformState {
    Vec2 position{0.0, 0.0};
    Vec2 velocity{0.0, 0.0};

    Vec4 as_vec() const {
        Vec4 s;
        s << position, velocity;
        return s;
    }
};

struct ScenarioConfig {
    int steps_per_leg = 12;
    double platform_speed = 1.0;
    double d_min = 18.0;
    double d_max = 26.0;
    double bearing_noise_sigma = 0.0175;
    double process_noise_q = 1e-6;
    double nominal_range = 23.0;
    double range_sigma = 5.0;
    double v_max = 3.0;
    double sample_interval = 1.0;

    void validate() const;
};

// Constant-velocity transition matrix [[I, T*I], [0, I]].
Mat4 transition_matrix(double T);

// Process noise covariance q * [[T^3/3 I, T^2/2 I], [T^2/2 I, T I]].
Mat4 process_noise_cov(double T, double q);

// One true-state step: F*x - U + w, with U the observer acceleration input
// obs_next - F*obs_prev and w ~ N(0, Q). q = 0 draws nothing.
RelativeState propagate_relative(const RelativeState& x, const PlatformState& obs_prev,
                                 const PlatformState& obs_next, double T, double q,
                                 Rng& rng);

// Noisy bearing atan2(y, x) + nu wrapped to (-pi, pi]. Throws InvalidGeometry
// at zero range.
double measure_bearing(const RelativeState& x, double sigma_nu, Rng& rng);

// Constant-speed straight leg; returns M+1 states including the start.
std::vector<PlatformState> run_leg(const PlatformState& start, double heading, int M,
                                   double speed);

struct Scenario {
    RelativeState target_abs;  // target at the origin, random heading, unit speed
    PlatformState observer;    // on the range annulus; velocity set at leg start
};

Scenario sample_scenario(const ScenarioConfig& cfg, Rng& rng);

}  // namespace bot
