#pragma once

#include <array>
#include <functional>

#include "bot/models.hpp"

namespace bot {

struct GaussianBelief {
    Vec4 mean = Vec4::Zero();
    Mat4 cov = Mat4::Identity();
};

namespace ckf {

// Lower Cholesky factor of P; on failure adds jitter 1e-9*trace(P)/4*I and
// retries once, then throws FilterHealthError.
Mat4 cholesky_factor(const Mat4& P);

// The 8 points mean + S*xi_i, xi = columns of 2[I, -I], weights 1/8.
std::array<Vec4, 8> cubature_points(const GaussianBelief& belief);

GaussianBelief predict(const GaussianBelief& belief, const Vec4& U, const Mat4& F,
                       const Mat4& Q);

// Scalar measurement model for the cubature update. circular selects the
// angular treatment: predicted measurement by circular mean and all residuals
// wrapped to (-pi, pi].
struct ScalarMeasurement {
    std::function<double(const Vec4&)> h;
    double noise_var = 0.0;
    bool circular = false;
};

GaussianBelief update_with_model(const GaussianBelief& pred, double z,
                                 const ScalarMeasurement& model);

// Bearing update: h = atan2(y, x) with noise variance sigma_nu^2.
GaussianBelief update(const GaussianBelief& pred, double z, double sigma_nu);

// Polar initialisation from the first bearing at nominal range.
GaussianBelief initialize(double z0, const ScenarioConfig& cfg);

}  // namespace ckf
}  // namespace bot
