#include "bot/ckf.hpp"

#include <cmath>

#include "bot/angles.hpp"
#include "bot/errors.hpp"

namespace bot::ckf {

namespace {

Mat4 symmetrize(const Mat4& P) { return 0.5 * (P + P.transpose()); }

}  // namespace

Mat4 cholesky_factor(const Mat4& P) {
    Eigen::LLT<Mat4> llt(P);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    const double jitter = 1e-9 * P.trace() / 4.0;
    Mat4 Pj = P + jitter * Mat4::Identity();
    Eigen::LLT<Mat4> retry(Pj);
    if (retry.info() == Eigen::Success) return retry.matrixL();
    throw FilterHealthError("covariance is not positive definite");
}

std::array<Vec4, 8> cubature_points(const GaussianBelief& belief) {
    const Mat4 S = cholesky_factor(belief.cov);
    std::array<Vec4, 8> pts;
    for (int i = 0; i < 4; ++i) {
        const Vec4 d = 2.0 * S.col(i);
        pts[i] = belief.mean + d;
        pts[i + 4] = belief.mean - d;
    }
    return pts;
}

GaussianBelief predict(const GaussianBelief& belief, const Vec4& U, const Mat4& F,
                       const Mat4& Q) {
    GaussianBelief out;
    out.mean = F * belief.mean - U;
    out.cov = symmetrize(F * belief.cov * F.transpose() + Q);
    return out;
}

GaussianBelief update_with_model(const GaussianBelief& pred, double z,
                                 const ScalarMeasurement& model) {
    const auto pts = cubature_points(pred);
    constexpr double w = 1.0 / 8.0;

    std::array<double, 8> zi;
    for (int i = 0; i < 8; ++i) zi[i] = model.h(pts[i]);

    double zhat;
    if (model.circular) {
        double s = 0.0, c = 0.0;
        for (double v : zi) {
            s += std::sin(v);
            c += std::cos(v);
        }
        zhat = std::atan2(s, c);
    } else {
        zhat = 0.0;
        for (double v : zi) zhat += w * v;
    }

    double Pzz = model.noise_var;
    Vec4 Pxz = Vec4::Zero();
    for (int i = 0; i < 8; ++i) {
        const double r = model.circular ? wrap_angle(zi[i] - zhat) : zi[i] - zhat;
        Pzz += w * r * r;
        Pxz += w * r * (pts[i] - pred.mean);
    }
    if (Pzz <= 0.0) throw NumericalFailure("innovation variance is not positive");

    const double innov = model.circular ? wrap_angle(z - zhat) : z - zhat;
    const Vec4 W = Pxz / Pzz;

    GaussianBelief out;
    out.mean = pred.mean + W * innov;
    out.cov = symmetrize(pred.cov - Pzz * (W * W.transpose()));
    if (!out.mean.allFinite() || !out.cov.allFinite())
        throw FilterDivergence("non-finite posterior");
    return out;
}

GaussianBelief update(const GaussianBelief& pred, double z, double sigma_nu) {
    ScalarMeasurement m;
    m.h = [](const Vec4& x) { return std::atan2(x[1], x[0]); };
    m.noise_var = sigma_nu * sigma_nu;
    m.circular = true;
    return update_with_model(pred, z, m);
}

GaussianBelief initialize(double z0, const ScenarioConfig& cfg) {
    const double c = std::cos(z0), s = std::sin(z0);
    const double R0 = cfg.nominal_range;
    const double vr = cfg.range_sigma * cfg.range_sigma;
    const double vb = R0 * R0 * cfg.bearing_noise_sigma * cfg.bearing_noise_sigma;
    const double sv = cfg.v_max / 3.0;

    GaussianBelief b;
    b.mean << R0 * c, R0 * s, 0.0, 0.0;
    b.cov.setZero();
    b.cov(0, 0) = vr * c * c + vb * s * s;
    b.cov(1, 1) = vr * s * s + vb * c * c;
    b.cov(0, 1) = b.cov(1, 0) = (vr - vb) * s * c;
    b.cov(2, 2) = b.cov(3, 3) = sv * sv;
    return b;
}

}  // namespace bot::ckf
