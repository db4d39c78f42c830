#include "pedcross/perception.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pedcross {

double angular_noise_sd(double d_l, double d, double h, double sigma_v) {
    if (!(d > 0.0)) throw std::domain_error("angular_noise_sd: d must be positive");
    if (!(h > 0.0)) throw std::domain_error("angular_noise_sd: h must be positive");
    if (sigma_v < 0.0) throw std::domain_error("angular_noise_sd: sigma_v must be >= 0");
    const double angle = std::atan(h / d) + sigma_v;
    if (angle >= std::asin(1.0))  // pi/2
        throw std::domain_error("angular_noise_sd: perturbed angle reaches pi/2");
    return std::abs(d_l) * (1.0 - h / (d * std::tan(angle)));
}

double clamped_noise_sd(double d_l, double lateral, double h, double sigma_v) {
    const double dl = std::max(std::abs(d_l), kMinNoiseDistance);
    const double d = std::hypot(dl, lateral);
    const double angle = std::min(std::atan(h / d) + sigma_v, kMaxBelowHorizonAngle);
    return dl * (1.0 - h / (d * std::tan(angle)));
}

double observe(const WorldState& ws, const RoadGeometry& g, const NoiseParams& p, Rng& rng) {
    const double d_l = ws.vehicle_front_distance;
    const double lateral = g.vehicle_lane_center_offset - ws.ped_progress;
    const double sd = clamped_noise_sd(d_l, lateral, g.eye_height, p.sigma_v);
    return d_l + rng.normal() * sd;
}

double measurement_variance(double z, const RoadGeometry& g, double ped_progress,
                            const NoiseParams& p) {
    const double lateral = g.vehicle_lane_center_offset - ped_progress;
    const double sd = clamped_noise_sd(z, lateral, g.eye_height, p.sigma_v);
    return std::max(sd * sd, kMeasVarFloor);
}

BeliefState kf_init(double first_obs, double true_vel, double vel_prior_sd,
                    double first_obs_var, Rng& rng) {
    if (!(vel_prior_sd > 0.0))
        throw std::invalid_argument("kf_init: vel_prior_sd must be positive");
    BeliefState b;
    b.mean_pos = first_obs;
    b.var_pos = first_obs_var;
    b.mean_vel = rng.normal(true_vel, vel_prior_sd);
    b.var_vel = vel_prior_sd * vel_prior_sd;
    b.cov_pos_vel = 0.0;
    return b;
}

BeliefState kf_step(const BeliefState& b, double z, double meas_var, double dt,
                    double process_accel_sd) {
    if (!(meas_var > 0.0)) throw std::invalid_argument("kf_step: meas_var must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("kf_step: dt must be positive");

    // Predict with F = [[1, -dt], [0, 1]] and white-acceleration noise
    // entering as G = [-dt^2/2, dt]^T.
    const double q = process_accel_sd * process_accel_sd;
    const double g0 = -0.5 * dt * dt;
    const double g1 = dt;

    const double mp = b.mean_pos - b.mean_vel * dt;
    const double mv = b.mean_vel;
    double p00 = b.var_pos - 2.0 * dt * b.cov_pos_vel + dt * dt * b.var_vel + q * g0 * g0;
    double p01 = b.cov_pos_vel - dt * b.var_vel + q * g0 * g1;
    double p11 = b.var_vel + q * g1 * g1;

    // Scalar position update, Joseph form.
    const double s = p00 + meas_var;
    const double k0 = p00 / s;
    const double k1 = p01 / s;
    const double innov = z - mp;

    BeliefState out;
    out.mean_pos = mp + k0 * innov;
    out.mean_vel = mv + k1 * innov;

    const double a00 = 1.0 - k0;  // (I - K H) rows
    const double a10 = -k1;
    out.var_pos = a00 * a00 * p00 + meas_var * k0 * k0;
    out.cov_pos_vel = a00 * (a10 * p00 + p01) + meas_var * k0 * k1;
    out.var_vel = a10 * a10 * p00 + 2.0 * a10 * p01 + p11 + meas_var * k1 * k1;
    return out;
}

std::optional<double> estimated_tta(const BeliefState& b) {
    if (!(b.mean_vel > 0.0)) return std::nullopt;
    return b.mean_pos / b.mean_vel;
}

}  // namespace pedcross
