#pragma once

#include <optional>

#include "pedcross/rng.hpp"
#include "pedcross/world.hpp"

namespace pedcross {

/// Magnitude of the retinal angular noise, radians.
struct NoiseParams {
    double sigma_v = 0.0;
};

/// Gaussian belief over the vehicle's longitudinal distance to the conflict
/// point and its approach speed. Maintained by the Kalman filter.
struct BeliefState {
    double mean_pos = 0.0;     // m
    double mean_vel = 0.0;     // m/s, positive = approaching
    double var_pos = 0.0;      // m^2
    double var_vel = 0.0;      // m^2/s^2
    double cov_pos_vel = 0.0;  // m^2/s
};

// Filter constants. The measurement floor keeps the filter defined at
// sigma_v = 0; the distance clamp keeps the noise map defined near the
// conflict point; the velocity prior SD is the population SD of the two
// scenario speeds {6.94, 13.89}.
inline constexpr double kMeasVarFloor = 1e-4;       // m^2
inline constexpr double kProcessAccelSd = 0.1;      // m/s^2
inline constexpr double kVelPriorSd = 3.475;        // m/s
inline constexpr double kMinNoiseDistance = 0.5;    // m
inline constexpr double kMaxBelowHorizonAngle = 1.5697963267948966;  // pi/2 - 1e-3

/// Position-noise SD implied by Gaussian noise of SD sigma_v on the angle
/// below the horizon: |d_l| * (1 - h / (d * tan(arctan(h/d) + sigma_v))).
/// Throws std::domain_error when the perturbed angle reaches pi/2 (degenerate
/// near distance) or when d or h is not positive.
double angular_noise_sd(double d_l, double d, double h, double sigma_v);

/// Total version used on the observation path: clamps |d_l| and the
/// longitudinal component of d up to kMinNoiseDistance and caps the perturbed
/// angle just below pi/2, so it is defined at any vehicle position.
double clamped_noise_sd(double d_l, double lateral, double h, double sigma_v);

/// One noisy position measurement of the vehicle's longitudinal distance.
/// The SD is the angular-noise map evaluated at the true state.
double observe(const WorldState& ws, const RoadGeometry& g, const NoiseParams& p, Rng& rng);

/// Measurement variance the filter assigns to a measurement z. Evaluated at
/// the measured (not true) position, clamped, floored at kMeasVarFloor.
double measurement_variance(double z, const RoadGeometry& g, double ped_progress,
                            const NoiseParams& p);

/// Filter initialization from the first measurement: position pinned to the
/// measurement, velocity drawn from a prior centered on the true speed.
BeliefState kf_init(double first_obs, double true_vel, double vel_prior_sd,
                    double first_obs_var, Rng& rng);

/// One constant-velocity predict-update on a scalar position measurement z
/// with variance meas_var. Distance-to-conflict convention: the predicted
/// position decreases by vel * dt. Joseph-form update keeps the covariance
/// positive semidefinite.
BeliefState kf_step(const BeliefState& b, double z, double meas_var, double dt,
                    double process_accel_sd = kProcessAccelSd);

/// mean_pos / mean_vel, or nullopt when the vehicle is believed stationary
/// or receding (mean_vel <= 0).
std::optional<double> estimated_tta(const BeliefState& b);

}  // namespace pedcross
