#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pedcross/env.hpp"
#include "pedcross/qnet.hpp"

namespace pedcross {

/// One crossing trial, model-generated or human.
struct TrialRecord {
    int scenario_id = 0;
    double sigma_v = 0.0;
    double cit = 0.0;       // +inf when the episode truncated without a Go
    bool accepted = false;  // cit < tau0
    bool collided = false;
    bool human = false;
    int participant_id = -1;  // human data only
};

/// n greedy episodes with independent RNG substreams.
std::vector<TrialRecord> rollout(const QNetwork& net, ObsMode mode, const Scenario& s,
                                 double sigma_v, int n, std::uint64_t seed,
                                 const RoadGeometry& geometry = {});

/// Acceptance fraction with a 95% Wilson score interval.
struct AcceptanceCell {
    int scenario_id = 0;
    double tau0 = 0.0;
    double v0 = 0.0;
    double sigma_v = 0.0;
    int n = 0;
    int accepted = 0;
    double rate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};
AcceptanceCell gap_acceptance_rate(const std::vector<TrialRecord>& group,
                                   const Scenario& s);

/// Right-continuous empirical CDF over finite CITs; truncated trials are
/// excluded from the curve and counted separately.
struct CitCdf {
    std::vector<std::pair<double, double>> points;  // (t, cumulative probability)
    int truncated = 0;
    int total = 0;
};
CitCdf cit_cdf(const std::vector<TrialRecord>& records);

/// Monte-Carlo spread of the estimated TTA after filter initialization plus
/// one update, with no policy involved. Samples with a non-positive velocity
/// belief have no defined TTA and are excluded (counted in n_defined).
struct TtaDispersion {
    double mean = 0.0;
    double sd = 0.0;
    double p5 = 0.0;
    double p95 = 0.0;
    int n = 0;
    int n_defined = 0;
};
TtaDispersion tta_dispersion(double sigma_v, const Scenario& s, int n, std::uint64_t seed,
                             const RoadGeometry& geometry = {});

void write_trials_csv(const std::string& path, const std::vector<TrialRecord>& records);
void write_acceptance_csv(const std::string& path, const std::vector<AcceptanceCell>& cells);
/// sigma_v,scenario_id,t,cum_prob rows, one block per (sigma, scenario).
void write_cdf_csv(const std::string& path,
                   const std::vector<std::pair<std::pair<double, int>, CitCdf>>& curves);
void write_dispersion_csv(const std::string& path,
                          const std::vector<std::pair<std::pair<double, int>, TtaDispersion>>& rows);

}  // namespace pedcross
