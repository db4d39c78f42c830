#include "pedcross/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pedcross {

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::SafeBefore: return "safe_before";
        case Outcome::SafeAfter: return "safe_after";
        case Outcome::Collision: return "collision";
        case Outcome::Truncated: return "truncated";
    }
    return "?";
}

std::vector<Scenario> scenario_table() {
    std::vector<Scenario> t;
    t.push_back(Scenario::make(1, 6.94, 15.90));
    t.push_back(Scenario::make(2, 13.89, 31.81));
    t.push_back(Scenario::make(3, 6.94, 31.81));
    t.push_back(Scenario::make(4, 13.89, 63.61));
    t.push_back(Scenario::make(5, 6.94, 47.71));
    t.push_back(Scenario::make(6, 13.89, 95.42));
    // tau0 = 1 s at both speeds; too short to cross ahead of the vehicle.
    t.push_back(Scenario::make(7, 6.94, 6.94, true));
    t.push_back(Scenario::make(8, 13.89, 13.89, true));
    return t;
}

double vehicle_distance(const Scenario& s, double t) {
    if (t < 0.0) throw std::invalid_argument("vehicle_distance: t must be >= 0");
    return s.d0 - s.v0 * t;
}

CrossingOutcome crossing_outcome(const Scenario& s, const RoadGeometry& g, double cit) {
    if (cit < 0.0) throw std::invalid_argument("crossing_outcome: cit must be >= 0");
    const double band_lo = g.vehicle_lane_center_offset - g.vehicle_width / 2.0;
    const double band_hi = g.vehicle_lane_center_offset + g.vehicle_width / 2.0;
    // Pedestrian occupies the vehicle's lateral band during [ped_in, ped_out].
    const double ped_in = cit + band_lo / g.walk_speed;
    const double ped_out = cit + band_hi / g.walk_speed;
    // Vehicle occupies the crossing line during [veh_in, veh_out].
    const double veh_in = s.tau0;
    const double veh_out = s.tau0 + g.vehicle_length / s.v0;

    // Signed separation of the two closed intervals; <= 0 means overlap.
    const double margin = std::max(veh_in - ped_out, ped_in - veh_out);
    CrossingOutcome r;
    r.margin = margin;
    if (margin <= 0.0) {
        r.outcome = Outcome::Collision;
    } else {
        r.outcome = cit < s.tau0 ? Outcome::SafeBefore : Outcome::SafeAfter;
    }
    return r;
}

double euclidean_distance(const WorldState& ws, const RoadGeometry& g) {
    const double lateral = g.vehicle_lane_center_offset - ws.ped_progress;
    return std::hypot(ws.vehicle_front_distance, lateral);
}

void validate(const Scenario& s) {
    if (!(s.v0 > 0.0) || !(s.d0 > 0.0))
        throw std::invalid_argument("Scenario: v0 and d0 must be positive");
    if (std::abs(s.tau0 - s.d0 / s.v0) > 1e-9)
        throw std::invalid_argument("Scenario: tau0 must equal d0/v0");
}

void validate(const RoadGeometry& g) {
    if (!(g.walk_speed > 0.0))
        throw std::invalid_argument("RoadGeometry: walk_speed must be positive");
    if (!(g.eye_height > 0.0))
        throw std::invalid_argument("RoadGeometry: eye_height must be positive");
    const double lo = g.vehicle_lane_center_offset - g.vehicle_width / 2.0;
    const double hi = g.vehicle_lane_center_offset + g.vehicle_width / 2.0;
    if (!(lo > 0.0) || !(hi <= g.road_width))
        throw std::invalid_argument("RoadGeometry: vehicle band must lie inside the road");
}

}  // namespace pedcross
