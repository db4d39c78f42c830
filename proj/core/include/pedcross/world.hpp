#pragma once

#include <string>
#include <vector>

namespace pedcross {

/// One vehicle-approach condition: constant speed v0, initial distance d0 of
/// the vehicle front to the conflict point, and the derived initial
/// time-to-arrival tau0 = d0 / v0.
struct Scenario {
    int id = 0;
    double v0 = 0.0;     // vehicle speed, m/s
    double d0 = 0.0;     // initial front distance to the crossing line, m
    double tau0 = 0.0;   // d0 / v0, s
    bool training_only = false;

    static Scenario make(int id, double v0, double d0, bool training_only = false) {
        return Scenario{id, v0, d0, d0 / v0, training_only};
    }
};

/// Crossing-site geometry and pedestrian parameters. The vehicle drives in
/// the near lane; its lane center sits road_width/4 from the pedestrian curb.
struct RoadGeometry {
    double road_width = 5.85;                      // m, two lanes total
    int lane_count = 2;
    double vehicle_lane_center_offset = 5.85 / 4;  // m from curb, 1.4625
    double vehicle_length = 4.5;                   // m
    double vehicle_width = 1.8;                    // m
    double walk_speed = 1.31;                      // m/s
    double eye_height = 1.6;                       // m
};

/// True (noise-free) simulation state at a time step.
struct WorldState {
    double t = 0.0;                       // s
    double vehicle_front_distance = 0.0;  // signed m, positive = approaching
    double vehicle_speed = 0.0;           // m/s
    double ped_progress = 0.0;            // lateral position from curb, m
    bool ped_moving = false;
};

enum class Outcome { SafeBefore, SafeAfter, Collision, Truncated };

const char* to_string(Outcome o);

/// Result of the analytic crossing test. margin is the signed separation
/// between the pedestrian's in-lane time interval and the vehicle's
/// on-crossing time interval: positive = gap (safe), <= 0 = overlap.
struct CrossingOutcome {
    Outcome outcome = Outcome::SafeBefore;
    double margin = 0.0;  // s
};

/// The six constant-speed conditions plus two training-only tau0 = 1 s
/// conditions, one per speed. Scenario ids 1..6 follow the condition table
/// ordering; 7 and 8 are the training-only entries.
std::vector<Scenario> scenario_table();

/// Vehicle front distance to the crossing line at time t: d0 - v0 * t.
double vehicle_distance(const Scenario& s, double t);

/// Analytic outcome of a crossing initiated at time cit (closed-interval
/// overlap test; grazing contact counts as collision).
CrossingOutcome crossing_outcome(const Scenario& s, const RoadGeometry& g, double cit);

/// Straight-line distance between pedestrian and vehicle front.
double euclidean_distance(const WorldState& ws, const RoadGeometry& g);

/// Throws std::invalid_argument if a scenario or geometry violates its
/// invariants (tau0 == d0/v0, positive speeds, vehicle inside the road).
void validate(const Scenario& s);
void validate(const RoadGeometry& g);

}  // namespace pedcross
