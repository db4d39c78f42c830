#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pedcross/perception.hpp"
#include "pedcross/rng.hpp"
#include "pedcross/world.hpp"

namespace pedcross {

enum class Action { Go, NotGo };
enum class ObsMode { Ideal, Noisy, Conditioned };

const char* to_string(Action a);
const char* to_string(ObsMode m);

inline constexpr double kDt = 0.1;          // s per step
inline constexpr int kEpisodeCap = 300;     // steps (30 s)
inline constexpr double kStepReward = -0.5;
inline constexpr double kSafeReward = 200.0;
inline constexpr double kCollisionReward = -200.0;

// Normalization scales for the network input.
inline constexpr double kPosScale = 100.0;  // m
inline constexpr double kVelScale = 20.0;   // m/s

/// What the agent sees each step: the filtered vehicle state with its
/// uncertainty plus the exact ego state. sigma_v is appended only in
/// conditioned mode.
struct Observation {
    double est_pos = 0.0;
    double est_vel = 0.0;
    double var_pos = 0.0;
    double var_vel = 0.0;
    double ego_pos = 0.0;
    double ego_vel = 0.0;
    double sigma_v = 0.0;
    bool conditioned = false;
};

/// Deterministic, invertible scaling of an observation to network input.
std::vector<double> normalize(const Observation& o);

/// Input dimension for an observation mode (6 plain, 7 conditioned).
int observation_dim(ObsMode mode);

struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool done = false;
    std::optional<Outcome> outcome;  // present iff done
    std::optional<double> cit;       // present iff done; +inf when truncated
};

/// The crossing POMDP. One instance runs one episode at a time; instances
/// are independent and may be used concurrently with separate seeds.
class CrossingEnv {
public:
    explicit CrossingEnv(RoadGeometry geometry = {});

    Observation reset(const Scenario& s, NoiseParams params, ObsMode mode,
                      std::uint64_t seed);

    /// Advance one decision step. Throws std::logic_error on a finished
    /// episode.
    StepResult step(Action a);

    bool done() const { return done_; }
    double time() const { return world_.t; }
    int steps() const { return steps_; }
    const WorldState& world() const { return world_; }
    const BeliefState& belief() const { return belief_; }
    const Scenario& scenario() const { return scenario_; }
    const RoadGeometry& geometry() const { return geometry_; }
    ObsMode mode() const { return mode_; }

    /// Per-step trace recording for debugging / CSV export (off by default).
    void set_trace(bool on) { trace_enabled_ = on; }
    void write_trace_csv(const std::string& path) const;

private:
    Observation assemble() const;
    void record(const Observation& o, const char* action, double reward);

    RoadGeometry geometry_;
    Scenario scenario_;
    NoiseParams params_;
    ObsMode mode_ = ObsMode::Ideal;
    Rng rng_{0};
    WorldState world_;
    BeliefState belief_;
    Observation obs_;
    bool done_ = true;
    int steps_ = 0;

    struct TraceRow {
        double t, true_dist, true_speed, ped_progress;
        Observation obs;
        std::string action;
        double reward;
    };
    bool trace_enabled_ = false;
    std::vector<TraceRow> trace_;
};

}  // namespace pedcross
