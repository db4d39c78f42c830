#include "pedcross/env.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace pedcross {

const char* to_string(Action a) { return a == Action::Go ? "go" : "not_go"; }

const char* to_string(ObsMode m) {
    switch (m) {
        case ObsMode::Ideal: return "ideal";
        case ObsMode::Noisy: return "noisy";
        case ObsMode::Conditioned: return "conditioned";
    }
    return "?";
}

int observation_dim(ObsMode mode) { return mode == ObsMode::Conditioned ? 7 : 6; }

std::vector<double> normalize(const Observation& o) {
    std::vector<double> v = {
        o.est_pos / kPosScale,
        o.est_vel / kVelScale,
        o.var_pos / (kPosScale * kPosScale),
        o.var_vel / (kVelScale * kVelScale),
        o.ego_pos / kPosScale,
        o.ego_vel / kVelScale,
    };
    if (o.conditioned) v.push_back(o.sigma_v);
    return v;
}

CrossingEnv::CrossingEnv(RoadGeometry geometry) : geometry_(geometry) {
    validate(geometry_);
}

Observation CrossingEnv::reset(const Scenario& s, NoiseParams params, ObsMode mode,
                               std::uint64_t seed) {
    validate(s);
    scenario_ = s;
    params_ = params;
    mode_ = mode;
    rng_ = Rng(seed);
    steps_ = 0;
    done_ = false;
    trace_.clear();

    world_ = WorldState{0.0, s.d0, s.v0, 0.0, false};

    if (mode_ == ObsMode::Ideal) {
        belief_ = BeliefState{world_.vehicle_front_distance, s.v0, 0.0, 0.0, 0.0};
    } else {
        const double z0 = observe(world_, geometry_, params_, rng_);
        const double r0 = measurement_variance(z0, geometry_, world_.ped_progress, params_);
        belief_ = kf_init(z0, s.v0, kVelPriorSd, r0, rng_);
    }
    obs_ = assemble();
    record(obs_, "reset", 0.0);
    return obs_;
}

Observation CrossingEnv::assemble() const {
    Observation o;
    if (mode_ == ObsMode::Ideal) {
        o.est_pos = world_.vehicle_front_distance;
        o.est_vel = world_.vehicle_speed;
        o.var_pos = 0.0;
        o.var_vel = 0.0;
    } else {
        o.est_pos = belief_.mean_pos;
        o.est_vel = belief_.mean_vel;
        o.var_pos = belief_.var_pos;
        o.var_vel = belief_.var_vel;
    }
    o.ego_pos = world_.ped_progress;
    o.ego_vel = world_.ped_moving ? geometry_.walk_speed : 0.0;
    o.sigma_v = params_.sigma_v;
    o.conditioned = (mode_ == ObsMode::Conditioned);
    return o;
}

StepResult CrossingEnv::step(Action a) {
    if (done_) throw std::logic_error("CrossingEnv::step called on a finished episode");

    StepResult r;
    if (a == Action::Go) {
        const double cit = world_.t;
        const CrossingOutcome co = crossing_outcome(scenario_, geometry_, cit);
        r.reward = kStepReward +
                   (co.outcome == Outcome::Collision ? kCollisionReward : kSafeReward);
        r.done = true;
        r.outcome = co.outcome;
        r.cit = cit;
        r.observation = obs_;
        done_ = true;
        steps_ += 1;
        record(obs_, "go", r.reward);
        return r;
    }

    // NotGo: the vehicle advances, the pedestrian holds, a new measurement
    // arrives.
    steps_ += 1;
    world_.t += kDt;
    world_.vehicle_front_distance = scenario_.d0 - scenario_.v0 * world_.t;

    if (mode_ != ObsMode::Ideal) {
        const double z = observe(world_, geometry_, params_, rng_);
        const double mv = measurement_variance(z, geometry_, world_.ped_progress, params_);
        belief_ = kf_step(belief_, z, mv, kDt);
    }
    obs_ = assemble();

    r.reward = kStepReward;
    r.observation = obs_;
    if (steps_ >= kEpisodeCap) {
        r.done = true;
        r.outcome = Outcome::Truncated;
        r.cit = std::numeric_limits<double>::infinity();
        done_ = true;
    }
    record(obs_, "not_go", r.reward);
    return r;
}

void CrossingEnv::record(const Observation& o, const char* action, double reward) {
    if (!trace_enabled_) return;
    trace_.push_back({world_.t, world_.vehicle_front_distance, world_.vehicle_speed,
                      world_.ped_progress, o, action, reward});
}

void CrossingEnv::write_trace_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trace file: " + path);
    out << "t,true_dist,true_speed,ped_progress,est_pos,est_vel,var_pos,var_vel,"
           "ego_pos,ego_vel,sigma_v,action,reward\n";
    char buf[512];
    for (const auto& row : trace_) {
        std::snprintf(buf, sizeof(buf),
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                      row.t, row.true_dist, row.true_speed, row.ped_progress,
                      row.obs.est_pos, row.obs.est_vel, row.obs.var_pos, row.obs.var_vel,
                      row.obs.ego_pos, row.obs.ego_vel, row.obs.sigma_v);
        out << buf << ',' << row.action << ',' << row.reward << '\n';
    }
}

}  // namespace pedcross
