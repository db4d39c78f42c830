#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "pedcross/env.hpp"
#include "pedcross/qnet.hpp"

namespace pedcross {

enum class TrainMode { Ideal, PerSigma, Conditioned };

const char* to_string(TrainMode m);
TrainMode train_mode_from_string(const std::string& s);

struct TrainConfig {
    TrainMode mode = TrainMode::Ideal;
    double sigma_v = 0.0;            // PerSigma: the model's noise magnitude
    std::vector<double> sigma_grid;  // Conditioned: per-episode sample set
    double gamma = 0.99;
    double lr = 0.001;
    double epsilon_start = 1.0;
    double epsilon_decrement = 1e-4;  // per learning step
    double epsilon_min = 0.001;
    std::size_t replay_capacity = 100000;
    int batch_size = 64;
    int target_sync_interval = 1000;  // learning steps between hard syncs
    int max_episodes = 20000;
    double grad_clip = 0.0;  // 0 = off
    int hidden1 = 512;
    int hidden2 = 256;

    /// sigma_v values 0 to 1 in steps of 0.002 (501 points).
    static std::vector<double> paper_sigma_grid();

    void validate() const;
};

struct EpisodeStats {
    int episode = 0;
    int scenario_id = 0;
    double sigma_v = 0.0;
    double total_reward = 0.0;
    Outcome outcome = Outcome::Truncated;
    double cit = 0.0;  // +inf when truncated
    double epsilon_end = 0.0;
};

/// Exploration schedule: max(epsilon_min, epsilon_start - decrement * step).
double epsilon_at(long long learn_step, const TrainConfig& cfg);

/// Double-DQN regression target: r when done, else r + gamma * Q_target at
/// the online network's argmax action (ties toward NotGo).
double ddqn_target(double r, bool done, const std::vector<double>& next_obs,
                   double gamma, const QNetwork& online, const QNetwork& target);

/// The three stopping criteria, all required: at most one collision in the
/// last 100 episodes, epsilon at its minimum, and the mean reward of the
/// last 100 episodes within 1 of the previous 100. Needs >= 200 episodes.
bool converged(const std::vector<EpisodeStats>& history, double epsilon_now,
               double epsilon_min = 0.001);

struct Transition {
    std::vector<double> obs;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_obs;
    bool done = false;
};

/// Bounded FIFO transition store with uniform random sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);
    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return items_[i]; }

private:
    std::size_t capacity_;
    std::deque<Transition> items_;
};

struct TrainResult {
    QNetwork net;
    std::vector<EpisodeStats> log;
    bool converged = false;
    long long learn_steps = 0;
};

/// Full Double-DQN training run. Deterministic given (cfg, scenarios, seed)
/// under single-threaded execution. Scenarios must include the tau0 = 1 s
/// training-only entries. A run that hits max_episodes without meeting the
/// stopping criteria returns with converged = false.
TrainResult train(const TrainConfig& cfg, const std::vector<Scenario>& scenarios,
                  const RoadGeometry& geometry, std::uint64_t seed);

/// episode,scenario_id,sigma_v,reward,outcome,cit,epsilon
void write_train_log_csv(const std::string& path, const std::vector<EpisodeStats>& log);

}  // namespace pedcross
