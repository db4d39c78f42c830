#include "pedcross/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace pedcross {

const char* to_string(TrainMode m) {
    switch (m) {
        case TrainMode::Ideal: return "ideal";
        case TrainMode::PerSigma: return "per-sigma";
        case TrainMode::Conditioned: return "conditioned";
    }
    return "?";
}

TrainMode train_mode_from_string(const std::string& s) {
    if (s == "ideal") return TrainMode::Ideal;
    if (s == "per-sigma" || s == "per_sigma") return TrainMode::PerSigma;
    if (s == "conditioned") return TrainMode::Conditioned;
    throw std::invalid_argument("unknown train mode: " + s);
}

std::vector<double> TrainConfig::paper_sigma_grid() {
    std::vector<double> g;
    g.reserve(501);
    for (int i = 0; i <= 500; ++i) g.push_back(i * 0.002);
    return g;
}

void TrainConfig::validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("TrainConfig: gamma must be in (0, 1]");
    if (epsilon_min > epsilon_start)
        throw std::invalid_argument("TrainConfig: epsilon_min must be <= epsilon_start");
    if (sigma_v < 0.0 || sigma_v > 1.0)
        throw std::invalid_argument("TrainConfig: sigma_v must be in [0, 1]");
    for (double s : sigma_grid)
        if (s < 0.0 || s > 1.0)
            throw std::invalid_argument("TrainConfig: grid values must be in [0, 1]");
    if (mode == TrainMode::Conditioned && sigma_grid.empty())
        throw std::invalid_argument("TrainConfig: conditioned mode needs a sigma grid");
    if (batch_size <= 0 || replay_capacity < static_cast<std::size_t>(batch_size))
        throw std::invalid_argument("TrainConfig: replay capacity must hold a batch");
    if (target_sync_interval <= 0 || max_episodes <= 0)
        throw std::invalid_argument("TrainConfig: intervals must be positive");
}

double epsilon_at(long long learn_step, const TrainConfig& cfg) {
    if (learn_step < 0) throw std::invalid_argument("epsilon_at: negative step");
    return std::max(cfg.epsilon_min,
                    cfg.epsilon_start - cfg.epsilon_decrement * static_cast<double>(learn_step));
}

double ddqn_target(double r, bool done, const std::vector<double>& next_obs,
                   double gamma, const QNetwork& online, const QNetwork& target) {
    if (done) return r;
    const auto qo = online.forward(next_obs);
    const int best = qo[0] > qo[1] ? 0 : 1;
    const auto qt = target.forward(next_obs);
    return r + gamma * qt[best];
}

bool converged(const std::vector<EpisodeStats>& history, double epsilon_now,
               double epsilon_min) {
    const std::size_t n = history.size();
    if (n < 200) return false;
    if (epsilon_now != epsilon_min) return false;

    int collisions = 0;
    for (std::size_t i = n - 100; i < n; ++i)
        if (history[i].outcome == Outcome::Collision) ++collisions;
    if (collisions > 1) return false;

    double recent = 0.0, previous = 0.0;
    for (std::size_t i = n - 100; i < n; ++i) recent += history[i].total_reward;
    for (std::size_t i = n - 200; i < n - 100; ++i) previous += history[i].total_reward;
    return std::abs(recent / 100.0 - previous / 100.0) < 1.0;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(t));
}

namespace {

ObsMode obs_mode_for(TrainMode m) {
    switch (m) {
        case TrainMode::Ideal: return ObsMode::Ideal;
        case TrainMode::PerSigma: return ObsMode::Noisy;
        case TrainMode::Conditioned: return ObsMode::Conditioned;
    }
    return ObsMode::Ideal;
}

/// One sampled-batch Double-DQN learning step.
double learn_step(QNetwork& online, const QNetwork& target, const ReplayBuffer& replay,
                  const TrainConfig& cfg, Rng& rng) {
    const int bsz = cfg.batch_size;
    std::vector<const Transition*> picks(bsz);
    std::vector<std::vector<double>> next_xs(bsz);
    for (int i = 0; i < bsz; ++i) {
        picks[i] = &replay.at(rng.uniform_index(replay.size()));
        next_xs[i] = picks[i]->next_obs;
    }
    const auto q_online = online.forward_batch(next_xs);
    const auto q_target = target.forward_batch(next_xs);

    std::vector<TrainItem> items(bsz);
    for (int i = 0; i < bsz; ++i) {
        const Transition& tr = *picks[i];
        double y = tr.reward;
        if (!tr.done) {
            const int best = q_online[i][0] > q_online[i][1] ? 0 : 1;
            y += cfg.gamma * q_target[i][best];
        }
        items[i] = TrainItem{tr.obs, tr.action, y};
    }
    return online.train_step(items, cfg.lr, cfg.grad_clip);
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const std::vector<Scenario>& scenarios,
                  const RoadGeometry& geometry, std::uint64_t seed) {
    cfg.validate();
    if (scenarios.empty()) throw std::invalid_argument("train: no scenarios");
    if (std::none_of(scenarios.begin(), scenarios.end(),
                     [](const Scenario& s) { return s.training_only; }))
        throw std::invalid_argument("train: scenario set must include the tau0=1s training entries");

    const ObsMode obs_mode = obs_mode_for(cfg.mode);
    const int input_dim = observation_dim(obs_mode);

    Rng master(seed);
    QNetwork online = QNetwork::random_init(input_dim, master, cfg.hidden1, cfg.hidden2);
    QNetwork target = online;
    ReplayBuffer replay(cfg.replay_capacity);
    CrossingEnv env(geometry);

    TrainResult result{std::move(online), {}, false, 0};
    QNetwork& net = result.net;

    for (int episode = 0; episode < cfg.max_episodes; ++episode) {
        const Scenario& sc = scenarios[master.uniform_index(scenarios.size())];
        double sigma = cfg.sigma_v;
        if (cfg.mode == TrainMode::Conditioned)
            sigma = cfg.sigma_grid[master.uniform_index(cfg.sigma_grid.size())];
        if (cfg.mode == TrainMode::Ideal) sigma = 0.0;

        Observation obs = env.reset(sc, NoiseParams{sigma}, obs_mode, master.next_u64());
        std::vector<double> x = normalize(obs);

        EpisodeStats stats;
        stats.episode = episode;
        stats.scenario_id = sc.id;
        stats.sigma_v = sigma;

        while (true) {
            const double eps = epsilon_at(result.learn_steps, cfg);
            int action_idx;
            if (master.uniform() < eps)
                action_idx = static_cast<int>(master.uniform_index(2));
            else
                action_idx = net.greedy_action(x);

            const StepResult res = env.step(action_idx == 0 ? Action::Go : Action::NotGo);
            std::vector<double> nx = normalize(res.observation);
            stats.total_reward += res.reward;
            replay.push(Transition{std::move(x), action_idx, res.reward, nx, res.done});

            if (replay.size() >= static_cast<std::size_t>(cfg.batch_size)) {
                learn_step(net, target, replay, cfg, master);
                result.learn_steps += 1;
                if (result.learn_steps % cfg.target_sync_interval == 0)
                    target = net;
            }

            if (res.done) {
                stats.outcome = *res.outcome;
                stats.cit = *res.cit;
                break;
            }
            x = std::move(nx);
        }

        stats.epsilon_end = epsilon_at(result.learn_steps, cfg);
        result.log.push_back(stats);

        if (converged(result.log, stats.epsilon_end, cfg.epsilon_min)) {
            result.converged = true;
            break;
        }
    }
    return result;
}

void write_train_log_csv(const std::string& path, const std::vector<EpisodeStats>& log) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open training log for writing: " + path);
    out << "episode,scenario_id,sigma_v,reward,outcome,cit,epsilon\n";
    char buf[256];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%s,%.17g,%.17g", e.episode,
                      e.scenario_id, e.sigma_v, e.total_reward, to_string(e.outcome), e.cit,
                      e.epsilon_end);
        out << buf << '\n';
    }
}

}  // namespace pedcross
