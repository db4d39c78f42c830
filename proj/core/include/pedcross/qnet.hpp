#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pedcross/rng.hpp"

namespace pedcross {

/// Dueling aggregation: Q[i] = v + a[i] - mean(a). Invariant to adding a
/// constant to both advantages.
std::array<double, 2> dueling_aggregate(double v, const std::array<double, 2>& a);

/// One (input, taken action, regression target) training item.
struct TrainItem {
    std::vector<double> x;
    int action = 0;  // 0 = Go, 1 = NotGo
    double target = 0.0;
};

/// Dueling two-stream MLP: input -> h1 -> h2 (rectified-linear), then a
/// scalar value head and a 2-wide advantage head combined by
/// dueling_aggregate. Parameters live in one flat vector in a fixed order
/// (W1, b1, W2, b2, Wv, bv, Wa, ba), which the checkpoint format and the
/// gradient checks rely on.
class QNetwork {
public:
    QNetwork(int input_dim, int hidden1 = 512, int hidden2 = 256);

    /// Uniform fan-in initialization: each layer's weights and biases drawn
    /// from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    static QNetwork random_init(int input_dim, Rng& rng, int hidden1 = 512,
                                int hidden2 = 256);

    int input_dim() const { return input_dim_; }
    int hidden1() const { return h1_; }
    int hidden2() const { return h2_; }
    std::size_t param_count() const { return params_.size(); }
    const std::vector<double>& params() const { return params_; }
    std::vector<double>& mutable_params() { return params_; }

    /// Q-values (Go, NotGo) for one input. Throws std::invalid_argument on a
    /// dimension mismatch.
    std::array<double, 2> forward(const std::vector<double>& x) const;

    /// Batched forward pass; one Q-pair per input row.
    std::vector<std::array<double, 2>> forward_batch(
        const std::vector<std::vector<double>>& xs) const;

    /// Greedy action index; exact ties break toward NotGo (index 1).
    int greedy_action(const std::vector<double>& x) const;

    /// Mean squared error between Q(x, action) and target over the batch and
    /// its exact gradient with respect to all parameters.
    double loss_and_gradients(const std::vector<TrainItem>& batch,
                              std::vector<double>& grad) const;

    /// One adaptive-moment (Adam) update from the batch gradient; returns the
    /// pre-update loss. grad_clip > 0 clips the global gradient norm.
    /// Throws std::runtime_error when the loss is not finite.
    double train_step(const std::vector<TrainItem>& batch, double lr,
                      double grad_clip = 0.0);

    void reset_optimizer();

private:
    int input_dim_, h1_, h2_;
    std::vector<double> params_;
    // Adam state
    std::vector<double> adam_m_, adam_v_;
    std::int64_t adam_t_ = 0;

    friend struct QNetLayout;
};

/// Checkpoint provenance: observation mode, per-model sigma (when trained for
/// a single sigma_v), and the resolved training configuration as JSON text.
struct CheckpointMeta {
    std::string model_name;
    std::string obs_mode;  // "ideal" | "noisy" | "conditioned"
    std::optional<double> sigma_v;
    bool converged = false;
    std::string train_config_json;
};

/// Versioned binary checkpoint: header + JSON metadata + raw parameters in
/// the network's fixed order. A save/load round trip is bit-identical.
void save_checkpoint(const QNetwork& net, const CheckpointMeta& meta,
                     const std::string& path);
std::pair<QNetwork, CheckpointMeta> load_checkpoint(const std::string& path);

}  // namespace pedcross
