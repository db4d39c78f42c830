#include "pedcross/qnet.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pedcross {

namespace {
using Eigen::Index;
using MatMap = Eigen::Map<Eigen::MatrixXd>;
using CMatMap = Eigen::Map<const Eigen::MatrixXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using CVecMap = Eigen::Map<const Eigen::VectorXd>;
}  // namespace

/// Offsets of each tensor inside the flat parameter vector.
struct QNetLayout {
    std::size_t w1, b1, w2, b2, wv, bv, wa, ba, total;

    explicit QNetLayout(const QNetwork& n)
        : QNetLayout(n.input_dim_, n.h1_, n.h2_) {}

    QNetLayout(int in, int h1, int h2) {
        w1 = 0;
        b1 = w1 + static_cast<std::size_t>(in) * h1;
        w2 = b1 + h1;
        b2 = w2 + static_cast<std::size_t>(h1) * h2;
        wv = b2 + h2;
        bv = wv + h2;
        wa = bv + 1;
        ba = wa + static_cast<std::size_t>(h2) * 2;
        total = ba + 2;
    }
};

std::array<double, 2> dueling_aggregate(double v, const std::array<double, 2>& a) {
    const double mean = 0.5 * (a[0] + a[1]);
    return {v + a[0] - mean, v + a[1] - mean};
}

QNetwork::QNetwork(int input_dim, int hidden1, int hidden2)
    : input_dim_(input_dim), h1_(hidden1), h2_(hidden2) {
    if (input_dim <= 0 || hidden1 <= 0 || hidden2 <= 0)
        throw std::invalid_argument("QNetwork: layer sizes must be positive");
    params_.assign(QNetLayout(input_dim, hidden1, hidden2).total, 0.0);
}

QNetwork QNetwork::random_init(int input_dim, Rng& rng, int hidden1, int hidden2) {
    QNetwork net(input_dim, hidden1, hidden2);
    const QNetLayout L(net);
    auto fill = [&](std::size_t offset, std::size_t count, int fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t i = 0; i < count; ++i)
            net.params_[offset + i] = rng.uniform(-bound, bound);
    };
    fill(L.w1, L.b1 - L.w1, input_dim);
    fill(L.b1, L.w2 - L.b1, input_dim);
    fill(L.w2, L.b2 - L.w2, hidden1);
    fill(L.b2, L.wv - L.b2, hidden1);
    fill(L.wv, L.bv - L.wv, hidden2);
    fill(L.bv, L.wa - L.bv, hidden2);
    fill(L.wa, L.ba - L.wa, hidden2);
    fill(L.ba, L.total - L.ba, hidden2);
    return net;
}

namespace {

/// Shared forward pass on a batch; keeps activations for the backward pass.
struct ForwardPass {
    Eigen::MatrixXd z1, h1, z2, h2;  // B x h1, B x h2
    Eigen::VectorXd v;               // B
    Eigen::MatrixXd a;               // B x 2
    Eigen::MatrixXd q;               // B x 2

    ForwardPass(const QNetwork& net, const QNetLayout& L, const Eigen::MatrixXd& x) {
        const double* p = net.params().data();
        CMatMap w1(p + L.w1, net.input_dim(), net.hidden1());
        CVecMap b1(p + L.b1, net.hidden1());
        CMatMap w2(p + L.w2, net.hidden1(), net.hidden2());
        CVecMap b2(p + L.b2, net.hidden2());
        CVecMap wv(p + L.wv, net.hidden2());
        const double bv = net.params()[L.bv];
        CMatMap wa(p + L.wa, net.hidden2(), 2);
        CVecMap ba(p + L.ba, 2);

        z1 = (x * w1).rowwise() + b1.transpose();
        h1 = z1.cwiseMax(0.0);
        z2 = (h1 * w2).rowwise() + b2.transpose();
        h2 = z2.cwiseMax(0.0);
        v = (h2 * wv).array() + bv;
        a = (h2 * wa).rowwise() + ba.transpose();
        const Eigen::VectorXd amean = a.rowwise().mean();
        q = (a.colwise() - amean).colwise() + v;
    }
};

Eigen::MatrixXd to_matrix(const std::vector<TrainItem>& batch, int input_dim) {
    Eigen::MatrixXd x(static_cast<Index>(batch.size()), input_dim);
    for (Index i = 0; i < x.rows(); ++i) {
        if (static_cast<int>(batch[i].x.size()) != input_dim)
            throw std::invalid_argument("QNetwork: batch input dimension mismatch");
        for (int j = 0; j < input_dim; ++j) x(i, j) = batch[i].x[j];
    }
    return x;
}

}  // namespace

std::array<double, 2> QNetwork::forward(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != input_dim_)
        throw std::invalid_argument("QNetwork::forward: input dimension mismatch");
    const QNetLayout L(*this);
    Eigen::MatrixXd xm(1, input_dim_);
    for (int j = 0; j < input_dim_; ++j) xm(0, j) = x[j];
    ForwardPass fp(*this, L, xm);
    return {fp.q(0, 0), fp.q(0, 1)};
}

std::vector<std::array<double, 2>> QNetwork::forward_batch(
    const std::vector<std::vector<double>>& xs) const {
    if (xs.empty()) return {};
    const QNetLayout L(*this);
    Eigen::MatrixXd x(static_cast<Index>(xs.size()), input_dim_);
    for (Index i = 0; i < x.rows(); ++i) {
        if (static_cast<int>(xs[i].size()) != input_dim_)
            throw std::invalid_argument("QNetwork::forward_batch: input dimension mismatch");
        for (int j = 0; j < input_dim_; ++j) x(i, j) = xs[i][j];
    }
    ForwardPass fp(*this, L, x);
    std::vector<std::array<double, 2>> out(xs.size());
    for (Index i = 0; i < x.rows(); ++i) out[i] = {fp.q(i, 0), fp.q(i, 1)};
    return out;
}

int QNetwork::greedy_action(const std::vector<double>& x) const {
    const auto q = forward(x);
    return q[0] > q[1] ? 0 : 1;  // ties break toward NotGo
}

double QNetwork::loss_and_gradients(const std::vector<TrainItem>& batch,
                                    std::vector<double>& grad) const {
    if (batch.empty())
        throw std::invalid_argument("QNetwork::loss_and_gradients: empty batch");
    const QNetLayout L(*this);
    const Eigen::MatrixXd x = to_matrix(batch, input_dim_);
    const Index bsz = x.rows();
    ForwardPass fp(*this, L, x);

    double loss = 0.0;
    Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(bsz, 2);
    for (Index i = 0; i < bsz; ++i) {
        const int a = batch[i].action;
        if (a != 0 && a != 1)
            throw std::invalid_argument("QNetwork: action index out of range");
        const double err = fp.q(i, a) - batch[i].target;
        loss += err * err;
        dq(i, a) = 2.0 * err / static_cast<double>(bsz);
    }
    loss /= static_cast<double>(bsz);

    // Through the dueling head: dv = rowsum(dq), da = dq - rowmean(dq).
    const Eigen::VectorXd dv = dq.rowwise().sum();
    const Eigen::MatrixXd da = dq.colwise() - Eigen::VectorXd(dq.rowwise().mean());

    grad.assign(L.total, 0.0);
    double* gp = grad.data();
    const double* p = params_.data();
    MatMap gw1(gp + L.w1, input_dim_, h1_);
    VecMap gb1(gp + L.b1, h1_);
    MatMap gw2(gp + L.w2, h1_, h2_);
    VecMap gb2(gp + L.b2, h2_);
    VecMap gwv(gp + L.wv, h2_);
    MatMap gwa(gp + L.wa, h2_, 2);
    VecMap gba(gp + L.ba, 2);
    CMatMap w2(p + L.w2, h1_, h2_);
    CVecMap wv(p + L.wv, h2_);
    CMatMap wa(p + L.wa, h2_, 2);

    gwv = fp.h2.transpose() * dv;
    grad[L.bv] = dv.sum();
    gwa = fp.h2.transpose() * da;
    gba = da.colwise().sum();

    Eigen::MatrixXd dh2 = dv * wv.transpose() + da * wa.transpose();
    dh2 = dh2.cwiseProduct((fp.z2.array() > 0.0).cast<double>().matrix());
    gw2 = fp.h1.transpose() * dh2;
    gb2 = dh2.colwise().sum();

    Eigen::MatrixXd dh1 = dh2 * w2.transpose();
    dh1 = dh1.cwiseProduct((fp.z1.array() > 0.0).cast<double>().matrix());
    gw1 = x.transpose() * dh1;
    gb1 = dh1.colwise().sum();

    return loss;
}

double QNetwork::train_step(const std::vector<TrainItem>& batch, double lr,
                            double grad_clip) {
    std::vector<double> grad;
    const double loss = loss_and_gradients(batch, grad);
    if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "QNetwork::train_step: non-finite loss " << loss << " on batch of "
            << batch.size() << " (first target " << batch.front().target << ")";
        throw std::runtime_error(msg.str());
    }

    if (grad_clip > 0.0) {
        double norm2 = 0.0;
        for (double g : grad) norm2 += g * g;
        const double norm = std::sqrt(norm2);
        if (norm > grad_clip) {
            const double scale = grad_clip / norm;
            for (double& g : grad) g *= scale;
        }
    }

    // Adam with standard moment parameters.
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (adam_m_.size() != params_.size()) {
        adam_m_.assign(params_.size(), 0.0);
        adam_v_.assign(params_.size(), 0.0);
        adam_t_ = 0;
    }
    adam_t_ += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        adam_m_[i] = beta1 * adam_m_[i] + (1.0 - beta1) * grad[i];
        adam_v_[i] = beta2 * adam_v_[i] + (1.0 - beta2) * grad[i] * grad[i];
        const double mhat = adam_m_[i] / bc1;
        const double vhat = adam_v_[i] / bc2;
        params_[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
    return loss;
}

void QNetwork::reset_optimizer() {
    adam_m_.clear();
    adam_v_.clear();
    adam_t_ = 0;
}

namespace {
constexpr char kMagic[8] = {'P', 'X', 'Q', 'N', 'E', 'T', '0', '\n'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const QNetwork& net, const CheckpointMeta& meta,
                     const std::string& path) {
    nlohmann::json j;
    j["model_name"] = meta.model_name;
    j["obs_mode"] = meta.obs_mode;
    if (meta.sigma_v) j["sigma_v"] = *meta.sigma_v;
    j["converged"] = meta.converged;
    j["input_dim"] = net.input_dim();
    j["hidden"] = {net.hidden1(), net.hidden2()};
    if (!meta.train_config_json.empty())
        j["train_config"] = nlohmann::json::parse(meta.train_config_json);
    const std::string js = j.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t version = kVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::uint64_t meta_len = js.size();
    out.write(reinterpret_cast<const char*>(&meta_len), sizeof(meta_len));
    out.write(js.data(), static_cast<std::streamsize>(js.size()));
    const std::uint64_t n = net.param_count();
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(net.params().data()),
              static_cast<std::streamsize>(n * sizeof(double)));
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

std::pair<QNetwork, CheckpointMeta> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (version != kVersion)
        throw std::runtime_error("unsupported checkpoint version in " + path);
    std::uint64_t meta_len = 0;
    in.read(reinterpret_cast<char*>(&meta_len), sizeof(meta_len));
    std::string js(meta_len, '\0');
    in.read(js.data(), static_cast<std::streamsize>(meta_len));
    if (!in) throw std::runtime_error("truncated checkpoint metadata: " + path);
    const nlohmann::json j = nlohmann::json::parse(js);

    QNetwork net(j.at("input_dim").get<int>(), j.at("hidden").at(0).get<int>(),
                 j.at("hidden").at(1).get<int>());
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    if (n != net.param_count())
        throw std::runtime_error("checkpoint parameter count mismatch: " + path);
    in.read(reinterpret_cast<char*>(net.mutable_params().data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("truncated checkpoint parameters: " + path);

    CheckpointMeta meta;
    meta.model_name = j.value("model_name", "");
    meta.obs_mode = j.value("obs_mode", "");
    if (j.contains("sigma_v")) meta.sigma_v = j["sigma_v"].get<double>();
    meta.converged = j.value("converged", false);
    if (j.contains("train_config")) meta.train_config_json = j["train_config"].dump();
    return {std::move(net), std::move(meta)};
}

}  // namespace pedcross
