#include "pedcross/bank.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <thread>

#include "pedcross/eval.hpp"

namespace pedcross {

namespace {
constexpr double kSigmaMatchTol = 1e-9;
}

RolloutBank::RolloutBank(std::vector<Entry> entries, std::vector<Scenario> scenarios,
                         int rollouts_per_cell, std::uint64_t seed, RoadGeometry geometry)
    : entries_(std::move(entries)),
      rollouts_per_cell_(rollouts_per_cell),
      seed_(seed),
      geometry_(geometry) {
    if (entries_.empty()) throw std::invalid_argument("RolloutBank: no entries");
    if (rollouts_per_cell_ < 1)
        throw std::invalid_argument("RolloutBank: rollouts_per_cell must be >= 1");
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.sigma < b.sigma; });
    for (const auto& e : entries_) grid_.push_back(e.sigma);
    for (const auto& s : scenarios)
        if (!s.training_only) scenarios_.push_back(s);
    if (scenarios_.empty()) throw std::invalid_argument("RolloutBank: no usable scenarios");
}

std::vector<int> RolloutBank::scenario_ids() const {
    std::vector<int> ids;
    for (const auto& s : scenarios_) ids.push_back(s.id);
    return ids;
}

std::vector<double> RolloutBank::compute_cell(std::size_t entry_idx,
                                              std::size_t scenario_idx) const {
    const Entry& e = entries_[entry_idx];
    const Scenario& sc = scenarios_[scenario_idx];
    const std::uint64_t cell_seed =
        Rng::substream(seed_, entry_idx * 1024 + scenario_idx).next_u64();
    const auto records =
        rollout(*e.net, e.mode, sc, e.sigma, rollouts_per_cell_, cell_seed, geometry_);
    std::vector<double> cits;
    cits.reserve(records.size());
    for (const auto& r : records)
        if (std::isfinite(r.cit)) cits.push_back(r.cit);
    return cits;
}

std::vector<double> RolloutBank::cit_samples(double sigma_v, int scenario_id) const {
    std::size_t ei = entries_.size();
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (std::abs(entries_[i].sigma - sigma_v) <= kSigmaMatchTol) ei = i;
    if (ei == entries_.size())
        throw std::out_of_range("RolloutBank: sigma_v not on the bank grid");
    std::size_t si = scenarios_.size();
    for (std::size_t i = 0; i < scenarios_.size(); ++i)
        if (scenarios_[i].id == scenario_id) si = i;
    if (si == scenarios_.size())
        throw std::out_of_range("RolloutBank: unknown scenario id");

    const auto key = std::make_pair(ei, si);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, compute_cell(ei, si)).first;
    return it->second;
}

void RolloutBank::precompute(int workers) {
    struct Cell {
        std::size_t ei, si;
    };
    std::vector<Cell> cells;
    for (std::size_t ei = 0; ei < entries_.size(); ++ei)
        for (std::size_t si = 0; si < scenarios_.size(); ++si)
            if (!cache_.count({ei, si})) cells.push_back({ei, si});
    if (cells.empty()) return;

    workers = std::max(1, workers);
    std::vector<std::vector<double>> results(cells.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) break;
            results[i] = compute_cell(cells[i].ei, cells[i].si);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < cells.size(); ++i)
        cache_.emplace(std::make_pair(cells[i].ei, cells[i].si), std::move(results[i]));
}

RolloutBank RolloutBank::per_sigma_from_dir(const std::string& dir,
                                            const std::vector<Scenario>& scenarios,
                                            int rollouts_per_cell, std::uint64_t seed,
                                            const RoadGeometry& geometry) {
    namespace fs = std::filesystem;
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("per_sigma_", 0) == 0 && entry.path().extension() == ".ckpt")
            paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty())
        throw std::runtime_error("no per_sigma_*.ckpt checkpoints in " + dir);

    std::vector<Entry> entries;
    for (const auto& p : paths) {
        auto [net, meta] = load_checkpoint(p);
        if (!meta.sigma_v)
            throw std::runtime_error("checkpoint lacks sigma_v metadata: " + p);
        entries.push_back(Entry{*meta.sigma_v,
                                std::make_shared<QNetwork>(std::move(net)), ObsMode::Noisy});
    }
    return RolloutBank(std::move(entries), scenarios, rollouts_per_cell, seed, geometry);
}

RolloutBank RolloutBank::conditioned_from_checkpoint(const std::string& path,
                                                     const std::vector<double>& grid,
                                                     const std::vector<Scenario>& scenarios,
                                                     int rollouts_per_cell, std::uint64_t seed,
                                                     const RoadGeometry& geometry) {
    auto [net, meta] = load_checkpoint(path);
    if (meta.obs_mode != "conditioned")
        throw std::runtime_error("not a conditioned checkpoint: " + path);
    auto shared = std::make_shared<QNetwork>(std::move(net));
    std::vector<Entry> entries;
    for (double sigma : grid)
        entries.push_back(Entry{sigma, shared, ObsMode::Conditioned});
    return RolloutBank(std::move(entries), scenarios, rollouts_per_cell, seed, geometry);
}

}  // namespace pedcross
