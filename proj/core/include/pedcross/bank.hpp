#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pedcross/fitting.hpp"
#include "pedcross/qnet.hpp"

namespace pedcross {

/// ModelBank backed by greedy rollouts of trained networks. Per-sigma banks
/// hold one network per grid point; a conditioned bank reuses one network
/// across the whole grid. Samples are cached per (sigma, scenario) and are
/// deterministic in (seed, grid index, scenario).
class RolloutBank : public ModelBank {
public:
    struct Entry {
        double sigma = 0.0;
        std::shared_ptr<const QNetwork> net;
        ObsMode mode = ObsMode::Noisy;
    };

    RolloutBank(std::vector<Entry> entries, std::vector<Scenario> scenarios,
                int rollouts_per_cell, std::uint64_t seed, RoadGeometry geometry = {});

    const std::vector<double>& grid() const override { return grid_; }
    std::vector<double> cit_samples(double sigma_v, int scenario_id) const override;
    std::vector<int> scenario_ids() const override;

    /// Fill the whole cache, optionally with a worker pool. Results are
    /// identical for any worker count.
    void precompute(int workers = 1);

    int rollouts_per_cell() const { return rollouts_per_cell_; }

    /// Bank from every per-sigma checkpoint (per_sigma_*.ckpt) in a
    /// directory.
    static RolloutBank per_sigma_from_dir(const std::string& dir,
                                          const std::vector<Scenario>& scenarios,
                                          int rollouts_per_cell, std::uint64_t seed,
                                          const RoadGeometry& geometry = {});

    /// Bank evaluating one conditioned checkpoint at each grid point.
    static RolloutBank conditioned_from_checkpoint(const std::string& path,
                                                   const std::vector<double>& grid,
                                                   const std::vector<Scenario>& scenarios,
                                                   int rollouts_per_cell, std::uint64_t seed,
                                                   const RoadGeometry& geometry = {});

private:
    std::vector<double> compute_cell(std::size_t entry_idx, std::size_t scenario_idx) const;

    std::vector<Entry> entries_;
    std::vector<Scenario> scenarios_;  // non-training scenarios only
    int rollouts_per_cell_;
    std::uint64_t seed_;
    RoadGeometry geometry_;
    std::vector<double> grid_;
    mutable std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> cache_;
};

}  // namespace pedcross
