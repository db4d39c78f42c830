#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pedcross/eval.hpp"
#include "pedcross/world.hpp"

namespace pedcross {

inline constexpr double kKdeBandwidthFloor = 0.05;  // s
inline constexpr double kDensityFloor = 1e-6;       // likelihood floor

/// Gaussian kernel density over CIT samples.
struct CitPdf {
    int scenario_id = 0;
    double sigma_v = 0.0;
    double bandwidth = 0.0;
    std::vector<double> samples;

    double operator()(double t) const;
};

/// Gaussian KDE with Silverman's bandwidth, 0.9 * min(sd, IQR/1.34) * n^(-1/5),
/// floored at kKdeBandwidthFloor. Requires at least one finite sample.
CitPdf kde_pdf(const std::vector<double>& samples,
               std::optional<double> bandwidth = std::nullopt);

/// Sum over trials of log(max(pdf(cit), kDensityFloor)). Every trial's
/// scenario must have a pdf; a missing one is a contract error.
double participant_loglik(const std::map<int, CitPdf>& pdfs_by_scenario,
                          const std::vector<TrialRecord>& trials);

/// Per-(sigma_v, scenario) CIT samples backing the likelihood fits.
class ModelBank {
public:
    virtual ~ModelBank() = default;
    virtual const std::vector<double>& grid() const = 0;
    /// Finite CIT samples for one grid point and scenario. Throws when
    /// sigma_v is not on the bank grid.
    virtual std::vector<double> cit_samples(double sigma_v, int scenario_id) const = 0;
    virtual std::vector<int> scenario_ids() const = 0;
};

/// In-memory bank, used for tests and synthetic fixtures.
class StaticBank : public ModelBank {
public:
    StaticBank(std::vector<double> grid,
               std::map<std::pair<double, int>, std::vector<double>> samples);
    const std::vector<double>& grid() const override { return grid_; }
    std::vector<double> cit_samples(double sigma_v, int scenario_id) const override;
    std::vector<int> scenario_ids() const override;

private:
    std::vector<double> grid_;
    std::map<std::pair<double, int>, std::vector<double>> samples_;
};

struct FitResult {
    int participant_id = -1;
    double best_sigma = 0.0;
    double best_loglik = 0.0;
    std::vector<std::pair<double, double>> grid_loglik;  // (sigma, loglik)
    std::string variant;
};

/// Maximum-likelihood sigma over the grid for one participant's trials;
/// ties resolve to the smaller sigma.
FitResult fit_sigma(const std::vector<TrialRecord>& trials, const ModelBank& bank,
                    const std::vector<double>& grid);

/// Akaike information criterion: 2k - 2 loglik.
double aic(int k, double loglik);

struct VariantResult {
    std::string variant;  // "lmd" | "lmp" | "lsp"
    int k = 0;
    double loglik = 0.0;
    double aic = 0.0;
    bool best = false;
    std::vector<FitResult> fits;
};

/// LMD: one sigma fitted to the pooled dataset (k = 1). LMP: one sigma per
/// participant from the per-sigma bank (k = participants). LSP: one sigma per
/// participant from the conditioned-model bank (k = participants; skipped
/// when that bank is absent). The minimum-AIC variant is flagged.
std::vector<VariantResult> compare_variants(const std::vector<TrialRecord>& dataset,
                                            const ModelBank& per_sigma_bank,
                                            const ModelBank* conditioned_bank,
                                            const std::vector<double>& grid);

/// CSV with header participant_id,v0_mps,d0_m,cit_s; rows matched to
/// scenarios by (v0, d0) within 1e-3. Malformed rows report the line number.
std::vector<TrialRecord> load_human_dataset_csv(const std::string& path,
                                                const std::vector<Scenario>& scenarios);
void write_human_dataset_csv(const std::string& path,
                             const std::vector<TrialRecord>& trials,
                             const std::vector<Scenario>& scenarios);

void write_fit_grid_csv(const std::string& path, const std::vector<FitResult>& fits);
void write_fit_participants_csv(const std::string& path, const std::vector<FitResult>& fits);
void write_variants_csv(const std::string& path, const std::vector<VariantResult>& rows);

}  // namespace pedcross
