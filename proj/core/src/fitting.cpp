#include "pedcross/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pedcross {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
constexpr double kSigmaMatchTol = 1e-9;

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double CitPdf::operator()(double t) const {
    double acc = 0.0;
    const double inv_bw = 1.0 / bandwidth;
    for (double x : samples) {
        const double u = (t - x) * inv_bw;
        acc += std::exp(-0.5 * u * u);
    }
    return acc * kInvSqrt2Pi * inv_bw / static_cast<double>(samples.size());
}

CitPdf kde_pdf(const std::vector<double>& samples, std::optional<double> bandwidth) {
    std::vector<double> finite;
    finite.reserve(samples.size());
    for (double s : samples)
        if (std::isfinite(s)) finite.push_back(s);
    if (finite.empty()) throw std::invalid_argument("kde_pdf: needs at least one finite sample");

    CitPdf pdf;
    pdf.samples = std::move(finite);
    if (bandwidth) {
        if (!(*bandwidth > 0.0)) throw std::invalid_argument("kde_pdf: bandwidth must be positive");
        pdf.bandwidth = *bandwidth;
        return pdf;
    }
    const double n = static_cast<double>(pdf.samples.size());
    std::vector<double> sorted = pdf.samples;
    std::sort(sorted.begin(), sorted.end());
    const double sd = sample_sd(sorted);
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    const double spread = std::min(sd, iqr / 1.34);
    pdf.bandwidth = std::max(kKdeBandwidthFloor, 0.9 * spread * std::pow(n, -0.2));
    return pdf;
}

double participant_loglik(const std::map<int, CitPdf>& pdfs_by_scenario,
                          const std::vector<TrialRecord>& trials) {
    double ll = 0.0;
    for (const auto& trial : trials) {
        const auto it = pdfs_by_scenario.find(trial.scenario_id);
        if (it == pdfs_by_scenario.end())
            throw std::invalid_argument("participant_loglik: no pdf for scenario " +
                                        std::to_string(trial.scenario_id));
        if (!std::isfinite(trial.cit))
            throw std::invalid_argument("participant_loglik: trial has no finite CIT");
        ll += std::log(std::max(it->second(trial.cit), kDensityFloor));
    }
    return ll;
}

StaticBank::StaticBank(std::vector<double> grid,
                       std::map<std::pair<double, int>, std::vector<double>> samples)
    : grid_(std::move(grid)), samples_(std::move(samples)) {}

std::vector<double> StaticBank::cit_samples(double sigma_v, int scenario_id) const {
    for (const auto& [key, value] : samples_) {
        if (std::abs(key.first - sigma_v) <= kSigmaMatchTol && key.second == scenario_id)
            return value;
    }
    throw std::out_of_range("StaticBank: no samples for requested sigma/scenario");
}

std::vector<int> StaticBank::scenario_ids() const {
    std::set<int> ids;
    for (const auto& [key, value] : samples_) ids.insert(key.second);
    return {ids.begin(), ids.end()};
}

namespace {

/// KDEs for each (grid sigma, scenario) pair, built once and reused across
/// participants.
class PdfCache {
public:
    PdfCache(const ModelBank& bank, const std::vector<double>& grid) {
        const auto scenarios = bank.scenario_ids();
        for (double sigma : grid) {
            std::map<int, CitPdf> per_scenario;
            for (int sid : scenarios) {
                CitPdf pdf = kde_pdf(bank.cit_samples(sigma, sid));
                pdf.scenario_id = sid;
                pdf.sigma_v = sigma;
                per_scenario.emplace(sid, std::move(pdf));
            }
            by_sigma_.emplace_back(sigma, std::move(per_scenario));
        }
    }

    const std::vector<std::pair<double, std::map<int, CitPdf>>>& entries() const {
        return by_sigma_;
    }

private:
    std::vector<std::pair<double, std::map<int, CitPdf>>> by_sigma_;
};

FitResult fit_with_cache(const std::vector<TrialRecord>& trials, const PdfCache& cache) {
    if (cache.entries().empty()) throw std::invalid_argument("fit_sigma: empty grid");
    FitResult best;
    best.best_loglik = -std::numeric_limits<double>::infinity();
    for (const auto& [sigma, pdfs] : cache.entries()) {
        const double ll = participant_loglik(pdfs, trials);
        best.grid_loglik.emplace_back(sigma, ll);
        if (ll > best.best_loglik) {  // strict: ties keep the smaller sigma
            best.best_loglik = ll;
            best.best_sigma = sigma;
        }
    }
    return best;
}

std::vector<int> participant_ids(const std::vector<TrialRecord>& dataset) {
    std::set<int> ids;
    for (const auto& t : dataset) ids.insert(t.participant_id);
    return {ids.begin(), ids.end()};
}

std::vector<TrialRecord> trials_of(const std::vector<TrialRecord>& dataset, int pid) {
    std::vector<TrialRecord> out;
    for (const auto& t : dataset)
        if (t.participant_id == pid) out.push_back(t);
    return out;
}

VariantResult per_participant_variant(const std::string& name,
                                      const std::vector<TrialRecord>& dataset,
                                      const PdfCache& cache) {
    VariantResult v;
    v.variant = name;
    const auto pids = participant_ids(dataset);
    v.k = static_cast<int>(pids.size());
    for (int pid : pids) {
        FitResult fit = fit_with_cache(trials_of(dataset, pid), cache);
        fit.participant_id = pid;
        fit.variant = name;
        v.loglik += fit.best_loglik;
        v.fits.push_back(std::move(fit));
    }
    v.aic = aic(v.k, v.loglik);
    return v;
}

}  // namespace

FitResult fit_sigma(const std::vector<TrialRecord>& trials, const ModelBank& bank,
                    const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("fit_sigma: empty grid");
    if (trials.empty()) throw std::invalid_argument("fit_sigma: no trials");
    PdfCache cache(bank, grid);
    FitResult fit = fit_with_cache(trials, cache);
    fit.participant_id = trials.front().participant_id;
    return fit;
}

double aic(int k, double loglik) {
    if (k < 0) throw std::invalid_argument("aic: k must be >= 0");
    return 2.0 * k - 2.0 * loglik;
}

std::vector<VariantResult> compare_variants(const std::vector<TrialRecord>& dataset,
                                            const ModelBank& per_sigma_bank,
                                            const ModelBank* conditioned_bank,
                                            const std::vector<double>& grid) {
    if (dataset.empty()) throw std::invalid_argument("compare_variants: empty dataset");
    std::vector<VariantResult> out;

    PdfCache per_sigma_cache(per_sigma_bank, grid);

    // LMD: one sigma for the whole dataset.
    VariantResult lmd;
    lmd.variant = "lmd";
    lmd.k = 1;
    FitResult pooled = fit_with_cache(dataset, per_sigma_cache);
    pooled.variant = "lmd";
    lmd.loglik = pooled.best_loglik;
    lmd.aic = aic(lmd.k, lmd.loglik);
    lmd.fits.push_back(std::move(pooled));
    out.push_back(std::move(lmd));

    out.push_back(per_participant_variant("lmp", dataset, per_sigma_cache));

    if (conditioned_bank != nullptr) {
        PdfCache conditioned_cache(*conditioned_bank, grid);
        out.push_back(per_participant_variant("lsp", dataset, conditioned_cache));
    }

    const auto best = std::min_element(out.begin(), out.end(),
                                       [](const VariantResult& a, const VariantResult& b) {
                                           return a.aic < b.aic;
                                       });
    best->best = true;
    return out;
}

std::vector<TrialRecord> load_human_dataset_csv(const std::string& path,
                                                const std::vector<Scenario>& scenarios) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset: " + path);
    // Tolerate a UTF-8 BOM and trailing carriage return.
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "participant_id,v0_mps,d0_m,cit_s")
        throw std::runtime_error(path + ": expected header participant_id,v0_mps,d0_m,cit_s");

    std::vector<TrialRecord> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        double vals[4];
        for (int i = 0; i < 4; ++i) {
            if (!std::getline(ss, field, ',')) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": expected 4 comma-separated fields");
            }
            try {
                std::size_t pos = 0;
                vals[i] = std::stod(field, &pos);
                if (pos != field.size()) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": cannot parse field '" + field + "'");
            }
        }
        if (std::getline(ss, field, ','))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": too many fields");

        const Scenario* match = nullptr;
        for (const auto& s : scenarios) {
            if (std::abs(s.v0 - vals[1]) <= 1e-3 && std::abs(s.d0 - vals[2]) <= 1e-3) {
                match = &s;
                break;
            }
        }
        if (match == nullptr)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": no scenario matches (v0, d0)");

        TrialRecord t;
        t.participant_id = static_cast<int>(vals[0]);
        t.scenario_id = match->id;
        t.cit = vals[3];
        t.accepted = t.cit < match->tau0;
        t.human = true;
        out.push_back(t);
    }
    return out;
}

void write_human_dataset_csv(const std::string& path, const std::vector<TrialRecord>& trials,
                             const std::vector<Scenario>& scenarios) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open dataset for writing: " + path);
    out << "participant_id,v0_mps,d0_m,cit_s\n";
    char buf[192];
    for (const auto& t : trials) {
        const Scenario* sc = nullptr;
        for (const auto& s : scenarios)
            if (s.id == t.scenario_id) sc = &s;
        if (sc == nullptr)
            throw std::invalid_argument("write_human_dataset_csv: unknown scenario id " +
                                        std::to_string(t.scenario_id));
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g", t.participant_id, sc->v0,
                      sc->d0, t.cit);
        out << buf << '\n';
    }
}

void write_fit_grid_csv(const std::string& path, const std::vector<FitResult>& fits) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open fit grid file for writing: " + path);
    out << "variant,participant_id,sigma_v,loglik\n";
    char buf[192];
    for (const auto& f : fits) {
        for (const auto& [sigma, ll] : f.grid_loglik) {
            std::snprintf(buf, sizeof(buf), "%s,%d,%.17g,%.17g", f.variant.c_str(),
                          f.participant_id, sigma, ll);
            out << buf << '\n';
        }
    }
}

void write_fit_participants_csv(const std::string& path, const std::vector<FitResult>& fits) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open fit file for writing: " + path);
    out << "variant,participant_id,best_sigma,loglik\n";
    char buf[192];
    for (const auto& f : fits) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%.17g,%.17g", f.variant.c_str(),
                      f.participant_id, f.best_sigma, f.best_loglik);
        out << buf << '\n';
    }
}

void write_variants_csv(const std::string& path, const std::vector<VariantResult>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open variants file for writing: " + path);
    out << "variant,k,loglik,aic,best\n";
    char buf[192];
    for (const auto& v : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%.17g,%.17g,%d", v.variant.c_str(), v.k,
                      v.loglik, v.aic, v.best ? 1 : 0);
        out << buf << '\n';
    }
}

}  // namespace pedcross
