#include "pedcross/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace pedcross {

namespace {

double percentile(std::vector<double> sorted, double p) {
    // Linear interpolation between order statistics (type 7).
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (sorted.size() == 1) return sorted[0];
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<TrialRecord> rollout(const QNetwork& net, ObsMode mode, const Scenario& s,
                                 double sigma_v, int n, std::uint64_t seed,
                                 const RoadGeometry& geometry) {
    if (observation_dim(mode) != net.input_dim())
        throw std::invalid_argument("rollout: network input dimension does not match mode");
    if (n < 1) throw std::invalid_argument("rollout: n must be >= 1");

    std::vector<TrialRecord> records;
    records.reserve(static_cast<std::size_t>(n));
    CrossingEnv env(geometry);
    for (int i = 0; i < n; ++i) {
        Rng sub = Rng::substream(seed, static_cast<std::uint64_t>(i));
        Observation obs = env.reset(s, NoiseParams{sigma_v}, mode, sub.next_u64());
        StepResult res;
        while (true) {
            const int a = net.greedy_action(normalize(obs));
            res = env.step(a == 0 ? Action::Go : Action::NotGo);
            if (res.done) break;
            obs = res.observation;
        }
        TrialRecord r;
        r.scenario_id = s.id;
        r.sigma_v = sigma_v;
        r.cit = *res.cit;
        r.accepted = r.cit < s.tau0;
        r.collided = *res.outcome == Outcome::Collision;
        records.push_back(r);
    }
    return records;
}

AcceptanceCell gap_acceptance_rate(const std::vector<TrialRecord>& group,
                                   const Scenario& s) {
    if (group.empty()) throw std::invalid_argument("gap_acceptance_rate: empty group");
    AcceptanceCell c;
    c.scenario_id = s.id;
    c.tau0 = s.tau0;
    c.v0 = s.v0;
    c.sigma_v = group.front().sigma_v;
    c.n = static_cast<int>(group.size());
    for (const auto& r : group) c.accepted += r.accepted ? 1 : 0;
    c.rate = static_cast<double>(c.accepted) / c.n;

    // Wilson score interval at 95%.
    const double z = 1.959963984540054;
    const double nn = static_cast<double>(c.n);
    const double phat = c.rate;
    const double denom = 1.0 + z * z / nn;
    const double center = (phat + z * z / (2.0 * nn)) / denom;
    const double half =
        z * std::sqrt(phat * (1.0 - phat) / nn + z * z / (4.0 * nn * nn)) / denom;
    c.ci_lo = std::max(0.0, center - half);
    c.ci_hi = std::min(1.0, center + half);
    return c;
}

CitCdf cit_cdf(const std::vector<TrialRecord>& records) {
    if (records.empty()) throw std::invalid_argument("cit_cdf: no records");
    CitCdf out;
    out.total = static_cast<int>(records.size());
    std::vector<double> finite;
    for (const auto& r : records) {
        if (std::isfinite(r.cit))
            finite.push_back(r.cit);
        else
            out.truncated += 1;
    }
    std::sort(finite.begin(), finite.end());
    const double n = static_cast<double>(finite.size());
    for (std::size_t i = 0; i < finite.size(); ++i) {
        // Collapse repeated values to the last (highest) cumulative level.
        if (i + 1 < finite.size() && finite[i + 1] == finite[i]) continue;
        out.points.emplace_back(finite[i], static_cast<double>(i + 1) / n);
    }
    return out;
}

TtaDispersion tta_dispersion(double sigma_v, const Scenario& s, int n, std::uint64_t seed,
                             const RoadGeometry& geometry) {
    if (sigma_v < 0.0) throw std::invalid_argument("tta_dispersion: sigma_v must be >= 0");
    if (n < 1000) throw std::invalid_argument("tta_dispersion: n must be >= 1000");
    const NoiseParams params{sigma_v};

    std::vector<double> ttas;
    ttas.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
        WorldState ws{0.0, s.d0, s.v0, 0.0, false};
        const double z0 = observe(ws, geometry, params, rng);
        const double r0 = measurement_variance(z0, geometry, ws.ped_progress, params);
        BeliefState b = kf_init(z0, s.v0, kVelPriorSd, r0, rng);

        ws.t = kDt;
        ws.vehicle_front_distance = s.d0 - s.v0 * kDt;
        const double z1 = observe(ws, geometry, params, rng);
        const double r1 = measurement_variance(z1, geometry, ws.ped_progress, params);
        b = kf_step(b, z1, r1, kDt);

        if (const auto tta = estimated_tta(b)) ttas.push_back(*tta);
    }

    TtaDispersion d;
    d.n = n;
    d.n_defined = static_cast<int>(ttas.size());
    if (ttas.empty()) return d;
    double sum = 0.0;
    for (double t : ttas) sum += t;
    d.mean = sum / d.n_defined;
    double ss = 0.0;
    for (double t : ttas) ss += (t - d.mean) * (t - d.mean);
    d.sd = d.n_defined > 1 ? std::sqrt(ss / (d.n_defined - 1)) : 0.0;
    std::sort(ttas.begin(), ttas.end());
    d.p5 = percentile(ttas, 0.05);
    d.p95 = percentile(ttas, 0.95);
    return d;
}

void write_trials_csv(const std::string& path, const std::vector<TrialRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trials file for writing: " + path);
    out << "scenario_id,sigma_v,cit,accepted,collided,source,participant_id\n";
    char buf[256];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%d,%d,%s,%d", r.scenario_id,
                      r.sigma_v, r.cit, r.accepted ? 1 : 0, r.collided ? 1 : 0,
                      r.human ? "human" : "model", r.participant_id);
        out << buf << '\n';
    }
}

void write_acceptance_csv(const std::string& path, const std::vector<AcceptanceCell>& cells) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open acceptance file for writing: " + path);
    out << "scenario_id,tau0,v0,sigma_v,n,accepted,rate,ci_lo,ci_hi\n";
    char buf[320];
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%d,%d,%.17g,%.17g,%.17g",
                      c.scenario_id, c.tau0, c.v0, c.sigma_v, c.n, c.accepted, c.rate,
                      c.ci_lo, c.ci_hi);
        out << buf << '\n';
    }
}

void write_cdf_csv(const std::string& path,
                   const std::vector<std::pair<std::pair<double, int>, CitCdf>>& curves) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open cdf file for writing: " + path);
    out << "sigma_v,scenario_id,t,cum_prob,truncated,total\n";
    char buf[256];
    for (const auto& [key, cdf] : curves) {
        for (const auto& [t, p] : cdf.points) {
            std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g,%.17g,%d,%d", key.first,
                          key.second, t, p, cdf.truncated, cdf.total);
            out << buf << '\n';
        }
    }
}

void write_dispersion_csv(
    const std::string& path,
    const std::vector<std::pair<std::pair<double, int>, TtaDispersion>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open dispersion file for writing: " + path);
    out << "sigma_v,scenario_id,n,n_defined,mean,sd,p5,p95\n";
    char buf[320];
    for (const auto& [key, d] : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%d,%d,%d,%.17g,%.17g,%.17g,%.17g", key.first,
                      key.second, d.n, d.n_defined, d.mean, d.sd, d.p5, d.p95);
        out << buf << '\n';
    }
}

}  // namespace pedcross
