#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pwalk/ensemble.hpp"
#include "pwalk/limit_params.hpp"
#include "pwalk/membrane.hpp"
#include "pwalk/sbm.hpp"
#include "pwalk/scaling.hpp"
#include "pwalk/stats.hpp"

namespace pwalk {

struct VerifyRecord {
    std::string name;
    double statistic = 0;
    double threshold = 0;
    bool pass = false;
    long paths = 0;
    long n = 0;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const {
        return {{"test", name},   {"statistic", statistic}, {"threshold", threshold},
                {"pass", pass},   {"N", paths},             {"n", n},
                {"seed", seed}};
    }
};

struct VerifyReport {
    std::vector<VerifyRecord> records;

    bool all_pass() const {
        for (const auto& r : records)
            if (!r.pass) return false;
        return true;
    }
    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : records) arr.push_back(r.to_json());
        return arr;
    }
};

struct VerifyOptions {
    long n = 10000;      // scaling index
    long paths = 10000;  // ensemble size
    double horizon = 1.0;
    double alpha = 0.01;
    std::uint64_t seed = 1;
    int threads = 1;
    int radius_cutoff = 512;
    long mc_cycles = 100000;
    long burn_in = 1000;

    ParamOptions exact_params() const {
        ParamOptions p;
        p.mode = Mode::Exact;
        p.radius_cutoff = radius_cutoff;
        return p;
    }
    ParamOptions mc_params() const {
        ParamOptions p;
        p.mode = Mode::MonteCarlo;
        p.radius_cutoff = radius_cutoff;
        p.harvest.cycles = mc_cycles;
        p.harvest.burn_in = burn_in;
        p.harvest.seed = seed;
        p.harvest.threads = threads;
        return p;
    }
    EnsembleOptions ensemble(std::vector<double> obs) const {
        EnsembleOptions e;
        e.n = n;
        e.paths = paths;
        e.horizon = horizon;
        e.obs_times = std::move(obs);
        e.seed = seed;
        e.threads = threads;
        return e;
    }
};

namespace detail {

inline VerifyRecord close_record(std::string name, double delta, double tol,
                                 const VerifyOptions& opt, long paths_used) {
    VerifyRecord r;
    r.name = std::move(name);
    r.statistic = delta;
    r.threshold = tol;
    r.pass = std::abs(delta) <= tol;
    r.paths = paths_used;
    r.n = opt.n;
    r.seed = opt.seed;
    return r;
}

inline VerifyRecord ks_record(std::string name, const KsResult& ks, const VerifyOptions& opt) {
    VerifyRecord r;
    r.name = std::move(name);
    r.statistic = ks.statistic;
    r.threshold = ks.threshold;
    r.pass = ks.pass;
    r.paths = static_cast<long>(ks.n);
    r.n = opt.n;
    r.seed = opt.seed;
    return r;
}

// finite-n allowance added on top of pure sampling error in mean comparisons
inline constexpr double kFiniteNAllowance = 0.01;

inline void residual_records(VerifyReport& report, const EnsembleResult& ens,
                             const std::vector<double>& weights, const VerifyOptions& opt,
                             const std::string& prefix) {
    ResidualReport rr = martingale_residual_check(ens, weights);
    for (const auto& e : rr.entries) {
        VerifyRecord r;
        r.name = prefix + " " + e.name;
        r.statistic = e.mean;
        r.threshold = 3 * e.stderr_of_mean;
        r.pass = e.pass;
        r.paths = static_cast<long>(ens.observations.size());
        r.n = opt.n;
        r.seed = opt.seed;
        report.records.push_back(r);
    }
}

// the radial part of the limit is a reflecting Brownian motion regardless of
// the weights, so E|value| at t approaches E|N(0,t)|
inline void radial_mean_record(VerifyReport& report, const EnsembleResult& ens,
                               const VerifyOptions& opt, const std::string& prefix) {
    std::vector<double> radial;
    for (const auto& o : ens.observations) radial.push_back(std::abs(o.coord.back()));
    MeanStderr m = mean_stderr(radial);
    double t = ens.obs_times.back();
    double expected = std::sqrt(2.0 * t / kPi);
    report.records.push_back(close_record(prefix + " radial mean at t=1 vs E|N(0,t)|",
                                          m.mean - expected,
                                          3 * m.stderr_of_mean + kFiniteNAllowance, opt,
                                          static_cast<long>(radial.size())));
}

inline void local_time_record(VerifyReport& report, const EnsembleResult& ens,
                              const VerifyOptions& opt, const std::string& prefix) {
    MeanStderr lt = ens.local_time_mean(ens.obs_times.size() - 1);
    double expected = reflecting_local_time_mean(ens.obs_times.back());
    report.records.push_back(close_record(prefix + " local time mean at t=1 vs sqrt(2t/pi)",
                                          lt.mean - expected,
                                          3 * lt.stderr_of_mean + kFiniteNAllowance, opt,
                                          static_cast<long>(ens.observations.size())));
}

} // namespace detail

/// Verification battery for a membrane walk: exact-vs-MC permeability, the
/// occupation split, the scaled marginal against the skew density, and the
/// martingale/local-time checks run on the unfolded two-ray chain.
inline VerifyReport verify_membrane(const MembraneWalkSpec& spec, const VerifyOptions& opt) {
    VerifyReport report;
    GammaResult exact = compute_gamma_membrane(spec, opt.exact_params());
    GammaResult mc = compute_gamma_membrane(spec, opt.mc_params());
    report.records.push_back(detail::close_record(
        "gamma exact vs monte carlo", mc.gamma - exact.gamma, 3 * mc.stderr_ + 1e-3, opt,
        opt.mc_cycles));

    EnsembleResult ens = run_membrane_ensemble(spec, 0, opt.ensemble({0.5, 1.0}));
    auto frac = ens.fractions_at(1);
    double expected_pos = 0.5 * (1.0 + exact.gamma);
    report.records.push_back(detail::close_record(
        "occupation fraction positive at t=1 vs (1+gamma)/2", frac.fraction[0] - expected_pos,
        3 * frac.stderr_[0] + detail::kFiniteNAllowance, opt,
        static_cast<long>(frac.counted)));

    SbmParams ref(exact.gamma, opt.horizon, 0.0);
    report.records.push_back(detail::ks_record(
        "KS of phi-scaled marginal at t=1 vs skew BM cdf",
        ks_test(ens.marginal(1), [&](double y) { return sbm_cdf(ref, y); }, opt.alpha), opt));

    AxisChainSpec unfolded = unfold_membrane(spec);
    WeightsResult w = compute_weights(stationary_exact_axis(unfolded, opt.radius_cutoff));
    EnsembleOptions eopt = opt.ensemble({0.5, 1.0});
    eopt.seed = opt.seed + 1; // independent draws for the unfolded ensemble
    EnsembleResult uens = run_axis_ensemble(unfolded, {0, 1}, eopt);
    detail::local_time_record(report, uens, opt, "unfolded");
    detail::residual_records(report, uens, w.weights, opt, "unfolded");
    return report;
}

/// Verification battery for an axis chain: exact-vs-MC weights, per-ray
/// occupation, the radial marginal against the reflected Gaussian, the local
/// time mean, and the martingale residuals.
inline VerifyReport verify_axis(const AxisChainSpec& spec, const VerifyOptions& opt) {
    VerifyReport report;
    WeightsResult exact = compute_weights(stationary_exact_axis(spec, opt.radius_cutoff));
    WeightsResult mc = compute_weights(harvest_axis(spec, harvest_options_of(opt.mc_params())));
    for (std::size_t k = 0; k < exact.weights.size(); ++k)
        report.records.push_back(detail::close_record(
            "weight ray " + std::to_string(k + 1) + " exact vs monte carlo",
            mc.weights[k] - exact.weights[k], 3 * mc.stderr_[k] + 1e-3, opt, opt.mc_cycles));

    EnsembleResult ens = run_axis_ensemble(spec, {1, 1}, opt.ensemble({0.5, 1.0}));
    auto frac = ens.fractions_at(1);
    for (std::size_t k = 0; k < exact.weights.size(); ++k)
        report.records.push_back(detail::close_record(
            "occupation fraction ray " + std::to_string(k + 1) + " at t=1 vs weight",
            frac.fraction[k] - exact.weights[k],
            3 * frac.stderr_[k] + detail::kFiniteNAllowance, opt,
            static_cast<long>(frac.counted)));

    detail::radial_mean_record(report, ens, opt, "axis");
    detail::local_time_record(report, ens, opt, "axis");
    detail::residual_records(report, ens, exact.weights, opt, "axis");
    return report;
}

/// Verification battery for a spider chain: exact-vs-MC weights, per-ray
/// occupation, the radial marginal, and the local time mean.
inline VerifyReport verify_spider(const SpiderWalkSpec& spec, const VerifyOptions& opt) {
    VerifyReport report;
    WeightsResult exact = compute_weights_spider(spec, opt.exact_params());
    WeightsResult mc = compute_weights_spider(spec, opt.mc_params());
    for (std::size_t k = 0; k < exact.weights.size(); ++k)
        report.records.push_back(detail::close_record(
            "weight ray " + std::to_string(k + 1) + " exact vs monte carlo",
            mc.weights[k] - exact.weights[k], 3 * mc.stderr_[k] + 1e-3, opt, opt.mc_cycles));

    EnsembleResult ens = run_spider_ensemble(spec, {0, 0}, opt.ensemble({0.5, 1.0}));
    auto frac = ens.fractions_at(1);
    for (std::size_t k = 0; k < exact.weights.size(); ++k)
        report.records.push_back(detail::close_record(
            "occupation fraction ray " + std::to_string(k + 1) + " at t=1 vs weight",
            frac.fraction[k] - exact.weights[k],
            3 * frac.stderr_[k] + detail::kFiniteNAllowance, opt,
            static_cast<long>(frac.counted)));

    detail::radial_mean_record(report, ens, opt, "spider");
    detail::local_time_record(report, ens, opt, "spider");
    return report;
}

} // namespace pwalk
