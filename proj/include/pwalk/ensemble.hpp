#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pwalk/chain_spec.hpp"
#include "pwalk/harvest.hpp"
#include "pwalk/parallel.hpp"
#include "pwalk/scaling.hpp"
#include "pwalk/simulate.hpp"
#include "pwalk/stats.hpp"

namespace pwalk {

struct EnsembleOptions {
    long n = 10000;                       // scaling index
    long paths = 10000;                   // ensemble size N
    double horizon = 1.0;                 // T
    std::vector<double> obs_times = {1.0};
    std::uint64_t seed = 1;
    int threads = 1;
};

/// One path evaluated at the observation grid. coord is the signed scaled
/// value with `label` the active ray; local_time the estimator value;
/// occupation[j][i] = time spent on ray i with positive radius up to t_j.
struct PathObservation {
    std::vector<double> coord;
    std::vector<std::uint8_t> label;
    std::vector<double> local_time;
    std::vector<std::vector<double>> occupation;
};

struct EnsembleResult {
    long n = 1;
    int rays = 1;
    std::vector<double> obs_times;
    std::vector<PathObservation> observations; // indexed by path, deterministic per seed

    /// Scaled marginal values at observation index j.
    std::vector<double> marginal(std::size_t j) const {
        std::vector<double> out;
        out.reserve(observations.size());
        for (const auto& o : observations) out.push_back(o.coord[j]);
        return out;
    }

    OccupationFractions fractions_at(std::size_t j) const {
        OccupationFractions out;
        std::vector<std::size_t> counts(static_cast<std::size_t>(rays), 0);
        for (const auto& o : observations) {
            int lab = o.label[j];
            if (o.coord[j] == 0.0 || lab < 1 || lab > rays) {
                ++out.excluded_zero;
                continue;
            }
            ++counts[static_cast<std::size_t>(lab - 1)];
            ++out.counted;
        }
        for (int k = 0; k < rays; ++k) {
            double f = out.counted == 0
                           ? 0.0
                           : static_cast<double>(counts[static_cast<std::size_t>(k)]) /
                                 static_cast<double>(out.counted);
            out.fraction.push_back(f);
            out.stderr_.push_back(binomial_stderr(f, out.counted));
        }
        return out;
    }

    MeanStderr local_time_mean(std::size_t j) const {
        std::vector<double> vals;
        vals.reserve(observations.size());
        for (const auto& o : observations) vals.push_back(o.local_time[j]);
        return mean_stderr(vals);
    }
};

namespace detail {

inline std::vector<std::size_t> grid_indices(long n, double horizon,
                                             const std::vector<double>& obs_times) {
    std::vector<std::size_t> idx;
    for (double t : obs_times) {
        if (t < 0 || t > horizon + 1e-12)
            throw SpecError("ensemble: observation time outside horizon");
        idx.push_back(static_cast<std::size_t>(std::floor(static_cast<double>(n) * t)));
    }
    return idx;
}

template <class SimulateOne>
EnsembleResult run_ensemble(const EnsembleOptions& opt, int rays, SimulateOne&& simulate_one) {
    if (opt.paths < 1 || opt.n < 1 || opt.horizon <= 0)
        throw SpecError("ensemble: need paths >= 1, n >= 1, horizon > 0");
    EnsembleResult out;
    out.n = opt.n;
    out.rays = rays;
    out.obs_times = opt.obs_times;
    out.observations.resize(static_cast<std::size_t>(opt.paths));
    parallel_for(static_cast<std::size_t>(opt.paths), opt.threads, [&](std::size_t p) {
        RngStream rng(opt.seed, kEnsembleStreamBase + p);
        out.observations[p] = simulate_one(rng);
    });
    return out;
}

} // namespace detail

inline EnsembleResult run_axis_ensemble(const AxisChainSpec& spec, RayState init,
                                        const EnsembleOptions& opt) {
    std::vector<double> v;
    for (int l = 1; l <= spec.m; ++l) v.push_back(spec.v(l));
    auto steps = static_cast<std::size_t>(std::ceil(static_cast<double>(opt.n) * opt.horizon));
    auto grid = detail::grid_indices(opt.n, opt.horizon, opt.obs_times);
    const double root_n = std::sqrt(static_cast<double>(opt.n));

    return detail::run_ensemble(opt, spec.m, [&](RngStream& rng) {
        CyclePath path = simulate_axis(spec, steps, init, rng);
        LocalTimeEstimate lt = local_time_estimator(path, opt.n, v);
        PathObservation o;
        std::size_t jump_pos = 0;
        double lt_acc = 0;
        std::vector<double> occ(static_cast<std::size_t>(spec.m), 0.0);
        std::size_t prev_idx = 0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            std::size_t k = grid[j];
            for (std::size_t i = prev_idx; i < k; ++i)
                if (path.radius[i] > 0)
                    occ[static_cast<std::size_t>(path.label[i] - 1)] +=
                        1.0 / static_cast<double>(opt.n);
            prev_idx = k;
            while (jump_pos < lt.jumps.size() && lt.jumps[jump_pos].first <= k)
                lt_acc += lt.jumps[jump_pos++].second;
            int l = path.label[k];
            o.coord.push_back(static_cast<double>(path.radius[k]) /
                              (v[static_cast<std::size_t>(l - 1)] * root_n));
            o.label.push_back(static_cast<std::uint8_t>(l));
            o.local_time.push_back(lt_acc);
            o.occupation.push_back(occ);
        }
        return o;
    });
}

inline EnsembleResult run_membrane_ensemble(const MembraneWalkSpec& spec, int init,
                                            const EnsembleOptions& opt) {
    auto steps = static_cast<std::size_t>(std::ceil(static_cast<double>(opt.n) * opt.horizon));
    auto grid = detail::grid_indices(opt.n, opt.horizon, opt.obs_times);
    const double root_n = std::sqrt(static_cast<double>(opt.n));
    const double vp = spec.v_plus(), vm = spec.v_minus();

    return detail::run_ensemble(opt, 2, [&](RngStream& rng) {
        CyclePath path = simulate_membrane(spec, steps, init, rng);
        PathObservation o;
        std::vector<double> occ(2, 0.0);
        std::size_t prev_idx = 0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            std::size_t k = grid[j];
            for (std::size_t i = prev_idx; i < k; ++i) {
                if (path.radius[i] > 0) occ[0] += 1.0 / static_cast<double>(opt.n);
                if (path.radius[i] < 0) occ[1] += 1.0 / static_cast<double>(opt.n);
            }
            prev_idx = k;
            double x = static_cast<double>(path.radius[k]);
            o.coord.push_back(phi_map(x / root_n, vp, vm));
            o.label.push_back(x > 0 ? 1 : (x < 0 ? 2 : 0));
            o.local_time.push_back(0.0); // estimate local time through the unfolded chain
            o.occupation.push_back(occ);
        }
        return o;
    });
}

inline EnsembleResult run_spider_ensemble(const SpiderWalkSpec& spec, RayState init,
                                          const EnsembleOptions& opt) {
    std::vector<double> v;
    for (int l = 1; l <= spec.m; ++l) v.push_back(spec.v(l));
    auto steps = static_cast<std::size_t>(std::ceil(static_cast<double>(opt.n) * opt.horizon));
    auto grid = detail::grid_indices(opt.n, opt.horizon, opt.obs_times);
    const double root_n = std::sqrt(static_cast<double>(opt.n));

    return detail::run_ensemble(opt, spec.m, [&](RngStream& rng) {
        CyclePath path = simulate_spider(spec, steps, init, rng);
        LocalTimeEstimate lt = local_time_estimator(path, opt.n, v);
        PathObservation o;
        std::size_t jump_pos = 0;
        double lt_acc = 0;
        std::vector<double> occ(static_cast<std::size_t>(spec.m), 0.0);
        std::size_t prev_idx = 0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            std::size_t k = grid[j];
            for (std::size_t i = prev_idx; i < k; ++i)
                if (path.radius[i] > 0)
                    occ[static_cast<std::size_t>(path.label[i] - 1)] +=
                        1.0 / static_cast<double>(opt.n);
            prev_idx = k;
            while (jump_pos < lt.jumps.size() && lt.jumps[jump_pos].first <= k)
                lt_acc += lt.jumps[jump_pos++].second;
            int l = path.label[k];
            double scale = l >= 1 ? v[static_cast<std::size_t>(l - 1)] : 1.0;
            o.coord.push_back(static_cast<double>(path.radius[k]) / (scale * root_n));
            o.label.push_back(static_cast<std::uint8_t>(l));
            o.local_time.push_back(lt_acc);
            o.occupation.push_back(occ);
        }
        return o;
    });
}

/// Martingale residual battery: for rays i, times s < t from the grid, and
/// test functions g in {1, X_i(s), nu(s)}, checks the drift residuals
/// E[(M_i(t) - M_i(s)) g] and the quadratic-variation residuals
/// E[M_i(t)^2 - occupation_i(t)], all against 3 standard errors.
struct ResidualEntry {
    std::string name;
    double mean = 0;
    double stderr_of_mean = 0;
    bool pass = false;
};

struct ResidualReport {
    std::vector<ResidualEntry> entries;
    bool all_pass() const {
        for (const auto& e : entries)
            if (!e.pass) return false;
        return true;
    }
};

inline ResidualReport martingale_residual_check(const EnsembleResult& ens,
                                                const std::vector<double>& weights) {
    if (ens.observations.size() < 100)
        throw std::invalid_argument("martingale_residual_check: need at least 100 paths");
    ResidualReport report;
    const int m = ens.rays;
    const std::size_t nobs = ens.obs_times.size();
    auto x_of = [&](const PathObservation& o, std::size_t j, int ray) {
        return o.label[j] == ray ? o.coord[j] : 0.0;
    };
    auto m_of = [&](const PathObservation& o, std::size_t j, int ray) {
        return x_of(o, j, ray) - weights[static_cast<std::size_t>(ray - 1)] * o.local_time[j];
    };

    auto push = [&](const std::string& name, const std::vector<double>& vals) {
        MeanStderr s = mean_stderr(vals);
        report.entries.push_back(
            {name, s.mean, s.stderr_of_mean, std::abs(s.mean) <= 3 * s.stderr_of_mean});
    };

    for (int i = 1; i <= m; ++i) {
        for (std::size_t js = 0; js < nobs; ++js) {
            for (std::size_t jt = js + 1; jt < nobs; ++jt) {
                std::string base = "ray" + std::to_string(i) + " s=" +
                                   std::to_string(ens.obs_times[js]) + " t=" +
                                   std::to_string(ens.obs_times[jt]);
                std::vector<double> g1, gx, gn;
                for (const auto& o : ens.observations) {
                    double inc = m_of(o, jt, i) - m_of(o, js, i);
                    g1.push_back(inc);
                    gx.push_back(inc * x_of(o, js, i));
                    gn.push_back(inc * o.local_time[js]);
                }
                push("drift " + base + " g=1", g1);
                push("drift " + base + " g=X", gx);
                push("drift " + base + " g=nu", gn);
            }
        }
        for (std::size_t jt = 0; jt < nobs; ++jt) {
            std::vector<double> qv;
            for (const auto& o : ens.observations) {
                double mi = m_of(o, jt, i);
                qv.push_back(mi * mi - o.occupation[jt][static_cast<std::size_t>(i - 1)]);
            }
            push("qv ray" + std::to_string(i) + " t=" + std::to_string(ens.obs_times[jt]), qv);
        }
    }
    return report;
}

} // namespace pwalk
