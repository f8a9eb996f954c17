#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwalk/cycle_path.hpp"
#include "pwalk/sbm.hpp"
#include "pwalk/stats.hpp"

namespace pwalk {

/// Space-time rescaled path on the grid t = k/n, k = 0..floor(n*horizon).
/// Step function, no interpolation: the value at t is the value at [nt].
/// For axis/spider paths, value is R/(v_label sqrt n) with the active ray in
/// label (the implied m-vector has at most one nonzero coordinate; it may be
/// negative pre-limit). For membrane paths, value is phi(x/sqrt n) and label
/// encodes the sign (1 positive, 2 negative, 0 at zero).
struct ScaledPath {
    ChainKind kind = ChainKind::Axis;
    long n = 1;
    double horizon = 1.0;
    std::vector<double> value;
    std::vector<std::uint8_t> label;

    std::size_t grid_index(double t) const {
        if (t < 0 || t > horizon + 1e-12)
            throw std::invalid_argument("ScaledPath: time outside horizon");
        auto k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * t));
        return std::min(k, value.size() - 1);
    }

    double at(double t) const { return value[grid_index(t)]; }
    int label_at(double t) const { return label[grid_index(t)]; }

    /// Coordinate of the implied m-vector (axis/spider kinds).
    double coordinate(double t, int ray) const {
        std::size_t k = grid_index(t);
        return label[k] == ray ? value[k] : 0.0;
    }
};

/// Rescales a simulated path; v carries the per-ray deviations (for membrane
/// paths: {v_plus, v_minus}).
inline ScaledPath donsker_scale(const CyclePath& path, long n, double horizon,
                                const std::vector<double>& v) {
    if (n < 1) throw std::invalid_argument("donsker_scale: n must be >= 1");
    auto last = static_cast<std::size_t>(std::floor(static_cast<double>(n) * horizon));
    if (last > path.steps())
        throw std::invalid_argument("donsker_scale: horizon " + std::to_string(horizon) +
                                    " needs " + std::to_string(last) + " steps, path has " +
                                    std::to_string(path.steps()));
    ScaledPath out;
    out.kind = path.kind;
    out.n = n;
    out.horizon = horizon;
    out.value.reserve(last + 1);
    out.label.reserve(last + 1);
    const double root_n = std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k <= last; ++k) {
        if (path.kind == ChainKind::Membrane) {
            double x = static_cast<double>(path.radius[k]);
            out.value.push_back(phi_map(x / root_n, v.at(0), v.at(1)));
            out.label.push_back(x > 0 ? 1 : (x < 0 ? 2 : 0));
        } else {
            int l = path.label[k];
            double scale = l >= 1 ? v.at(static_cast<std::size_t>(l - 1)) : 1.0;
            out.value.push_back(static_cast<double>(path.radius[k]) / (scale * root_n));
            out.label.push_back(static_cast<std::uint8_t>(l));
        }
    }
    return out;
}

/// Discrete local-time estimator: a nondecreasing step function that jumps at
/// entrance times, each completed excursion contributing
/// (R(tau_k) - R(next exit)) / (v sqrt n). Excursions still open at the end
/// of the simulated path contribute nothing.
struct LocalTimeEstimate {
    long n = 1;
    std::vector<std::pair<std::uint32_t, double>> jumps; // (entrance index, increment)

    double at_time(double t) const {
        auto cutoff = static_cast<double>(n) * t;
        KahanSum s;
        for (const auto& [idx, inc] : jumps) {
            if (static_cast<double>(idx) > cutoff) break;
            s.add(inc);
        }
        return s.value();
    }
};

inline LocalTimeEstimate local_time_estimator(const CyclePath& path, long n,
                                              const std::vector<double>& v) {
    LocalTimeEstimate est;
    est.n = n;
    const double root_n = std::sqrt(static_cast<double>(n));
    if (path.kind == ChainKind::Axis) {
        // entrances tau[i] pair with the following exit sigma[i+1]
        for (std::size_t i = 0; i + 1 < path.sigma.size() && i < path.tau.size(); ++i) {
            std::uint32_t entr = path.tau[i], ex = path.sigma[i + 1];
            int l = path.label[entr];
            double inc = (path.radius[entr] - path.radius[ex]) /
                         (v.at(static_cast<std::size_t>(l - 1)) * root_n);
            est.jumps.emplace_back(entr, inc);
        }
    } else if (path.kind == ChainKind::Spider) {
        // entrances tau[i] (incl. the time-0 one) pair with sigma[i]
        for (std::size_t i = 0; i < path.sigma.size() && i < path.tau.size(); ++i) {
            std::uint32_t entr = path.tau[i];
            int l = path.label[entr];
            double inc = (path.radius[entr] - path.overshoot[i]) /
                         (v.at(static_cast<std::size_t>(l - 1)) * root_n);
            est.jumps.emplace_back(entr, inc);
        }
    } else {
        throw std::invalid_argument(
            "local_time_estimator: defined for axis/spider paths; unfold membrane walks first");
    }
    return est;
}

/// Per-ray occupation frequencies at a fixed time over an ensemble, with the
/// value-at-zero paths excluded (and counted separately).
struct OccupationFractions {
    std::vector<double> fraction;
    std::vector<double> stderr_;
    std::size_t counted = 0;
    std::size_t excluded_zero = 0;
};

inline OccupationFractions occupation_fractions(const std::vector<ScaledPath>& ensemble, double t,
                                                int rays) {
    if (ensemble.size() < 100)
        throw std::invalid_argument("occupation_fractions: need at least 100 paths");
    OccupationFractions out;
    std::vector<std::size_t> counts(static_cast<std::size_t>(rays), 0);
    for (const auto& p : ensemble) {
        double val = p.at(t);
        int lab = p.label_at(t);
        if (val == 0.0 || lab < 1 || lab > rays) {
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

} // namespace pwalk
