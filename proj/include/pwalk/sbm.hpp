#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "pwalk/gaussian.hpp"
#include "pwalk/rng.hpp"

namespace pwalk {

// Two sign conventions live side by side, on purpose:
//  * the transition density uses sgn(0) = 0 (a Lebesgue-null point),
//  * phi_map / psi_map put 0 on the plus side (indicator x >= 0).

/// x * (1/v_+ if x >= 0 else 1/v_-): rescales a two-speed path to unit speed.
inline double phi_map(double x, double v_plus, double v_minus) {
    return x >= 0 ? x / v_plus : x / v_minus;
}

/// Inverse of phi_map: x * (v_+ if x >= 0 else v_-).
inline double psi_map(double x, double v_plus, double v_minus) {
    return x >= 0 ? x * v_plus : x * v_minus;
}

struct SbmParams {
    double gamma;
    double t;
    double x;

    SbmParams(double gamma_, double t_, double x_ = 0.0) : gamma(gamma_), t(t_), x(x_) {
        if (std::abs(gamma) > 1.0) throw std::invalid_argument("SbmParams: |gamma| must be <= 1");
        if (!(t > 0)) throw std::invalid_argument("SbmParams: t must be > 0");
    }
};

/// Skew Brownian transition density
///   p_t(x,y) = phi_t(x-y) + gamma * sgn(y) * phi_t(|x|+|y|),
/// with phi_t the heat kernel and sgn(0) = 0.
inline double sbm_density(const SbmParams& p, double y) {
    double sgn_y = (y > 0) - (y < 0);
    return heat_kernel(p.t, p.x - y) + p.gamma * sgn_y * heat_kernel(p.t, std::abs(p.x) + std::abs(y));
}

/// Closed-form CDF of the density above, written with normal CDFs:
///   y <= 0:  Phi((y-x)/sqrt(t)) - gamma * Phi((y-|x|)/sqrt(t))
///   y >  0:  Phi((y-x)/sqrt(t)) - gamma * Phi(-(y+|x|)/sqrt(t))
inline double sbm_cdf(const SbmParams& p, double y) {
    double s = std::sqrt(p.t);
    double base = normal_cdf((y - p.x) / s);
    if (y <= 0) return base - p.gamma * normal_cdf((y - std::abs(p.x)) / s);
    return base - p.gamma * normal_cdf(-(y + std::abs(p.x)) / s);
}

/// Exact draw of SBM at time t started at 0: |N(0,t)| signed + with
/// probability (1+gamma)/2.
inline double sbm_sample_origin(double gamma, double t, RngStream& rng) {
    double r = std::abs(rng.standard_normal()) * std::sqrt(t);
    return rng.bernoulli(0.5 * (1.0 + gamma)) ? r : -r;
}

/// Draw from a general start by numeric CDF inversion (bisection to 1e-12 on
/// y). Diagnostics only; origin starts should use sbm_sample_origin.
inline double sbm_sample(const SbmParams& p, RngStream& rng) {
    double u = rng.uniform01();
    double s = std::sqrt(p.t);
    double lo = p.x - 10.0 * s - std::abs(p.x), hi = p.x + 10.0 * s + std::abs(p.x);
    while (sbm_cdf(p, lo) > u) lo -= 4.0 * s;
    while (sbm_cdf(p, hi) < u) hi += 4.0 * s;
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        (sbm_cdf(p, mid) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Walsh BM marginal at time t from the origin: ray k with probability
/// weights[k], radius |N(0,t)| independent of the ray.
template <class Weights>
std::pair<int, double> wbm_marginal_sample(const Weights& weights, double t, RngStream& rng) {
    double u = rng.uniform01();
    int ray = static_cast<int>(weights.size()) - 1;
    double acc = 0;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
        acc += weights[k];
        if (u < acc) { ray = static_cast<int>(k); break; }
    }
    return {ray, std::abs(rng.standard_normal()) * std::sqrt(t)};
}

struct OscParams {
    double v_plus;
    double v_minus;
    double gamma;

    OscParams(double vp, double vm, double g) : v_plus(vp), v_minus(vm), gamma(g) {
        if (!(vp > 0) || !(vm > 0)) throw std::invalid_argument("OscParams: vband must be > 0");
    }
};

/// Local-time drift coefficient of the two-speed skew diffusion:
///   (gamma (v_+ + v_-) + v_+ - v_-) / (gamma (v_+ - v_-) + v_+ + v_-).
inline double osc_drift_coefficient(const OscParams& o) {
    double num = o.gamma * (o.v_plus + o.v_minus) + o.v_plus - o.v_minus;
    double den = o.gamma * (o.v_plus - o.v_minus) + o.v_plus + o.v_minus;
    return num / den;
}

/// E L(t) for the local time at 0 of a reflecting Brownian motion from 0;
/// equals sqrt(2t/pi) since L(t) has the law of |W(t)|.
inline double reflecting_local_time_mean(double t) {
    if (!(t >= 0)) throw std::invalid_argument("reflecting_local_time_mean: t must be >= 0");
    return std::sqrt(2.0 * t / kPi);
}

} // namespace pwalk
