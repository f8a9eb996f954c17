#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pwalk/harvest.hpp"
#include "pwalk/membrane.hpp"
#include "pwalk/sbm.hpp"
#include "pwalk/stationary.hpp"

namespace pwalk {

enum class Mode { Exact, MonteCarlo };

inline std::string mode_name(Mode m) { return m == Mode::Exact ? "exact" : "mc"; }

struct ParamOptions {
    Mode mode = Mode::Exact;
    int radius_cutoff = 512;
    HarvestOptions harvest;
};

inline constexpr double kExactFormTol = 1e-9;

/// Monte Carlo harvesting clamps the walk at the same radius cutoff the exact
/// solves use, so both modes address one capped model.
inline HarvestOptions harvest_options_of(const ParamOptions& opt) {
    HarvestOptions h = opt.harvest;
    h.cap = opt.radius_cutoff;
    return h;
}

namespace detail {

inline void require_close(double a, double b, double tol, const std::string& what) {
    if (std::abs(a - b) > tol)
        throw ConsistencyError(what + " disagree: " + std::to_string(a) + " vs " +
                               std::to_string(b) + " (tol " + std::to_string(tol) + ")");
}

// pooled ratio with batch-means stderr; values[b] = num_b / den_b
struct RatioStat {
    double value = 0;
    double stderr_ = 0;
};

inline RatioStat pooled_ratio(const std::vector<double>& num, const std::vector<double>& den) {
    double n = 0, d = 0;
    std::vector<double> per_batch;
    for (std::size_t b = 0; b < num.size(); ++b) {
        n += num[b];
        d += den[b];
        if (den[b] != 0) per_batch.push_back(num[b] / den[b]);
    }
    RatioStat r;
    r.value = n / d;
    r.stderr_ = batch_stderr(per_batch);
    return r;
}

} // namespace detail

/// Drift rate of the excursion-count clock: the expected per-cycle increase
/// of R/v across the reentry step, in its four equivalent forms.
struct MuResult {
    double mu = 0;                 // canonical value (entrance-difference form)
    std::array<double, 4> forms{}; // ent-exit, exit one-step, ent-to-sigma (two writings)
    double stderr_ = 0;
};

/// Ray weights in the three equivalent forms.
struct WeightsResult {
    std::vector<double> weights;
    std::vector<std::array<double, 3>> forms; // per ray
    std::vector<double> stderr_;
    double mu = 0;       // denominator drift rate
    double mu_stderr = 0;
};

namespace detail {

inline void check_mu(MuResult& r, double tol_scale, const std::vector<double>& tols) {
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j)
            require_close(r.forms[i], r.forms[j],
                          tols.empty() ? tol_scale : 3 * tols[std::min(i, tols.size() - 1)] + tol_scale,
                          "mu forms " + std::to_string(i) + "/" + std::to_string(j));
    r.mu = r.forms[3];
    if (!(r.mu > 0)) throw ConsistencyError("mu = " + std::to_string(r.mu) + ", expected > 0");
}

inline void check_weights(WeightsResult& r, double tol) {
    double sum = 0;
    for (std::size_t k = 0; k < r.forms.size(); ++k) {
        const auto& f = r.forms[k];
        double t = tol + (r.stderr_.empty() ? 0.0 : 3 * r.stderr_[k]);
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b)
                if (std::abs(f[static_cast<std::size_t>(a)] - f[static_cast<std::size_t>(b)]) > t)
                    throw ConsistencyError(
                        "weight form " + std::to_string(a) + " and form " + std::to_string(b) +
                        " for ray " + std::to_string(k + 1) + " disagree: " +
                        std::to_string(f[static_cast<std::size_t>(a)]) + " vs " +
                        std::to_string(f[static_cast<std::size_t>(b)]));
        r.weights.push_back(f[1]);
        if (!(f[1] > 0))
            throw ConsistencyError("weight for ray " + std::to_string(k + 1) + " is not positive");
        sum += f[1];
    }
    double t = tol;
    for (double s : r.stderr_) t += 3 * s;
    if (std::abs(sum - 1.0) > t)
        throw ConsistencyError("weights sum to " + std::to_string(sum));
}

} // namespace detail

inline MuResult compute_mu(const AxisStationary& st) {
    MuResult r;
    const std::size_t ne = st.entrance_states.size(), nx = st.exit_states.size();
    auto v_of = [&](int label) { return st.v[static_cast<std::size_t>(label - 1)]; };
    double ent = 0, exit_v = 0, pair_labels = 0, pair_diff = 0, exit_step = 0;
    for (std::size_t i = 0; i < ne; ++i) {
        const RayState& e = st.entrance_states[i];
        ent += st.pi_entrance[i] * e.radius / v_of(e.label);
        for (std::size_t j = 0; j < nx; ++j) {
            const RayState& s = st.exit_states[j];
            double w = st.pi_entrance[i] * st.passage[i][j];
            pair_labels += w * (e.radius / v_of(e.label) - s.radius / v_of(s.label));
            pair_diff += w * (e.radius - s.radius) / v_of(e.label);
        }
    }
    for (std::size_t j = 0; j < nx; ++j) {
        const RayState& s = st.exit_states[j];
        exit_v += st.pi_exit[j] * s.radius / v_of(s.label);
        for (std::size_t i = 0; i < ne; ++i) {
            const RayState& e = st.entrance_states[i];
            double w = st.pi_exit[j] * st.reentry[j][i];
            exit_step += w * (e.radius / v_of(e.label) - s.radius / v_of(s.label));
        }
    }
    r.forms = {ent - exit_v, exit_step, pair_labels, pair_diff};
    detail::check_mu(r, kExactFormTol, {});
    return r;
}

inline MuResult compute_mu(const std::vector<AxisBatch>& batches) {
    MuResult r;
    std::vector<double> cycles, f1, f2, f3;
    for (const auto& b : batches) {
        cycles.push_back(static_cast<double>(b.cycles));
        f1.push_back(b.ent - b.exit_);
        f2.push_back(b.step);
        f3.push_back(b.diff);
    }
    auto s1 = detail::pooled_ratio(f1, cycles);
    auto s2 = detail::pooled_ratio(f2, cycles);
    auto s3 = detail::pooled_ratio(f3, cycles);
    r.forms = {s1.value, s2.value, s3.value, s3.value};
    r.stderr_ = s3.stderr_;
    detail::check_mu(r, 1e-12, {s1.stderr_ + s2.stderr_ + s3.stderr_});
    return r;
}

inline WeightsResult compute_weights(const AxisStationary& st) {
    WeightsResult r;
    const std::size_t ne = st.entrance_states.size(), nx = st.exit_states.size();
    const int m = static_cast<int>(st.v.size());
    auto v_of = [&](int label) { return st.v[static_cast<std::size_t>(label - 1)]; };
    MuResult mu = compute_mu(st);
    r.mu = mu.mu;

    for (int k = 1; k <= m; ++k) {
        double ent_k = 0, exit_k = 0, diff_k = 0, step_k = 0;
        for (std::size_t i = 0; i < ne; ++i) {
            const RayState& e = st.entrance_states[i];
            if (e.label == k) ent_k += st.pi_entrance[i] * e.radius / v_of(k);
            for (std::size_t j = 0; j < nx; ++j) {
                const RayState& s = st.exit_states[j];
                if (e.label == k)
                    diff_k += st.pi_entrance[i] * st.passage[i][j] * (e.radius - s.radius) / v_of(k);
            }
        }
        for (std::size_t j = 0; j < nx; ++j) {
            const RayState& s = st.exit_states[j];
            if (s.label == k) exit_k += st.pi_exit[j] * s.radius / v_of(k);
            for (std::size_t i = 0; i < ne; ++i) {
                const RayState& e = st.entrance_states[i];
                double w = st.pi_exit[j] * st.reentry[j][i];
                if (e.label == k) step_k += w * e.radius / v_of(k);
                if (s.label == k) step_k -= w * s.radius / v_of(k);
            }
        }
        r.forms.push_back({(ent_k - exit_k) / mu.forms[0], diff_k / mu.forms[3],
                           step_k / mu.forms[1]});
    }
    detail::check_weights(r, kExactFormTol);
    return r;
}

inline WeightsResult compute_weights(const std::vector<AxisBatch>& batches) {
    WeightsResult r;
    const std::size_t m = batches.empty() ? 0 : batches.front().ent_k.size();
    std::vector<double> den1, den2, den3;
    for (const auto& b : batches) {
        den1.push_back(b.ent - b.exit_);
        den2.push_back(b.diff);
        den3.push_back(b.step);
    }
    {
        std::vector<double> cycles;
        for (const auto& b : batches) cycles.push_back(static_cast<double>(b.cycles));
        auto mu = detail::pooled_ratio(den2, cycles);
        r.mu = mu.value;
        r.mu_stderr = mu.stderr_;
    }
    for (std::size_t k = 0; k < m; ++k) {
        std::vector<double> n1, n2, n3;
        for (const auto& b : batches) {
            n1.push_back(b.ent_k[k] - b.exit_k[k]);
            n2.push_back(b.diff_k[k]);
            n3.push_back(b.step_k[k]);
        }
        auto s1 = detail::pooled_ratio(n1, den1);
        auto s2 = detail::pooled_ratio(n2, den2);
        auto s3 = detail::pooled_ratio(n3, den3);
        r.forms.push_back({s1.value, s2.value, s3.value});
        r.stderr_.push_back(s2.stderr_ + s1.stderr_ + s3.stderr_);
    }
    detail::check_weights(r, 1e-12);
    return r;
}

/// Skew permeability of a membrane walk with both evaluation forms and, in
/// exact mode, the independent two-ray route p_plus - p_minus.
struct GammaResult {
    double gamma = 0;
    double form_phi = 0;     // E phi(X(0)-X(sigma~)) / E |phi(...)|
    double form_sgn = 0;     // same with v indexed by sgn X(0)
    std::optional<double> unfolded_gamma; // p_+ - p_- of the unfolded chain
    double stderr_ = 0;
    double truncation_loss = 0;
};

namespace detail {

inline void check_gamma(GammaResult& g, double tol) {
    require_close(g.form_phi, g.form_sgn, tol, "gamma forms");
    if (g.unfolded_gamma)
        require_close(g.form_phi, *g.unfolded_gamma, tol, "gamma direct vs two-ray route");
    g.gamma = g.form_phi;
    if (std::abs(g.gamma) >= 1.0 - 1e-12)
        throw ConsistencyError("gamma = " + std::to_string(g.gamma) +
                               ": one entrance sign carries no mass, limit is degenerate");
}

} // namespace detail

inline GammaResult compute_gamma_membrane(const MembraneWalkSpec& spec, const ParamOptions& opt) {
    GammaResult g;
    if (opt.mode == Mode::Exact) {
        MembraneStationary st = stationary_exact_membrane(spec, opt.radius_cutoff);
        double np = 0, dp = 0, ns = 0, ds = 0;
        for (std::size_t i = 0; i < st.entrance_values.size(); ++i) {
            int x = st.entrance_values[i];
            for (auto [w, p] : st.crossing[i]) {
                double weight = st.pi_entrance[i] * p;
                double u = static_cast<double>(x - w);
                np += weight * phi_map(u, st.v_plus, st.v_minus);
                dp += weight * std::abs(phi_map(u, st.v_plus, st.v_minus));
                double v_sgn = x > 0 ? st.v_plus : st.v_minus;
                ns += weight * u / v_sgn;
                ds += weight * std::abs(u) / v_sgn;
            }
        }
        g.form_phi = np / dp;
        g.form_sgn = ns / ds;
        g.truncation_loss = st.truncation_loss;
        WeightsResult w = compute_weights(stationary_exact_axis(unfold_membrane(spec), opt.radius_cutoff));
        g.unfolded_gamma = w.weights[0] - w.weights[1];
        detail::check_gamma(g, kExactFormTol);
    } else {
        auto batches = harvest_membrane(spec, harvest_options_of(opt));
        std::vector<double> np, dp, ns, ds;
        for (const auto& b : batches) {
            np.push_back(b.num_phi);
            dp.push_back(b.den_phi);
            ns.push_back(b.num_sgn);
            ds.push_back(b.den_sgn);
        }
        auto fp = detail::pooled_ratio(np, dp);
        auto fs = detail::pooled_ratio(ns, ds);
        g.form_phi = fp.value;
        g.form_sgn = fs.value;
        g.stderr_ = fp.stderr_;
        detail::check_gamma(g, 3 * (fp.stderr_ + fs.stderr_) + 1e-12);
    }
    return g;
}

inline WeightsResult compute_weights_spider(const SpiderWalkSpec& spec, const ParamOptions& opt) {
    WeightsResult r;
    if (opt.mode == Mode::Exact) {
        SpiderStationary st = stationary_exact_spider(spec, opt.radius_cutoff);
        const int m = st.m;
        std::vector<double> num(static_cast<std::size_t>(m), 0.0);
        double den = 0;
        for (std::size_t i = 0; i < st.entrance_states.size(); ++i) {
            const RayState& e = st.entrance_states[i];
            for (auto [z, p] : st.attempted[i]) {
                double val = st.pi_entrance[i] * p * (e.radius - z) /
                             st.v[static_cast<std::size_t>(e.label - 1)];
                num[static_cast<std::size_t>(e.label - 1)] += val;
                den += val;
            }
        }
        r.mu = den;
        for (int k = 0; k < m; ++k) {
            double w = num[static_cast<std::size_t>(k)] / den;
            r.forms.push_back({w, w, w});
        }
        detail::check_weights(r, kExactFormTol);
    } else {
        auto batches = harvest_spider(spec, harvest_options_of(opt));
        const std::size_t m = batches.empty() ? 0 : batches.front().w_k.size();
        std::vector<double> den, cycles;
        for (const auto& b : batches) {
            den.push_back(b.w);
            cycles.push_back(static_cast<double>(b.cycles));
        }
        auto mu = detail::pooled_ratio(den, cycles);
        r.mu = mu.value;
        r.mu_stderr = mu.stderr_;
        for (std::size_t k = 0; k < m; ++k) {
            std::vector<double> num;
            for (const auto& b : batches) num.push_back(b.w_k[k]);
            auto s = detail::pooled_ratio(num, den);
            r.forms.push_back({s.value, s.value, s.value});
            r.stderr_.push_back(s.stderr_);
        }
        detail::check_weights(r, 1e-12);
    }
    return r;
}

/// Bundle of everything a chain spec determines about its scaling limit.
struct LimitParams {
    double mu = 0;
    std::vector<double> weights;
    std::optional<double> gamma;
    std::optional<double> osc_coefficient;
    std::map<std::string, double> stderrs;
    Mode mode = Mode::Exact;
    double truncation_loss = 0;

    nlohmann::json to_json() const {
        nlohmann::json j{{"mu", mu},
                         {"weights", weights},
                         {"mode", mode_name(mode)},
                         {"truncation_loss", truncation_loss}};
        if (gamma) j["gamma"] = *gamma;
        if (osc_coefficient) j["osc_drift_coefficient"] = *osc_coefficient;
        nlohmann::json errs = nlohmann::json::object();
        for (const auto& [k, v] : stderrs) errs[k] = v;
        j["stderr"] = errs;
        return j;
    }
};

inline LimitParams compute_params(const AxisChainSpec& spec, const ParamOptions& opt) {
    LimitParams out;
    out.mode = opt.mode;
    if (opt.mode == Mode::Exact) {
        AxisStationary st = stationary_exact_axis(spec, opt.radius_cutoff);
        WeightsResult w = compute_weights(st);
        out.mu = w.mu;
        out.weights = w.weights;
        out.truncation_loss = st.truncation_loss;
    } else {
        auto batches = harvest_axis(spec, harvest_options_of(opt));
        WeightsResult w = compute_weights(batches);
        out.mu = w.mu;
        out.weights = w.weights;
        out.stderrs["mu"] = w.mu_stderr;
        for (std::size_t k = 0; k < w.stderr_.size(); ++k)
            out.stderrs["weight_" + std::to_string(k + 1)] = w.stderr_[k];
    }
    return out;
}

inline LimitParams compute_params(const MembraneWalkSpec& spec, const ParamOptions& opt) {
    LimitParams out;
    out.mode = opt.mode;
    GammaResult g = compute_gamma_membrane(spec, opt);
    out.gamma = g.gamma;
    out.osc_coefficient = osc_drift_coefficient({spec.v_plus(), spec.v_minus(), g.gamma});
    out.truncation_loss = g.truncation_loss;
    if (g.stderr_ > 0) out.stderrs["gamma"] = g.stderr_;
    AxisChainSpec unfolded = unfold_membrane(spec);
    if (opt.mode == Mode::Exact) {
        WeightsResult w = compute_weights(stationary_exact_axis(unfolded, opt.radius_cutoff));
        out.mu = w.mu;
        out.weights = w.weights;
    } else {
        WeightsResult w = compute_weights(harvest_axis(unfolded, harvest_options_of(opt)));
        out.mu = w.mu;
        out.weights = w.weights;
        out.stderrs["mu"] = w.mu_stderr;
        for (std::size_t k = 0; k < w.stderr_.size(); ++k)
            out.stderrs["weight_" + std::to_string(k + 1)] = w.stderr_[k];
    }
    return out;
}

inline LimitParams compute_params(const SpiderWalkSpec& spec, const ParamOptions& opt) {
    LimitParams out;
    out.mode = opt.mode;
    WeightsResult w = compute_weights_spider(spec, opt);
    out.mu = w.mu;
    out.weights = w.weights;
    if (opt.mode == Mode::MonteCarlo) {
        out.stderrs["mu"] = w.mu_stderr;
        for (std::size_t k = 0; k < w.stderr_.size(); ++k)
            out.stderrs["weight_" + std::to_string(k + 1)] = w.stderr_[k];
    }
    return out;
}

} // namespace pwalk
