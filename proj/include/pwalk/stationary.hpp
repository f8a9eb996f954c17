#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pwalk/chain_spec.hpp"
#include "pwalk/first_passage.hpp"
#include "pwalk/membrane.hpp"

namespace pwalk {

/// Internal cross-checks disagree (formula forms, duality, bounds).
struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A Monte Carlo run could not finish its cycle quota within its step budget.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Probability map over embedded-chain states. truncation_loss is the
/// cap-sensitivity diagnostic of the first-passage solve feeding it (0 when
/// the cap provably does not matter); first_moment is E|R|.
struct StationaryDistribution {
    std::map<RayState, double> probs;
    double truncation_loss = 0.0;
    double first_moment = 0.0;

    double prob_of(RayState s) const {
        auto it = probs.find(s);
        return it == probs.end() ? 0.0 : it->second;
    }

    nlohmann::json to_json() const {
        nlohmann::json states = nlohmann::json::array();
        for (const auto& [s, p] : probs)
            states.push_back({{"radius", s.radius}, {"label", s.label}, {"prob", p}});
        return {{"states", states},
                {"truncation_loss", truncation_loss},
                {"first_moment", first_moment}};
    }
};

namespace detail {

// pi = pi T for a stochastic matrix T, via the stacked least-squares system
// [T^T - I; 1^T] pi = [0; 1]. Robust to the usual rank deficiency of T - I.
inline std::vector<double> stationary_of(const std::vector<std::vector<double>>& t) {
    const int n = static_cast<int>(t.size());
    if (n == 0) throw SpecError("stationary solve: empty chain");
    Eigen::MatrixXd a(n + 1, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = t[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] - (i == j ? 1.0 : 0.0);
    for (int j = 0; j < n; ++j) a(n, j) = 1.0;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
    b(n) = 1.0;
    Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);
    std::vector<double> out(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = std::max(pi(i), 0.0);
        sum += out[static_cast<std::size_t>(i)];
    }
    if (!(sum > 0.5) || !(sum < 1.5))
        throw SpecError("stationary solve: solution does not normalize (sum = " +
                        std::to_string(sum) + ")");
    for (double& p : out) p /= sum;
    // residual check at solver tolerance
    double resid = 0.0;
    for (int j = 0; j < n; ++j) {
        double pj = 0.0;
        for (int i = 0; i < n; ++i)
            pj += out[static_cast<std::size_t>(i)] * t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        resid = std::max(resid, std::abs(pj - out[static_cast<std::size_t>(j)]));
    }
    if (resid > 1e-10)
        throw SpecError("stationary solve: residual " + std::to_string(resid) +
                        " exceeds 1e-10 (chain may have several recurrent classes)");
    return out;
}

} // namespace detail

/// Exact embedded-chain data for an axis chain: entrance/exit state lists,
/// their stationary laws, the first-passage matrix between them, and the
/// reentry matrix back. Everything downstream (mu, weights, duality checks)
/// reads from this one consistent model.
struct AxisStationary {
    std::vector<RayState> entrance_states; // radius >= 1
    std::vector<RayState> exit_states;     // radius <= 0
    std::vector<double> pi_entrance;
    std::vector<double> pi_exit;
    std::vector<std::vector<double>> passage; // entrance idx -> exit idx, rows sum to 1
    std::vector<std::vector<double>> reentry; // exit idx -> entrance idx, rows sum to 1
    std::vector<double> v;                    // per label, v[label-1]
    double truncation_loss = 0.0;

    StationaryDistribution entrance_distribution() const {
        StationaryDistribution d;
        d.truncation_loss = truncation_loss;
        for (std::size_t i = 0; i < entrance_states.size(); ++i) {
            if (pi_entrance[i] <= 0) continue;
            d.probs[entrance_states[i]] = pi_entrance[i];
            d.first_moment += pi_entrance[i] * std::abs(entrance_states[i].radius);
        }
        return d;
    }

    StationaryDistribution exit_distribution() const {
        StationaryDistribution d;
        d.truncation_loss = truncation_loss;
        for (std::size_t i = 0; i < exit_states.size(); ++i) {
            if (pi_exit[i] <= 0) continue;
            d.probs[exit_states[i]] = pi_exit[i];
            d.first_moment += pi_exit[i] * std::abs(exit_states[i].radius);
        }
        return d;
    }
};

inline AxisStationary stationary_exact_axis(const AxisChainSpec& spec, int radius_cutoff = 512) {
    AxisStationary out;
    for (int l = 1; l <= spec.m; ++l) out.v.push_back(spec.v(l));

    std::vector<FirstPassageTable> fp;
    fp.reserve(static_cast<std::size_t>(spec.m));
    for (int l = 1; l <= spec.m; ++l) fp.emplace_back(spec.jump(l), radius_cutoff);

    // candidate exits: every landing depth the ray's jumps allow
    std::vector<RayState> exit_candidates;
    std::map<RayState, std::optional<StateDistribution>> reentry_laws;
    for (int l = 1; l <= spec.m; ++l) {
        for (int s = 0; s >= -fp[static_cast<std::size_t>(l - 1)].depth(); --s) {
            RayState st{s, l};
            exit_candidates.push_back(st);
            try {
                reentry_laws[st] = spec.reentry_law(s, l);
            } catch (const SpecError&) {
                reentry_laws[st] = std::nullopt;
            }
        }
    }

    std::set<RayState> entrance_set;
    for (const auto& [st, law] : reentry_laws)
        if (law)
            for (const auto& a : law->atoms()) entrance_set.insert(a.state);
    if (entrance_set.empty()) throw SpecError("axis stationary: reentry kernel has no images");
    out.entrance_states.assign(entrance_set.begin(), entrance_set.end());

    int max_entrance_radius = 0;
    for (const auto& e : out.entrance_states) {
        if (e.radius > radius_cutoff)
            throw SpecError("axis stationary: entrance radius " + std::to_string(e.radius) +
                            " exceeds radius_cutoff " + std::to_string(radius_cutoff) +
                            "; raise the cutoff");
        max_entrance_radius = std::max(max_entrance_radius, e.radius);
    }

    // exits actually reachable from some entrance state
    std::map<RayState, std::size_t> exit_index;
    for (const auto& s : exit_candidates) {
        bool reachable = false;
        for (const auto& e : out.entrance_states)
            if (e.label == s.label &&
                fp[static_cast<std::size_t>(s.label - 1)].prob(e.radius, s.radius) > 0) {
                reachable = true;
                break;
            }
        if (!reachable) continue;
        if (!reentry_laws[s])
            throw SpecError("axis stationary: exit state (" + std::to_string(s.radius) + "," +
                            std::to_string(s.label) + ") is reachable but has no reentry law");
        exit_index.emplace(s, out.exit_states.size());
        out.exit_states.push_back(s);
    }

    const std::size_t ne = out.entrance_states.size(), nx = out.exit_states.size();
    out.passage.assign(ne, std::vector<double>(nx, 0.0));
    for (std::size_t i = 0; i < ne; ++i) {
        const auto& e = out.entrance_states[i];
        for (const auto& [s, j] : exit_index)
            if (s.label == e.label)
                out.passage[i][j] = fp[static_cast<std::size_t>(s.label - 1)].prob(e.radius, s.radius);
    }
    std::map<RayState, std::size_t> entrance_index;
    for (std::size_t i = 0; i < ne; ++i) entrance_index.emplace(out.entrance_states[i], i);
    out.reentry.assign(nx, std::vector<double>(ne, 0.0));
    for (std::size_t j = 0; j < nx; ++j)
        for (const auto& a : reentry_laws[out.exit_states[j]]->atoms())
            out.reentry[j][entrance_index.at(a.state)] += a.prob;

    std::vector<std::vector<double>> t(ne, std::vector<double>(ne, 0.0));
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t j = 0; j < nx; ++j)
            for (std::size_t k = 0; k < ne; ++k) t[i][k] += out.passage[i][j] * out.reentry[j][k];
    out.pi_entrance = detail::stationary_of(t);

    out.pi_exit.assign(nx, 0.0);
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t j = 0; j < nx; ++j) out.pi_exit[j] += out.pi_entrance[i] * out.passage[i][j];

    for (int l = 1; l <= spec.m; ++l)
        out.truncation_loss = std::max(
            out.truncation_loss,
            first_passage_cap_sensitivity(spec.jump(l), radius_cutoff, max_entrance_radius));
    return out;
}

/// Exact embedded-chain data for a membrane walk, kept in original
/// coordinates: entrance values |x| > d, the law of the next boundary
/// crossing per entrance, and the membrane exit law composition.
struct MembraneStationary {
    int d = 0;
    double v_plus = 1.0, v_minus = 1.0;
    std::vector<int> entrance_values;
    std::vector<double> pi_entrance;
    std::vector<std::vector<std::pair<int, double>>> crossing; // per entrance: (w, prob)
    std::map<int, double> pi_exit;                             // law of the crossing value
    double truncation_loss = 0.0;

    StationaryDistribution entrance_distribution() const {
        StationaryDistribution dd;
        dd.truncation_loss = truncation_loss;
        for (std::size_t i = 0; i < entrance_values.size(); ++i) {
            if (pi_entrance[i] <= 0) continue;
            dd.probs[{entrance_values[i], 0}] = pi_entrance[i];
            dd.first_moment += pi_entrance[i] * std::abs(entrance_values[i]);
        }
        return dd;
    }

    StationaryDistribution exit_distribution() const {
        StationaryDistribution dd;
        dd.truncation_loss = truncation_loss;
        for (const auto& [w, p] : pi_exit) {
            if (p <= 0) continue;
            dd.probs[{w, 0}] = p;
            dd.first_moment += p * std::abs(w);
        }
        return dd;
    }
};

inline MembraneStationary stationary_exact_membrane(const MembraneWalkSpec& spec,
                                                    int radius_cutoff = 512) {
    MembraneStationary out;
    out.d = spec.d;
    out.v_plus = spec.v_plus();
    out.v_minus = spec.v_minus();

    FirstPassageTable fp_plus(spec.xi_plus, radius_cutoff);
    FirstPassageTable fp_minus(flip_sign(spec.xi_minus), radius_cutoff);

    // crossing-value supports are fixed sets: d + landing (from above) and
    // -d - landing (mirrored, from below)
    std::set<int> crossings;
    for (int s = 0; s >= -fp_plus.depth(); --s) crossings.insert(spec.d + s);
    for (int s = 0; s >= -fp_minus.depth(); --s) crossings.insert(-spec.d - s);

    std::map<int, IntDistribution> exit_laws; // membrane state -> exit law
    std::set<int> entrance_set;
    for (int w : crossings) {
        if (std::abs(w) > spec.d) {
            entrance_set.insert(w); // jumped clean over; tau == sigma
        } else {
            auto law = membrane_exit_distribution(spec, w);
            for (const auto& a : law.atoms()) entrance_set.insert(a.value);
            exit_laws.emplace(w, std::move(law));
        }
    }
    out.entrance_values.assign(entrance_set.begin(), entrance_set.end());

    int max_u = 0;
    for (int x : out.entrance_values) {
        int u = std::abs(x) - spec.d;
        if (u > radius_cutoff)
            throw SpecError("membrane stationary: entrance distance " + std::to_string(u) +
                            " exceeds radius_cutoff; raise the cutoff");
        max_u = std::max(max_u, u);
    }

    std::map<int, std::size_t> entrance_index;
    for (std::size_t i = 0; i < out.entrance_values.size(); ++i)
        entrance_index.emplace(out.entrance_values[i], i);

    const std::size_t ne = out.entrance_values.size();
    out.crossing.assign(ne, {});
    std::vector<std::vector<double>> t(ne, std::vector<double>(ne, 0.0));
    for (std::size_t i = 0; i < ne; ++i) {
        int x = out.entrance_values[i];
        const FirstPassageTable& fp = x > spec.d ? fp_plus : fp_minus;
        int u = std::abs(x) - spec.d;
        for (auto [s, p] : fp.row(u)) {
            int w = x > spec.d ? spec.d + s : -spec.d - s;
            out.crossing[i].emplace_back(w, p);
            if (std::abs(w) > spec.d) {
                t[i][entrance_index.at(w)] += p;
            } else {
                for (const auto& a : exit_laws.at(w).atoms())
                    t[i][entrance_index.at(a.value)] += p * a.prob;
            }
        }
    }
    out.pi_entrance = detail::stationary_of(t);
    for (std::size_t i = 0; i < ne; ++i)
        for (auto [w, p] : out.crossing[i]) out.pi_exit[w] += out.pi_entrance[i] * p;

    out.truncation_loss =
        std::max(first_passage_cap_sensitivity(spec.xi_plus, radius_cutoff, max_u),
                 first_passage_cap_sensitivity(flip_sign(spec.xi_minus), radius_cutoff, max_u));
    return out;
}

/// Exact embedded-chain data for a spider chain: entrance states, the law of
/// the attempted landing point z <= 0 per entrance, and the stationary law of
/// the pre-jump state (the exit chain analog).
struct SpiderStationary {
    int m = 1;
    std::vector<double> v;
    std::vector<RayState> entrance_states;
    std::vector<double> pi_entrance;
    std::vector<std::vector<std::pair<int, double>>> attempted; // per entrance: (z, prob)
    std::map<RayState, double> pi_exit;                         // pre-jump states
    double truncation_loss = 0.0;

    StationaryDistribution entrance_distribution() const {
        StationaryDistribution dd;
        dd.truncation_loss = truncation_loss;
        for (std::size_t i = 0; i < entrance_states.size(); ++i) {
            if (pi_entrance[i] <= 0) continue;
            dd.probs[entrance_states[i]] = pi_entrance[i];
            dd.first_moment += pi_entrance[i] * std::abs(entrance_states[i].radius);
        }
        return dd;
    }

    StationaryDistribution exit_distribution() const {
        StationaryDistribution dd;
        dd.truncation_loss = truncation_loss;
        for (const auto& [s, p] : pi_exit) {
            if (p <= 0) continue;
            dd.probs[s] = p;
            dd.first_moment += p * std::abs(s.radius);
        }
        return dd;
    }
};

inline SpiderStationary stationary_exact_spider(const SpiderWalkSpec& spec,
                                                int radius_cutoff = 512) {
    SpiderStationary out;
    out.m = spec.m;
    for (int l = 1; l <= spec.m; ++l) out.v.push_back(spec.v(l));

    std::vector<FirstPassageTable> fp;
    for (int l = 1; l <= spec.m; ++l) fp.emplace_back(spec.jump(l), radius_cutoff);

    // landing law composed with redirection gives the next entrance; enumerate
    // entrance states reachable through the origin kernel and overshoot images
    std::set<RayState> entrance_set;
    for (const auto& a : spec.origin_kernel.atoms()) entrance_set.insert(a.state);
    for (int l = 1; l <= spec.m; ++l)
        for (int z = -1; z >= -fp[static_cast<std::size_t>(l - 1)].depth(); --z) {
            StateDistribution law = spec.overshoot_law(z, l);
            for (const auto& a : law.atoms())
                if (a.state.radius >= 1) entrance_set.insert(a.state);
        }
    out.entrance_states.assign(entrance_set.begin(), entrance_set.end());

    int max_entrance_radius = 0;
    for (const auto& e : out.entrance_states) {
        if (e.radius > radius_cutoff)
            throw SpecError("spider stationary: entrance radius exceeds radius_cutoff");
        max_entrance_radius = std::max(max_entrance_radius, e.radius);
    }
    std::map<RayState, std::size_t> entrance_index;
    for (std::size_t i = 0; i < out.entrance_states.size(); ++i)
        entrance_index.emplace(out.entrance_states[i], i);

    const std::size_t ne = out.entrance_states.size();
    out.attempted.assign(ne, {});
    std::vector<std::vector<double>> t(ne, std::vector<double>(ne, 0.0));
    auto add_entrance_mass = [&](std::vector<double>& row, RayState target, double p) {
        auto it = entrance_index.find(target);
        if (it == entrance_index.end())
            throw SpecError("spider stationary: kernel image outside enumerated entrances");
        row[it->second] += p;
    };
    for (std::size_t i = 0; i < ne; ++i) {
        const auto& e = out.entrance_states[i];
        const FirstPassageTable& f = fp[static_cast<std::size_t>(e.label - 1)];
        for (auto [z, p] : f.row(e.radius)) {
            out.attempted[i].emplace_back(z, p);
            if (z == 0) {
                for (const auto& a : spec.origin_kernel.atoms())
                    add_entrance_mass(t[i], a.state, p * a.prob);
            } else {
                StateDistribution law = spec.overshoot_law(z, e.label);
                for (const auto& a : law.atoms()) {
                    if (a.state.radius == 0) {
                        for (const auto& o : spec.origin_kernel.atoms())
                            add_entrance_mass(t[i], o.state, p * a.prob * o.prob);
                    } else {
                        add_entrance_mass(t[i], a.state, p * a.prob);
                    }
                }
            }
        }
    }
    out.pi_entrance = detail::stationary_of(t);

    // pre-jump law: P(position at the critical step = y) needs the visit
    // structure; y is confined to 1..max down-jump since the next jump must
    // reach <= 0
    for (std::size_t i = 0; i < ne; ++i) {
        const auto& e = out.entrance_states[i];
        const FirstPassageTable& f = fp[static_cast<std::size_t>(e.label - 1)];
        for (int y = 1; y <= f.depth() + 1; ++y) {
            double p = f.pre_exit_prob(e.radius, y);
            if (p > 0) out.pi_exit[{y, e.label}] += out.pi_entrance[i] * p;
        }
    }

    for (int l = 1; l <= spec.m; ++l)
        out.truncation_loss = std::max(
            out.truncation_loss,
            first_passage_cap_sensitivity(spec.jump(l), radius_cutoff, max_entrance_radius));
    return out;
}

} // namespace pwalk
