#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pwalk/int_distribution.hpp"

namespace pwalk {

/// Malformed or inconsistent chain specification / configuration.
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NamedCheck {
    std::string name;
    bool pass;
    std::string detail;
};

struct ValidationReport {
    std::vector<NamedCheck> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    void add(std::string name, bool pass, std::string detail = "") {
        checks.push_back({std::move(name), pass, std::move(detail)});
    }
    void add(std::string name, const CheckResult& r) {
        checks.push_back({std::move(name), r.pass, r.detail});
    }
};

/// How a reentry/overshoot kernel extends below its explicitly given range.
/// "reflect" reuses the law at the lowest explicit point; "affine-cap" maps
/// deterministically to min(ceil(a + b|x|), cap) on the same ray;
/// "membrane-fold" is the label-flipping reflection used by unfolded membrane
/// walks (radius -x - 2d on the opposite ray).
struct KernelExtension {
    enum class Rule { None, Reflect, AffineCap, MembraneFold } rule = Rule::None;
    double a = 0.0;
    double b = 0.0;
    int cap = 0;
    int fold_d = 0;

    nlohmann::json to_json() const {
        switch (rule) {
            case Rule::None: return nullptr;
            case Rule::Reflect: return {{"rule", "reflect"}};
            case Rule::AffineCap: return {{"rule", "affine-cap"}, {"a", a}, {"b", b}, {"cap", cap}};
            case Rule::MembraneFold: return {{"rule", "membrane-fold"}, {"d", fold_d}};
        }
        return nullptr;
    }

    static KernelExtension from_json(const nlohmann::json& j) {
        KernelExtension e;
        if (j.is_null()) return e;
        std::string rule = j.at("rule").get<std::string>();
        if (rule == "reflect") {
            e.rule = Rule::Reflect;
        } else if (rule == "affine-cap") {
            e.rule = Rule::AffineCap;
            e.a = j.at("a").get<double>();
            e.b = j.at("b").get<double>();
            e.cap = j.at("cap").get<int>();
            if (e.cap < 1) throw SpecError("affine-cap extension: cap must be >= 1");
        } else if (rule == "membrane-fold") {
            e.rule = Rule::MembraneFold;
            e.fold_d = j.at("d").get<int>();
        } else {
            throw SpecError("unknown kernel extension rule '" + rule + "'");
        }
        return e;
    }
};

namespace detail {

// Tarjan-free SCC membership: states mutually reachable with `origin` =
// forward-reachable set intersected with backward-reachable set.
inline std::set<int> mutual_component(int origin, const std::map<int, std::vector<int>>& adj) {
    auto bfs = [&](int start, bool reversed) {
        std::map<int, std::vector<int>> use;
        if (reversed) {
            for (const auto& [u, vs] : adj)
                for (int v : vs) use[v].push_back(u);
        } else {
            use = adj;
        }
        std::set<int> seen{start};
        std::deque<int> q{start};
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            auto it = use.find(u);
            if (it == use.end()) continue;
            for (int v : it->second)
                if (seen.insert(v).second) q.push_back(v);
        }
        return seen;
    };
    std::set<int> fwd = bfs(origin, false), bwd = bfs(origin, true), both;
    for (int s : fwd)
        if (bwd.count(s)) both.insert(s);
    return both;
}

inline double power_iteration_radius(const std::vector<std::vector<double>>& m, double tol,
                                     int max_iter) {
    std::size_t n = m.size();
    if (n == 0) return 0.0;
    std::vector<double> v(n, 1.0 / static_cast<double>(n)), w(n);
    double rho = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += m[i][j] * v[j];
            w[i] = s;
            norm += s;
        }
        if (norm == 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) w[i] /= norm;
        if (std::abs(norm - rho) < tol && it > 2) return norm;
        rho = norm;
        v.swap(w);
    }
    return rho;
}

} // namespace detail

inline constexpr int kCommunicationCutoff = 200;  // BFS horizon for A4/B4/C4
inline constexpr int kCommunicationRequired = 100; // states that must intercommunicate

/// Markov chain on Z x {1..m}: free centered walk with ray-dependent jump law
/// while the radius is positive, redirected into N x {1..m} by the reentry
/// kernel whenever the radius is nonpositive.
struct AxisChainSpec {
    int m = 1;
    std::vector<IntDistribution> jumps;               // per label, 1-based label i -> jumps[i-1]
    std::map<RayState, StateDistribution> reentry;    // (x <= 0, i) -> law over N x labels
    KernelExtension extension;
    double declared_C = 0.0;

    const IntDistribution& jump(int label) const { return jumps.at(static_cast<std::size_t>(label - 1)); }

    double v(int label) const { return std::sqrt(jump(label).variance()); }

    int max_down_jump() const {
        int d = 0;
        for (const auto& j : jumps) d = std::max(d, -j.min_value());
        return d;
    }

    int lowest_explicit_x(int label) const {
        int lo = 1;
        for (const auto& [st, law] : reentry)
            if (st.label == label) lo = std::min(lo, st.radius);
        return lo;
    }

    /// Full reentry law from (x <= 0, i), applying the extension rule when the
    /// state is below the explicitly given range. Throws SpecError when no
    /// rule applies.
    StateDistribution reentry_law(int x, int label) const {
        auto it = reentry.find({x, label});
        if (it != reentry.end()) return it->second;
        switch (extension.rule) {
            case KernelExtension::Rule::Reflect: {
                auto lo = reentry.find({lowest_explicit_x(label), label});
                if (lo != reentry.end()) return lo->second;
                break;
            }
            case KernelExtension::Rule::AffineCap: {
                int y = static_cast<int>(std::ceil(extension.a + extension.b * std::abs(x)));
                y = std::min(std::max(y, 1), extension.cap);
                return StateDistribution::point_mass({y, label});
            }
            case KernelExtension::Rule::MembraneFold: {
                int d = extension.fold_d;
                if (x <= -2 * d - 1 && m == 2)
                    return StateDistribution::point_mass({-x - 2 * d, 3 - label});
                break;
            }
            case KernelExtension::Rule::None:
                break;
        }
        throw SpecError("axis chain: no reentry law for state (" + std::to_string(x) + "," +
                        std::to_string(label) + ") and no applicable extension rule");
    }

    ValidationReport validate() const {
        ValidationReport r;
        if (m < 1 || static_cast<int>(jumps.size()) != m) {
            r.add("shape", false, "need m >= 1 jump laws");
            return r;
        }
        for (int i = 1; i <= m; ++i) {
            auto c = jump(i).validate_centered_nondegenerate();
            r.add("A1 centered nondegenerate ray " + std::to_string(i), c);
            r.add("A1 1-arithmetic ray " + std::to_string(i), jump(i).validate_1arithmetic(),
                  jump(i).validate_1arithmetic() ? "" : "support lattice is coarser than Z");
        }
        bool images_ok = true;
        std::string bad;
        for (const auto& [st, law] : reentry) {
            if (st.radius > 0) { images_ok = false; bad = "kernel keyed at positive radius"; break; }
            if (st.label < 1 || st.label > m) { images_ok = false; bad = "kernel keyed at bad label"; break; }
            for (const auto& a : law.atoms())
                if (a.state.radius < 1 || a.state.label < 1 || a.state.label > m) {
                    images_ok = false;
                    bad = "image atom outside N x labels at x=" + std::to_string(st.radius);
                    break;
                }
            if (!images_ok) break;
        }
        r.add("A2 reentry into N x labels", images_ok, bad);
        if (declared_C > 0) {
            bool bound_ok = true;
            std::string detail;
            for (const auto& [st, law] : reentry) {
                double mean_r = 0;
                for (const auto& a : law.atoms()) mean_r += a.prob * a.state.radius;
                if (mean_r > declared_C * (1.0 + std::abs(st.radius)) + 1e-12) {
                    bound_ok = false;
                    detail = "E[R(1)] = " + std::to_string(mean_r) + " from x=" +
                             std::to_string(st.radius) + " exceeds C(1+|x|)";
                    break;
                }
            }
            r.add("A3 linear reentry bound (explicit range)", bound_ok, detail);
        } else {
            r.add("A3 linear reentry bound (explicit range)", false, "declared_C missing or <= 0");
        }
        r.add("A4 positive states communicate", communication_check());
        return r;
    }

    CheckResult communication_check() const {
        // Necessary-condition check on a truncated graph, not a proof.
        int slack = max_down_jump() + 8;
        int hi = kCommunicationCutoff + slack;
        auto id = [&](int x, int label) { return (x + slack + 1) * (m + 1) + label; };
        std::map<int, std::vector<int>> adj;
        for (int label = 1; label <= m; ++label) {
            for (int x = -slack; x <= hi; ++x) {
                std::vector<int>& out = adj[id(x, label)];
                if (x >= 1) {
                    for (const auto& a : jump(label).atoms()) {
                        int y = x + a.value;
                        if (y >= -slack && y <= hi) out.push_back(id(y, label));
                    }
                } else {
                    try {
                        StateDistribution law = reentry_law(x, label);
                        for (const auto& a : law.atoms())
                            if (a.state.radius <= hi) out.push_back(id(a.state.radius, a.state.label));
                    } catch (const SpecError&) {
                        // no reentry law here; state has no outgoing edges
                    }
                }
            }
        }
        std::set<int> comp = detail::mutual_component(id(1, 1), adj);
        for (int label = 1; label <= m; ++label)
            for (int x = 1; x <= kCommunicationRequired; ++x)
                if (!comp.count(id(x, label)))
                    return {false, "state (" + std::to_string(x) + "," + std::to_string(label) +
                                       ") does not communicate with (1,1) within cutoff"};
        return {};
    }

    nlohmann::json to_json() const {
        nlohmann::json jumps_j = nlohmann::json::array();
        for (const auto& j : jumps) jumps_j.push_back(j.to_json());
        nlohmann::json kernel_j = nlohmann::json::object();
        for (const auto& [st, law] : reentry)
            kernel_j[std::to_string(st.radius) + "," + std::to_string(st.label)] = law.to_json();
        return {{"type", "axis"},       {"m", m},
                {"jumps", jumps_j},     {"kernel", kernel_j},
                {"extension", extension.to_json()}, {"declared_C", declared_C}};
    }

    static AxisChainSpec from_json(const nlohmann::json& j) {
        AxisChainSpec s;
        s.m = j.at("m").get<int>();
        for (const auto& d : j.at("jumps")) s.jumps.push_back(IntDistribution::from_json(d));
        for (const auto& [key, law] : j.at("kernel").items()) {
            auto comma = key.find(',');
            if (comma == std::string::npos)
                throw SpecError("axis kernel key must be \"x,i\", got '" + key + "'");
            int x = std::stoi(key.substr(0, comma));
            int label = std::stoi(key.substr(comma + 1));
            s.reentry.emplace(RayState{x, label}, StateDistribution::from_json(law));
        }
        if (j.contains("extension")) s.extension = KernelExtension::from_json(j["extension"]);
        if (j.contains("declared_C")) s.declared_C = j["declared_C"].get<double>();
        return s;
    }
};

/// Integer chain that walks with xi_plus above d, xi_minus below -d, and
/// follows the membrane kernel on {-d..d}.
struct MembraneWalkSpec {
    int d = 0;
    IntDistribution xi_plus;
    IntDistribution xi_minus;
    std::map<int, IntDistribution> membrane_kernel; // x in [-d, d] -> law over Z

    const IntDistribution& step_law(int x) const {
        if (x > d) return xi_plus;
        if (x < -d) return xi_minus;
        auto it = membrane_kernel.find(x);
        if (it == membrane_kernel.end())
            throw SpecError("membrane walk: no kernel at x=" + std::to_string(x));
        return it->second;
    }

    double v_plus() const { return std::sqrt(xi_plus.variance()); }
    double v_minus() const { return std::sqrt(xi_minus.variance()); }

    /// Substochastic matrix of membrane-to-membrane moves, indexed x+d.
    std::vector<std::vector<double>> membrane_matrix() const {
        int n = 2 * d + 1;
        std::vector<std::vector<double>> mat(n, std::vector<double>(n, 0.0));
        for (int x = -d; x <= d; ++x) {
            auto it = membrane_kernel.find(x);
            if (it == membrane_kernel.end()) continue;
            for (const auto& a : it->second.atoms())
                if (std::abs(a.value) <= d) mat[x + d][a.value + d] += a.prob;
        }
        return mat;
    }

    /// Membrane states from which no exit is reachable (the way B2 fails).
    std::vector<int> trapped_states() const {
        std::vector<int> trapped;
        for (int x0 = -d; x0 <= d; ++x0) {
            std::set<int> seen{x0};
            std::deque<int> q{x0};
            bool can_exit = false;
            while (!q.empty() && !can_exit) {
                int x = q.front();
                q.pop_front();
                auto it = membrane_kernel.find(x);
                if (it == membrane_kernel.end()) continue;
                for (const auto& a : it->second.atoms()) {
                    if (std::abs(a.value) > d) { can_exit = true; break; }
                    if (seen.insert(a.value).second) q.push_back(a.value);
                }
            }
            if (!can_exit) trapped.push_back(x0);
        }
        return trapped;
    }

    ValidationReport validate() const {
        ValidationReport r;
        r.add("B1 xi_plus centered nondegenerate", xi_plus.validate_centered_nondegenerate());
        r.add("B1 xi_minus centered nondegenerate", xi_minus.validate_centered_nondegenerate());
        r.add("B1 xi_plus 1-arithmetic", xi_plus.validate_1arithmetic());
        r.add("B1 xi_minus 1-arithmetic", xi_minus.validate_1arithmetic());
        bool kernel_complete = true;
        for (int x = -d; x <= d; ++x)
            if (!membrane_kernel.count(x)) { kernel_complete = false; break; }
        r.add("membrane kernel given on all of {-d..d}", kernel_complete);
        if (kernel_complete) {
            double rho = detail::power_iteration_radius(membrane_matrix(), 1e-10, 10000);
            bool ok = rho < 1.0 - 1e-10;
            std::string detail_msg;
            if (!ok) {
                detail_msg = "spectral radius " + std::to_string(rho) + "; trapped states:";
                for (int x : trapped_states()) detail_msg += " " + std::to_string(x);
            }
            r.add("B2 exits membrane with probability one", ok, detail_msg);
            double max_mean = 0.0;
            for (int x = -d; x <= d; ++x) {
                double mean_abs = 0.0;
                for (const auto& a : membrane_kernel.at(x).atoms())
                    mean_abs += a.prob * std::abs(a.value);
                max_mean = std::max(max_mean, mean_abs);
            }
            r.add("B3' membrane jumps integrable", std::isfinite(max_mean),
                  "max E|X(1)| = " + std::to_string(max_mean));
            r.add("B4 states outside membrane communicate", communication_check());
        }
        return r;
    }

    CheckResult communication_check() const {
        int max_jump = std::max(-xi_plus.min_value(), xi_plus.max_value());
        max_jump = std::max({max_jump, -xi_minus.min_value(), xi_minus.max_value()});
        for (const auto& [x, law] : membrane_kernel)
            max_jump = std::max({max_jump, -law.min_value(), law.max_value()});
        int hi = kCommunicationCutoff + max_jump + 8;
        auto id = [&](int x) { return x + hi + 1; };
        std::map<int, std::vector<int>> adj;
        for (int x = -hi; x <= hi; ++x) {
            if (std::abs(x) <= d && !membrane_kernel.count(x)) continue;
            std::vector<int>& out = adj[id(x)];
            for (const auto& a : step_law(x).atoms()) {
                int y = x + a.value;
                if (std::abs(x) <= d) y = a.value; // membrane kernel is a law over target values
                if (std::abs(y) <= hi) out.push_back(id(y));
            }
        }
        std::set<int> comp = detail::mutual_component(id(d + 1), adj);
        for (int x = -kCommunicationRequired; x <= kCommunicationRequired; ++x) {
            if (std::abs(x) <= d) continue;
            if (!comp.count(id(x)))
                return {false, "state " + std::to_string(x) +
                                   " does not communicate with d+1 within cutoff"};
        }
        return {};
    }

    nlohmann::json to_json() const {
        nlohmann::json kernel_j = nlohmann::json::object();
        for (const auto& [x, law] : membrane_kernel) kernel_j[std::to_string(x)] = law.to_json();
        return {{"type", "membrane"},
                {"d", d},
                {"jumps", nlohmann::json::array({xi_plus.to_json(), xi_minus.to_json()})},
                {"kernel", kernel_j}};
    }

    static MembraneWalkSpec from_json(const nlohmann::json& j) {
        MembraneWalkSpec s;
        s.d = j.at("d").get<int>();
        if (s.d < 0) throw SpecError("membrane: d must be >= 0");
        const auto& jumps = j.at("jumps");
        if (!jumps.is_array() || jumps.size() != 2)
            throw SpecError("membrane: jumps must be [xi_plus, xi_minus]");
        s.xi_plus = IntDistribution::from_json(jumps[0]);
        s.xi_minus = IntDistribution::from_json(jumps[1]);
        for (const auto& [key, law] : j.at("kernel").items())
            s.membrane_kernel.emplace(std::stoi(key), IntDistribution::from_json(law));
        return s;
    }
};

/// Chain on m glued rays N x {1..m} plus the glue point 0. Free walk on each
/// ray; exact hits of 0 land on the glue point, attempted overjumps are
/// redirected by the overshoot kernel, and the origin kernel relaunches the
/// chain from 0.
struct SpiderWalkSpec {
    int m = 1;
    std::vector<IntDistribution> jumps;
    StateDistribution origin_kernel;                    // law over N x labels
    std::map<RayState, StateDistribution> overshoot;    // (z < 0 as radius, label) -> spider states
    KernelExtension extension;
    double declared_C = 0.0;

    const IntDistribution& jump(int label) const { return jumps.at(static_cast<std::size_t>(label - 1)); }
    double v(int label) const { return std::sqrt(jump(label).variance()); }

    int lowest_explicit_z(int label) const {
        int lo = -1;
        for (const auto& [st, law] : overshoot)
            if (st.label == label) lo = std::min(lo, st.radius);
        return lo;
    }

    /// Law of the state after an attempted overjump to z < 0 on ray `label`.
    StateDistribution overshoot_law(int z, int label) const {
        auto it = overshoot.find({z, label});
        if (it != overshoot.end()) return it->second;
        switch (extension.rule) {
            case KernelExtension::Rule::Reflect: {
                auto lo = overshoot.find({lowest_explicit_z(label), label});
                if (lo != overshoot.end()) return lo->second;
                break;
            }
            case KernelExtension::Rule::AffineCap: {
                int y = static_cast<int>(std::ceil(extension.a + extension.b * std::abs(z)));
                y = std::min(std::max(y, 1), extension.cap);
                return StateDistribution::point_mass({y, label});
            }
            default:
                break;
        }
        throw SpecError("spider: no overshoot law for z=" + std::to_string(z) + " on ray " +
                        std::to_string(label) + " and no applicable extension rule");
    }

    ValidationReport validate() const {
        ValidationReport r;
        if (m < 1 || static_cast<int>(jumps.size()) != m) {
            r.add("shape", false, "need m >= 1 jump laws");
            return r;
        }
        for (int i = 1; i <= m; ++i) {
            r.add("C1 centered nondegenerate ray " + std::to_string(i),
                  jump(i).validate_centered_nondegenerate());
            r.add("C1 1-arithmetic ray " + std::to_string(i), jump(i).validate_1arithmetic());
        }
        bool origin_ok = true;
        for (const auto& a : origin_kernel.atoms())
            if (a.state.radius < 1 || a.state.label < 1 || a.state.label > m) origin_ok = false;
        r.add("C2 origin kernel lands in N x labels", origin_ok);
        bool images_ok = true;
        std::string bad;
        for (const auto& [st, law] : overshoot) {
            if (st.radius >= 0) { images_ok = false; bad = "overshoot keyed at z >= 0"; break; }
            for (const auto& a : law.atoms()) {
                bool is_origin = a.state.radius == 0 && a.state.label == 0;
                bool is_ray = a.state.radius >= 1 && a.state.label >= 1 && a.state.label <= m;
                if (!is_origin && !is_ray) {
                    images_ok = false;
                    bad = "overshoot image is neither origin nor a ray state";
                    break;
                }
            }
            if (!images_ok) break;
        }
        r.add("C1/C3 overshoot images valid spider states", images_ok, bad);
        if (declared_C > 0) {
            bool bound_ok = true;
            std::string detail;
            for (const auto& [st, law] : overshoot) {
                double mean_r = 0;
                for (const auto& a : law.atoms()) mean_r += a.prob * a.state.radius;
                if (mean_r > declared_C * (1.0 + std::abs(st.radius)) + 1e-12) {
                    bound_ok = false;
                    detail = "E[R] from z=" + std::to_string(st.radius) + " exceeds C(1+|z|)";
                    break;
                }
            }
            r.add("C3 linear overshoot bound (explicit range)", bound_ok, detail);
        } else {
            r.add("C3 linear overshoot bound (explicit range)", false, "declared_C missing or <= 0");
        }
        r.add("C4 ray states communicate", communication_check());
        return r;
    }

    CheckResult communication_check() const {
        int maxdown = 0;
        for (const auto& j : jumps) maxdown = std::max(maxdown, -j.min_value());
        int hi = kCommunicationCutoff + maxdown + 8;
        auto id = [&](int x, int label) { return x * (m + 1) + label; }; // origin: id(0,0)=0
        std::map<int, std::vector<int>> adj;
        for (const auto& a : origin_kernel.atoms())
            adj[0].push_back(id(a.state.radius, a.state.label));
        for (int label = 1; label <= m; ++label) {
            for (int x = 1; x <= hi; ++x) {
                std::vector<int>& out = adj[id(x, label)];
                for (const auto& a : jump(label).atoms()) {
                    int y = x + a.value;
                    if (y > hi) continue;
                    if (y > 0) {
                        out.push_back(id(y, label));
                    } else if (y == 0) {
                        out.push_back(0);
                    } else {
                        try {
                            StateDistribution law = overshoot_law(y, label);
                            for (const auto& im : law.atoms())
                                out.push_back(id(im.state.radius, im.state.label));
                        } catch (const SpecError&) {
                        }
                    }
                }
            }
        }
        std::set<int> comp = detail::mutual_component(id(1, 1), adj);
        for (int label = 1; label <= m; ++label)
            for (int x = 1; x <= kCommunicationRequired; ++x)
                if (!comp.count(id(x, label)))
                    return {false, "ray state (" + std::to_string(x) + "," + std::to_string(label) +
                                       ") does not communicate with (1,1) within cutoff"};
        return {};
    }

    nlohmann::json to_json() const {
        nlohmann::json jumps_j = nlohmann::json::array();
        for (const auto& j : jumps) jumps_j.push_back(j.to_json());
        nlohmann::json kernel_j = nlohmann::json::object();
        kernel_j["0"] = origin_kernel.to_json();
        for (const auto& [st, law] : overshoot)
            kernel_j[std::to_string(st.label) + "," + std::to_string(st.radius)] = law.to_json();
        return {{"type", "spider"},  {"m", m},
                {"jumps", jumps_j},  {"kernel", kernel_j},
                {"extension", extension.to_json()}, {"declared_C", declared_C}};
    }

    static SpiderWalkSpec from_json(const nlohmann::json& j) {
        SpiderWalkSpec s;
        s.m = j.at("m").get<int>();
        for (const auto& d : j.at("jumps")) s.jumps.push_back(IntDistribution::from_json(d));
        bool have_origin = false;
        for (const auto& [key, law] : j.at("kernel").items()) {
            if (key == "0") {
                s.origin_kernel = StateDistribution::from_json(law);
                have_origin = true;
                continue;
            }
            auto comma = key.find(',');
            if (comma == std::string::npos)
                throw SpecError("spider kernel key must be \"0\" or \"i,z\", got '" + key + "'");
            int label = std::stoi(key.substr(0, comma));
            int z = std::stoi(key.substr(comma + 1));
            if (z >= 0) throw SpecError("spider overshoot key needs z < 0, got '" + key + "'");
            s.overshoot.emplace(RayState{z, label}, StateDistribution::from_json(law));
        }
        if (!have_origin) throw SpecError("spider: kernel must contain the origin law under key \"0\"");
        if (j.contains("extension")) s.extension = KernelExtension::from_json(j["extension"]);
        if (j.contains("declared_C")) s.declared_C = j["declared_C"].get<double>();
        return s;
    }
};

} // namespace pwalk
