#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pwalk/rational.hpp"
#include "pwalk/rng.hpp"

namespace pwalk {

struct CheckResult {
    bool pass = true;
    std::string detail;
};

/// Finite-support law on the integers. Probabilities given as rationals keep
/// exact arithmetic end to end; the distribution stays in exact mode only if
/// every atom was rational.
class IntDistribution {
public:
    struct Atom {
        int value;
        double prob;
        std::optional<Rational> exact;
    };

    IntDistribution() = default;

    static IntDistribution from_doubles(std::vector<std::pair<int, double>> atoms) {
        IntDistribution d;
        for (auto& [v, p] : atoms) d.atoms_.push_back({v, p, std::nullopt});
        d.finalize();
        return d;
    }

    static IntDistribution from_rationals(std::vector<std::pair<int, Rational>> atoms) {
        IntDistribution d;
        for (auto& [v, p] : atoms) d.atoms_.push_back({v, p.to_double(), p});
        d.finalize();
        return d;
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    bool exact_mode() const { return exact_; }

    /// Cumulative 32-bit thresholds for the branch-light sampling path.
    const std::vector<std::uint32_t>& thresholds() const { return thresholds_; }

    double prob_of(int value) const {
        for (const auto& a : atoms_)
            if (a.value == value) return a.prob;
        return 0.0;
    }

    int min_value() const { return atoms_.front().value; }
    int max_value() const { return atoms_.back().value; }

    std::pair<double, double> moments() const {
        if (exact_) {
            auto [m, v] = exact_moments();
            return {m.to_double(), v.to_double()};
        }
        double mean = 0, sq = 0;
        for (const auto& a : atoms_) {
            mean += a.prob * a.value;
            sq += a.prob * a.value * a.value;
        }
        return {mean, sq - mean * mean};
    }

    std::pair<Rational, Rational> exact_moments() const {
        if (!exact_) throw std::logic_error("IntDistribution: exact moments on double-mode law");
        Rational mean(0), sq(0);
        for (const auto& a : atoms_) {
            mean += *a.exact * Rational(a.value);
            sq += *a.exact * Rational(a.value) * Rational(a.value);
        }
        return {mean, sq - mean * mean};
    }

    double mean() const { return moments().first; }
    double variance() const { return moments().second; }

    /// Zero mean and positive variance (exact in rational mode, 1e-12 otherwise).
    CheckResult validate_centered_nondegenerate() const {
        if (exact_) {
            auto [m, v] = exact_moments();
            if (m != Rational(0))
                return {false, "mean is " + m.str() + ", expected 0"};
            if (!(v > Rational(0)))
                return {false, "variance is " + v.str() + ", expected > 0"};
            return {};
        }
        auto [m, v] = moments();
        if (std::abs(m) > 1e-12)
            return {false, "mean is " + std::to_string(m) + ", expected 0"};
        if (!(v > 0))
            return {false, "variance is " + std::to_string(v) + ", expected > 0"};
        return {};
    }

    /// True iff the support generates the full lattice Z (gcd of |values| = 1).
    bool validate_1arithmetic() const {
        int g = 0;
        for (const auto& a : atoms_) g = std::gcd(g, std::abs(a.value));
        return g == 1;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& a : atoms_) {
            if (a.exact)
                arr.push_back({a.value, a.exact->str()});
            else
                arr.push_back({a.value, a.prob});
        }
        return nlohmann::json{{"atoms", arr}};
    }

    static IntDistribution from_json(const nlohmann::json& j) {
        if (!j.contains("atoms") || !j["atoms"].is_array())
            throw std::invalid_argument("distribution JSON needs an \"atoms\" array");
        IntDistribution d;
        for (const auto& a : j["atoms"]) {
            if (!a.is_array() || a.size() != 2)
                throw std::invalid_argument("distribution atom must be [value, prob]");
            int v = a[0].get<int>();
            if (a[1].is_string()) {
                Rational r = Rational::parse(a[1].get<std::string>());
                d.atoms_.push_back({v, r.to_double(), r});
            } else {
                d.atoms_.push_back({v, a[1].get<double>(), std::nullopt});
            }
        }
        d.finalize();
        return d;
    }

private:
    void finalize() {
        if (atoms_.empty()) throw std::invalid_argument("IntDistribution: empty support");
        std::sort(atoms_.begin(), atoms_.end(),
                  [](const Atom& a, const Atom& b) { return a.value < b.value; });
        for (std::size_t i = 1; i < atoms_.size(); ++i)
            if (atoms_[i].value == atoms_[i - 1].value)
                throw std::invalid_argument("IntDistribution: duplicate atom value " +
                                            std::to_string(atoms_[i].value));
        exact_ = std::all_of(atoms_.begin(), atoms_.end(),
                             [](const Atom& a) { return a.exact.has_value(); });
        if (exact_) {
            Rational sum(0);
            for (const auto& a : atoms_) {
                if (!(*a.exact > Rational(0)))
                    throw std::invalid_argument("IntDistribution: nonpositive probability");
                sum += *a.exact;
            }
            if (sum != Rational(1))
                throw std::invalid_argument("IntDistribution: probabilities sum to " + sum.str());
        } else {
            double sum = 0;
            for (const auto& a : atoms_) {
                if (!(a.prob > 0))
                    throw std::invalid_argument("IntDistribution: nonpositive probability");
                sum += a.prob;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("IntDistribution: probabilities sum to " +
                                            std::to_string(sum));
        }
        double acc = 0;
        thresholds_.clear();
        for (std::size_t i = 0; i + 1 < atoms_.size(); ++i) {
            acc += atoms_[i].prob;
            thresholds_.push_back(
                static_cast<std::uint32_t>(std::min(acc * 4294967296.0, 4294967295.0)));
        }
    }

    std::vector<Atom> atoms_;
    std::vector<std::uint32_t> thresholds_;
    bool exact_ = false;
};

/// One draw; advances the stream. Inverse-CDF over the (small) sorted
/// support, on 32-bit thresholds (probabilities quantized to 2^-32).
inline int sample(const IntDistribution& d, RngStream& rng) {
    std::uint32_t u = rng.next_u32();
    const auto& thresholds = d.thresholds();
    std::size_t i = 0;
    while (i < thresholds.size() && u >= thresholds[i]) ++i;
    return d.atoms()[i].value;
}

/// State on a ray graph: radius plus ray label. radius == 0 with label == 0
/// encodes the glue point for spider chains.
struct RayState {
    int radius;
    int label;
    friend bool operator==(const RayState&, const RayState&) = default;
    friend auto operator<=>(const RayState&, const RayState&) = default;
};

/// Finite-support law over RayState, used by the reentry/origin/overshoot
/// kernels. Probabilities follow the same rational-or-double convention.
class StateDistribution {
public:
    struct Atom {
        RayState state;
        double prob;
        std::optional<Rational> exact;
    };

    StateDistribution() = default;

    static StateDistribution from_doubles(std::vector<std::pair<RayState, double>> atoms) {
        StateDistribution d;
        for (auto& [s, p] : atoms) d.atoms_.push_back({s, p, std::nullopt});
        d.finalize();
        return d;
    }

    static StateDistribution from_rationals(std::vector<std::pair<RayState, Rational>> atoms) {
        StateDistribution d;
        for (auto& [s, p] : atoms) d.atoms_.push_back({s, p.to_double(), p});
        d.finalize();
        return d;
    }

    static StateDistribution point_mass(RayState s) {
        return from_rationals({{s, Rational(1)}});
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    bool empty() const { return atoms_.empty(); }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& a : atoms_) {
            if (a.exact)
                arr.push_back({a.state.radius, a.state.label, a.exact->str()});
            else
                arr.push_back({a.state.radius, a.state.label, a.prob});
        }
        return nlohmann::json{{"atoms", arr}};
    }

    static StateDistribution from_json(const nlohmann::json& j) {
        if (!j.contains("atoms") || !j["atoms"].is_array())
            throw std::invalid_argument("kernel JSON needs an \"atoms\" array");
        StateDistribution d;
        for (const auto& a : j["atoms"]) {
            if (!a.is_array() || a.size() != 3)
                throw std::invalid_argument("kernel atom must be [radius, label, prob]");
            RayState s{a[0].get<int>(), a[1].get<int>()};
            if (a[2].is_string()) {
                Rational r = Rational::parse(a[2].get<std::string>());
                d.atoms_.push_back({s, r.to_double(), r});
            } else {
                d.atoms_.push_back({s, a[2].get<double>(), std::nullopt});
            }
        }
        d.finalize();
        return d;
    }

private:
    void finalize() {
        if (atoms_.empty()) throw std::invalid_argument("StateDistribution: empty support");
        std::sort(atoms_.begin(), atoms_.end(),
                  [](const Atom& a, const Atom& b) { return a.state < b.state; });
        for (std::size_t i = 1; i < atoms_.size(); ++i)
            if (atoms_[i].state == atoms_[i - 1].state)
                throw std::invalid_argument("StateDistribution: duplicate atom");
        double sum = 0;
        for (const auto& a : atoms_) {
            if (!(a.prob > 0)) throw std::invalid_argument("StateDistribution: nonpositive probability");
            sum += a.prob;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("StateDistribution: probabilities sum to " +
                                        std::to_string(sum));
    }

    std::vector<Atom> atoms_;
};

inline RayState sample(const StateDistribution& d, RngStream& rng) {
    double u = rng.uniform01();
    double acc = 0;
    const auto& atoms = d.atoms();
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
        acc += atoms[i].prob;
        if (u < acc) return atoms[i].state;
    }
    return atoms.back().state;
}

} // namespace pwalk
