#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pwalk/chain_spec.hpp"
#include "pwalk/cycle_path.hpp"

namespace pwalk {

/// Law of -xi (used when the minus side of a membrane walk is folded onto a
/// positive ray).
inline IntDistribution flip_sign(const IntDistribution& xi) {
    if (xi.exact_mode()) {
        std::vector<std::pair<int, Rational>> atoms;
        for (const auto& a : xi.atoms()) atoms.emplace_back(-a.value, *a.exact);
        return IntDistribution::from_rationals(std::move(atoms));
    }
    std::vector<std::pair<int, double>> atoms;
    for (const auto& a : xi.atoms()) atoms.emplace_back(-a.value, a.prob);
    return IntDistribution::from_doubles(std::move(atoms));
}

/// Exact law of the position at the first time the walk leaves {-d..d},
/// started from membrane state x. Solves the absorption system
/// h = K_mm h + K_out over the 2d+1 transient membrane states.
inline IntDistribution membrane_exit_distribution(const MembraneWalkSpec& spec, int x) {
    if (std::abs(x) > spec.d)
        throw SpecError("membrane_exit_distribution: start must satisfy |x| <= d");
    const int n = 2 * spec.d + 1;

    std::set<int> exit_values;
    for (int w = -spec.d; w <= spec.d; ++w) {
        auto it = spec.membrane_kernel.find(w);
        if (it == spec.membrane_kernel.end())
            throw SpecError("membrane_exit_distribution: kernel missing at x=" + std::to_string(w));
        for (const auto& a : it->second.atoms())
            if (std::abs(a.value) > spec.d) exit_values.insert(a.value);
    }
    if (exit_values.empty()) {
        std::string msg = "membrane_exit_distribution: no exit reachable; trapped states:";
        for (int t : spec.trapped_states()) msg += " " + std::to_string(t);
        throw SpecError(msg);
    }

    auto mm = spec.membrane_matrix();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) -= mm[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];

    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) {
        std::string msg = "membrane_exit_distribution: absorption system singular; trapped states:";
        for (int t : spec.trapped_states()) msg += " " + std::to_string(t);
        throw SpecError(msg);
    }

    std::vector<std::pair<int, double>> atoms;
    double total = 0.0;
    for (int y : exit_values) {
        Eigen::VectorXd b(n);
        for (int w = -spec.d; w <= spec.d; ++w) b(w + spec.d) = spec.membrane_kernel.at(w).prob_of(y);
        Eigen::VectorXd h = lu.solve(b);
        double p = h(x + spec.d);
        if (p > 1e-15) atoms.emplace_back(y, p);
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-10) {
        std::string msg = "membrane_exit_distribution: exit law from x=" + std::to_string(x) +
                          " sums to " + std::to_string(total) + "; trapped states:";
        for (int t : spec.trapped_states()) msg += " " + std::to_string(t);
        throw SpecError(msg);
    }
    for (auto& [y, p] : atoms) p /= total;
    return IntDistribution::from_doubles(std::move(atoms));
}

/// Rebuilds the membrane walk as a two-ray axis chain on Z x {plus, minus}
/// (label 1 = plus side, label 2 = minus side). Positive radii map to
/// positions via x = l (R + d); the reentry kernel on {-2d..0} comes from the
/// membrane exit law, and radii at or below -2d-1 reflect onto the opposite
/// ray through the membrane-fold extension.
inline AxisChainSpec unfold_membrane(const MembraneWalkSpec& spec) {
    AxisChainSpec axis;
    axis.m = 2;
    axis.jumps = {spec.xi_plus, flip_sign(spec.xi_minus)};
    axis.extension.rule = KernelExtension::Rule::MembraneFold;
    axis.extension.fold_d = spec.d;

    double worst_ratio = 1.0;
    for (int x = -2 * spec.d; x <= 0; ++x) {
        IntDistribution exit_plus = membrane_exit_distribution(spec, x + spec.d);
        IntDistribution exit_minus = membrane_exit_distribution(spec, -x - spec.d);
        auto to_state_law = [&](const IntDistribution& exit_law) {
            std::vector<std::pair<RayState, double>> atoms;
            for (const auto& a : exit_law.atoms()) {
                if (a.value > spec.d)
                    atoms.push_back({{a.value - spec.d, 1}, a.prob});
                else
                    atoms.push_back({{-a.value - spec.d, 2}, a.prob});
            }
            return StateDistribution::from_doubles(std::move(atoms));
        };
        StateDistribution from_plus = to_state_law(exit_plus);
        StateDistribution from_minus = to_state_law(exit_minus);
        for (const auto& a : from_plus.atoms())
            worst_ratio = std::max(worst_ratio, a.prob * a.state.radius / (1.0 + std::abs(x)));
        axis.reentry.emplace(RayState{x, 1}, std::move(from_plus));
        axis.reentry.emplace(RayState{x, 2}, std::move(from_minus));
    }
    // a valid declared bound: explicit kernels were just measured, and the
    // fold rule satisfies |x| - 2d <= 1 + |x|
    for (const auto& [st, law] : axis.reentry) {
        double mean_r = 0;
        for (const auto& a : law.atoms()) mean_r += a.prob * a.state.radius;
        worst_ratio = std::max(worst_ratio, mean_r / (1.0 + std::abs(st.radius)));
    }
    axis.declared_C = std::max(1.0, worst_ratio) + 1e-9;
    return axis;
}

/// Annotates a membrane trajectory with its exit/entrance times: exits are
/// boundary crossings, entrances the first returns to {|x| > d}, with the
/// time-0 entrance kept and jump-overs yielding tau == sigma.
inline CyclePath annotate_membrane_values(std::vector<std::int32_t> values, int d) {
    CyclePath path;
    path.kind = ChainKind::Membrane;
    path.radius = std::move(values);
    path.label.assign(path.radius.size(), 0);
    enum { SeekingFirstExit, Outside, Inside } phase = SeekingFirstExit;
    if (!path.radius.empty() && std::abs(path.radius[0]) > d) {
        path.tau.push_back(0);
        phase = Outside;
    }
    for (std::size_t k = 1; k < path.radius.size(); ++k) {
        int prev = path.radius[k - 1], x = path.radius[k];
        switch (phase) {
            case SeekingFirstExit:
                if (std::abs(x) > d) {
                    path.tau.push_back(static_cast<std::uint32_t>(k));
                    phase = Outside;
                }
                break;
            case Outside:
                if ((prev > d && x <= d) || (prev < -d && x >= -d)) {
                    path.sigma.push_back(static_cast<std::uint32_t>(k));
                    if (std::abs(x) > d)
                        path.tau.push_back(static_cast<std::uint32_t>(k));
                    else
                        phase = Inside;
                }
                break;
            case Inside:
                if (std::abs(x) > d) {
                    path.tau.push_back(static_cast<std::uint32_t>(k));
                    phase = Outside;
                }
                break;
        }
    }
    return path;
}

/// Removes the steps a membrane path spends moving within the membrane: the
/// returned time change counts every step except membrane-to-membrane moves,
/// and the compressed path is path(lambda^{-1}(k)).
inline std::pair<CyclePath, std::vector<std::uint32_t>>
remove_membrane_time(const CyclePath& path, int d) {
    if (path.kind != ChainKind::Membrane)
        throw SpecError("remove_membrane_time: expects a membrane path");
    std::vector<std::uint32_t> lambda(path.radius.size(), 0);
    std::vector<std::int32_t> compressed;
    compressed.reserve(path.radius.size());
    if (!path.radius.empty()) compressed.push_back(path.radius[0]);
    std::uint32_t count = 0;
    for (std::size_t k = 1; k < path.radius.size(); ++k) {
        bool skip = std::abs(path.radius[k - 1]) <= d && std::abs(path.radius[k]) <= d;
        if (!skip) {
            ++count;
            compressed.push_back(path.radius[k]);
        }
        lambda[k] = count;
    }
    return {annotate_membrane_values(std::move(compressed), d), std::move(lambda)};
}

/// Maps an unfolded two-ray path back to membrane positions x = l (R + d),
/// dropping the duplicated step a jump-over spends on the reflection.
inline std::vector<std::int32_t> fold_axis_path_to_membrane(const CyclePath& path, int d) {
    if (path.kind != ChainKind::Axis)
        throw SpecError("fold_axis_path_to_membrane: expects an axis path");
    std::vector<std::int32_t> values;
    values.reserve(path.radius.size());
    for (std::size_t k = 0; k < path.radius.size(); ++k) {
        if (k >= 1 && path.radius[k] >= 1 && path.radius[k - 1] <= -2 * d - 1)
            continue; // reflection step repeats the same membrane position
        int sign = path.label[k] == 2 ? -1 : 1;
        values.push_back(sign * (path.radius[k] + d));
    }
    return values;
}

} // namespace pwalk
