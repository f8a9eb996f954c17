#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pwalk/int_distribution.hpp"

namespace pwalk {

enum class ChainKind { Axis, Membrane, Spider };

/// A simulated trajectory with its exit/entrance times annotated.
///
/// radius[k] is the radius (axis/spider) or the signed position (membrane,
/// label stays 0). Storage is 32-bit values + 8-bit labels so million-step
/// ensembles stay compact.
///
/// Time lists by kind:
///  * axis:     sigma[j] is the j-th time the radius is nonpositive and
///              tau[j] = sigma[j] + 1 whenever that step was simulated;
///  * membrane: tau additionally carries the leading time-0 entrance, and a
///              jump straight over the membrane yields tau equal to sigma;
///  * spider:   sigma[j] is the j-th time the next jump would be nonpositive,
///              overshoot[j] keeps the attempted landing point, tau carries
///              the leading first-positive time like the membrane case.
struct CyclePath {
    ChainKind kind = ChainKind::Axis;
    std::vector<std::int32_t> radius;
    std::vector<std::uint8_t> label;
    std::vector<std::uint32_t> sigma;
    std::vector<std::uint32_t> tau;
    std::vector<std::int32_t> overshoot;

    std::size_t steps() const { return radius.empty() ? 0 : radius.size() - 1; }

    RayState state(std::size_t k) const { return {radius[k], label[k]}; }
};

/// States observed at the exit and entrance times (in stored order).
inline std::pair<std::vector<RayState>, std::vector<RayState>>
embedded_chains_from_path(const CyclePath& path) {
    std::vector<RayState> exits, entrances;
    exits.reserve(path.sigma.size());
    entrances.reserve(path.tau.size());
    for (auto k : path.sigma) exits.push_back(path.state(k));
    for (auto k : path.tau) entrances.push_back(path.state(k));
    return {std::move(exits), std::move(entrances)};
}

} // namespace pwalk
