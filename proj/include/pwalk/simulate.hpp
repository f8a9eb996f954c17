#pragma once

#include <cstdint>
#include <stdexcept>

#include "pwalk/chain_spec.hpp"
#include "pwalk/cycle_path.hpp"
#include "pwalk/membrane.hpp"
#include "pwalk/rng.hpp"

namespace pwalk {

/// Draws jumps and kernel transitions from an owned stream. Simulators are
/// templated on this interface so tests can substitute scripted draws.
struct StreamSampler {
    RngStream& rng;
    int draw(const IntDistribution& d) { return sample(d, rng); }
    RayState draw(const StateDistribution& d) { return sample(d, rng); }
};

namespace detail {

// Picks the next state from a nonpositive radius, avoiding a law copy for
// explicitly-listed kernel entries.
template <class Sampler>
RayState axis_reentry_step(const AxisChainSpec& spec, int x, int label, Sampler& sampler) {
    auto it = spec.reentry.find({x, label});
    if (it != spec.reentry.end()) return sampler.draw(it->second);
    StateDistribution law = spec.reentry_law(x, label);
    if (law.atoms().size() == 1) return law.atoms().front().state;
    return sampler.draw(law);
}

} // namespace detail

/// Runs the axis chain for exactly `steps` transitions from `init`.
/// While the radius is positive the label freezes and the radius follows the
/// ray's jump law; from nonpositive radii the reentry kernel applies.
template <class Sampler>
CyclePath simulate_axis(const AxisChainSpec& spec, std::size_t steps, RayState init,
                        Sampler& sampler) {
    if (init.label < 1 || init.label > spec.m)
        throw SpecError("simulate_axis: init label out of range");
    CyclePath path;
    path.kind = ChainKind::Axis;
    path.radius.reserve(steps + 1);
    path.label.reserve(steps + 1);
    int r = init.radius, l = init.label;
    path.radius.push_back(r);
    path.label.push_back(static_cast<std::uint8_t>(l));
    if (r <= 0) path.sigma.push_back(0);
    for (std::size_t k = 1; k <= steps; ++k) {
        if (r > 0) {
            r += sampler.draw(spec.jump(l));
        } else {
            RayState next = detail::axis_reentry_step(spec, r, l, sampler);
            r = next.radius;
            l = next.label;
            path.tau.push_back(static_cast<std::uint32_t>(k));
        }
        path.radius.push_back(r);
        path.label.push_back(static_cast<std::uint8_t>(l));
        if (r <= 0) path.sigma.push_back(static_cast<std::uint32_t>(k));
    }
    return path;
}

inline CyclePath simulate_axis(const AxisChainSpec& spec, std::size_t steps, RayState init,
                               RngStream& rng) {
    StreamSampler s{rng};
    return simulate_axis(spec, steps, init, s);
}

/// Runs the membrane walk for `steps` transitions. Exit times are boundary
/// crossings (including jumps straight over the membrane); entrance times are
/// the first return to {|x| > d} and include the leading time-0 entrance.
template <class Sampler>
CyclePath simulate_membrane(const MembraneWalkSpec& spec, std::size_t steps, int init,
                            Sampler& sampler) {
    std::vector<std::int32_t> values;
    values.reserve(steps + 1);
    int x = init;
    values.push_back(x);
    for (std::size_t k = 1; k <= steps; ++k) {
        if (std::abs(x) > spec.d)
            x += sampler.draw(spec.step_law(x));
        else
            x = sampler.draw(spec.step_law(x)); // membrane kernel gives the landing point
        values.push_back(x);
    }
    return annotate_membrane_values(std::move(values), spec.d);
}

inline CyclePath simulate_membrane(const MembraneWalkSpec& spec, std::size_t steps, int init,
                                   RngStream& rng) {
    StreamSampler s{rng};
    return simulate_membrane(spec, steps, init, s);
}

/// Runs the spider chain for `steps` transitions. sigma[j] marks the step
/// whose next jump lands at or below the glue point; the attempted landing
/// point is kept in overshoot[j] for the weight formulas.
template <class Sampler>
CyclePath simulate_spider(const SpiderWalkSpec& spec, std::size_t steps, RayState init,
                          Sampler& sampler) {
    bool at_origin = init.radius == 0;
    if (!at_origin && (init.label < 1 || init.label > spec.m || init.radius < 0))
        throw SpecError("simulate_spider: init must be the origin or a ray state");
    CyclePath path;
    path.kind = ChainKind::Spider;
    path.radius.reserve(steps + 1);
    path.label.reserve(steps + 1);
    RayState s = at_origin ? RayState{0, 0} : init;
    path.radius.push_back(s.radius);
    path.label.push_back(static_cast<std::uint8_t>(s.label));
    bool seen_positive = s.radius > 0;
    if (seen_positive) path.tau.push_back(0);
    for (std::size_t k = 1; k <= steps; ++k) {
        if (s.radius == 0) {
            s = sampler.draw(spec.origin_kernel);
        } else {
            int y = s.radius + sampler.draw(spec.jump(s.label));
            if (y > 0) {
                s.radius = y;
            } else {
                path.sigma.push_back(static_cast<std::uint32_t>(k - 1));
                path.overshoot.push_back(y);
                seen_positive = false;
                if (y == 0) {
                    s = {0, 0};
                } else {
                    StateDistribution law = spec.overshoot_law(y, s.label);
                    s = law.atoms().size() == 1 ? law.atoms().front().state : sampler.draw(law);
                }
            }
        }
        path.radius.push_back(s.radius);
        path.label.push_back(static_cast<std::uint8_t>(s.label));
        if (!seen_positive && s.radius > 0) {
            path.tau.push_back(static_cast<std::uint32_t>(k));
            seen_positive = true;
        }
    }
    return path;
}

inline CyclePath simulate_spider(const SpiderWalkSpec& spec, std::size_t steps, RayState init,
                                 RngStream& rng) {
    StreamSampler s{rng};
    return simulate_spider(spec, steps, init, s);
}

} // namespace pwalk
