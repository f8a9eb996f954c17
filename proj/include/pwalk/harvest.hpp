#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pwalk/chain_spec.hpp"
#include "pwalk/parallel.hpp"
#include "pwalk/rng.hpp"
#include "pwalk/sbm.hpp"
#include "pwalk/simulate.hpp"
#include "pwalk/stationary.hpp"
#include "pwalk/stats.hpp"

namespace pwalk {

// stream-index namespaces so harvesting, ensembles and ad-hoc draws never collide
inline constexpr std::uint64_t kHarvestStreamBase = std::uint64_t(1) << 32;
inline constexpr std::uint64_t kEnsembleStreamBase = std::uint64_t(2) << 32;

struct HarvestOptions {
    long cycles = 100000;
    long burn_in = 1000; // per batch replica
    int batches = 20;
    std::uint64_t seed = 1;
    // Radius clamp during harvesting: jumps that would exceed it land on it,
    // exactly like the first-passage solve of exact mode, so both routes
    // sample the same capped model. Without a clamp, excursion lengths of a
    // centered walk have infinite mean and cycle counts in the 1e5 range
    // routinely hit multi-1e10-step excursions.
    int cap = 512;
    long long step_budget = 2'000'000'000LL; // per replica, safety valve
    int threads = 1;
};

namespace detail {

struct BudgetMeter {
    long long remaining;
    long done_cycles = 0;
    long need_cycles = 0;
    long burn_in = 0;
    int replica = 0;

    void spend(long long steps) {
        remaining -= steps;
        if (remaining < 0) {
            std::string note = done_cycles < 10 * burn_in
                                   ? " (fewer than 10x burn-in cycles completed)"
                                   : "";
            throw BudgetError("cycle harvest: replica " + std::to_string(replica) +
                              " exhausted its step budget after " + std::to_string(done_cycles) +
                              " of " + std::to_string(need_cycles) + " cycles" + note);
        }
    }
};

} // namespace detail

/// Per-batch cycle sums of an axis chain: one cycle is (entrance e_i, the
/// following exit s_i, the entrance e_{i+1} one step after it). All formula
/// forms downstream are averages of these.
struct AxisBatch {
    long cycles = 0;
    std::map<RayState, long> entrance_counts, exit_counts;
    std::vector<double> ent_k, exit_k, diff_k, step_k; // per label, /v_k, indicator-gated
    double ent = 0, exit_ = 0, diff = 0, step = 0;     // label-summed forms
    double ent_abs = 0, exit_abs = 0;                  // |R| diagnostics (unscaled)
};

inline std::vector<AxisBatch> harvest_axis(const AxisChainSpec& spec, const HarvestOptions& opt) {
    std::vector<AxisBatch> batches(static_cast<std::size_t>(opt.batches));
    std::vector<double> v;
    for (int l = 1; l <= spec.m; ++l) v.push_back(spec.v(l));
    const long per_batch = (opt.cycles + opt.batches - 1) / opt.batches;

    parallel_for(static_cast<std::size_t>(opt.batches), opt.threads, [&](std::size_t b) {
        RngStream rng(opt.seed, kHarvestStreamBase + b);
        StreamSampler sampler{rng};
        AxisBatch& out = batches[b];
        out.ent_k.assign(static_cast<std::size_t>(spec.m), 0.0);
        out.exit_k.assign(static_cast<std::size_t>(spec.m), 0.0);
        out.diff_k.assign(static_cast<std::size_t>(spec.m), 0.0);
        out.step_k.assign(static_cast<std::size_t>(spec.m), 0.0);
        detail::BudgetMeter meter{opt.step_budget, 0, per_batch, opt.burn_in,
                                  static_cast<int>(b)};

        auto next_cycle = [&](RayState e) {
            int r = std::min(e.radius, opt.cap);
            long long steps = 0;
            for (;;) {
                int y = r + sampler.draw(spec.jump(e.label));
                if (++steps >= (1 << 16)) { meter.spend(steps); steps = 0; }
                if (y <= 0) { r = y; break; }
                r = std::min(y, opt.cap);
            }
            meter.spend(steps + 1);
            RayState s{r, e.label};
            RayState e_next = detail::axis_reentry_step(spec, r, e.label, sampler);
            return std::pair<RayState, RayState>{s, e_next};
        };

        // reach the first entrance from a fixed interior start
        RayState e{1, 1};
        e = next_cycle(e).second;
        for (long i = 0; i < opt.burn_in; ++i) e = next_cycle(e).second;

        for (long i = 0; i < per_batch; ++i) {
            auto [s, e_next] = next_cycle(e);
            ++out.cycles;
            meter.done_cycles = out.cycles;
            ++out.entrance_counts[e];
            ++out.exit_counts[s];
            int k = e.label - 1, k_next = e_next.label - 1, k_exit = s.label - 1;
            out.ent_k[static_cast<std::size_t>(k)] += e.radius / v[static_cast<std::size_t>(k)];
            out.exit_k[static_cast<std::size_t>(k_exit)] += s.radius / v[static_cast<std::size_t>(k_exit)];
            out.diff_k[static_cast<std::size_t>(k)] +=
                (e.radius - s.radius) / v[static_cast<std::size_t>(k)];
            out.step_k[static_cast<std::size_t>(k_next)] +=
                e_next.radius / v[static_cast<std::size_t>(k_next)];
            out.step_k[static_cast<std::size_t>(k_exit)] -=
                s.radius / v[static_cast<std::size_t>(k_exit)];
            out.ent += e.radius / v[static_cast<std::size_t>(k)];
            out.exit_ += s.radius / v[static_cast<std::size_t>(k_exit)];
            out.diff += (e.radius - s.radius) / v[static_cast<std::size_t>(k)];
            out.step += e_next.radius / v[static_cast<std::size_t>(k_next)] -
                        s.radius / v[static_cast<std::size_t>(k_exit)];
            out.ent_abs += std::abs(e.radius);
            out.exit_abs += std::abs(s.radius);
            e = e_next;
        }
    });
    return batches;
}

/// Per-batch cycle sums of a membrane walk: one cycle is (entrance x_i with
/// |x| > d, the next boundary-crossing value w_i).
struct MembraneBatch {
    long cycles = 0;
    std::map<int, long> entrance_counts, exit_counts;
    double num_phi = 0, den_phi = 0; // phi(x - w) and |phi(x - w)|
    double num_sgn = 0, den_sgn = 0; // (x - w)/v_sgn(x) and |x - w|/v_sgn(x)
    double ent_abs = 0, exit_abs = 0;
};

inline std::vector<MembraneBatch> harvest_membrane(const MembraneWalkSpec& spec,
                                                   const HarvestOptions& opt) {
    std::vector<MembraneBatch> batches(static_cast<std::size_t>(opt.batches));
    const double vp = spec.v_plus(), vm = spec.v_minus();
    const long per_batch = (opt.cycles + opt.batches - 1) / opt.batches;

    parallel_for(static_cast<std::size_t>(opt.batches), opt.threads, [&](std::size_t b) {
        RngStream rng(opt.seed, kHarvestStreamBase + b);
        StreamSampler sampler{rng};
        MembraneBatch& out = batches[b];
        detail::BudgetMeter meter{opt.step_budget, 0, per_batch, opt.burn_in,
                                  static_cast<int>(b)};

        auto membrane_until_out = [&](int x) {
            long long steps = 0;
            while (std::abs(x) <= spec.d) {
                x = sampler.draw(spec.step_law(x));
                if (++steps >= (1 << 12)) { meter.spend(steps); steps = 0; }
            }
            meter.spend(steps);
            return x;
        };
        auto free_until_crossing = [&](int x) {
            long long steps = 0;
            const int hi = spec.d + opt.cap, lo = -spec.d - opt.cap;
            if (x > spec.d) {
                x = std::min(x, hi);
                for (;;) {
                    int y = x + sampler.draw(spec.xi_plus);
                    if (++steps >= (1 << 16)) { meter.spend(steps); steps = 0; }
                    if (y <= spec.d) { x = y; break; }
                    x = std::min(y, hi);
                }
            } else {
                x = std::max(x, lo);
                for (;;) {
                    int y = x + sampler.draw(spec.xi_minus);
                    if (++steps >= (1 << 16)) { meter.spend(steps); steps = 0; }
                    if (y >= -spec.d) { x = y; break; }
                    x = std::max(y, lo);
                }
            }
            meter.spend(steps);
            return x;
        };

        int e = membrane_until_out(spec.d); // first entrance from a membrane start
        for (long i = 0; i < opt.burn_in; ++i) {
            int w = free_until_crossing(e);
            e = std::abs(w) > spec.d ? w : membrane_until_out(w);
        }
        for (long i = 0; i < per_batch; ++i) {
            int w = free_until_crossing(e);
            ++out.cycles;
            meter.done_cycles = out.cycles;
            ++out.entrance_counts[e];
            ++out.exit_counts[w];
            double u = static_cast<double>(e - w);
            out.num_phi += phi_map(u, vp, vm);
            out.den_phi += std::abs(phi_map(u, vp, vm));
            double v_sgn = e > 0 ? vp : vm; // entrance value never 0 (|e| > d >= 0)
            out.num_sgn += u / v_sgn;
            out.den_sgn += std::abs(u) / v_sgn;
            out.ent_abs += std::abs(e);
            out.exit_abs += std::abs(w);
            e = std::abs(w) > spec.d ? w : membrane_until_out(w);
        }
    });
    return batches;
}

/// Per-batch cycle sums of a spider chain: one cycle is (entrance e_i, the
/// attempted landing z_i <= 0 of its critical jump, and the pre-jump state).
struct SpiderBatch {
    long cycles = 0;
    std::map<RayState, long> entrance_counts, exit_counts;
    std::vector<double> w_k; // per label: (R(e) - z)/v_k, indicator-gated
    double w = 0;            // label-summed
    double ent_abs = 0;
};

inline std::vector<SpiderBatch> harvest_spider(const SpiderWalkSpec& spec,
                                               const HarvestOptions& opt) {
    std::vector<SpiderBatch> batches(static_cast<std::size_t>(opt.batches));
    std::vector<double> v;
    for (int l = 1; l <= spec.m; ++l) v.push_back(spec.v(l));
    const long per_batch = (opt.cycles + opt.batches - 1) / opt.batches;

    parallel_for(static_cast<std::size_t>(opt.batches), opt.threads, [&](std::size_t b) {
        RngStream rng(opt.seed, kHarvestStreamBase + b);
        StreamSampler sampler{rng};
        SpiderBatch& out = batches[b];
        out.w_k.assign(static_cast<std::size_t>(spec.m), 0.0);
        detail::BudgetMeter meter{opt.step_budget, 0, per_batch, opt.burn_in,
                                  static_cast<int>(b)};

        struct CycleEnd {
            RayState pre;
            int z;
            RayState next_entrance;
        };
        auto next_cycle = [&](RayState e) {
            int r = std::min(e.radius, opt.cap);
            long long steps = 0;
            int z;
            for (;;) {
                int j = sampler.draw(spec.jump(e.label));
                if (++steps >= (1 << 16)) { meter.spend(steps); steps = 0; }
                if (r + j > 0) {
                    r = std::min(r + j, opt.cap);
                } else {
                    z = r + j;
                    break;
                }
            }
            meter.spend(steps + 2);
            RayState pre{r, e.label};
            RayState landed = z == 0 ? RayState{0, 0} : sampler.draw(spec.overshoot_law(z, e.label));
            RayState next = landed.radius == 0 ? sampler.draw(spec.origin_kernel) : landed;
            return CycleEnd{pre, z, next};
        };

        RayState e = sampler.draw(spec.origin_kernel);
        for (long i = 0; i < opt.burn_in; ++i) e = next_cycle(e).next_entrance;

        for (long i = 0; i < per_batch; ++i) {
            CycleEnd c = next_cycle(e);
            ++out.cycles;
            meter.done_cycles = out.cycles;
            ++out.entrance_counts[e];
            ++out.exit_counts[c.pre];
            int k = e.label - 1;
            double val = (e.radius - c.z) / v[static_cast<std::size_t>(k)];
            out.w_k[static_cast<std::size_t>(k)] += val;
            out.w += val;
            out.ent_abs += std::abs(e.radius);
            e = c.next_entrance;
        }
    });
    return batches;
}

/// Empirical stationary distributions with per-state batch-means errors.
struct McStationaryPair {
    StationaryDistribution entrance, exit;
    std::map<RayState, double> entrance_stderr, exit_stderr;
    long cycles = 0;
};

namespace detail {

template <class Key>
McStationaryPair counts_to_stationary(const std::vector<std::map<Key, long>>& ent_batches,
                                      const std::vector<std::map<Key, long>>& exit_batches,
                                      const std::vector<long>& cycle_counts,
                                      auto to_state) {
    McStationaryPair out;
    long total = 0;
    for (long c : cycle_counts) total += c;
    out.cycles = total;
    auto fill = [&](const std::vector<std::map<Key, long>>& batches, StationaryDistribution& dist,
                    std::map<RayState, double>& err) {
        std::set<Key> keys;
        for (const auto& b : batches)
            for (const auto& [k, c] : b) keys.insert(k);
        for (const auto& key : keys) {
            std::vector<double> freqs;
            long count = 0;
            for (std::size_t b = 0; b < batches.size(); ++b) {
                auto it = batches[b].find(key);
                long c = it == batches[b].end() ? 0 : it->second;
                count += c;
                freqs.push_back(static_cast<double>(c) /
                                static_cast<double>(std::max<long>(cycle_counts[b], 1)));
            }
            RayState s = to_state(key);
            double p = static_cast<double>(count) / static_cast<double>(total);
            dist.probs[s] = p;
            dist.first_moment += p * std::abs(s.radius);
            err[s] = batch_stderr(freqs);
        }
    };
    fill(ent_batches, out.entrance, out.entrance_stderr);
    fill(exit_batches, out.exit, out.exit_stderr);
    return out;
}

} // namespace detail

inline McStationaryPair stationary_mc(const AxisChainSpec& spec, const HarvestOptions& opt) {
    auto batches = harvest_axis(spec, opt);
    std::vector<std::map<RayState, long>> ent, ext;
    std::vector<long> cycles;
    for (const auto& b : batches) {
        ent.push_back(b.entrance_counts);
        ext.push_back(b.exit_counts);
        cycles.push_back(b.cycles);
    }
    return detail::counts_to_stationary<RayState>(ent, ext, cycles,
                                                  [](RayState s) { return s; });
}

inline McStationaryPair stationary_mc(const MembraneWalkSpec& spec, const HarvestOptions& opt) {
    auto batches = harvest_membrane(spec, opt);
    std::vector<std::map<int, long>> ent, ext;
    std::vector<long> cycles;
    for (const auto& b : batches) {
        ent.push_back(b.entrance_counts);
        ext.push_back(b.exit_counts);
        cycles.push_back(b.cycles);
    }
    return detail::counts_to_stationary<int>(ent, ext, cycles,
                                             [](int x) { return RayState{x, 0}; });
}

inline McStationaryPair stationary_mc(const SpiderWalkSpec& spec, const HarvestOptions& opt) {
    auto batches = harvest_spider(spec, opt);
    std::vector<std::map<RayState, long>> ent, ext;
    std::vector<long> cycles;
    for (const auto& b : batches) {
        ent.push_back(b.entrance_counts);
        ext.push_back(b.exit_counts);
        cycles.push_back(b.cycles);
    }
    return detail::counts_to_stationary<RayState>(ent, ext, cycles,
                                                  [](RayState s) { return s; });
}

} // namespace pwalk
