#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "pwalk/chain_spec.hpp"
#include "pwalk/int_distribution.hpp"

namespace pwalk {

/// Law of the first nonpositive value of x + S(k) for a finite-support
/// centered walk, solved exactly on {1..cap} with the walk clamped at the cap
/// (mass that would jump above the cap is moved onto it). Clamping keeps the
/// matrix stochastic, so each row is a genuine probability law and every
/// downstream identity holds exactly for the capped model; the distortion at
/// small starting points decays rapidly in cap.
class FirstPassageTable {
public:
    FirstPassageTable() = default;

    FirstPassageTable(const IntDistribution& xi, int cap) : cap_(cap) {
        if (cap < 2) throw SpecError("first passage: cap must be >= 2");
        if (xi.min_value() >= 0)
            throw SpecError("first passage: walk has no downward jumps, never exits");
        depth_ = -xi.min_value() - 1; // deepest reachable landing is -(depth_)
        const int n = cap;

        Eigen::SparseMatrix<double> a(n, n);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(n) * (xi.atoms().size() + 1));
        for (int x = 1; x <= n; ++x) {
            double diag_extra = 0.0;
            for (const auto& atom : xi.atoms()) {
                int y = std::min(x + atom.value, cap);
                if (y < 1) continue;
                if (y == x)
                    diag_extra += atom.prob;
                else
                    trip.emplace_back(x - 1, y - 1, -atom.prob);
            }
            trip.emplace_back(x - 1, x - 1, 1.0 - diag_extra);
        }
        a.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(a);
        if (lu.info() != Eigen::Success)
            throw SpecError("first passage: transient system is singular");

        law_.assign(static_cast<std::size_t>(n), std::vector<double>(depth_ + 1, 0.0));
        mean_.assign(static_cast<std::size_t>(n), 0.0);
        for (int s = 0; s >= -depth_; --s) {
            Eigen::VectorXd b(n);
            for (int x = 1; x <= n; ++x) b(x - 1) = xi.prob_of(s - x);
            Eigen::VectorXd h = lu.solve(b);
            for (int x = 1; x <= n; ++x) {
                double p = std::max(h(x - 1), 0.0);
                law_[x - 1][-s] = p;
                mean_[x - 1] += p * s;
            }
        }

        // law of the position the critical jump is attempted from; only
        // y <= depth+1 can reach a nonpositive point in one jump
        pre_exit_.assign(static_cast<std::size_t>(n), std::vector<double>(depth_ + 2, 0.0));
        for (int y = 1; y <= depth_ + 1; ++y) {
            double jump_down = 0.0;
            for (const auto& atom : xi.atoms())
                if (y + atom.value <= 0) jump_down += atom.prob;
            if (jump_down == 0.0) continue;
            Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
            c(y - 1) = jump_down;
            Eigen::VectorXd g = lu.solve(c);
            for (int x = 1; x <= n; ++x)
                pre_exit_[x - 1][y - 1] = std::max(g(x - 1), 0.0);
        }
        // rows should be stochastic up to solver round-off
        for (int x = 1; x <= n; ++x) {
            double sum = 0;
            for (double p : law_[x - 1]) sum += p;
            if (std::abs(sum - 1.0) > 1e-9)
                throw SpecError("first passage: row " + std::to_string(x) +
                                " sums to " + std::to_string(sum));
            for (double& p : law_[x - 1]) p /= sum;
        }
    }

    int cap() const { return cap_; }
    int depth() const { return depth_; }

    /// P(first nonpositive value = s | start x), s in {-depth..0}.
    double prob(int x, int s) const {
        check_start(x);
        if (s > 0 || s < -depth_) return 0.0;
        return law_[static_cast<std::size_t>(x - 1)][-s];
    }

    /// E[first nonpositive value | start x].
    double mean(int x) const {
        check_start(x);
        return mean_[static_cast<std::size_t>(x - 1)];
    }

    /// All landings with their probabilities for start x.
    std::vector<std::pair<int, double>> row(int x) const {
        check_start(x);
        std::vector<std::pair<int, double>> out;
        for (int s = 0; s >= -depth_; --s) {
            double p = law_[static_cast<std::size_t>(x - 1)][-s];
            if (p > 0) out.emplace_back(s, p);
        }
        return out;
    }

    /// P(position the critical jump is attempted from = y | start x);
    /// supported on 1..depth+1.
    double pre_exit_prob(int x, int y) const {
        check_start(x);
        if (y < 1 || y > depth_ + 1) return 0.0;
        return pre_exit_[static_cast<std::size_t>(x - 1)][static_cast<std::size_t>(y - 1)];
    }

private:
    void check_start(int x) const {
        if (x < 1 || x > cap_)
            throw SpecError("first passage: start " + std::to_string(x) +
                            " outside solved range 1.." + std::to_string(cap_));
    }

    int cap_ = 0;
    int depth_ = 0;
    std::vector<std::vector<double>> law_;
    std::vector<std::vector<double>> pre_exit_;
    std::vector<double> mean_;
};

/// Largest row-wise distance between the capped solution and the one at half
/// the cap, over starts 1..x_max. This is the truncation diagnostic carried
/// into stationary solves.
inline double first_passage_cap_sensitivity(const IntDistribution& xi, int cap, int x_max) {
    FirstPassageTable full(xi, cap);
    FirstPassageTable half(xi, std::max(cap / 2, x_max + 2));
    double worst = 0.0;
    for (int x = 1; x <= std::min(x_max, half.cap()); ++x) {
        double dist = 0.0;
        for (int s = 0; s >= -full.depth(); --s)
            dist += std::abs(full.prob(x, s) - half.prob(x, s));
        worst = std::max(worst, 0.5 * dist);
    }
    return worst;
}

} // namespace pwalk
