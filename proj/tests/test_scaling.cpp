#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "pwalk/ensemble.hpp"
#include "pwalk/gaussian.hpp"
#include "pwalk/scaling.hpp"
#include "pwalk/simulate.hpp"
#include "pwalk/stats.hpp"

using namespace pwalk;

namespace {

IntDistribution unit_steps() {
    return IntDistribution::from_rationals({{-1, {1, 2}}, {1, {1, 2}}});
}

AxisChainSpec reflecting_chain() {
    AxisChainSpec s;
    s.m = 1;
    s.jumps.push_back(unit_steps());
    s.reentry.emplace(RayState{0, 1}, StateDistribution::point_mass({1, 1}));
    s.declared_C = 1.0;
    return s;
}

CyclePath flat_axis_path(std::size_t steps) {
    CyclePath p;
    p.kind = ChainKind::Axis;
    p.radius.assign(steps + 1, 0);
    p.label.assign(steps + 1, 1);
    return p;
}

} // namespace

TEST_CASE("scaling a flat path gives the zero function", "[scaling]") {
    ScaledPath sp = donsker_scale(flat_axis_path(100), 100, 1.0, {1.0});
    for (double t : {0.0, 0.37, 1.0}) CHECK(sp.at(t) == 0.0);
}

TEST_CASE("n=1 scaling is the raw path through the speed map", "[scaling]") {
    CyclePath p;
    p.kind = ChainKind::Membrane;
    p.radius = {2, -3, 0, 4};
    p.label.assign(4, 0);
    ScaledPath sp = donsker_scale(p, 1, 3.0, {2.0, 3.0});
    CHECK(sp.at(0.0) == Catch::Approx(1.0));   // phi(2) with v+ = 2
    CHECK(sp.at(1.0) == Catch::Approx(-1.0));  // phi(-3) with v- = 3
    CHECK(sp.at(2.0) == 0.0);
    CHECK(sp.at(3.0) == Catch::Approx(2.0));
    CHECK(sp.label_at(1.0) == 2);
    CHECK(sp.label_at(2.0) == 0); // at zero: no side
}

TEST_CASE("horizon beyond the simulated path is an error", "[scaling]") {
    CHECK_THROWS_AS(donsker_scale(flat_axis_path(50), 100, 1.0, {1.0}),
                    std::invalid_argument);
}

TEST_CASE("implied coordinate vector has at most one active ray", "[scaling]") {
    AxisChainSpec spec;
    spec.m = 3;
    for (int i = 0; i < 3; ++i) spec.jumps.push_back(unit_steps());
    for (int i = 1; i <= 3; ++i) {
        std::vector<std::pair<RayState, double>> atoms;
        for (int j = 1; j <= 3; ++j) atoms.push_back({{1, j}, 1.0 / 3});
        spec.reentry.emplace(RayState{0, i}, StateDistribution::from_doubles(atoms));
    }
    spec.declared_C = 1.0;
    RngStream rng(50, 0);
    CyclePath path = simulate_axis(spec, 4000, {1, 1}, rng);
    ScaledPath sp = donsker_scale(path, 4000, 1.0, {1.0, 1.0, 1.0});
    for (double t = 0; t <= 1.0; t += 0.01) {
        int active = 0;
        for (int ray = 1; ray <= 3; ++ray) active += sp.coordinate(t, ray) != 0.0;
        REQUIRE(active <= 1);
    }
}

TEST_CASE("local time estimator on hand-built paths", "[scaling]") {
    SECTION("a path that never leaves the positive side has zero local time") {
        CyclePath p;
        p.kind = ChainKind::Axis;
        p.radius = {3, 4, 3, 2, 3};
        p.label.assign(5, 1);
        LocalTimeEstimate lt = local_time_estimator(p, 4, {1.0});
        CHECK(lt.at_time(1.0) == 0.0);
    }
    SECTION("unit excursions contribute 1/sqrt(n) each") {
        AxisChainSpec spec = reflecting_chain();
        RngStream rng(51, 0);
        const long n = 10000;
        CyclePath path = simulate_axis(spec, n, {1, 1}, rng);
        LocalTimeEstimate lt = local_time_estimator(path, n, {1.0});
        // count completed excursions: entrances whose next exit is observed
        std::size_t completed = 0;
        for (std::size_t i = 0; i + 1 < path.sigma.size() && i < path.tau.size(); ++i)
            ++completed;
        CHECK(lt.at_time(1.0) ==
              Catch::Approx(static_cast<double>(completed) / std::sqrt(n)).margin(1e-12));
    }
    SECTION("estimate is nondecreasing and moves only at entrance times") {
        AxisChainSpec spec = reflecting_chain();
        RngStream rng(52, 0);
        CyclePath path = simulate_axis(spec, 4000, {1, 1}, rng);
        LocalTimeEstimate lt = local_time_estimator(path, 4000, {1.0});
        double prev = 0;
        for (double t = 0; t <= 1.0; t += 0.002) {
            double cur = lt.at_time(t);
            REQUIRE(cur >= prev);
            prev = cur;
        }
        for (const auto& [idx, inc] : lt.jumps) {
            bool is_entrance = false;
            for (auto tau : path.tau) is_entrance = is_entrance || tau == idx;
            REQUIRE(is_entrance);
        }
    }
}

TEST_CASE("mean local time of the reflecting chain approaches sqrt(2/pi)", "[scaling]") {
    AxisChainSpec spec = reflecting_chain();
    EnsembleOptions opt;
    opt.n = 2500;
    opt.paths = 2000;
    opt.obs_times = {1.0};
    opt.seed = 4;
    opt.threads = 2;
    EnsembleResult ens = run_axis_ensemble(spec, {1, 1}, opt);
    MeanStderr lt = ens.local_time_mean(0);
    CHECK(std::abs(lt.mean - std::sqrt(2.0 / kPi)) < 3 * lt.stderr_of_mean + 0.03);
}

TEST_CASE("occupation fractions exclude paths sitting at zero", "[scaling]") {
    std::vector<ScaledPath> ensemble;
    for (int i = 0; i < 150; ++i) {
        CyclePath p;
        p.kind = ChainKind::Axis;
        p.radius = {i % 3 == 0 ? 0 : (i % 2 ? 2 : -1), 1};
        p.label = {static_cast<std::uint8_t>(i % 2 ? 1 : 2), 1};
        ensemble.push_back(donsker_scale(p, 1, 0.0, {1.0, 1.0}));
    }
    OccupationFractions f = occupation_fractions(ensemble, 0.0, 2);
    CHECK(f.excluded_zero == 50);
    CHECK(f.counted == 100);
    CHECK(f.fraction[0] + f.fraction[1] == Catch::Approx(1.0));
    CHECK_THROWS_AS(occupation_fractions({}, 0.0, 2), std::invalid_argument);
}

TEST_CASE("donsker self-test: symmetric walk marginal is Gaussian", "[scaling]") {
    // unperturbed walk written as a membrane walk whose kernel is the free law
    MembraneWalkSpec spec;
    spec.d = 0;
    spec.xi_plus = unit_steps();
    spec.xi_minus = unit_steps();
    spec.membrane_kernel.emplace(0, unit_steps());
    EnsembleOptions opt;
    opt.n = 2500;
    opt.paths = 2000;
    opt.obs_times = {1.0};
    opt.seed = 6;
    opt.threads = 2;
    EnsembleResult ens = run_membrane_ensemble(spec, 0, opt);
    auto ks = ks_test(ens.marginal(0), [](double y) { return normal_cdf(y); }, 0.01);
    INFO("D = " << ks.statistic << " threshold " << ks.threshold);
    CHECK(ks.pass);
}

TEST_CASE("ks harness calibration", "[scaling]") {
    SECTION("same-law samples pass at roughly the nominal rate") {
        RngStream rng(53, 0);
        int failures = 0;
        for (int rep = 0; rep < 100; ++rep) {
            std::vector<double> draws;
            for (int i = 0; i < 1000; ++i) draws.push_back(rng.standard_normal());
            auto ks = ks_test(draws, [](double y) { return normal_cdf(y); }, 0.01);
            failures += !ks.pass;
        }
        CHECK(failures <= 4); // nominal 1 of 100
    }
    SECTION("a half-unit shift is detected at N=10^4") {
        RngStream rng(54, 0);
        std::vector<double> draws;
        for (int i = 0; i < 10000; ++i) draws.push_back(rng.standard_normal() + 0.5);
        auto ks = ks_test(draws, [](double y) { return normal_cdf(y); }, 0.01);
        CHECK_FALSE(ks.pass);
    }
    SECTION("tiny samples are rejected") {
        CHECK_THROWS_AS(ks_test({0.5}, [](double y) { return y; }, 0.01),
                        std::invalid_argument);
    }
}

TEST_CASE("martingale residuals", "[scaling]") {
    AxisChainSpec spec = reflecting_chain();
    EnsembleOptions opt;
    opt.n = 2000;
    opt.paths = 2000;
    opt.horizon = 1.0;
    opt.obs_times = {0.5, 1.0};
    opt.seed = 8;
    opt.threads = 2;
    EnsembleResult ens = run_axis_ensemble(spec, {1, 1}, opt);
    SECTION("reflecting chain with the true weight passes") {
        ResidualReport rr = martingale_residual_check(ens, {1.0});
        for (const auto& e : rr.entries) {
            INFO(e.name << " mean " << e.mean << " 3se " << 3 * e.stderr_of_mean);
            CHECK(e.pass);
        }
    }
    SECTION("a perturbed weight fails the drift residual") {
        ResidualReport rr = martingale_residual_check(ens, {0.8});
        bool some_drift_failed = false;
        for (const auto& e : rr.entries)
            if (e.name.find("drift") != std::string::npos && !e.pass) some_drift_failed = true;
        CHECK(some_drift_failed);
    }
    SECTION("equal endpoints give an exactly zero residual") {
        EnsembleOptions o2 = opt;
        o2.obs_times = {0.5, 0.5};
        EnsembleResult e2 = run_axis_ensemble(spec, {1, 1}, o2);
        ResidualReport rr = martingale_residual_check(e2, {1.0});
        for (const auto& e : rr.entries)
            if (e.name.find("drift") != std::string::npos) {
                CHECK(e.mean == 0.0);
                CHECK(e.pass);
            }
    }
}
