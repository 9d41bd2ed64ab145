// test_fit.cpp - floor estimation and stretched-exponential parameter recovery
#include "coherence/errors.h"
#include "coherence/fit.h"
#include "oracles.h"

#include <doctest.h>

#include <cmath>

using namespace coh;

namespace {

CoherenceTrace synthetic(double t_d, double exponent, double floor, const std::vector<double>& grid) {
    CoherenceTrace tr;
    tr.times = grid;
    for (double t : grid) tr.values.push_back((1.0 - floor) * std::exp(-std::pow(t / t_d, exponent)) + floor);
    return tr;
}

} // namespace

TEST_CASE("decay profile") {
    CHECK(decay_profile(0.0, 1.0, 1.0, 0.1) == 1.0);
    CHECK(decay_profile(1.0, 1.0, 2.0, 0.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(decay_profile(1e9, 1.0, 1.0, 0.25) == doctest::Approx(0.25));
}

TEST_CASE("floor estimate against the continuous mean") {
    // linear data is integrated exactly by the trapezoid rule
    CoherenceTrace lin;
    for (int i = 0; i <= 40; ++i) {
        lin.times.push_back(0.25 * i);
        lin.values.push_back(0.1 + 0.02 * 0.25 * i);
    }
    CHECK(estimate_floor(lin, 1.1, 7.3) == doctest::Approx(0.1 + 0.02 * (1.1 + 7.3) / 2.0).epsilon(1e-13));

    // smooth curve on a non-uniform grid against a fine-grid oracle
    const auto grid = make_time_grid();
    CoherenceTrace tr;
    tr.times = grid;
    auto f = [](double t) { return 0.3 + 0.1 * std::sin(t); };
    for (double t : grid) tr.values.push_back(f(t));
    const double ref = oracle::trapezoid(f, 7.0, 19.0, 200000) / 12.0;
    CHECK(estimate_floor(tr, 7.0, 19.0) == doctest::Approx(ref).epsilon(1e-4));

    CHECK_THROWS_AS(estimate_floor(tr, 5.0, 5.0), InvalidArgument);
    CHECK_THROWS_AS(estimate_floor(tr, 5.0, 25.0), InvalidArgument);
}

TEST_CASE("floor window and crude scale") {
    const auto grid = make_time_grid();
    const auto fast = synthetic(0.05, 1.0, 0.0, grid);
    const double s = crude_decay_scale(fast);
    CHECK(s == doctest::Approx(0.05).epsilon(0.05));
    const auto w = default_floor_window(fast, s);
    CHECK_FALSE(w.clamped);
    CHECK(w.t1 == doctest::Approx(50 * s));
    CHECK(w.t2 == doctest::Approx(150 * s));

    const auto slow = synthetic(0.5, 1.0, 0.0, grid);
    const auto w2 = default_floor_window(slow, crude_decay_scale(slow));
    CHECK(w2.clamped);
    CHECK(w2.t1 == doctest::Approx(20.0 / 3.0));
    CHECK(w2.t2 == doctest::Approx(20.0));
}

TEST_CASE("exact recovery from noise-free synthetic traces") {
    const auto grid = make_time_grid();
    for (double td : {0.05, 0.3, 1.0}) {
        for (double c : {0.6, 1.0, 1.5, 2.2}) {
            for (double floor : {0.0, 1e-4, 0.05}) {
                const auto tr = synthetic(td, c, floor, grid);
                const auto fit = fit_decay(tr, floor);
                CHECK(fit.converged);
                CHECK(fit.t_d == doctest::Approx(td).epsilon(1e-8));
                CHECK(fit.c_exponent == doctest::Approx(c).epsilon(1e-8));
                CHECK(fit.c_floor == floor);
            }
        }
    }
}

TEST_CASE("refinement improves on a perturbed trace") {
    const auto grid = make_time_grid();
    auto tr = synthetic(0.2, 1.3, 0.01, grid);
    UniformStream rng(3);
    for (auto& v : tr.values) v += 0.004 * (rng.next() - 0.5);
    const auto fit = fit_decay(tr, 0.01);
    CHECK(fit.converged);
    CHECK(fit.t_d == doctest::Approx(0.2).epsilon(0.02));
    CHECK(fit.c_exponent == doctest::Approx(1.3).epsilon(0.03));
    CHECK(fit.weight == doctest::Approx(1.0 / fit.chi_sq));

    FitOptions one_step;
    one_step.max_iterations = 0;
    const auto stage1 = fit_decay(tr, 0.01, one_step);
    CHECK_FALSE(stage1.converged);
    CHECK(stage1.chi_sq >= fit.chi_sq);
}

TEST_CASE("fit_trace estimates the floor itself") {
    const auto grid = make_time_grid();
    const auto tr = synthetic(0.04, 1.0, 0.02, grid);
    const auto fit = fit_trace(tr);
    CHECK(fit.c_floor == doctest::Approx(0.02).epsilon(1e-6));
    CHECK(fit.t_d == doctest::Approx(0.04).epsilon(1e-5));
    CHECK(fit.c_exponent == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("insufficient data") {
    const auto grid = make_time_grid();
    CoherenceTrace flat;
    flat.times = grid;
    flat.values.assign(grid.size(), 1.0);
    CHECK_THROWS_AS(fit_trace(flat), InsufficientData);
    CHECK_THROWS_AS(fit_decay(flat, 0.0), InsufficientData);

    CoherenceTrace two;
    two.times = {0.0, 0.5, 1.0};
    two.values = {1.0, 0.5, 0.2};
    CHECK_THROWS_AS(fit_decay(two, 0.0), InsufficientData);

    CoherenceTrace rising;
    rising.times = {0.1, 0.2, 0.3, 0.4};
    rising.values = {0.2, 0.3, 0.4, 0.5};
    CHECK_THROWS_AS(fit_decay(rising, 0.0), InsufficientData);

    CHECK_THROWS_AS(fit_decay(two, 1.0), InvalidArgument);
}

TEST_CASE("fit record format") {
    FitResult r;
    r.t_d = 0.5;
    r.c_exponent = 1.25;
    r.converged = true;
    const auto s = fit_record(r);
    CHECK(s.find("t_d=0.5\n") != std::string::npos);
    CHECK(s.find("C=1.25\n") != std::string::npos);
    CHECK(s.find("converged=") != std::string::npos);
}
