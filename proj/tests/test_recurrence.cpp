// test_recurrence.cpp - rational approximation and recurrence bounds
#include "coherence/errors.h"
#include "coherence/io.h"
#include "coherence/recurrence.h"
#include "oracles.h"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace coh;

TEST_CASE("rational approximation: exact and known values") {
    auto half = rational_approx(0.5, 100);
    CHECK(half.numerator == 1.0);
    CHECK(half.denominator == 2);
    auto three = rational_approx(3.0, 100);
    CHECK(three.numerator == 3.0);
    CHECK(three.denominator == 1);
    auto pi = rational_approx(std::numbers::pi, 1000);
    CHECK(pi.numerator == 355.0);
    CHECK(pi.denominator == 113);
    auto pi7 = rational_approx(std::numbers::pi, 100);
    CHECK(pi7.numerator == 22.0);  // next convergent 333/106 exceeds the cap
    CHECK(pi7.denominator == 7);
    CHECK_THROWS_AS(rational_approx(0.0, 10), InvalidArgument);
    CHECK_THROWS_AS(rational_approx(1.0, 0), InvalidArgument);
}

TEST_CASE("rational approximation against exhaustive denominator scan") {
    UniformStream rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const double x = std::pow(10.0, 3.0 * rng.next() - 1.5);
        const std::uint64_t maxden = 1 + static_cast<std::uint64_t>(500 * rng.next());
        const auto q = rational_approx(x, maxden);
        REQUIRE(q.denominator <= maxden);
        REQUIRE(q.denominator >= 1);
        const double d = static_cast<double>(q.denominator);
        const double err = std::abs(d * x - q.numerator);
        // best approximation of the second kind: no smaller denominator does better
        for (std::uint64_t dd = 1; dd < q.denominator; ++dd) {
            const double ddd = static_cast<double>(dd);
            CHECK(std::abs(ddd * x - std::round(ddd * x)) >= err - 1e-12);
        }
        // the scan optimum (first kind) is never worse, and the convergent error bound holds
        const auto scan = oracle::best_rational_scan(x, maxden);
        CHECK(std::abs(x - static_cast<double>(scan.n) / static_cast<double>(scan.d)) <= err / d * (1.0 + 1e-9) + 1e-15);
        CHECK(err / d <= 1.0 / (d * static_cast<double>(maxden)) + 1e-15);
        // lowest terms
        if (q.numerator > 0.0) CHECK(std::gcd(static_cast<std::uint64_t>(q.numerator), q.denominator) == 1);
    }
}

TEST_CASE("pair periods and commensurate ensembles") {
    ModelParams p;
    p.n_particles = 3;
    const auto base = sample_ensemble(p, 1);
    Eigen::MatrixXd g(3, 3);
    g << 0, 1, 2,
         1, 0, 4,
         2, 4, 0;
    const auto e = base.with_couplings(g);
    const auto periods = pair_periods(e);
    REQUIRE(periods.size() == 3);
    CHECK(periods[0] == doctest::Approx(std::numbers::pi));
    CHECK(periods[1] == doctest::Approx(std::numbers::pi / 2));
    CHECK(periods[2] == doctest::Approx(std::numbers::pi / 4));
    // t_unit = pi: ratios 1, 2, 4 are integers, so the bound is t_unit itself
    const auto est = poincare_log_bound(periods, std::numbers::pi);
    for (const auto& q : est.rationals) CHECK(q.denominator == 1);
    CHECK(est.log10_tp == doctest::Approx(std::log10(std::numbers::pi)));
    // t_unit = pi/8: ratios 1/8, 1/4, 1/2, bound = t_unit * 8 * 4 * 2
    const auto est2 = poincare_log_bound(periods, std::numbers::pi / 8);
    CHECK(est2.log10_tp == doctest::Approx(std::log10(std::numbers::pi / 8 * 64)));
    CHECK_THROWS_AS(poincare_log_bound({}, 1.0), InvalidArgument);
}

TEST_CASE("procedural bound grows with N and is capped per pair") {
    ModelParams p;
    p.dimension = 3;
    double prev = -1e300;
    for (std::size_t n : {5U, 10U, 20U}) {
        p.n_particles = n;
        const auto e = sample_ensemble(p, 9);
        const auto est = ensemble_recurrence(e);
        CHECK(est.t_unit == doctest::Approx(recurrence_time_unit(p)));
        CHECK(est.rationals.size() == n * (n - 1) / 2);
        const double cap = std::log10(est.t_unit) + 4.0 * static_cast<double>(est.rationals.size());
        CHECK(est.log10_tp <= cap + 1e-9);
        CHECK(est.log10_tp > prev);
        prev = est.log10_tp;
    }
}

TEST_CASE("recurrence law and comparators") {
    const double e2 = 1.602176634e-19 * 1.602176634e-19;
    const double eta = 8.22e43 * e2;
    CHECK(parse_eta("em") == doctest::Approx(eta));
    CHECK(parse_eta("li6") == doctest::Approx(3.27e-26));
    CHECK(parse_eta("2.5") == 2.5);
    CHECK_THROWS_AS(parse_eta("-1"), InvalidArgument);
    const double law = recurrence_law(100, 1e30, eta, 1.0, 3);
    const double expect = std::log10(std::numbers::pi / eta) - 10.0 + 3.07 * 9900.0 / std::numbers::ln10;
    CHECK(law == doctest::Approx(expect).epsilon(1e-12));
    CHECK(law == doctest::Approx(13183.8).epsilon(1e-4));
    CHECK(log10_factorial(10) == doctest::Approx(std::log10(3628800.0)));
    CHECK(log10_factorial(0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(recurrence_law(1, 1, 1, 1, 1), InvalidArgument);
}

TEST_CASE("recurrence csv") {
    ModelParams p;
    p.n_particles = 4;
    const auto e = sample_ensemble(p, 2);
    const auto periods = pair_periods(e);
    const auto est = ensemble_recurrence(e);
    const auto csv = recurrence_to_csv(est, periods, 4);
    const auto table = parse_csv(csv);
    CHECK(table.rows.size() == 7);
    CHECK(table.rows.back()[0] == "summary");
    CHECK(table.number(6, "log10_tp") == est.log10_tp);
    CHECK(table.number(6, "period") == est.t_unit);
    CHECK_THROWS_AS(recurrence_to_csv(est, periods, 5), InvalidArgument);
}
