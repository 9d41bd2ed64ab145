// test_sweep_invariants.cpp - statistical invariants of full-size sweep cells (slow)
//
// Each cell runs U = 100 seeded ensembles on the default grid. Failures here
// compare simulated statistics against fitted empirical laws; they are not
// numerical errors in the kernels.
#include "coherence/sweep.h"

#include <doctest.h>

#include <cmath>
#include <cstdio>

using namespace coh;

TEST_CASE("weighted mean C stays within 3 standard errors of f(D, eps)") {
    for (std::size_t n : {50U, 100U})
        for (int d = 1; d <= 4; ++d)
            for (double eps : {1.0, 1.5, 2.0}) {
                const auto s = run_cell({n, d, eps, 100, 0});
                const double f = f_exponent(d, eps);
                const double z = (s.exponent.mean - f) / s.exponent.se;
                char line[160];
                std::snprintf(line, sizeof line, "N=%zu D=%d eps=%.1f: C=%.4f se=%.4f f=%.4f z=%+.2f", n, d, eps,
                              s.exponent.mean, s.exponent.se, f, z);
                INFO(line);
                CHECK(std::abs(z) < 3.0);
            }
}

TEST_CASE("weighted floor obeys 10^(-N/5 + 2) in the low-fluctuation regime") {
    for (std::size_t n : {20U, 40U})
        for (int d = 1; d <= 4; ++d)
            for (double eps : {1.0, 1.5, 2.0}) {
                if (!fluctuation_regime(n, d, eps)) continue;
                const auto s = run_cell({n, d, eps, 100, 0});
                const double bound = std::pow(10.0, -static_cast<double>(n) / 5.0 + 2.0);
                char line[160];
                std::snprintf(line, sizeof line, "N=%zu D=%d eps=%.1f: c=%.3e bound=%.0e", n, d, eps, s.floor.mean, bound);
                INFO(line);
                CHECK(s.floor.mean <= bound);
            }
}
