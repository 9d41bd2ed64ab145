// test_kernels.cpp - vector kernels must match the scalar reference element for element
#include "coherence/errors.h"
#include "coherence/kernels.h"
#include "coherence/random.h"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace coh;
using coh::simd::Isa;

namespace {

struct Case {
    std::vector<double> g, bias, t;
};

Case make_case(std::uint64_t seed, std::size_t n_couplings, std::size_t n_times, double g_scale, double t_max) {
    UniformStream rng(seed);
    Case c;
    for (std::size_t k = 0; k < n_couplings; ++k) {
        c.g.push_back(g_scale * std::pow(10.0, 4.0 * rng.next() - 2.0));
        c.bias.push_back(2.0 * rng.next() - 1.0);
    }
    for (std::size_t i = 0; i < n_times; ++i) c.t.push_back(t_max * static_cast<double>(i) / static_cast<double>(n_times));
    return c;
}

void compare_all(const Case& c, Isa isa) {
    const std::size_t n = c.t.size();
    std::vector<double> ref(n), vec(n);
    simd::cos_product(Isa::Scalar, c.g, c.t, ref);
    simd::cos_product(isa, c.g, c.t, vec);
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(ref[i] - vec[i]));
    CHECK(worst <= 1e-12);

    std::vector<double> rr(n), ri(n), vr(n), vi(n);
    simd::phase_product(Isa::Scalar, c.g, c.bias, c.t, rr, ri);
    simd::phase_product(isa, c.g, c.bias, c.t, vr, vi);
    worst = 0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max({worst, std::abs(rr[i] - vr[i]), std::abs(ri[i] - vi[i])});
    CHECK(worst <= 1e-12);
}

} // namespace

TEST_CASE("isa names and parsing") {
    CHECK(simd::parse_isa("scalar") == Isa::Scalar);
    CHECK(simd::parse_isa("avx2") == Isa::Avx2);
    CHECK(simd::isa_supported(simd::parse_isa("auto")));
    CHECK(simd::isa_name(Isa::Scalar) == "scalar");
    CHECK_THROWS_AS(simd::parse_isa("sse9"), InvalidArgument);
    CHECK(simd::isa_supported(Isa::Scalar));
}

TEST_CASE("scalar cosine product matches a direct loop") {
    const auto c = make_case(1, 7, 33, 1.0, 3.0);
    std::vector<double> out(c.t.size());
    simd::cos_product(Isa::Scalar, c.g, c.t, out);
    for (std::size_t i = 0; i < c.t.size(); ++i) {
        double p = 1.0;
        for (double g : c.g) p *= std::cos(2.0 * g * c.t[i]);
        CHECK(std::abs(out[i] - p) < 1e-14);
    }
}

TEST_CASE("empty coupling list gives unit product") {
    std::vector<double> g, t{0.0, 1.0, 2.0, 3.0, 4.0}, out(5), im(5);
    for (Isa isa : {Isa::Scalar, simd::best_isa()}) {
        simd::cos_product(isa, g, t, out);
        for (double v : out) CHECK(v == 1.0);
        simd::phase_product(isa, g, g, t, out, im);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(out[i] == 1.0);
            CHECK(im[i] == 0.0);
        }
    }
}

TEST_CASE("size mismatches throw") {
    std::vector<double> g{1.0}, t{1.0, 2.0}, out(1);
    CHECK_THROWS_AS(simd::cos_product(Isa::Scalar, g, t, out), InvalidArgument);
    std::vector<double> bias{0.0, 0.0}, re(2), im(2);
    CHECK_THROWS_AS(simd::phase_product(Isa::Scalar, g, bias, t, re, im), InvalidArgument);
}

TEST_CASE("vector kernels agree with scalar to 1e-12") {
    if (!simd::isa_supported(Isa::Avx2)) {
        MESSAGE("AVX2 not available on this machine; equivalence test skipped");
        return;
    }
    // tails of every length, small and large arguments, many couplings
    for (std::size_t n_times : {1U, 2U, 3U, 4U, 5U, 7U, 8U, 9U, 1024U}) compare_all(make_case(n_times, 5, n_times, 1.0, 10.0), Isa::Avx2);
    compare_all(make_case(42, 99, 1000, 1.0, 20.0), Isa::Avx2);
    compare_all(make_case(43, 99, 1000, 1e3, 20.0), Isa::Avx2);
    compare_all(make_case(44, 30, 257, 1e-3, 1e3), Isa::Avx2);
    // arguments past the reduction range fall back to libm
    compare_all(make_case(45, 10, 64, 1e5, 100.0), Isa::Avx2);

    // exact multiples of pi/4 where quadrant selection matters
    Case q;
    q.g = {0.5, 0.25, 1.0};
    q.bias = {0.3, -0.7, 1.0};
    for (int i = 0; i < 64; ++i) q.t.push_back(static_cast<double>(i) * std::acos(-1.0) / 4.0);
    compare_all(q, Isa::Avx2);
}

TEST_CASE("active isa can be switched") {
    const Isa before = simd::active_isa();
    simd::set_active_isa(Isa::Scalar);
    CHECK(simd::active_isa() == Isa::Scalar);
    simd::set_active_isa(before);
    CHECK(simd::active_isa() == before);
}
