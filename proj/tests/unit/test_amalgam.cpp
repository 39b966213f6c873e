#include <doctest.h>

#include "deformlab/amalgam.hpp"
#include "deformlab/rng.hpp"

#include <algorithm>
#include <cmath>

using namespace deformlab;

namespace {

const Exponent inf = Exponent::infinity();
Exponent fin(double p) { return Exponent::finite(p); }

SampledSignal random_signal(const Grid& grid, std::uint64_t seed)
{
    CounterRng rng(seed);
    std::vector<Complex> v(grid.size());
    for (auto& z : v) {
        const double re = rng.normal();
        const double im = rng.normal();
        z = {re, im};
    }
    return SampledSignal(grid, std::move(v));
}

SampledSignal band_limited(const Grid& grid, std::uint64_t seed, std::size_t max_bin)
{
    CounterRng rng(seed, 1);
    std::vector<Complex> spec(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (static_cast<std::size_t>(std::abs(grid.signed_index(j))) <= max_bin) {
            const double re = rng.normal();
            const double im = rng.normal();
            spec[j] = {re, im};
        }
    }
    return inverse(Spectrum(grid, std::move(spec)));
}

// Independent O(N W) reference for the amalgam norm.
double brute_norm(const SampledSignal& f, Exponent p, Exponent q, long w)
{
    const long n = static_cast<long>(f.size());
    const double d = f.grid().spacing();
    std::vector<double> inner;
    for (long k = 0; k < n; ++k) {
        double acc = 0.0;
        const long span = 2 * w + 1 >= n ? n : 2 * w + 1;
        for (long i = 0; i < span; ++i) {
            const long idx = span == n ? i : (((k - w + i) % n) + n) % n;
            const double v = std::abs(f[static_cast<std::size_t>(idx)]);
            acc = p.is_infinite() ? std::max(acc, v) : acc + std::pow(v, p.value());
        }
        inner.push_back(p.is_infinite() ? acc : std::pow(d * acc, 1.0 / p.value()));
    }
    if (q.is_infinite()) {
        return *std::max_element(inner.begin(), inner.end());
    }
    double acc = 0.0;
    for (double v : inner) {
        acc += std::pow(v, q.value());
    }
    return std::pow(d * acc, 1.0 / q.value());
}

}  // namespace

TEST_CASE("exponent encoding")
{
    CHECK(Exponent::parse("inf").is_infinite());
    CHECK(Exponent::parse("2").value() == 2.0);
    CHECK(Exponent::parse("1.5").to_string() == "1.5");
    CHECK(inf.reciprocal() == 0.0);
    CHECK_THROWS_AS(Exponent::finite(0.5), std::invalid_argument);
    CHECK_THROWS_AS(Exponent::parse("abc"), std::invalid_argument);
    CHECK_THROWS_AS(inf.value(), std::logic_error);
}

TEST_CASE("window radius must reach one sample")
{
    const auto f = random_signal(Grid(16, 1.0), 1);
    CHECK_THROWS_AS(amalgam_norm(f, {inf, fin(2), 0.5}), std::invalid_argument);
    CHECK(window_half_width(Grid(16, 0.25), 1.0) == 4);
}

TEST_CASE("p = q = 2 is a rescaled L2 norm")
{
    const Grid g(512, 0.125);
    for (double r : {1.0, 2.0, 4.0}) {
        const auto f = random_signal(g, static_cast<std::uint64_t>(r));
        const double v = amalgam_norm(f, {fin(2), fin(2), r});
        // Exact on the grid: the closed window holds 2W+1 samples.
        const double w = static_cast<double>(window_half_width(g, r));
        CHECK(v == doctest::Approx(std::sqrt((2 * w + 1) * g.spacing()) * l2_norm(f)).epsilon(1e-12));
        // Continuum value r^{1/2} |B_1|^{1/2} ||f|| with |B_1| = 2.
        CHECK(std::abs(v / (std::sqrt(2.0 * r) * l2_norm(f)) - 1.0) <= 2.0 * g.spacing() / r);
    }
}

TEST_CASE("indicator window sup norm")
{
    const Grid g(1024, 1.0 / 64.0);
    SampledSignal box(g);
    for (std::size_t k = 256; k < 320; ++k) {
        box[k] = 1.0;
    }
    CHECK(amalgam_norm(box, {inf, fin(2), 1.0}) == doctest::Approx(std::sqrt(3.0)).epsilon(0.05 / std::sqrt(3.0)));
    CHECK(std::abs(amalgam_norm(box, {inf, fin(2), 1.0}) - std::sqrt(3.0)) <= 0.05);
    CHECK(amalgam_norm_discrete(box, inf, fin(1)) == 1.0);
    const auto zero = SampledSignal(g);
    for (auto p : {fin(1), fin(2), inf}) {
        for (auto q : {fin(1), fin(2), inf}) {
            CHECK(amalgam_norm(zero, {p, q, 1.0}) == 0.0);
        }
    }
}

TEST_CASE("amalgam norm matches brute force")
{
    const Grid g(40, 0.5);
    const auto f = random_signal(g, 5);
    for (auto p : {fin(1), fin(2), fin(3.5), inf}) {
        for (auto q : {fin(1), fin(2), inf}) {
            for (double r : {0.5, 1.0, 3.0, 12.0}) {
                const long w = static_cast<long>(window_half_width(g, r));
                CHECK(amalgam_norm(f, {p, q, r}) ==
                      doctest::Approx(brute_norm(f, p, q, w)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("discrete norm is equivalent to the continuous one")
{
    const Grid g(256, 0.125);
    double lo = 1e300;
    double hi = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto f = random_signal(g, seed);
        for (auto p : {fin(1), fin(2), inf}) {
            for (auto q : {fin(1), fin(2), inf}) {
                const double ratio = amalgam_norm_discrete(f, p, q) / amalgam_norm(f, {p, q, 1.0});
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
        }
    }
    MESSAGE("discrete/continuous bracket [" << lo << ", " << hi << "]");
    CHECK(lo >= 0.25);
    CHECK(hi <= 4.0);
}

TEST_CASE("discrete norm is invariant under whole-cell shifts")
{
    const Grid g(128, 0.25);
    const auto f = random_signal(g, 8);
    for (auto p : {fin(1), fin(2), inf}) {
        for (auto q : {fin(1), fin(2), inf}) {
            CHECK(amalgam_norm_discrete(f.shifted(4), p, q) == amalgam_norm_discrete(f, p, q));
        }
    }
    CHECK_THROWS_AS(amalgam_norm_discrete(SampledSignal(Grid(10, 0.3)), inf, fin(1)),
                    std::invalid_argument);
}

TEST_CASE("rescaling identity")
{
    const Grid g(512, 0.25);
    const auto f0 = band_limited(g, 1, 20);
    CHECK(check_rescaling(f0, fin(2), fin(2), 1.0) == 0.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto f = band_limited(g, seed, 24);
        CHECK(check_rescaling(f, fin(2), fin(2), 2.0) <= 1e-10);
        CHECK(check_rescaling(f, fin(1), inf, 2.0) <= 1e-10);
        CHECK(check_rescaling(f, inf, fin(2), 4.0) <= 1e-10);
    }
    CHECK_THROWS_AS(check_rescaling(f0, fin(2), fin(2), 0.3), std::invalid_argument);
}

TEST_CASE("embedding constant")
{
    const Grid g(256, 0.125);
    std::vector<SampledSignal> set;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        set.push_back(random_signal(g, seed));
    }
    CHECK(check_embedding_const(set, fin(2), fin(2), fin(2), 1.0).constant <= 1.0 + 1e-10);
    std::vector<double> constants;
    for (double r : {1.0, 2.0, 4.0, 8.0}) {
        const auto e = check_embedding_const(set, fin(1), inf, fin(2), r);
        CHECK(e.evaluated == 50);
        CHECK(e.constant <= 4.0);
        constants.push_back(e.constant);
    }
    const auto [mn, mx] = std::minmax_element(constants.begin(), constants.end());
    CHECK(*mx / *mn <= 2.0);

    std::vector<SampledSignal> with_zero{SampledSignal(g), set[0]};
    const auto e = check_embedding_const(with_zero, fin(1), inf, fin(2), 1.0);
    CHECK(e.skipped == 1);
    CHECK(e.evaluated == 1);
    CHECK_THROWS_AS(check_embedding_const(set, inf, fin(1), fin(2), 1.0), std::invalid_argument);
}

TEST_CASE("convolution and dilation constants")
{
    const Grid g(256, 0.125);
    std::vector<std::pair<SampledSignal, SampledSignal>> pairs;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        pairs.emplace_back(random_signal(g, 2 * seed), random_signal(g, 2 * seed + 1));
    }
    // 1/2 + 1/2 = 1 + 1/inf: L2 x L2 -> L^inf.
    const ConvolutionExponents young{fin(2), fin(2), fin(2), fin(2), inf, inf};
    const auto res = check_convolution_dilation(pairs, young, 1.0);
    CHECK(std::isfinite(res.c_conv));
    CHECK(res.c_conv > 0.0);
    CHECK(std::isfinite(res.c_dil));
    CHECK(res.skipped == 0);

    const auto identity = check_convolution_dilation(pairs, young, 1.0, {1.0});
    CHECK(identity.c_dil == 1.0);

    const ConvolutionExponents bad{fin(2), fin(2), fin(2), fin(2), fin(2), fin(2)};
    CHECK_THROWS_AS(check_convolution_dilation(pairs, bad, 1.0), std::invalid_argument);
}

TEST_CASE("convolution constant against hand summation on N = 8")
{
    const Grid g(8, 0.5);
    const auto f = random_signal(g, 77);
    SampledSignal delta(g);
    delta[0] = 1.0 / g.spacing();
    const ConvolutionExponents e{fin(1), fin(1), fin(1), fin(1), fin(1), fin(1)};
    const double r = 1.0;
    const auto res = check_convolution_dilation({{f, delta}}, e, r, {});
    // W = 2 on each side: windows of 5 samples.
    auto x11 = [&](const SampledSignal& h) {
        double total = 0.0;
        for (int k = 0; k < 8; ++k) {
            double local = 0.0;
            for (int m = -2; m <= 2; ++m) {
                local += 0.5 * std::abs(h[static_cast<std::size_t>((k + m + 8) % 8)]);
            }
            total += 0.5 * local;
        }
        return total;
    };
    const double expect = x11(f) * r / (x11(f) * x11(delta));
    CHECK(res.c_conv == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("window sup")
{
    const Grid g(32, 1.0);
    std::vector<double> ramp(32);
    for (int k = 0; k < 32; ++k) {
        ramp[static_cast<std::size_t>(k)] = k;
    }
    const auto w = window_sup(SampledSignal::from_real(g, ramp), 1.0);
    for (std::size_t k = 1; k + 1 < 32; ++k) {
        CHECK(w[k].real() == ramp[k + 1]);
    }
    const auto f = random_signal(g, 4);
    const auto ws = window_sup(f, 5.0);
    for (std::size_t k = 0; k < 32; ++k) {
        CHECK(ws[k].real() >= std::abs(f[k]));
    }
    CHECK(l2_norm(ws) == amalgam_norm(f, {inf, fin(2), 5.0}));
}

TEST_CASE("window sup equals brute force on every small signal")
{
    for (std::size_t n = 2; n <= 64; ++n) {
        const Grid g(n, 1.0);
        const auto f = random_signal(g, n);
        const auto mag = f.abs();
        for (std::size_t w = 1; w <= n / 2 + 1; ++w) {
            const auto ws = window_sup(f, static_cast<double>(w));
            for (std::size_t k = 0; k < n; ++k) {
                double best = 0.0;
                const std::size_t span = std::min(2 * w + 1, n);
                for (std::size_t i = 0; i < span; ++i) {
                    best = std::max(best, mag[(k + n - w + i) % n]);
                }
                if (2 * w + 1 >= n) {
                    best = *std::max_element(mag.begin(), mag.end());
                }
                REQUIRE(ws[k].real() == best);
            }
        }
    }
}

TEST_CASE("monotone in r and norm axioms")
{
    const Grid g(128, 0.25);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto f = random_signal(g, seed);
        const auto h = random_signal(g, seed + 1000);
        for (auto p : {fin(1), fin(2), inf}) {
            for (auto q : {fin(1), fin(2), inf}) {
                double prev = 0.0;
                for (double r : {0.25, 0.5, 1.0, 2.0, 5.0, 40.0}) {
                    const double v = amalgam_norm(f, {p, q, r});
                    CHECK(v >= prev);
                    prev = v;
                }
                const AmalgamParams par{p, q, 1.0};
                const double nf = amalgam_norm(f, par);
                CHECK(amalgam_norm(Complex(2.0, 0.0) * f, par) == 2.0 * nf);
                CHECK(amalgam_norm(Complex(-3.0, 4.0) * f, par) ==
                      doctest::Approx(5.0 * nf).epsilon(1e-14));
                CHECK(amalgam_norm(f + h, par) <= nf + amalgam_norm(h, par) + 1e-10);
            }
        }
    }
}
