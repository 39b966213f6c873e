#include <doctest.h>

#include "deformlab/rng.hpp"
#include "deformlab/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace deformlab;

namespace {

constexpr double pi = std::numbers::pi;

SampledSignal random_real(const Grid& g, std::uint64_t seed)
{
    CounterRng rng(seed, 5);
    std::vector<double> v(g.size());
    for (auto& x : v) {
        x = rng.normal();
    }
    return SampledSignal::from_real(g, v);
}

// Sum of cosines at the given signed bins with random amplitudes.
SampledSignal cosines(const Grid& g, const std::vector<long>& ks, std::uint64_t seed)
{
    CounterRng rng(seed, 6);
    std::vector<double> v(g.size(), 0.0);
    for (long k : ks) {
        const double a = rng.normal();
        const double phase = 2.0 * pi * rng.uniform();
        for (std::size_t n = 0; n < g.size(); ++n) {
            v[n] += a * std::cos(2.0 * pi * static_cast<double>(k * static_cast<long>(n)) /
                                     static_cast<double>(g.size()) +
                                 phase);
        }
    }
    return SampledSignal::from_real(g, v);
}

ScatteringNetwork make_net(const Grid& g, std::vector<LayerConfig> layers, int depth, double eps = 0.0)
{
    return ScatteringNetwork(NetworkConfig{std::move(layers), depth, eps}, g);
}

// O(N^2) DFT based filtering with the indicator of lo < |omega| <= hi.
std::vector<Complex> naive_band(const std::vector<Complex>& x, double spacing, double lo, double hi)
{
    const std::size_t n = x.size();
    const double period = spacing * static_cast<double>(n);
    std::vector<Complex> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const long sj = j < (n + 1) / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n);
        const double w = std::abs(2.0 * pi * static_cast<double>(sj) / period);
        if (!(w > lo * (1.0 + 1e-12) && w <= hi * (1.0 + 1e-12))) {
            continue;
        }
        Complex coef = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            coef += x[k] * std::polar(1.0, -2.0 * pi * static_cast<double>(j * k) / static_cast<double>(n));
        }
        for (std::size_t k = 0; k < n; ++k) {
            out[k] += coef * std::polar(1.0, 2.0 * pi * static_cast<double>(j * k) / static_cast<double>(n)) /
                      static_cast<double>(n);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("dyadic bank edges and frame function")
{
    const Grid g(1024, 1.0);
    for (int j : {1, 3, 9}) {
        const auto bank = shannon_bank(j, 1, g);
        CHECK(bank.low_pass_edge() == doctest::Approx(std::ldexp(pi, -j)));
        for (const auto& band : bank.bands()) {
            CHECK(band.lo == doctest::Approx(bank.low_pass_edge() * std::exp2(band.index)));
            CHECK(band.hi == doctest::Approx(2.0 * band.lo));
            for (std::size_t b : band.bins) {
                const double w = std::abs(g.omega(b));
                CHECK(w > band.lo);
                CHECK(w <= band.hi * (1.0 + 1e-12));
            }
        }
        const auto frame = bank.frame_function();
        for (double v : frame) {
            CHECK(v == 1.0);
        }
        const auto [lo, hi] = bank.frame_bounds();
        CHECK(lo == 1.0);
        CHECK(hi == 1.0);
    }
    // Nyquist bin sits in the top band.
    const auto bank = shannon_bank(4, 1, g);
    const auto& top = bank.bands().back().bins;
    CHECK(std::find(top.begin(), top.end(), 512u) != top.end());
}

TEST_CASE("eight bands per octave")
{
    const Grid g(4096, 1.0);
    const auto bank = shannon_bank(6, 8, g);
    const double bin = 2.0 * pi / g.period();
    std::size_t total = bank.low_pass_bins().size();
    for (const auto& band : bank.bands()) {
        CHECK(band.hi / band.lo == doctest::Approx(std::exp2(1.0 / 8.0)));
        // Both signs of frequency; each side holds the bins of (lo, hi].
        const double per_side = (band.hi - band.lo) / bin;
        const double count = band.index == 6 * 8 - 1 ? (band.bins.size() + 1) / 2.0 : band.bins.size() / 2.0;
        CHECK(std::abs(count - per_side) <= 1.0);
        total += band.bins.size();
    }
    CHECK(total == g.size());
    CHECK(bank.bands().size() + bank.dropped_bands() == 48);
}

TEST_CASE("bank validation")
{
    const Grid g(64, 1.0);
    CHECK_NOTHROW(shannon_bank(5, 1, g));
    CHECK_THROWS_AS(shannon_bank(6, 1, g), std::invalid_argument);
    CHECK_THROWS_AS(shannon_bank(2, 0, g), std::invalid_argument);
    CHECK_THROWS_AS(shannon_bank(-1, 1, g), std::invalid_argument);
    const auto small = shannon_bank(5, 8, g);
    CHECK(small.dropped_bands() > 0);
    CHECK(LayerModule{small}.admissible());
}

TEST_CASE("propagation")
{
    const Grid g(256, 1.0);
    const auto net = make_net(g, {{5, 1}}, 2);
    const auto f = random_real(g, 1);
    CHECK(propagate(net, f, {}).samples() == f.samples());
    CHECK_THROWS_AS(propagate(net, f, {99}), std::invalid_argument);

    // A signal inside one band passes the filter unchanged.
    const auto& bands = net.module_at(0).bank.bands();
    for (std::size_t b = 0; b < bands.size(); ++b) {
        std::vector<long> ks;
        for (std::size_t bin : bands[b].bins) {
            const long k = g.signed_index(bin);
            if (k > 0 && k < 128) {
                ks.push_back(k);
            }
        }
        if (ks.empty()) {
            continue;
        }
        const auto in_band = cosines(g, ks, b);
        const auto u = propagate(net, in_band, {static_cast<int>(b)});
        CHECK(std::abs(l2_norm(u) - l2_norm(in_band)) <= 1e-8 * l2_norm(in_band));
    }
}

TEST_CASE("two step path matches a direct computation")
{
    const Grid g(64, 0.5);
    const auto net = make_net(g, {{3, 2}, {2, 1}}, 2);
    const auto f = random_real(g, 8);
    const auto& b0 = net.module_at(0).bank.bands();
    const auto& b1 = net.module_at(1).bank.bands();
    for (std::size_t i = 0; i < b0.size(); ++i) {
        for (std::size_t k = 0; k < b1.size(); ++k) {
            auto u = naive_band(f.samples(), 0.5, b0[i].lo, b0[i].hi);
            for (auto& z : u) {
                z = std::abs(z);
            }
            u = naive_band(u, 0.5, b1[k].lo, b1[k].hi);
            for (auto& z : u) {
                z = std::abs(z);
            }
            const auto got = propagate(net, f, {static_cast<int>(i), static_cast<int>(k)});
            CHECK(l2_distance(got, SampledSignal(g, u)) <= 1e-10);
        }
    }
}

TEST_CASE("feature extraction")
{
    const Grid g(512, 1.0);
    const auto net = make_net(g, {{6, 4}, {6, 1}}, 2, 1e-6);
    SUBCASE("zero input")
    {
        const auto feats = extract_features(net, SampledSignal(g));
        CHECK(feats.norm() == 0.0);
        CHECK(feats.entries.size() == 1);
    }
    SUBCASE("low-pass input at depth 0")
    {
        std::vector<long> ks;
        for (std::size_t bin : net.module_at(0).bank.low_pass_bins()) {
            if (g.signed_index(bin) > 0) {
                ks.push_back(g.signed_index(bin));
            }
        }
        const auto f = cosines(g, ks, 3);
        const auto feats = extract_features(net, f, 0);
        REQUIRE(feats.entries.size() == 1);
        CHECK(l2_distance(feats.entries.at({}), f) <= 1e-8 * l2_norm(f));
        CHECK(std::abs(feats.norm() - l2_norm(f)) <= 1e-8 * l2_norm(f));
    }
    SUBCASE("energy never grows")
    {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto f = random_real(g, seed);
            CHECK(extract_features(net, f).norm() <= l2_norm(f) * (1.0 + 1e-9));
        }
    }
    SUBCASE("paths are downward closed")
    {
        const auto feats = extract_features(net, random_real(g, 4));
        for (const auto& [path, s] : feats.entries) {
            if (!path.empty()) {
                Path parent(path.begin(), path.end() - 1);
                CHECK(feats.entries.count(parent) == 1);
            }
        }
        CHECK(feats.eps_path == 1e-6);
    }
    SUBCASE("pruning changes little")
    {
        const auto exact = make_net(g, {{6, 4}, {6, 1}}, 2, 0.0);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto f = random_real(g, seed);
            CHECK(std::abs(extract_features(exact, f).norm() - extract_features(net, f).norm()) <=
                  1e-3 * l2_norm(f));
        }
    }
}

TEST_CASE("layers are non-expansive")
{
    const Grid g(256, 1.0);
    const auto net = make_net(g, {{5, 2}}, 1);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto f = random_real(g, seed);
        for (std::size_t b = 0; b < net.module_at(0).bank.bands().size(); ++b) {
            CHECK(l2_norm(propagate(net, f, {static_cast<int>(b)})) <= l2_norm(f) + 1e-10);
        }
    }
}

TEST_CASE("feature distance")
{
    const Grid g(256, 1.0);
    const auto net = make_net(g, {{5, 2}}, 2);
    const auto a = extract_features(net, random_real(g, 1));
    const auto b = extract_features(net, random_real(g, 2));
    const auto c = extract_features(net, random_real(g, 3));
    CHECK(feature_distance(a, a) == 0.0);
    CHECK(feature_distance(a, FeatureVector{}) == doctest::Approx(a.norm()).epsilon(1e-14));
    CHECK(feature_distance(a, c) <= feature_distance(a, b) + feature_distance(b, c) + 1e-10);
}

TEST_CASE("translation covariance")
{
    const Grid g(512, 1.0);
    const auto net = make_net(g, {{7, 8}, {7, 1}}, 2);
    const auto f = random_real(g, 12);
    CHECK(check_translation_covariance(net, f, 0) == 0.0);
    CHECK(check_translation_covariance(net, f, 17) <= 1e-8);
    CHECK(check_translation_covariance(net, f, 256) <= 1e-8);
    CHECK(check_translation_covariance(net, f, -3) <= 1e-8);
}

TEST_CASE("lipschitz property")
{
    const Grid g(256, 1.0);
    const auto net = make_net(g, {{6, 8}, {6, 1}}, 2);
    const auto f = random_real(g, 1);
    CHECK_FALSE(lipschitz_ratio(net, f, f).has_value());
    const auto est = estimate_lipschitz(net, 200, 17);
    CHECK(est.evaluated == 200);
    MESSAGE("max lipschitz ratio " << est.max_ratio);
    CHECK(est.max_ratio <= 1.0 + 1e-6);

    // Disjoint bands: ratio at most one.
    const auto low = cosines(g, {3, 5}, 1);
    const auto high = cosines(g, {60, 90}, 2);
    const auto r = lipschitz_ratio(net, low, high);
    REQUIRE(r.has_value());
    CHECK(*r <= 1.0);
}

TEST_CASE("energy splits across disjoint dyadic bands")
{
    const Grid g(1024, 1.0);
    const auto net = make_net(g, {{8, 1}}, 1);
    const auto& bands = net.module_at(0).bank.bands();
    // Frequencies strictly inside two different dyadic bands.
    const auto pick = [&](std::size_t b) {
        std::vector<long> ks;
        for (std::size_t bin : bands[b].bins) {
            const long k = g.signed_index(bin);
            if (k > 0 && k < 512) {
                ks.push_back(k);
            }
        }
        return ks;
    };
    const auto f = cosines(g, pick(3), 1);
    const auto h = cosines(g, pick(6), 2);
    const auto phi_f = extract_features(net, f);
    const auto phi_h = extract_features(net, h);
    const auto phi_sum = extract_features(net, f + h);
    FeatureVector combined;
    for (const auto& [path, s] : phi_f.entries) {
        combined.entries.emplace(path, s);
    }
    for (const auto& [path, s] : phi_h.entries) {
        auto [it, fresh] = combined.entries.emplace(path, s);
        if (!fresh) {
            it->second += s;
        }
    }
    // The root low-pass is linear; deeper paths see one signal each.
    CHECK(feature_distance(phi_sum, combined) <= 1e-6 * (l2_norm(f) + l2_norm(h)));
}

TEST_CASE("mollifier limit")
{
    const Grid g(4096, 0.25);
    const double s = 64.0;
    const auto c = tent_coefficients(s, g);
    SUBCASE("no deformation")
    {
        for (const auto& row : root_feature_limit(c, DeformationField(g), s)) {
            CHECK(row.value == 0.0);
            CHECK(row.target == 0.0);
        }
    }
    SUBCASE("tent with alternating field")
    {
        const auto rows = root_feature_limit(c, tau_alternating(s, 4, g), s);
        REQUIRE(rows.size() == 8);
        CHECK(rows.back().mu * s == doctest::Approx(0.5));
        const double gap = rows.back().value / rows.back().target;
        MESSAGE("final mollifier ratio " << gap);
        CHECK(gap >= 0.98);
        CHECK(gap <= 1.02);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(rows[i].value >= rows[i - 1].value - 1e-3 * rows[i].target);
        }
    }
    CHECK_THROWS_AS(root_feature_limit(c, DeformationField(g), 0.25), std::invalid_argument);
}

TEST_CASE("config and csv")
{
    const auto cfg = network_config_from_json(R"({"layers":[{"J":9,"Q":8},{"J":9,"Q":1}],"max_depth":2,"eps_path":0})");
    CHECK(cfg.layers.size() == 2);
    CHECK(cfg.layers[0].q == 8);
    CHECK(cfg.eps_path == 0.0);
    const auto again = network_config_from_json(network_config_to_json(cfg));
    CHECK(again.layers[1].j == 9);
    CHECK(again.max_depth == 2);
    CHECK_THROWS_AS(network_config_from_json(R"({"max_depth":2})"), std::invalid_argument);
    CHECK_THROWS_AS(ScatteringNetwork(NetworkConfig{{}, 2, 0.0}, Grid(64, 1.0)), std::invalid_argument);

    const Grid g(64, 1.0);
    const auto net = make_net(g, {{4, 1}}, 1);
    std::stringstream out;
    write_features_csv(out, extract_features(net, random_real(g, 2)));
    CHECK(out.str().rfind("path,l2_norm\nroot,", 0) == 0);
    CHECK(path_to_string({3, 0}) == "3/0");
}
