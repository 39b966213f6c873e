// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion numbers...]

#include "deformlab/amalgam.hpp"
#include "deformlab/bounds.hpp"
#include "deformlab/deform.hpp"
#include "deformlab/experiments.hpp"
#include "deformlab/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

using namespace deformlab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

bool all_pass(const BoundReport& r, std::string& detail)
{
    bool ok = true;
    for (const auto& c : r.checks) {
        ok = ok && c.pass;
        if (!c.pass) {
            detail += " failed:" + c.name + "=" + fmt("%.4g", c.value);
        }
    }
    return ok;
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

SampledSignal random_real(const Grid& grid, std::uint64_t seed)
{
    CounterRng rng(seed, 3);
    std::vector<double> v(grid.size());
    for (auto& x : v) {
        x = rng.normal();
    }
    return SampledSignal::from_real(grid, v);
}

NetworkConfig reference_network() { return NetworkConfig{{{9, 8}, {9, 1}}, 2, 0.0}; }

Outcome scale_estimation()
{
    Outcome out{true, ""};
    for (double s : {128.0, 64.0}) {
        ExperimentConfig cfg;
        cfg.signal = {"tent", s, 1024};
        cfg.network = {9, {8, 1}, 2};
        cfg.sweep.n_real = 50;
        const auto t0 = std::chrono::steady_clock::now();
        const auto run = run_experiment(cfg);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto& e = run.estimate;
        const double rel = std::abs(e.mean / s - 1.0);
        out.pass = out.pass && !e.failed && rel <= 0.10;
        out.detail += fmt("s=%g: mean %.3f (sigma %.3f, rel err %.4f", s, e.mean, e.std_error, rel) +
                      fmt(", %g used, %.0f s); ", static_cast<double>(e.s_values.size()), secs);
    }
    return out;
}

Outcome inflection_formula()
{
    const double v = s_hat_from(3.303e-5, -8.700e-8);
    return {std::abs(v - 126.55) <= 0.01, fmt("s_hat = %.4f", v)};
}

Outcome sharp_large()
{
    const auto r = sharpness_large_regime({});
    Outcome out;
    out.detail = fmt("slope %.4f, plateau rel err %.5f", r.slope_fits[0].slope,
                     r.find_check("plateau_relative_error")->value);
    out.pass = all_pass(r, out.detail);
    return out;
}

Outcome sharp_small()
{
    const auto r = sharpness_small_regime({});
    Outcome out;
    double worst = 0.0;
    for (const auto& c : r.checks) {
        if (c.name.rfind("norm_N", 0) == 0) {
            worst = std::max(worst, c.value);
        }
    }
    out.detail = fmt("max |N||F-f|| - 1| %.2e, feature slope %.4f, low-band slope %.4f, cross-band spread %.3f",
                     worst, r.slope_fits[0].slope, r.slope_fits[1].slope,
                     r.find_check("cross_band_spread")->value);
    out.pass = all_pass(r, out.detail);
    return out;
}

Outcome maximal_identity()
{
    bool exact = true;
    std::size_t cases = 0;
    for (std::size_t n : {8u, 16u, 32u, 64u}) {
        const Grid g(n, 0.5);
        for (const auto& filter : {MraFilter::box(), MraFilter::bspline(1), MraFilter::bspline(3), MraFilter::shannon()}) {
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                const auto c = random_coefficients(MraSpace(filter, 2.0, g), seed, 0, seed % 2 == 1);
                for (double r : {0.5, 1.0, 1.5, 4.0, 100.0}) {
                    const auto m = maximal_characterization_check(c, r);
                    exact = exact && m.gap == 0.0;
                    ++cases;
                }
            }
        }
    }
    const Grid g(1024, 1.0);
    double worst = 0.0;
    auto refine = [&](const MraCoefficients& c, double r) {
        const auto m = refined_maximal_check(c, r, 8);
        worst = std::max(worst, m.gap / m.lhs);
    };
    refine(sinc_packet_coefficients(std::numbers::pi / 8.0, g), 4.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        refine(random_coefficients(MraSpace(MraFilter::bspline(3), 8.0, g), seed), 4.0);
        refine(random_coefficients(MraSpace(MraFilter::shannon(), 8.0, g), seed), 2.0);
    }
    return {exact && worst <= 0.02, fmt("%g small-grid cases, ", static_cast<double>(cases)) +
                                        (exact ? "all gaps exactly 0" : "nonzero gap found") +
                                        fmt("; N=1024 refined max relative gap %.4f", worst)};
}

Outcome rescaling()
{
    const Grid g(512, 0.25);
    const auto inf = Exponent::infinity();
    const auto two = Exponent::finite(2.0);
    const auto one = Exponent::finite(1.0);
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto f = band_limited(g, seed, 24);
        for (double r : {2.0, 4.0}) {
            worst = std::max({worst, check_rescaling(f, two, two, r), check_rescaling(f, one, inf, r),
                              check_rescaling(f, inf, two, r)});
        }
    }
    return {worst <= 1e-10, fmt("max discrepancy %.3e", worst)};
}

Outcome network_contracts()
{
    const Grid g(1024, 1.0);
    const ScatteringNetwork net(reference_network(), g);
    bool frame_exact = true;
    for (int d = 0; d < 2; ++d) {
        for (double v : net.module_at(d).bank.frame_function()) {
            frame_exact = frame_exact && v == 1.0;
        }
    }
    const auto lip = estimate_lipschitz(net, 200, 17);
    double cov = 0.0;
    const auto tent = synthesize(tent_coefficients(32.0, g));
    for (long shift : {1L, 17L, 256L, -3L}) {
        cov = std::max({cov, check_translation_covariance(net, tent, shift),
                        check_translation_covariance(net, random_real(g, static_cast<std::uint64_t>(shift + 10)), shift)});
    }
    bool energy_ok = true;
    double energy_ratio = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto f = seed % 2 == 0 ? random_real(g, seed) : synthesize(tent_coefficients(std::ldexp(8.0, static_cast<int>(seed / 2)), g));
        const double fe = extract_features(net, f).norm();
        energy_ok = energy_ok && fe * fe <= l2_norm_squared(f) + 1e-9;
        energy_ratio = std::max(energy_ratio, fe * fe / l2_norm_squared(f));
    }
    const bool ok = frame_exact && lip.max_ratio <= 1.0 + 1e-6 && lip.evaluated == 200 && cov <= 1e-8 &&
                    energy_ok;
    return {ok, std::string("frame exact: ") + (frame_exact ? "yes" : "no") +
                    fmt(", max Lipschitz ratio %.9f over %g pairs, covariance %.2e, max feature/input energy %.6f",
                        lip.max_ratio, static_cast<double>(lip.evaluated), cov, energy_ratio)};
}

Outcome sensitivity()
{
    const auto r = verify_sensitivity({});
    Outcome out;
    out.detail = fmt("small slope %.4f, large slope %.4f, constant spread %.3f, C %.3f", r.slope_fits[0].slope,
                     r.slope_fits[1].slope, r.constant_spread, r.fitted_constant);
    out.pass = all_pass(r, out.detail);
    return out;
}

Outcome random_mean()
{
    const auto r = verify_random_mean({});
    Outcome out;
    out.detail = fmt("spread %.3f, max MC standard error %.4f", r.constant_spread,
                     r.find_check("mc_standard_error")->value);
    std::string q;
    for (const auto& row : r.regimes) {
        if (row.label == "feature") {
            q += fmt(" %.3f", row.quotient);
        }
    }
    out.detail += ", quotients by A/s {1/8,1/2,1,2,8}:" + q;
    out.pass = all_pass(r, out.detail);
    return out;
}

Outcome dimensional()
{
    const double v = dimensional_consistency({}, 0.5);
    return {v <= 1e-8, fmt("max relative change %.3e", v)};
}

Outcome mollifier()
{
    const Grid g(4096, 0.25);
    const double s = 64.0;
    const auto rows = root_feature_limit(tent_coefficients(s, g), tau_alternating(s, 4, g), s);
    const double gap = std::abs(rows.back().value / rows.back().target - 1.0);
    return {gap <= 0.02, fmt("final mu*s %.4g, gap %.4f over %g levels", rows.back().mu * s, gap,
                             static_cast<double>(rows.size()))};
}

}  // namespace

int main(int argc, char** argv)
{
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"scale estimation", scale_estimation},
        {"inflection formula", inflection_formula},
        {"sharpness, large regime", sharp_large},
        {"sharpness, small regime", sharp_small},
        {"maximal-operator identity", maximal_identity},
        {"rescaling identity", rescaling},
        {"network contracts", network_contracts},
        {"two-regime sensitivity", sensitivity},
        {"random-mean bound", random_mean},
        {"dimensional consistency", dimensional},
        {"mollifier limit", mollifier},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        only.insert(std::stoi(argv[i]));
    }
    int failures = 0;
    for (int k = 0; k < 11; ++k) {
        if (!only.empty() && !only.count(k + 1)) {
            continue;
        }
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
