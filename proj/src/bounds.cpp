#include "deformlab/bounds.hpp"

#include "deformlab/deform.hpp"
#include "deformlab/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace deformlab {

using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

double quotient(double lhs, double rhs) { return rhs > 0.0 ? lhs / rhs : 0.0; }

Check make_check(std::string name, double value, double lo, double hi)
{
    return Check{std::move(name), value, lo, hi, value >= lo && value <= hi};
}

void summarize(BoundReport& report, const std::string& label)
{
    double hi = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& row : report.regimes) {
        if (row.label != label || row.rhs <= 0.0) {
            continue;
        }
        hi = std::max(hi, row.quotient);
        if (row.quotient > 0.0) {
            lo = std::min(lo, row.quotient);
        }
    }
    report.fitted_constant = hi;
    report.constant_spread = std::isfinite(lo) ? hi / lo : 0.0;
}

std::vector<double> default_ratios()
{
    std::vector<double> r;
    for (int k = -6; k <= 6; ++k) {
        r.push_back(std::ldexp(1.0, k));
    }
    return r;
}

void require_no_wrap(double reach, const Grid& g, const char* where)
{
    if (reach >= g.period() / 2.0) {
        throw std::invalid_argument(std::string(where) + ": deformation reaches across the period");
    }
}

// Random unit-norm elements of U_s with coefficients only near the centre.
struct TrialSet {
    std::vector<MraCoefficients> coeffs;
    std::vector<SampledSignal> signals;
    double half_support = 0.0;
};

TrialSet make_trials(const SensitivityConfig& cfg)
{
    const auto filter = MraFilter::parse(cfg.filter);
    if (!(riesz_bounds(filter).lower > 0.0) || !verify_assumption_b(filter, cfg.alpha).holds() ||
        !verify_assumption_c(filter, cfg.alpha).holds()) {
        throw std::invalid_argument("verify_sensitivity: filter fails Assumptions A/B/C");
    }
    if (cfg.trials == 0 || cfg.support_atoms == 0) {
        throw std::invalid_argument("verify_sensitivity: need at least one trial and one atom");
    }
    const Grid g(cfg.n, cfg.spacing);
    const MraSpace space(filter, cfg.s, g);
    if (cfg.support_atoms > space.size()) {
        throw std::invalid_argument("verify_sensitivity: more atoms than basis functions");
    }
    TrialSet set;
    const std::size_t first = space.size() / 2 - cfg.support_atoms / 2;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        CounterRng rng(cfg.seed, t);
        std::vector<Complex> a(space.size(), 0.0);
        for (std::size_t i = 0; i < cfg.support_atoms; ++i) {
            a[first + i] = rng.normal();
        }
        MraCoefficients c(space, std::move(a));
        const double norm = l2_norm(synthesize(c));
        for (auto& v : c.coeffs()) {
            v /= norm;
        }
        set.signals.push_back(synthesize(c));
        set.coeffs.push_back(std::move(c));
    }
    const double atoms_reach = (static_cast<double>(cfg.support_atoms) / 2.0 + 2.0) * cfg.s;
    set.half_support = filter.compact() ? atoms_reach : g.period() / 2.0;
    return set;
}

struct SweepCell {
    double l2 = 0.0;
    double feature = 0.0;
    double sup = 0.0;
};

// Worst-case fields of amplitude ratio * s for every trial, optionally with a
// constant phase omega.
std::vector<std::vector<SweepCell>> sensitivity_cells(const SensitivityConfig& cfg, const TrialSet& set,
                                                      const std::vector<double>& ratios, double omega)
{
    const Grid g(cfg.n, cfg.spacing);
    std::optional<ScatteringNetwork> net;
    std::vector<FeatureVector> base;
    if (cfg.network) {
        net.emplace(*cfg.network, g);
        for (const auto& f : set.signals) {
            base.push_back(extract_features(*net, f));
        }
    }
    const std::size_t nt = set.coeffs.size();
    std::vector<std::vector<SweepCell>> cells(ratios.size(), std::vector<SweepCell>(nt));
    const long total = static_cast<long>(ratios.size() * nt);
#pragma omp parallel for schedule(dynamic)
    for (long idx = 0; idx < total; ++idx) {
        const std::size_t i = static_cast<std::size_t>(idx) / nt;
        const std::size_t t = static_cast<std::size_t>(idx) % nt;
        auto field = worst_case_field(set.coeffs[t], ratios[i] * cfg.s);
        if (omega != 0.0) {
            field = field.with_omega(std::vector<double>(g.size(), omega));
        }
        const auto moved = deform(set.coeffs[t], field);
        SweepCell cell;
        cell.l2 = l2_distance(moved, set.signals[t]);
        cell.sup = field.sup_norm();
        if (net) {
            cell.feature = feature_distance(extract_features(*net, moved), base[t]);
        }
        cells[i][t] = cell;
    }
    return cells;
}

json config_json(const std::string& text)
{
    if (text.empty()) {
        return json::object();
    }
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
}

template <typename T>
void read(const json& j, const char* key, T& out)
{
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
        }
    }
}

// Norm of the part of f with |omega| <= cutoff.
double low_band_norm(const SampledSignal& f, double cutoff)
{
    auto spec = spectrum(f);
    for (std::size_t j = 0; j < spec.coefficients().size(); ++j) {
        if (std::abs(spec.omega(j)) > cutoff * (1.0 + 1e-12)) {
            spec[j] = 0.0;
        }
    }
    return l2_norm(inverse(spec));
}

}  // namespace

bool BoundReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const Check* BoundReport::find_check(const std::string& name) const
{
    for (const auto& c : checks) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

std::string BoundReport::to_json() const
{
    json rows = json::array();
    for (const auto& r : regimes) {
        rows.push_back({{"label", r.label},
                        {"ratio", r.ratio},
                        {"omega", r.omega},
                        {"lhs", r.lhs},
                        {"rhs_envelope", r.rhs},
                        {"quotient", r.quotient}});
    }
    json fits = json::array();
    for (const auto& f : slope_fits) {
        fits.push_back({{"label", f.label},
                        {"slope", f.slope},
                        {"stderr", f.stderr_},
                        {"intercept", f.intercept},
                        {"points", f.points}});
    }
    json cs = json::array();
    for (const auto& c : checks) {
        cs.push_back({{"name", c.name}, {"value", c.value}, {"lo", c.lo}, {"hi", c.hi}, {"pass", c.pass}});
    }
    json j = {{"theorem_id", theorem_id},
              {"regimes", rows},
              {"fitted_constant", fitted_constant},
              {"constant_spread", constant_spread},
              {"slope_fits", fits},
              {"checks", cs},
              {"diagnostics", diagnostics},
              {"passed", passed()}};
    return j.dump(2);
}

void BoundReport::write_csv(std::ostream& out) const
{
    out << "label,ratio,omega,lhs,rhs_envelope,quotient\n";
    out.precision(17);
    for (const auto& r : regimes) {
        out << r.label << ',' << r.ratio << ',' << r.omega << ',' << r.lhs << ',' << r.rhs << ','
            << r.quotient << '\n';
    }
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, std::string label)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("fit_loglog: need at least two matching points");
    }
    const std::size_t n = x.size();
    std::vector<double> lx(n);
    std::vector<double> ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw std::domain_error("fit_loglog: values must be positive");
        }
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) {
        throw std::domain_error("fit_loglog: x values are all equal");
    }
    SlopeFit fit;
    fit.label = std::move(label);
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.points = n;
    if (n > 2) {
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ly[i] - fit.intercept - fit.slope * lx[i];
            sse += r * r;
        }
        fit.stderr_ = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

double two_regime_envelope(double ratio) { return ratio <= 1.0 ? ratio : std::sqrt(ratio); }

double uniform_envelope_moment(double amplitude, double s)
{
    if (!(s > 0.0) || !(amplitude >= 0.0)) {
        throw std::invalid_argument("uniform_envelope_moment: need A >= 0 and s > 0");
    }
    if (amplitude <= s) {
        return amplitude * amplitude / (3.0 * s * s);
    }
    return amplitude / (2.0 * s) - s / (6.0 * amplitude);
}

int bracket_exponent(int n_alt, double s)
{
    if (n_alt <= 0 || !(s > 0.0)) {
        throw std::invalid_argument("bracket_exponent: need N_alt > 0 and s > 0");
    }
    const double x = n_alt / (2.0 * s);
    int e = 0;
    std::frexp(x, &e);  // x = m 2^e with m in [1/2, 1)
    int j = 1 - e;
    while (std::ldexp(1.0, -j) > x) {
        ++j;
    }
    while (!(x < std::ldexp(1.0, -j + 1))) {
        --j;
    }
    return j;
}

BoundReport verify_sensitivity(const SensitivityConfig& config)
{
    SensitivityConfig cfg = config;
    if (cfg.ratios.empty()) {
        cfg.ratios = default_ratios();
    }
    const auto set = make_trials(cfg);
    const Grid g(cfg.n, cfg.spacing);
    const double max_ratio = *std::max_element(cfg.ratios.begin(), cfg.ratios.end());
    require_no_wrap(max_ratio * cfg.s + set.half_support, g, "verify_sensitivity");
    const auto cells = sensitivity_cells(cfg, set, cfg.ratios, 0.0);

    BoundReport report;
    report.theorem_id = "sensitivity";
    double decoupling = -std::numeric_limits<double>::infinity();
    std::vector<double> sx, sy, lx, ly, fsx, fsy;
    for (std::size_t i = 0; i < cfg.ratios.size(); ++i) {
        std::size_t best = 0;
        std::size_t best_feature = 0;
        for (std::size_t t = 0; t < cells[i].size(); ++t) {
            if (cells[i][t].l2 > cells[i][best].l2) {
                best = t;
            }
            if (cells[i][t].feature > cells[i][best_feature].feature) {
                best_feature = t;
            }
            if (cfg.network) {
                decoupling = std::max(decoupling, cells[i][t].feature - cells[i][t].l2);
            }
        }
        const auto& cell = cells[i][best];
        const double ratio = cell.sup / cfg.s;
        const double rhs = two_regime_envelope(ratio);
        report.regimes.push_back({"l2", ratio, 0.0, cell.l2, rhs, quotient(cell.l2, rhs)});
        if (cfg.network) {
            const auto& fc = cells[i][best_feature];
            const double fr = fc.sup / cfg.s;
            const double frhs = two_regime_envelope(fr);
            report.regimes.push_back({"feature", fr, 0.0, fc.feature, frhs, quotient(fc.feature, frhs)});
        }
        if (ratio > 0.0 && cell.l2 > 0.0) {
            if (ratio <= 1.0 + 1e-12) {
                sx.push_back(cell.sup);
                sy.push_back(cell.l2);
            }
            if (ratio >= 1.0 - 1e-12) {
                lx.push_back(cell.sup);
                ly.push_back(cell.l2);
            }
        }
    }
    summarize(report, "l2");
    if (sx.size() >= 2) {
        report.slope_fits.push_back(fit_loglog(sx, sy, "small_regime"));
        const auto& f = report.slope_fits.back();
        report.checks.push_back(make_check("small_regime_slope", f.slope, cfg.small_slope_lo, cfg.small_slope_hi));
    }
    if (lx.size() >= 2) {
        report.slope_fits.push_back(fit_loglog(lx, ly, "large_regime"));
        const auto& f = report.slope_fits.back();
        report.checks.push_back(make_check("large_regime_slope", f.slope, -std::numeric_limits<double>::infinity(),
                                           cfg.large_slope_max));
    }
    report.checks.push_back(make_check("constant_spread", report.constant_spread, 1.0, cfg.spread_max));
    if (cfg.network) {
        report.checks.push_back(make_check("decoupling", decoupling, -std::numeric_limits<double>::infinity(), 1e-9));
        report.diagnostics["decoupling_max_excess"] = decoupling;
    }
    report.diagnostics["envelope_at_boundary"] = two_regime_envelope(1.0);
    report.diagnostics["trials"] = static_cast<double>(cfg.trials);
    return report;
}

double dimensional_consistency(const SensitivityConfig& config, double mu)
{
    if (!(mu > 0.0)) {
        throw std::invalid_argument("dimensional_consistency: mu must be positive");
    }
    SensitivityConfig scaled = config;
    scaled.spacing = config.spacing / mu;
    scaled.s = config.s / mu;
    const auto a = verify_sensitivity(config);
    const auto b = verify_sensitivity(scaled);
    if (a.regimes.size() != b.regimes.size()) {
        throw std::logic_error("dimensional_consistency: row count changed");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.regimes.size(); ++i) {
        const double qa = a.regimes[i].quotient;
        const double qb = b.regimes[i].quotient;
        const double scale = std::max(std::abs(qa), std::numeric_limits<double>::min());
        worst = std::max(worst, std::abs(qa - qb) / scale);
        worst = std::max(worst, std::abs(a.regimes[i].ratio - b.regimes[i].ratio) /
                                    std::max(a.regimes[i].ratio, std::numeric_limits<double>::min()));
    }
    return worst;
}

BoundReport verify_besov(const BesovConfig& cfg)
{
    const auto filter = MraFilter::parse(cfg.filter);
    if (!(filter.kind() == FilterKind::Shannon || filter == MraFilter::bspline(1))) {
        throw std::invalid_argument("verify_besov: needs the Shannon or BSpline(1) MRA");
    }
    const Grid g(cfg.n, cfg.spacing);
    int e = 0;
    if (std::frexp(cfg.spacing, &e) != 0.5) {
        throw std::invalid_argument("verify_besov: spacing must be a power of two");
    }
    const int j_min = e - 1;
    int j_max = j_min;
    while (std::ldexp(1.0, j_max + 2) <= g.period()) {
        ++j_max;
    }

    BoundReport report;
    report.theorem_id = "besov";
    std::vector<double> per_scale;
    double growth = 0.0;
    for (double a_scale : cfg.tent_scales) {
        const auto c = tent_coefficients(a_scale, g);
        const auto f = synthesize(c);
        const auto besov = besov_norm(f, filter, cfg.sigma, j_min, j_max);
        const std::string tag = "tent_" + std::to_string(static_cast<long long>(a_scale));
        report.diagnostics[tag + "_besov"] = besov.sum;
        report.diagnostics[tag + "_remainder"] = besov.remainder;
        report.checks.push_back(make_check(tag + "_remainder_fraction", besov.remainder / besov.sum, 0.0,
                                           cfg.remainder_max));
        double best = 0.0;
        std::vector<std::pair<double, double>> by_factor;
        for (double factor : cfg.amplitude_factors) {
            const double amp = factor * a_scale;
            require_no_wrap(amp + a_scale, g, "verify_besov");
            const auto field = worst_case_field(c, amp);
            const double lhs = l2_distance(deform(c, field), f);
            const double rhs = std::sqrt(field.sup_norm()) * besov.sum;
            report.regimes.push_back({tag, field.sup_norm() / a_scale, 0.0, lhs, rhs, quotient(lhs, rhs)});
            best = std::max(best, quotient(lhs, rhs));
            by_factor.emplace_back(factor, lhs);
        }
        for (const auto& [factor, lhs] : by_factor) {
            if (factor < 1.0) {
                continue;
            }
            for (const auto& [other, lhs2] : by_factor) {
                if (other == 2.0 * factor && lhs > 0.0) {
                    growth = std::max(growth, lhs2 / lhs);
                }
            }
        }
        per_scale.push_back(best);
        report.diagnostics[tag + "_constant"] = best;
    }
    const auto [lo, hi] = std::minmax_element(per_scale.begin(), per_scale.end());
    report.fitted_constant = *hi;
    report.constant_spread = *lo > 0.0 ? *hi / *lo : 0.0;
    report.checks.push_back(make_check("constant_spread", report.constant_spread, 1.0, cfg.spread_max));
    report.checks.push_back(make_check("mid_regime_growth", growth, 0.0, cfg.growth_max));
    report.diagnostics["j_min"] = j_min;
    report.diagnostics["j_max"] = j_max;
    return report;
}

BoundReport sharpness_large_regime(const SharpLargeConfig& cfg)
{
    const Grid g(cfg.n, cfg.spacing);
    const double r = cfg.band_limit;
    const auto c = sinc_packet_coefficients(r, g);
    const auto f = synthesize(c);
    if (cfg.points < 2 || !(cfg.rk_min > 0.0) || !(cfg.rk_max > cfg.rk_min)) {
        throw std::invalid_argument("sharpness_large_regime: bad R K range");
    }
    if (cfg.rk_max / r >= g.period() / 2.0) {
        throw std::invalid_argument("sharpness_large_regime: plateau wraps around the period");
    }
    BoundReport report;
    report.theorem_id = "sharp-large";
    const double plateau = eval_at(c, g.period() / 2.0).real();
    const double expected = std::sqrt(r / pi);
    report.diagnostics["plateau"] = plateau;
    report.diagnostics["plateau_expected"] = expected;
    report.checks.push_back(make_check("plateau_relative_error", std::abs(plateau / expected - 1.0), 0.0,
                                       cfg.plateau_tol));
    report.diagnostics["norm_at_k0"] = l2_norm(deform(c, tau_radial_identity(0.0, g)));

    std::vector<double> ks, deformed, diff;
    for (std::size_t i = 0; i < cfg.points; ++i) {
        const double rk = cfg.rk_min * std::pow(cfg.rk_max / cfg.rk_min,
                                                static_cast<double>(i) / static_cast<double>(cfg.points - 1));
        const double k = rk / r;
        const auto moved = deform(c, tau_radial_identity(k, g));
        const double a = l2_norm(moved);
        const double b = l2_distance(moved, f);
        const double env = std::sqrt(rk);
        report.regimes.push_back({"deformed", rk, 0.0, a, env, quotient(a, env)});
        report.regimes.push_back({"difference", rk, 0.0, b, env, quotient(b, env)});
        ks.push_back(k);
        deformed.push_back(a);
        diff.push_back(b);
    }
    summarize(report, "deformed");
    report.slope_fits.push_back(fit_loglog(ks, deformed, "deformed"));
    report.slope_fits.push_back(fit_loglog(ks, diff, "difference"));
    report.checks.push_back(make_check("deformed_slope", report.slope_fits[0].slope, 0.5 - cfg.slope_tol,
                                       0.5 + cfg.slope_tol));
    return report;
}

BoundReport sharpness_small_regime(const SharpSmallConfig& cfg)
{
    const Grid g(cfg.n, cfg.spacing);
    const auto c = tent_coefficients(cfg.s, g);
    const auto f = synthesize(c);
    const ScatteringNetwork net(NetworkConfig{{{cfg.j, cfg.q}}, cfg.depth, 0.0}, g);
    const auto phi_f = extract_features(net, f);

    BoundReport report;
    report.theorem_id = "sharp-small";
    std::vector<double> inv_n, feats, ns, lows;
    std::vector<double> cross_consts;
    bool brackets_ok = true;
    for (int n_alt : cfg.n_alt) {
        const double cell = cfg.s / n_alt;
        if (n_alt <= 0 || n_alt % 2 != 0 || cell < 2.0 * cfg.spacing * (1.0 - 1e-12) ||
            cell > std::ldexp(cfg.spacing, cfg.j) / 2.0 * (1.0 + 1e-12)) {
            throw std::invalid_argument("sharpness_small_regime: N_alt violates the cell constraints");
        }
        require_no_wrap(cfg.s + cell, g, "sharpness_small_regime");
        const auto moved = deform(c, tau_alternating(cfg.s, n_alt, g));
        const auto diff = moved - f;
        const double err = l2_norm(diff);
        const double feat = feature_distance(extract_features(net, moved), phi_f);
        const int j = bracket_exponent(n_alt, cfg.s);
        const double cutoff = std::ldexp(1.0, -j);
        const double x = n_alt / (2.0 * cfg.s);
        brackets_ok = brackets_ok && cutoff <= x && x < 2.0 * cutoff;
        const double low = low_band_norm(diff, cutoff);
        const double high = std::sqrt(std::max(0.0, err * err - low * low));
        const double inv = 1.0 / n_alt;
        const std::string tag = "N" + std::to_string(n_alt);
        report.regimes.push_back({"l2", inv, 0.0, err, inv, quotient(err, inv)});
        report.regimes.push_back({"feature", inv, 0.0, feat, inv, quotient(feat, inv)});
        report.regimes.push_back({"low_band", inv, 0.0, low, std::pow(inv, 1.5), quotient(low, std::pow(inv, 1.5))});
        report.regimes.push_back({"cross_band", inv, 0.0, high, inv, quotient(high, inv)});
        report.checks.push_back(make_check("norm_" + tag, std::abs(err * n_alt - 1.0), 0.0, cfg.norm_tol));
        report.diagnostics["j_" + tag] = j;
        inv_n.push_back(inv);
        feats.push_back(feat);
        ns.push_back(n_alt);
        lows.push_back(low);
        cross_consts.push_back(high * n_alt);
    }
    summarize(report, "feature");
    report.checks.push_back(make_check("bracket_exact", brackets_ok ? 1.0 : 0.0, 1.0, 1.0));
    report.slope_fits.push_back(fit_loglog(inv_n, feats, "feature_vs_inverse_n"));
    report.checks.push_back(make_check("feature_slope", report.slope_fits.back().slope, cfg.feature_slope_lo,
                                       cfg.feature_slope_hi));
    report.slope_fits.push_back(fit_loglog(ns, lows, "low_band_vs_n"));
    report.checks.push_back(make_check("low_band_slope", report.slope_fits.back().slope,
                                       cfg.low_slope - cfg.low_slope_tol, cfg.low_slope + cfg.low_slope_tol));
    const auto [lo, hi] = std::minmax_element(cross_consts.begin(), cross_consts.end());
    report.diagnostics["cross_band_c"] = *lo;
    report.checks.push_back(make_check("cross_band_c_positive", *lo, std::numeric_limits<double>::min(),
                                       std::numeric_limits<double>::infinity()));
    report.checks.push_back(make_check("cross_band_spread", *lo > 0.0 ? *hi / *lo : 0.0, 1.0, cfg.cross_spread_max));
    return report;
}

BoundReport verify_random_mean(const RandomMeanConfig& cfg)
{
    if (cfg.n_mc < 2) {
        throw std::invalid_argument("verify_random_mean: need at least two realizations");
    }
    const Grid g(cfg.n, cfg.spacing);
    MraCoefficients c(MraSpace(MraFilter::parse(cfg.filter), cfg.s, g));
    c.coeffs()[c.space().size() / 2] = 1.0;
    const auto f = synthesize(c);
    const double f2 = l2_norm_squared(f);
    const ScatteringNetwork net(cfg.network, g);
    const auto phi_f = extract_features(net, f);

    BoundReport report;
    report.theorem_id = "random";
    const std::size_t na = cfg.amplitude_ratios.size();
    for (double ratio : cfg.amplitude_ratios) {
        if (!(ratio >= 0.0)) {
            throw std::invalid_argument("verify_random_mean: amplitudes must be >= 0");
        }
        require_no_wrap(ratio * cfg.s + cfg.s, g, "verify_random_mean");
    }
    std::vector<double> feat(na * cfg.n_mc);
    std::vector<double> l2(na * cfg.n_mc);
    const long total = static_cast<long>(na * cfg.n_mc);
#pragma omp parallel for schedule(dynamic)
    for (long idx = 0; idx < total; ++idx) {
        const std::size_t i = static_cast<std::size_t>(idx) / cfg.n_mc;
        const double amp = cfg.amplitude_ratios[i] * cfg.s;
        const auto field = draw_random_field({amp, cfg.seed, static_cast<std::uint64_t>(idx)}, g);
        const auto moved = deform(c, field);
        const double d = feature_distance(extract_features(net, moved), phi_f);
        const double e = l2_distance(moved, f);
        feat[static_cast<std::size_t>(idx)] = d * d;
        l2[static_cast<std::size_t>(idx)] = e * e;
    }
    double worst_se = 0.0;
    for (std::size_t i = 0; i < na; ++i) {
        const double ratio = cfg.amplitude_ratios[i];
        double mean = 0.0;
        double mean_l2 = 0.0;
        for (std::size_t k = 0; k < cfg.n_mc; ++k) {
            mean += feat[i * cfg.n_mc + k];
            mean_l2 += l2[i * cfg.n_mc + k];
        }
        mean /= static_cast<double>(cfg.n_mc);
        mean_l2 /= static_cast<double>(cfg.n_mc);
        double var = 0.0;
        for (std::size_t k = 0; k < cfg.n_mc; ++k) {
            const double d = feat[i * cfg.n_mc + k] - mean;
            var += d * d;
        }
        var /= static_cast<double>(cfg.n_mc - 1);
        const double se = std::sqrt(var / static_cast<double>(cfg.n_mc));
        const double env = uniform_envelope_moment(ratio * cfg.s, cfg.s) * f2;
        report.regimes.push_back({"feature", ratio, 0.0, mean, env, quotient(mean, env)});
        report.regimes.push_back({"l2", ratio, 0.0, mean_l2, env, quotient(mean_l2, env)});
        if (mean > 0.0) {
            worst_se = std::max(worst_se, se / mean);
        }
        report.diagnostics["se_ratio_" + std::to_string(i)] = mean > 0.0 ? se / mean : 0.0;
    }
    summarize(report, "feature");
    report.checks.push_back(make_check("mc_standard_error", worst_se, 0.0, cfg.se_max));
    report.checks.push_back(make_check("constant_spread", report.constant_spread, 1.0, cfg.spread_max));
    return report;
}

BoundReport verify_modulated(const ModulatedConfig& config)
{
    SensitivityConfig base = config.base;
    if (base.ratios.empty()) {
        base.ratios = default_ratios();
    }
    const auto set = make_trials(base);
    const Grid g(base.n, base.spacing);
    const double max_ratio = std::max(*std::max_element(base.ratios.begin(), base.ratios.end()), config.tau_ratio);
    require_no_wrap(max_ratio * base.s + set.half_support, g, "verify_modulated");

    BoundReport report;
    report.theorem_id = "modulated";
    // omega = 0 reproduces the sensitivity rows.
    const auto zero = sensitivity_cells(base, set, base.ratios, 0.0);
    for (std::size_t i = 0; i < base.ratios.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t t = 0; t < zero[i].size(); ++t) {
            if (zero[i][t].l2 > zero[i][best].l2) {
                best = t;
            }
        }
        const double ratio = zero[i][best].sup / base.s;
        const double rhs = two_regime_envelope(ratio);
        report.regimes.push_back({"omega0", ratio, 0.0, zero[i][best].l2, rhs, quotient(zero[i][best].l2, rhs)});
    }
    // Fixed small tau, growing constant phase.
    std::vector<double> ws, ls;
    for (double w : config.omega_amplitudes) {
        const auto cells = sensitivity_cells(base, set, {config.tau_ratio}, w);
        std::size_t best = 0;
        for (std::size_t t = 0; t < cells[0].size(); ++t) {
            if (cells[0][t].l2 > cells[0][best].l2) {
                best = t;
            }
        }
        const double ratio = cells[0][best].sup / base.s;
        const double rhs = two_regime_envelope(ratio) + w;
        report.regimes.push_back({"omega", ratio, w, cells[0][best].l2, rhs, quotient(cells[0][best].l2, rhs)});
        ws.push_back(w);
        ls.push_back(cells[0][best].l2);
    }
    summarize(report, "omega");
    if (ws.size() >= 2) {
        report.slope_fits.push_back(fit_loglog(ws, ls, "omega"));
        report.checks.push_back(make_check("omega_slope", report.slope_fits.back().slope, config.slope_lo,
                                           config.slope_hi));
    }
    // tau = 0 with a constant phase: |e^{i eps} - 1| ||f||.
    double worst = 0.0;
    for (double eps : config.constant_phases) {
        const auto field = DeformationField(g).with_omega(std::vector<double>(g.size(), eps));
        const auto& c = set.coeffs.front();
        const auto& f = set.signals.front();
        const double lhs = l2_distance(deform(c, field), f);
        const double exact = 2.0 * std::abs(std::sin(eps / 2.0)) * l2_norm(f);
        report.regimes.push_back({"constant_phase", 0.0, eps, lhs, eps * l2_norm(f), quotient(lhs, eps * l2_norm(f))});
        worst = std::max(worst, std::abs(lhs - exact));
    }
    report.checks.push_back(make_check("constant_phase_error", worst, 0.0, config.phase_tol));
    return report;
}

SensitivityConfig sensitivity_config_from_json(const std::string& text)
{
    const auto j = config_json(text);
    SensitivityConfig c;
    read(j, "filter", c.filter);
    read(j, "alpha", c.alpha);
    read(j, "s", c.s);
    read(j, "N", c.n);
    read(j, "spacing", c.spacing);
    read(j, "ratios", c.ratios);
    read(j, "trials", c.trials);
    read(j, "support_atoms", c.support_atoms);
    read(j, "seed", c.seed);
    read(j, "small_slope_lo", c.small_slope_lo);
    read(j, "small_slope_hi", c.small_slope_hi);
    read(j, "large_slope_max", c.large_slope_max);
    read(j, "spread_max", c.spread_max);
    if (j.contains("network") && !j.at("network").is_null()) {
        c.network = network_config_from_json(j.at("network").dump());
    }
    return c;
}

BesovConfig besov_config_from_json(const std::string& text)
{
    const auto j = config_json(text);
    BesovConfig c;
    read(j, "filter", c.filter);
    read(j, "tent_scales", c.tent_scales);
    read(j, "amplitude_factors", c.amplitude_factors);
    read(j, "N", c.n);
    read(j, "spacing", c.spacing);
    read(j, "sigma", c.sigma);
    read(j, "remainder_max", c.remainder_max);
    read(j, "spread_max", c.spread_max);
    read(j, "growth_max", c.growth_max);
    return c;
}

SharpLargeConfig sharp_large_config_from_json(const std::string& text)
{
    const auto j = config_json(text);
    SharpLargeConfig c;
    read(j, "N", c.n);
    read(j, "spacing", c.spacing);
    read(j, "R", c.band_limit);
    read(j, "rk_min", c.rk_min);
    read(j, "rk_max", c.rk_max);
    read(j, "points", c.points);
    read(j, "slope_tol", c.slope_tol);
    read(j, "plateau_tol", c.plateau_tol);
    return c;
}

SharpSmallConfig sharp_small_config_from_json(const std::string& text)
{
    const auto j = config_json(text);
    SharpSmallConfig c;
    read(j, "s", c.s);
    read(j, "N", c.n);
    read(j, "spacing", c.spacing);
    read(j, "n_alt", c.n_alt);
    read(j, "J", c.j);
    read(j, "Q", c.q);
    read(j, "depth", c.depth);
    read(j, "norm_tol", c.norm_tol);
    read(j, "feature_slope_lo", c.feature_slope_lo);
    read(j, "feature_slope_hi", c.feature_slope_hi);
    read(j, "low_slope", c.low_slope);
    read(j, "low_slope_tol", c.low_slope_tol);
    read(j, "cross_spread_max", c.cross_spread_max);
    return c;
}

RandomMeanConfig random_mean_config_from_json(const std::string& text)
{
    const auto j = config_json(text);
    RandomMeanConfig c;
    read(j, "filter", c.filter);
    read(j, "s", c.s);
    read(j, "N", c.n);
    read(j, "spacing", c.spacing);
    read(j, "amplitude_ratios", c.amplitude_ratios);
    read(j, "n_mc", c.n_mc);
    read(j, "seed", c.seed);
    read(j, "se_max", c.se_max);
    read(j, "spread_max", c.spread_max);
    if (j.contains("network")) {
        c.network = network_config_from_json(j.at("network").dump());
    }
    return c;
}

ModulatedConfig modulated_config_from_json(const std::string& text)
{
    const auto j = config_json(text);
    ModulatedConfig c;
    if (j.contains("base")) {
        c.base = sensitivity_config_from_json(j.at("base").dump());
    }
    read(j, "tau_ratio", c.tau_ratio);
    read(j, "omega_amplitudes", c.omega_amplitudes);
    read(j, "constant_phases", c.constant_phases);
    read(j, "phase_tol", c.phase_tol);
    read(j, "slope_lo", c.slope_lo);
    read(j, "slope_hi", c.slope_hi);
    return c;
}

BoundReport run_theorem(const std::string& theorem, const std::string& config_text)
{
    if (theorem == "sensitivity") {
        return verify_sensitivity(sensitivity_config_from_json(config_text));
    }
    if (theorem == "besov") {
        return verify_besov(besov_config_from_json(config_text));
    }
    if (theorem == "sharp-large") {
        return sharpness_large_regime(sharp_large_config_from_json(config_text));
    }
    if (theorem == "sharp-small") {
        return sharpness_small_regime(sharp_small_config_from_json(config_text));
    }
    if (theorem == "random") {
        return verify_random_mean(random_mean_config_from_json(config_text));
    }
    if (theorem == "modulated") {
        return verify_modulated(modulated_config_from_json(config_text));
    }
    throw std::invalid_argument("unknown theorem '" + theorem + "'");
}

}  // namespace deformlab
