#include "deformlab/experiments.hpp"

#include "deformlab/deform.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <stdexcept>

namespace deformlab {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out)
{
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("experiment config '") + key + "': " + e.what());
        }
    }
}

double sample_variance(const std::vector<double>& v)
{
    if (v.size() < 2) {
        return 0.0;
    }
    double mean = 0.0;
    for (double x : v) {
        mean += x;
    }
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) {
        acc += (x - mean) * (x - mean);
    }
    return acc / static_cast<double>(v.size() - 1);
}

// Half the length of the smallest interval holding the nonzero samples.
double half_support(const SampledSignal& f)
{
    const auto& v = f.samples();
    std::size_t first = v.size();
    std::size_t last = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k] != Complex(0.0)) {
            first = std::min(first, k);
            last = k;
        }
    }
    if (first == v.size()) {
        return 0.0;
    }
    return static_cast<double>(last - first + 1) * f.grid().spacing() / 2.0;
}

double polyval(const std::vector<double>& a, double x)
{
    double acc = 0.0;
    for (std::size_t k = a.size(); k-- > 0;) {
        acc = acc * x + a[k];
    }
    return acc;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("experiment config: ") + e.what());
    }
    ExperimentConfig c;
    if (j.contains("signal")) {
        const auto& s = j.at("signal");
        read(s, "kind", c.signal.kind);
        read(s, "s", c.signal.s);
        read(s, "N", c.signal.n);
    }
    if (j.contains("network")) {
        const auto& n = j.at("network");
        read(n, "J", c.network.j);
        read(n, "depth", c.network.depth);
        if (n.contains("Q")) {
            if (n.at("Q").is_array()) {
                read(n, "Q", c.network.q);
            } else {
                int q = 0;
                read(n, "Q", q);
                c.network.q = {q, 1};
            }
        }
    }
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        double v = 0.0;
        if (s.contains("A_min")) {
            read(s, "A_min", v);
            c.sweep.a_min = v;
        }
        if (s.contains("A_max")) {
            read(s, "A_max", v);
            c.sweep.a_max = v;
        }
        read(s, "points", c.sweep.points);
        read(s, "n_real", c.sweep.n_real);
        read(s, "include_zero", c.sweep.include_zero);
        read(s, "variance_floor", c.sweep.variance_floor);
        read(s, "degree", c.sweep.degree);
    }
    read(j, "seed", c.seed);
    return c;
}

std::string experiment_config_to_json(const ExperimentConfig& c)
{
    json sweep = {{"points", c.sweep.points},
                  {"n_real", c.sweep.n_real},
                  {"include_zero", c.sweep.include_zero},
                  {"variance_floor", c.sweep.variance_floor},
                  {"degree", c.sweep.degree}};
    if (c.sweep.a_min) {
        sweep["A_min"] = *c.sweep.a_min;
    }
    if (c.sweep.a_max) {
        sweep["A_max"] = *c.sweep.a_max;
    }
    const json j = {{"signal", {{"kind", c.signal.kind}, {"s", c.signal.s}, {"N", c.signal.n}}},
                    {"network", {{"J", c.network.j}, {"Q", c.network.q}, {"depth", c.network.depth}}},
                    {"sweep", sweep},
                    {"seed", c.seed}};
    return j.dump(2);
}

NetworkConfig experiment_network(const ExperimentNetwork& network)
{
    if (network.depth < 0 || network.q.empty()) {
        throw std::invalid_argument("experiment network: need depth >= 0 and at least one Q");
    }
    NetworkConfig out;
    out.max_depth = network.depth;
    out.eps_path = 0.0;
    const int layers = std::max(network.depth, 1);
    for (int k = 0; k < layers; ++k) {
        const int q = network.q[std::min<std::size_t>(static_cast<std::size_t>(k), network.q.size() - 1)];
        out.layers.push_back({network.j, q});
    }
    return out;
}

MraCoefficients experiment_signal(const SignalSpec& signal)
{
    const Grid grid(signal.n, 1.0);
    if (signal.kind == "tent") {
        return tent_coefficients(signal.s, grid, TentNormalization::Unit);
    }
    MraCoefficients c(MraSpace(MraFilter::parse(signal.kind), signal.s, grid));
    c.coeffs()[c.space().size() / 2] = 1.0;
    return c;
}

std::vector<double> amplitude_grid(double a_min, double a_max, std::size_t points, bool include_zero)
{
    if (!(a_min > 0.0) || !(a_max > a_min) || points < 2) {
        throw std::invalid_argument("amplitude_grid: need 0 < A_min < A_max and at least two points");
    }
    std::vector<double> a;
    if (include_zero) {
        a.push_back(0.0);
    }
    const double ratio = a_max / a_min;
    for (std::size_t i = 0; i < points; ++i) {
        a.push_back(i + 1 == points ? a_max
                                    : a_min * std::pow(ratio, static_cast<double>(i) /
                                                                  static_cast<double>(points - 1)));
    }
    return a;
}

std::vector<double> SweepResult::mean() const
{
    std::vector<double> m;
    for (const auto& row : errors) {
        double acc = 0.0;
        for (double e : row) {
            acc += e;
        }
        m.push_back(row.empty() ? 0.0 : acc / static_cast<double>(row.size()));
    }
    return m;
}

SweepResult stability_sweep(const MraCoefficients& f, const std::vector<double>& amplitudes,
                            std::size_t n_real, const NetworkConfig& network, std::uint64_t seed)
{
    if (n_real < 2) {
        throw std::invalid_argument("stability_sweep: need at least two realizations");
    }
    if (amplitudes.empty()) {
        throw std::invalid_argument("stability_sweep: empty amplitude grid");
    }
    const Grid& g = f.space().grid();
    const auto base = synthesize(f);
    const double norm2 = l2_norm_squared(base);
    if (!(norm2 > 0.0)) {
        throw std::invalid_argument("stability_sweep: zero signal");
    }
    const double reach = half_support(base);
    for (double a : amplitudes) {
        if (!(a >= 0.0)) {
            throw std::invalid_argument("stability_sweep: amplitudes must be >= 0");
        }
        if (a + reach >= g.period() / 2.0) {
            throw std::invalid_argument("stability_sweep: A_max + support/2 reaches across the period");
        }
    }
    const ScatteringNetwork net(network, g);
    const auto phi = extract_features(net, base);

    SweepResult out;
    out.amplitudes = amplitudes;
    out.n_real = n_real;
    out.seed = seed;
    out.network = network;
    out.s = f.space().scale();
    out.errors.assign(amplitudes.size(), std::vector<double>(n_real));
    const long total = static_cast<long>(amplitudes.size() * n_real);
#pragma omp parallel for schedule(dynamic)
    for (long idx = 0; idx < total; ++idx) {
        const std::size_t i = static_cast<std::size_t>(idx) / n_real;
        const std::size_t r = static_cast<std::size_t>(idx) % n_real;
        const RandomFieldSpec spec{amplitudes[i], seed, (static_cast<std::uint64_t>(i) << 32) + r};
        const auto moved = deform(f, draw_random_field(spec, g));
        const double d = feature_distance(extract_features(net, moved), phi);
        out.errors[i][r] = d * d / norm2;
    }
    for (const auto& row : out.errors) {
        out.variance.push_back(sample_variance(row));
    }
    return out;
}

SweepResult sweep_from_errors(std::vector<double> amplitudes, std::vector<std::vector<double>> errors)
{
    if (amplitudes.size() != errors.size() || errors.empty()) {
        throw std::invalid_argument("sweep_from_errors: one error row per amplitude");
    }
    SweepResult out;
    out.n_real = errors.front().size();
    for (const auto& row : errors) {
        if (row.size() != out.n_real || row.size() < 2) {
            throw std::invalid_argument("sweep_from_errors: rows need the same size >= 2");
        }
        out.variance.push_back(sample_variance(row));
    }
    out.amplitudes = std::move(amplitudes);
    out.errors = std::move(errors);
    return out;
}

RegressionFit wls_polyfit(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& w, int degree)
{
    const std::size_t n = x.size();
    if (degree < 0 || y.size() != n || w.size() != n) {
        throw std::invalid_argument("wls_polyfit: mismatched inputs");
    }
    const auto p = static_cast<std::size_t>(degree) + 1;
    if (n <= p) {
        throw std::invalid_argument("wls_polyfit: need more points than coefficients");
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(w[i] > 0.0) || !std::isfinite(w[i]) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
            throw std::invalid_argument("wls_polyfit: weights must be positive and data finite");
        }
        scale = std::max(scale, std::abs(x[i]));
    }
    if (scale == 0.0) {
        scale = 1.0;
    }
    Eigen::MatrixXd a(n, p);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double sw = std::sqrt(w[i]);
        const double t = x[i] / scale;
        double pw = 1.0;
        for (std::size_t k = 0; k < p; ++k) {
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = sw * pw;
            pw *= t;
        }
        b(static_cast<Eigen::Index>(i)) = sw * y[i];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < static_cast<Eigen::Index>(p)) {
        throw std::domain_error("wls_polyfit: rank-deficient design");
    }
    const Eigen::VectorXd coef = qr.solve(b);
    const Eigen::VectorXd resid = b - a * coef;
    const double sse = resid.squaredNorm();
    const double dof = static_cast<double>(n - p);
    const double sigma2 = sse / dof;

    const auto pi = static_cast<Eigen::Index>(p);
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(pi, pi).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd rinv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(pi, pi));
    const Eigen::MatrixXd cov_perm = rinv * rinv.transpose();
    const auto perm = qr.colsPermutation();
    const Eigen::MatrixXd cov = perm * cov_perm * perm.transpose();

    RegressionFit fit;
    fit.n = n;
    fit.sigma = std::sqrt(sigma2);
    const boost::math::students_t dist(dof);
    for (std::size_t k = 0; k < p; ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        const double unscale = std::pow(scale, static_cast<double>(k));
        const double c = coef(ki) / unscale;
        const double se = std::sqrt(std::max(0.0, sigma2 * cov(ki, ki))) / unscale;
        fit.coefficients.push_back(c);
        fit.std_errors.push_back(se);
        double pv = 1.0;
        if (se > 0.0) {
            pv = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(c / se)));
        } else if (c != 0.0) {
            pv = 0.0;
        }
        fit.p_values.push_back(pv);
    }
    double sw = 0.0;
    double swy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        swy += w[i] * y[i];
    }
    const double ybar = swy / sw;
    double sst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sst += w[i] * (y[i] - ybar) * (y[i] - ybar);
    }
    fit.r_squared = sst > 0.0 ? 1.0 - sse / sst : 0.0;
    fit.adj_r_squared = 1.0 - (1.0 - fit.r_squared) * static_cast<double>(n - 1) / dof;
    if (degree == 3 && fit.coefficients[3] != 0.0) {
        fit.s_hat = s_hat_from(fit.coefficients[2], fit.coefficients[3]);
        fit.reliable = std::abs(fit.coefficients[3]) > 2.0 * fit.std_errors[3] && std::isfinite(*fit.s_hat);
    }
    return fit;
}

RegressionFit wls_cubic_fit(const SweepResult& sweep, std::size_t realization, double variance_floor,
                            int degree)
{
    if (realization >= sweep.n_real) {
        throw std::out_of_range("wls_cubic_fit: realization index");
    }
    const std::set<double> distinct(sweep.amplitudes.begin(), sweep.amplitudes.end());
    if (distinct.size() < 8) {
        throw std::invalid_argument("wls_cubic_fit: need at least 8 distinct amplitudes");
    }
    std::vector<double> y;
    std::vector<double> w;
    for (std::size_t i = 0; i < sweep.amplitudes.size(); ++i) {
        y.push_back(sweep.errors[i][realization]);
        w.push_back(1.0 / std::max(sweep.variance[i], variance_floor));
    }
    return wls_polyfit(sweep.amplitudes, y, w, degree);
}

double s_hat_from(double a2, double a3)
{
    if (a3 == 0.0) {
        throw std::domain_error("s_hat: a3 = 0");
    }
    return -a2 / (3.0 * a3);
}

double theoretical_envelope(double amplitude, double s)
{
    if (!(s > 0.0) || !(amplitude >= 0.0)) {
        throw std::invalid_argument("theoretical_envelope: need A >= 0 and s > 0");
    }
    const double r = amplitude / s;
    return r <= 1.0 ? r * r : 1.5 * r - 0.5 / r;
}

ScaleEstimate estimate_scale(const SweepResult& sweep, double variance_floor)
{
    if (sweep.n_real < 10) {
        throw std::invalid_argument("estimate_scale: need at least 10 realizations");
    }
    ScaleEstimate est;
    est.seed = sweep.seed;
    for (std::size_t r = 0; r < sweep.n_real; ++r) {
        const auto fit = wls_cubic_fit(sweep, r, variance_floor);
        if (fit.reliable) {
            est.s_values.push_back(*fit.s_hat);
            est.used.push_back(r);
        } else {
            est.excluded.push_back(r);
        }
    }
    const auto n = est.s_values.size();
    if (5 * est.excluded.size() > sweep.n_real) {
        est.failed = true;
        est.message = std::to_string(est.excluded.size()) + " of " + std::to_string(sweep.n_real) +
                      " fits flagged unreliable (|a3| within 2 standard errors of 0)";
    }
    if (n >= 2) {
        double mean = 0.0;
        for (double v : est.s_values) {
            mean += v;
        }
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : est.s_values) {
            ss += (v - mean) * (v - mean);
        }
        est.mean = mean;
        est.std_error = std::sqrt(ss / static_cast<double>(n * (n - 1)));
        est.t_factor = boost::math::quantile(boost::math::students_t(static_cast<double>(n - 1)), 0.975);
        est.ci_lo = mean - est.t_factor * est.std_error;
        est.ci_hi = mean + est.t_factor * est.std_error;
    } else if (!est.failed) {
        est.failed = true;
        est.message = "fewer than two reliable fits";
    }

    // Leave one amplitude out on the first realization.
    const auto full = wls_cubic_fit(sweep, 0, variance_floor);
    if (full.s_hat && sweep.amplitudes.size() > 8) {
        for (std::size_t drop = 0; drop < sweep.amplitudes.size(); ++drop) {
            SweepResult sub;
            sub.n_real = 1;
            for (std::size_t i = 0; i < sweep.amplitudes.size(); ++i) {
                if (i != drop) {
                    sub.amplitudes.push_back(sweep.amplitudes[i]);
                    sub.errors.push_back({sweep.errors[i][0]});
                    sub.variance.push_back(sweep.variance[i]);
                }
            }
            try {
                const auto fit = wls_cubic_fit(sub, 0, variance_floor);
                if (fit.s_hat) {
                    est.loo_max_change =
                        std::max(est.loo_max_change, std::abs(*fit.s_hat / *full.s_hat - 1.0));
                }
            } catch (const std::exception&) {
                // too few distinct amplitudes left; skip
            }
        }
    }
    return est;
}

ExperimentRun run_experiment(const ExperimentConfig& config)
{
    ExperimentRun run;
    run.config = config;
    const auto f = experiment_signal(config.signal);
    const double a_min = config.sweep.a_min.value_or(1.0);
    const double a_max = config.sweep.a_max.value_or(2.0 * config.signal.s);
    const auto grid = amplitude_grid(a_min, a_max, config.sweep.points, config.sweep.include_zero);
    run.sweep = stability_sweep(f, grid, config.sweep.n_real, experiment_network(config.network), config.seed);
    for (std::size_t r = 0; r < run.sweep.n_real; ++r) {
        run.fits.push_back(wls_cubic_fit(run.sweep, r, config.sweep.variance_floor, config.sweep.degree));
    }
    if (config.sweep.degree == 3) {
        run.estimate = estimate_scale(run.sweep, config.sweep.variance_floor);
    } else {
        run.estimate.failed = true;
        run.estimate.message = "s_hat is defined for the cubic model only";
        run.estimate.seed = config.seed;
    }
    return run;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep)
{
    out << "A,realization,e\n";
    out.precision(17);
    for (std::size_t i = 0; i < sweep.amplitudes.size(); ++i) {
        for (std::size_t r = 0; r < sweep.errors[i].size(); ++r) {
            out << sweep.amplitudes[i] << ',' << r << ',' << sweep.errors[i][r] << '\n';
        }
    }
}

std::string fit_to_json(const RegressionFit& fit)
{
    json j = {{"coefficients", fit.coefficients},
              {"std_errors", fit.std_errors},
              {"p_values", fit.p_values},
              {"r_squared", fit.r_squared},
              {"adj_r_squared", fit.adj_r_squared},
              {"sigma", fit.sigma},
              {"n", fit.n},
              {"reliable", fit.reliable}};
    j["s_hat"] = fit.s_hat ? json(*fit.s_hat) : json(nullptr);
    return j.dump(2);
}

std::string estimate_to_json(const ScaleEstimate& e, const ExperimentConfig& config)
{
    const json j = {{"mean", e.mean},
                    {"std_error", e.std_error},
                    {"t_factor", e.t_factor},
                    {"ci", {e.ci_lo, e.ci_hi}},
                    {"n_used", e.s_values.size()},
                    {"s_values", e.s_values},
                    {"used_realizations", e.used},
                    {"excluded_realizations", e.excluded},
                    {"relative_error", config.signal.s > 0.0 ? std::abs(e.mean / config.signal.s - 1.0) : 0.0},
                    {"target_s", config.signal.s},
                    {"loo_max_change", e.loo_max_change},
                    {"failed", e.failed},
                    {"message", e.message},
                    {"seed", e.seed}};
    return j.dump(2);
}

void write_sweep_svg(std::ostream& out, const ExperimentRun& run, std::size_t realization)
{
    const auto& sw = run.sweep;
    if (realization >= sw.n_real || realization >= run.fits.size()) {
        throw std::out_of_range("write_sweep_svg: realization index");
    }
    const double width = 800.0;
    const double height = 500.0;
    const double margin = 60.0;
    const double x_max = *std::max_element(sw.amplitudes.begin(), sw.amplitudes.end());
    const auto mean = sw.mean();
    // Envelope shape scaled by least squares onto the mean errors.
    double num = 0.0;
    double den = 0.0;
    std::vector<double> env;
    for (std::size_t i = 0; i < sw.amplitudes.size(); ++i) {
        env.push_back(sw.s > 0.0 ? theoretical_envelope(sw.amplitudes[i], sw.s) : 0.0);
        num += env.back() * mean[i];
        den += env.back() * env.back();
    }
    const double c_env = den > 0.0 ? num / den : 0.0;
    const auto& fit = run.fits[realization];
    double y_max = 0.0;
    for (std::size_t i = 0; i < sw.amplitudes.size(); ++i) {
        y_max = std::max({y_max, sw.errors[i][realization], c_env * env[i],
                          polyval(fit.coefficients, sw.amplitudes[i])});
    }
    if (!(y_max > 0.0)) {
        y_max = 1.0;
    }
    y_max *= 1.05;
    const double x_scale = x_max > 0.0 ? x_max : 1.0;
    auto px = [&](double x) { return margin + (width - 2 * margin) * x / x_scale; };
    auto py = [&](double y) { return height - margin - (height - 2 * margin) * y / y_max; };
    auto polyline = [&](const std::vector<double>& xs, const std::vector<double>& ys, const char* style) {
        out << "<polyline fill=\"none\" " << style << " points=\"";
        char buf[64];
        for (std::size_t i = 0; i < xs.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(xs[i]), py(ys[i]));
            out << buf;
        }
        out << "\"/>\n";
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">A</text>\n";
    out << "<text x=\"15\" y=\"" << height / 2 << "\" transform=\"rotate(-90 15 " << height / 2
        << ")\" text-anchor=\"middle\">squared relative error</text>\n";
    char label[128];
    std::snprintf(label, sizeof label, "x max %.4g, y max %.4g, s = %.4g", x_max, y_max, sw.s);
    out << "<text x=\"" << margin << "\" y=\"" << margin - 20 << "\">" << label << "</text>\n";

    std::vector<double> ys;
    for (std::size_t i = 0; i < sw.amplitudes.size(); ++i) {
        ys.push_back(sw.errors[i][realization]);
    }
    polyline(sw.amplitudes, ys, "stroke=\"steelblue\" stroke-width=\"1.5\"");
    std::vector<double> xs_curve;
    std::vector<double> ys_curve;
    for (int k = 0; k <= 200; ++k) {
        const double x = x_max * k / 200.0;
        xs_curve.push_back(x);
        ys_curve.push_back(std::clamp(polyval(fit.coefficients, x), 0.0, y_max));
    }
    polyline(xs_curve, ys_curve, "stroke=\"black\" stroke-width=\"2\"");
    std::vector<double> ys_env;
    for (double e : env) {
        ys_env.push_back(std::min(c_env * e, y_max));
    }
    polyline(sw.amplitudes, ys_env, "stroke=\"firebrick\" stroke-dasharray=\"6 4\"");
    if (fit.s_hat && *fit.s_hat > 0.0 && *fit.s_hat <= x_max) {
        out << "<line x1=\"" << px(*fit.s_hat) << "\" y1=\"" << margin << "\" x2=\"" << px(*fit.s_hat)
            << "\" y2=\"" << height - margin << "\" stroke=\"gray\" stroke-dasharray=\"2 3\"/>\n";
    }
    out << "</svg>\n";
}

}  // namespace deformlab
