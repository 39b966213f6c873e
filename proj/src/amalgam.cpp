#include "deformlab/amalgam.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace deformlab {

Exponent Exponent::finite(double p)
{
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw std::invalid_argument("Exponent: finite exponent must lie in [1, inf)");
    }
    return Exponent(p);
}

Exponent Exponent::parse(std::string_view text)
{
    if (text == "inf" || text == "infinity" || text == "Inf" || text == "INF") {
        return infinity();
    }
    std::size_t used = 0;
    double p = 0.0;
    try {
        p = std::stod(std::string(text), &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("Exponent: cannot parse '" + std::string(text) + "'");
    }
    if (used != text.size()) {
        throw std::invalid_argument("Exponent: cannot parse '" + std::string(text) + "'");
    }
    return finite(p);
}

double Exponent::value() const
{
    if (!value_) {
        throw std::logic_error("Exponent: value() on infinite exponent");
    }
    return *value_;
}

std::string Exponent::to_string() const
{
    if (!value_) {
        return "inf";
    }
    std::string s = std::to_string(*value_);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') {
        s.pop_back();
    }
    return s;
}

std::size_t window_half_width(const Grid& grid, double r)
{
    const double steps = r / grid.spacing();
    if (!(steps >= 1.0 - 1e-9) || !std::isfinite(steps)) {
        throw std::invalid_argument("amalgam: window radius must be at least one grid spacing");
    }
    return static_cast<std::size_t>(std::floor(steps + 1e-9));
}

namespace {

bool covers_torus(std::size_t n, std::size_t w) { return 2 * w + 1 >= n; }

// Window power sums sum_{|m| <= W} a_{k+m}, accumulated from the centre
// outwards so that widening the window can only increase the result.
std::vector<double> window_sums(const std::vector<double>& a, std::size_t w)
{
    const std::size_t n = a.size();
    std::vector<double> out(n);
    if (covers_torus(n, w)) {
        double total = 0.0;
        for (double v : a) {
            total += v;
        }
        std::fill(out.begin(), out.end(), total);
        return out;
    }
    for (std::size_t k = 0; k < n; ++k) {
        double acc = a[k];
        for (std::size_t m = 1; m <= w; ++m) {
            acc += a[(k + m) % n];
            acc += a[(k + n - m) % n];
        }
        out[k] = acc;
    }
    return out;
}

std::vector<double> sliding_max(const std::vector<double>& a, std::size_t w)
{
    const std::size_t n = a.size();
    std::vector<double> out(n);
    if (covers_torus(n, w)) {
        const double m = *std::max_element(a.begin(), a.end());
        std::fill(out.begin(), out.end(), m);
        return out;
    }
    // Walk the unrolled sequence t = -W .. N-1+W; the deque front holds the
    // index of the window maximum, values decreasing towards the back.
    const long nl = static_cast<long>(n);
    const long wl = static_cast<long>(w);
    auto at = [&](long t) { return a[static_cast<std::size_t>(((t % nl) + nl) % nl)]; };
    std::deque<long> dq;
    for (long t = -wl; t < nl + wl; ++t) {
        const double v = at(t);
        while (!dq.empty() && at(dq.back()) <= v) {
            dq.pop_back();
        }
        dq.push_back(t);
        const long centre = t - wl;
        if (centre >= 0) {
            while (dq.front() < centre - wl) {
                dq.pop_front();
            }
            out[static_cast<std::size_t>(centre)] = at(dq.front());
        }
    }
    return out;
}

std::vector<double> local_norms(const SampledSignal& f, Exponent p, std::size_t w)
{
    const auto mag = f.abs();
    if (p.is_infinite()) {
        return sliding_max(mag, w);
    }
    const double pv = p.value();
    std::vector<double> powered(mag.size());
    std::transform(mag.begin(), mag.end(), powered.begin(),
                   [pv](double v) { return std::pow(v, pv); });
    auto sums = window_sums(powered, w);
    const double delta = f.grid().spacing();
    for (auto& v : sums) {
        v = std::pow(delta * v, 1.0 / pv);
    }
    return sums;
}

double outer_norm(const std::vector<double>& inner, Exponent q, double weight)
{
    if (q.is_infinite()) {
        return inner.empty() ? 0.0 : *std::max_element(inner.begin(), inner.end());
    }
    const double qv = q.value();
    std::vector<double> powered(inner.size());
    if (qv == 2.0) {
        // Same operations as l2_norm so that window_sup and the (inf, 2)
        // norm agree bit for bit.
        std::transform(inner.begin(), inner.end(), powered.begin(),
                       [](double v) { return v * v; });
        return std::sqrt(weight * exact_sum(powered));
    }
    std::transform(inner.begin(), inner.end(), powered.begin(),
                   [qv](double v) { return std::pow(v, qv); });
    return std::pow(weight * exact_sum(powered), 1.0 / qv);
}

}  // namespace

double amalgam_norm(const SampledSignal& f, const AmalgamParams& params)
{
    const std::size_t w = window_half_width(f.grid(), params.r);
    const auto inner = local_norms(f, params.p, w);
    return outer_norm(inner, params.q, f.grid().spacing());
}

double amalgam_norm_discrete(const SampledSignal& f, Exponent p, Exponent q)
{
    const double delta = f.grid().spacing();
    const double per_cell = 1.0 / delta;
    const double rounded = std::round(per_cell);
    if (rounded < 1.0 || std::abs(per_cell - rounded) > 1e-9 * per_cell) {
        throw std::invalid_argument("amalgam_norm_discrete: 1/delta must be an integer");
    }
    const auto m = static_cast<std::size_t>(rounded);
    if (f.size() % m != 0) {
        throw std::invalid_argument("amalgam_norm_discrete: period must be a whole number of cells");
    }
    const auto mag = f.abs();
    std::vector<double> cells(f.size() / m);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        double acc = 0.0;
        for (std::size_t i = c * m; i < (c + 1) * m; ++i) {
            if (p.is_infinite()) {
                acc = std::max(acc, mag[i]);
            } else {
                acc += std::pow(mag[i], p.value());
            }
        }
        cells[c] = p.is_infinite() ? acc : std::pow(delta * acc, 1.0 / p.value());
    }
    return outer_norm(cells, q, 1.0);
}

SampledSignal window_sup(const SampledSignal& f, double r)
{
    const std::size_t w = window_half_width(f.grid(), r);
    return SampledSignal::from_real(f.grid(), sliding_max(f.abs(), w));
}

SampledSignal dilate(const SampledSignal& f, double r)
{
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw std::invalid_argument("dilate: factor must be positive");
    }
    return SampledSignal(Grid(f.size(), f.grid().spacing() / r), f.samples());
}

double check_rescaling(const SampledSignal& f, Exponent p, Exponent q, double r)
{
    const double steps = r / f.grid().spacing();
    if (!(r > 0.0) || std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
        throw std::invalid_argument("check_rescaling: r must be a multiple of the spacing");
    }
    const double lhs = amalgam_norm(f, {p, q, r});
    if (lhs == 0.0) {
        return 0.0;
    }
    const double rhs = std::pow(r, p.reciprocal() + q.reciprocal()) *
                       amalgam_norm(dilate(f, r), {p, q, 1.0});
    return std::abs(lhs - rhs) / lhs;
}

EmbeddingCheck check_embedding_const(const std::vector<SampledSignal>& signals, Exponent p1,
                                     Exponent p2, Exponent q, double r)
{
    if (p2.reciprocal() > p1.reciprocal()) {
        throw std::invalid_argument("check_embedding_const: need p1 <= p2");
    }
    EmbeddingCheck out;
    const double scale = std::pow(r, p1.reciprocal() - p2.reciprocal());
    for (const auto& f : signals) {
        const double rhs = amalgam_norm(f, {p2, q, r});
        if (rhs == 0.0) {
            ++out.skipped;
            continue;
        }
        const double lhs = amalgam_norm(f, {p1, q, r});
        out.constant = std::max(out.constant, lhs / (scale * rhs));
        ++out.evaluated;
    }
    return out;
}

ConvolutionDilationCheck check_convolution_dilation(
    const std::vector<std::pair<SampledSignal, SampledSignal>>& pairs,
    const ConvolutionExponents& e, double r, const std::vector<double>& dilations)
{
    constexpr double tol = 1e-12;
    if (std::abs(e.p1.reciprocal() + e.p2.reciprocal() - 1.0 - e.p.reciprocal()) > tol ||
        std::abs(e.q1.reciprocal() + e.q2.reciprocal() - 1.0 - e.q.reciprocal()) > tol) {
        throw std::invalid_argument(
            "check_convolution_dilation: need 1/p1 + 1/p2 = 1 + 1/p and 1/q1 + 1/q2 = 1 + 1/q");
    }
    ConvolutionDilationCheck out;
    const double hi = std::max(e.p.reciprocal(), e.q.reciprocal());
    const double lo = std::min(e.p.reciprocal(), e.q.reciprocal());
    for (const auto& [f, g] : pairs) {
        const double nf = amalgam_norm(f, {e.p1, e.q1, r});
        const double ng = amalgam_norm(g, {e.p2, e.q2, r});
        const double base = amalgam_norm(f, {e.p, e.q, r});
        if (nf == 0.0 || ng == 0.0 || base == 0.0) {
            ++out.skipped;
            continue;
        }
        const double conv = amalgam_norm(convolve(f, g), {e.p, e.q, r});
        out.c_conv = std::max(out.c_conv, conv * r / (nf * ng));
        for (double s : dilations) {
            const double expo = s <= 1.0 ? hi : lo;
            const double dil = amalgam_norm(dilate(f, s), {e.p, e.q, r});
            out.c_dil = std::max(out.c_dil, dil / (std::pow(s, -expo) * base));
        }
    }
    return out;
}

}  // namespace deformlab
