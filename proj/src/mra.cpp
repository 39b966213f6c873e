#include "deformlab/mra.hpp"

#include "deformlab/amalgam.hpp"
#include "deformlab/fft.hpp"
#include "deformlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace deformlab {

namespace {

constexpr double pi = std::numbers::pi;

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// Centred cardinal B-spline of degree n via the two-term recursion;
// beta^0 is the indicator of [-1/2, 1/2).
double centred_bspline(int n, double t)
{
    if (n == 0) {
        return (t >= -0.5 && t < 0.5) ? 1.0 : 0.0;
    }
    const double half = 0.5 * (n + 1);
    if (t <= -half || t >= half) {
        return 0.0;
    }
    return ((t + half) * centred_bspline(n - 1, t + 0.5) +
            (half - t) * centred_bspline(n - 1, t - 0.5)) /
           n;
}

bool is_multiple(double value, double unit)
{
    const double steps = value / unit;
    return steps >= 1.0 - 1e-9 && std::abs(steps - std::round(steps)) <= 1e-9 * steps;
}

std::size_t checked_ratio(double value, double unit, const char* what)
{
    if (!is_multiple(value, unit)) {
        throw std::invalid_argument(std::string(what));
    }
    return static_cast<std::size_t>(std::llround(value / unit));
}

double wrap(double x, double period)
{
    double y = std::fmod(x, period);
    if (y < 0.0) {
        y += period;
    }
    if (y >= period) {
        y = 0.0;
    }
    return y;
}

}  // namespace

// ---------------------------------------------------------------------------
// Filters

MraFilter MraFilter::bspline(int degree)
{
    if (degree < 1) {
        throw std::invalid_argument("MraFilter: B-spline degree must be >= 1 (degree 0 is box)");
    }
    return MraFilter(FilterKind::BSpline, degree);
}

MraFilter MraFilter::parse(std::string_view name)
{
    if (name == "box") {
        return box();
    }
    if (name == "shannon") {
        return shannon();
    }
    if (name.rfind("bspline", 0) == 0) {
        const auto digits = name.substr(7);
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string_view::npos) {
            throw std::invalid_argument("MraFilter: bad filter name '" + std::string(name) + "'");
        }
        return bspline(std::stoi(std::string(digits)));
    }
    throw std::invalid_argument("MraFilter: unknown filter '" + std::string(name) + "'");
}

std::string MraFilter::name() const
{
    switch (kind_) {
    case FilterKind::Box:
        return "box";
    case FilterKind::Shannon:
        return "shannon";
    case FilterKind::BSpline:
        return "bspline" + std::to_string(degree_);
    }
    return {};
}

double MraFilter::phi(double t) const
{
    switch (kind_) {
    case FilterKind::Box:
        return (t >= 0.0 && t < 1.0) ? 1.0 : 0.0;
    case FilterKind::Shannon:
        return sinc(pi * t);
    case FilterKind::BSpline:
        return centred_bspline(degree_, degree_ % 2 == 0 ? t - 0.5 : t);
    }
    return 0.0;
}

Complex MraFilter::phi_hat(double w) const
{
    switch (kind_) {
    case FilterKind::Box:
        return std::polar(sinc(0.5 * w), -0.5 * w);
    case FilterKind::Shannon: {
        const double a = std::abs(w);
        if (a < pi) {
            return 1.0;
        }
        return a == pi ? 0.5 : 0.0;
    }
    case FilterKind::BSpline: {
        const double mag = std::pow(sinc(0.5 * w), degree_ + 1);
        return degree_ % 2 == 0 ? std::polar(mag, -0.5 * w) : Complex(mag, 0.0);
    }
    }
    return 0.0;
}

double MraFilter::dphi(double t) const
{
    switch (kind_) {
    case FilterKind::Box:
        throw std::invalid_argument("MraFilter: box filter has no pointwise derivative");
    case FilterKind::Shannon: {
        const double x = pi * t;
        if (std::abs(x) < 1e-4) {
            return -pi * x / 3.0;
        }
        return pi * (x * std::cos(x) - std::sin(x)) / (x * x);
    }
    case FilterKind::BSpline: {
        const double u = degree_ % 2 == 0 ? t - 0.5 : t;
        return centred_bspline(degree_ - 1, u + 0.5) - centred_bspline(degree_ - 1, u - 0.5);
    }
    }
    return 0.0;
}

double MraFilter::support_lo() const
{
    switch (kind_) {
    case FilterKind::Box:
        return 0.0;
    case FilterKind::BSpline:
        return degree_ % 2 == 0 ? -0.5 * degree_ : -0.5 * (degree_ + 1);
    case FilterKind::Shannon:
        break;
    }
    throw std::logic_error("MraFilter: Shannon filter has no compact support");
}

double MraFilter::support_hi() const
{
    switch (kind_) {
    case FilterKind::Box:
        return 1.0;
    case FilterKind::BSpline:
        return degree_ % 2 == 0 ? 0.5 * degree_ + 1.0 : 0.5 * (degree_ + 1);
    case FilterKind::Shannon:
        break;
    }
    throw std::logic_error("MraFilter: Shannon filter has no compact support");
}

int MraFilter::decay_order() const
{
    switch (kind_) {
    case FilterKind::Box:
        return 1;
    case FilterKind::BSpline:
        return degree_ + 1;
    case FilterKind::Shannon:
        return 0;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Spaces and coefficients

MraSpace::MraSpace(MraFilter filter, double scale, Grid grid)
    : filter_(filter), scale_(scale), grid_(grid), m_(0), h_(0)
{
    h_ = checked_ratio(scale, grid.spacing(), "MraSpace: scale must be a multiple of the spacing");
    if (grid.size() % h_ != 0) {
        throw std::invalid_argument("MraSpace: scale must divide the period");
    }
    m_ = grid.size() / h_;
}

MraCoefficients::MraCoefficients(MraSpace space)
    : space_(space), coeffs_(space.size())
{
}

MraCoefficients::MraCoefficients(MraSpace space, std::vector<Complex> coeffs)
    : space_(space), coeffs_(std::move(coeffs))
{
    if (coeffs_.size() != space_.size()) {
        throw std::invalid_argument("MraCoefficients: length must be L / s");
    }
}

// ---------------------------------------------------------------------------
// Riesz bounds and assumptions

RieszBounds riesz_bounds(const MraFilter& filter, std::size_t resolution)
{
    if (resolution < 1024) {
        throw std::invalid_argument("riesz_bounds: need at least 1024 frequency samples");
    }
    RieszBounds out;
    if (filter.kind() == FilterKind::Box) {
        // Integer translates of 1_[0,1) are orthonormal, so the periodization
        // is identically one; the k-sum itself converges only like 1/K.
        out.lower = out.upper = 1.0;
        out.closed_form = true;
        return out;
    }
    long terms = 1;
    if (filter.kind() == FilterKind::BSpline) {
        const int e = 2 * filter.decay_order();
        // Tail over |k| > K bounded by 2 sum_{j >= K} (pi j)^{-e}.
        auto tail = [e](long k) {
            const double kk = static_cast<double>(k);
            return 2.0 * std::pow(pi * kk, -e) * (1.0 + kk / (e - 1.0));
        };
        terms = 1;
        while (tail(terms) > 1e-8) {
            terms *= 2;
            if (terms > (1L << 22)) {
                throw std::domain_error("riesz_bounds: periodization tail does not converge");
            }
        }
        out.tail_bound = tail(terms);
    }
    out.terms = terms;
    out.lower = std::numeric_limits<double>::infinity();
    out.upper = 0.0;
    for (std::size_t i = 0; i < resolution; ++i) {
        const double w = 2.0 * pi * (static_cast<double>(i) + 0.5) / static_cast<double>(resolution);
        double acc = 0.0;
        for (long k = -terms; k <= terms + 1; ++k) {
            acc += std::norm(filter.phi_hat(w - 2.0 * pi * static_cast<double>(k)));
        }
        out.lower = std::min(out.lower, acc);
        out.upper = std::max(out.upper, acc + out.tail_bound);
    }
    return out;
}

namespace {

// Discrete X^{inf,1} norm of a sampled function on [-T, T) with 1/64 cells.
double sampled_wiener_norm(const std::function<double(double)>& fn, double half_length)
{
    constexpr double delta = 1.0 / 64.0;
    const auto n = static_cast<std::size_t>(std::llround(2.0 * half_length / delta));
    std::vector<double> values(n);
    for (std::size_t k = 0; k < n; ++k) {
        values[k] = fn(static_cast<double>(k) * delta - half_length);
    }
    return amalgam_norm_discrete(SampledSignal::from_real(Grid(n, delta), values),
                                 Exponent::infinity(), Exponent::finite(1.0));
}

BranchResult wiener_branch(const MraFilter& filter, bool derivative)
{
    BranchResult out;
    if (derivative && !filter.has_derivative()) {
        out.detail = "derivative is not a function";
        return out;
    }
    auto fn = [&](double t) { return derivative ? filter.dphi(t) : filter.phi(t); };
    const double small = sampled_wiener_norm(fn, 64.0);
    const double large = sampled_wiener_norm(fn, 128.0);
    if (large > small * (1.0 + 1e-3)) {
        out.detail = "norm grows with the sampled window (" + std::to_string(small) + " -> " +
                     std::to_string(large) + ")";
        return out;
    }
    out.holds = true;
    out.value = large;
    return out;
}

BranchResult weighted_branch(const MraFilter& filter, double alpha, bool derivative)
{
    BranchResult out;
    const int m = filter.decay_order();
    auto term = [&](double xi) {
        double v = std::norm(filter.phi_hat(xi)) * std::pow(1.0 + xi * xi, alpha);
        if (derivative) {
            v *= xi * xi;
        }
        return v;
    };
    long terms = 2;
    double tail_bound = 0.0;
    if (m > 0) {
        // |psi_hat(xi)|^2 <= c0 (2/|xi|)^{2 m_eff}; the weight adds |xi|^{2 alpha}.
        const int m_eff = derivative ? m - 1 : m;
        const double c0 = derivative ? 4.0 : 1.0;
        const double e = 2.0 * m_eff - 2.0 * alpha;
        if (e <= 1.0) {
            out.detail = "weighted periodization not summable (decay exponent " + std::to_string(e) +
                         " <= 1)";
            return out;
        }
        const double lead = 2.0 * c0 * std::pow(2.0, alpha) * std::pow(4.0, m_eff);
        auto tail = [&](long k) {
            const double kk = static_cast<double>(k);
            return lead * std::pow(2.0 * pi, -e) * (std::pow(kk, -e) + std::pow(kk, 1.0 - e) / (e - 1.0));
        };
        terms = 4096;
        tail_bound = tail(terms);
    }
    constexpr std::size_t resolution = 1024;
    double sup = 0.0;
    for (std::size_t i = 0; i < resolution; ++i) {
        const double w = 2.0 * pi * (static_cast<double>(i) + 0.5) / resolution;
        double acc = 0.0;
        for (long k = -terms; k <= terms + 1; ++k) {
            acc += term(w - 2.0 * pi * static_cast<double>(k));
        }
        sup = std::max(sup, acc);
    }
    out.holds = true;
    out.value = sup + tail_bound;
    if (tail_bound > 0.0) {
        out.detail = "tail bound " + std::to_string(tail_bound);
    }
    return out;
}

AssumptionB branches(const MraFilter& filter, double alpha, bool derivative)
{
    if (!(alpha > 0.5)) {
        throw std::invalid_argument("verify_assumption_b: alpha must exceed 1/2");
    }
    AssumptionB out;
    out.wiener = wiener_branch(filter, derivative);
    if (derivative && !filter.has_derivative()) {
        out.weighted.detail = "derivative spectrum does not decay";
    } else {
        out.weighted = weighted_branch(filter, alpha, derivative);
    }
    return out;
}

}  // namespace

AssumptionB verify_assumption_b(const MraFilter& filter, double alpha)
{
    return branches(filter, alpha, false);
}

AssumptionB verify_assumption_c(const MraFilter& filter, double alpha)
{
    return branches(filter, alpha, true);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

class Evaluator {
public:
    Evaluator(const MraCoefficients& c, bool derivative)
        : space_(c.space()), coeffs_(c.coeffs()), derivative_(derivative)
    {
        const auto& filter = space_.filter();
        if (derivative && !filter.has_derivative()) {
            throw std::invalid_argument("eval: filter has no derivative");
        }
        if (!filter.compact()) {
            build_trig();
        }
    }

    Complex operator()(double x) const
    {
        const double period = space_.grid().period();
        const double xw = wrap(x, period);
        return space_.filter().compact() ? compact(xw) : trig(xw);
    }

private:
    Complex compact(double x) const
    {
        const auto& filter = space_.filter();
        const double s = space_.scale();
        const long m = static_cast<long>(space_.size());
        const double t = x / s;
        const long first = static_cast<long>(std::ceil(t - filter.support_hi()));
        const long last = static_cast<long>(std::floor(t - filter.support_lo()));
        Complex acc = 0.0;
        for (long n = first; n <= last; ++n) {
            const long idx = ((n % m) + m) % m;
            const double u = t - static_cast<double>(n);
            const double v = derivative_ ? filter.dphi(u) : filter.phi(u);
            if (v != 0.0) {
                acc += coeffs_[static_cast<std::size_t>(idx)] * v;
            }
        }
        const double norm = 1.0 / std::sqrt(s);
        return derivative_ ? acc * (norm / s) : acc * norm;
    }

    // f(x) = sum_k S_k exp(2 pi i k x / L) over |k| <= M/2.
    void build_trig()
    {
        const std::size_t m = space_.size();
        const double s = space_.scale();
        const double period = space_.grid().period();
        const auto a_hat = fft::forward(coeffs_);
        kmin_ = -static_cast<long>(m / 2);
        const long kmax = static_cast<long>(m / 2);
        terms_.resize(static_cast<std::size_t>(kmax - kmin_ + 1));
        for (long k = kmin_; k <= kmax; ++k) {
            const double w = 2.0 * pi * static_cast<double>(k) / period;
            const Complex ph = space_.filter().phi_hat(s * w);
            const long idx = ((k % static_cast<long>(m)) + static_cast<long>(m)) % static_cast<long>(m);
            Complex v = std::sqrt(s) * ph * a_hat[static_cast<std::size_t>(idx)] / period;
            if (derivative_) {
                v *= Complex(0.0, w);
            }
            terms_[static_cast<std::size_t>(k - kmin_)] = v;
        }
    }

    Complex trig(double x) const
    {
        const double theta = 2.0 * pi * x / space_.grid().period();
        const Complex step = std::polar(1.0, theta);
        Complex acc = 0.0;
        Complex z;
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            if (i % 32 == 0) {
                z = std::polar(1.0, theta * static_cast<double>(kmin_ + static_cast<long>(i)));
            } else {
                z *= step;
            }
            acc += terms_[i] * z;
        }
        return acc;
    }

    const MraSpace& space_;
    const std::vector<Complex>& coeffs_;
    bool derivative_;
    long kmin_ = 0;
    std::vector<Complex> terms_;
};

std::vector<double> grid_points(const Grid& grid)
{
    std::vector<double> xs(grid.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
        xs[k] = grid.x(k);
    }
    return xs;
}

}  // namespace

std::vector<Complex> eval_many(const MraCoefficients& c, std::span<const double> xs)
{
    const Evaluator ev(c, false);
    std::vector<Complex> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out[i] = ev(xs[i]);
    }
    return out;
}

std::vector<Complex> eval_derivative_many(const MraCoefficients& c, std::span<const double> xs)
{
    const Evaluator ev(c, true);
    std::vector<Complex> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out[i] = ev(xs[i]);
    }
    return out;
}

Complex eval_at(const MraCoefficients& c, double x)
{
    const double xs[1] = {x};
    return eval_many(c, xs)[0];
}

SampledSignal synthesize(const MraCoefficients& c)
{
    const auto& grid = c.space().grid();
    return SampledSignal(grid, eval_many(c, grid_points(grid)));
}

SampledSignal synthesize_derivative(const MraCoefficients& c)
{
    const auto& grid = c.space().grid();
    return SampledSignal(grid, eval_derivative_many(c, grid_points(grid)));
}

// ---------------------------------------------------------------------------
// Projection

MraCoefficients project(const SampledSignal& f, const MraSpace& space)
{
    require_same_grid(f.grid(), space.grid(), "project");
    const std::size_t m = space.size();
    const std::size_t h = space.step();

    MraCoefficients unit(space);
    unit.coeffs()[0] = 1.0;
    const auto basis_hat = fft::forward(synthesize(unit).samples());
    const auto f_hat = fft::forward(f.samples());

    std::vector<Complex> a_hat(m);
    std::vector<double> gram(m);
    double gram_max = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        Complex num = 0.0;
        double den = 0.0;
        for (std::size_t a = 0; a < h; ++a) {
            const std::size_t idx = j + a * m;
            num += f_hat[idx] * std::conj(basis_hat[idx]);
            den += std::norm(basis_hat[idx]);
        }
        a_hat[j] = num;
        gram[j] = den;
        gram_max = std::max(gram_max, den);
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (!(gram[j] > 1e-12 * gram_max)) {
            throw std::domain_error("project: Riesz lower bound degenerates on this grid");
        }
        a_hat[j] /= gram[j];
    }
    return MraCoefficients(space, fft::inverse(a_hat));
}

MraCoefficients random_coefficients(const MraSpace& space, std::uint64_t seed,
                                    std::uint64_t stream, bool complex_valued)
{
    CounterRng rng(seed, stream);
    std::vector<Complex> a(space.size());
    for (auto& v : a) {
        const double re = rng.normal();
        const double im = complex_valued ? rng.normal() : 0.0;
        v = {re, im};
    }
    return MraCoefficients(space, std::move(a));
}

MraCoefficients sinc_packet_coefficients(double band_limit, const Grid& grid)
{
    if (!(band_limit > 0.0) || band_limit > pi / grid.spacing() * (1.0 + 1e-12)) {
        throw std::invalid_argument("sinc_packet_coefficients: band limit must lie in (0, pi/delta]");
    }
    MraSpace space(MraFilter::shannon(), pi / band_limit, grid);
    if (space.size() % 2 != 0) {
        throw std::invalid_argument("sinc_packet_coefficients: centre is not a lattice point");
    }
    MraCoefficients c(space);
    c.coeffs()[space.size() / 2] = 1.0;
    const double norm = l2_norm(synthesize(c));
    c.coeffs()[space.size() / 2] = 1.0 / norm;
    return c;
}

MraCoefficients tent_coefficients(double s, const Grid& grid, TentNormalization norm)
{
    MraSpace space(MraFilter::bspline(1), s, grid);
    if (space.size() % 2 != 0) {
        throw std::invalid_argument("tent_coefficients: L / s must be even");
    }
    MraCoefficients c(space);
    c.coeffs()[space.size() / 2] = norm == TentNormalization::L2Scaled ? 1.0 : std::sqrt(s);
    return c;
}

// ---------------------------------------------------------------------------
// Besov and Sobolev norms

namespace {

SampledSignal project_onto(const SampledSignal& f, const MraFilter& filter, int j)
{
    const double scale = std::ldexp(1.0, j);
    if (!is_multiple(scale, f.grid().spacing()) ||
        f.size() % static_cast<std::size_t>(std::llround(scale / f.grid().spacing())) != 0) {
        throw std::invalid_argument("besov: dyadic scale 2^" + std::to_string(j) +
                                    " is not representable on the grid");
    }
    return synthesize(project(f, MraSpace(filter, scale, f.grid())));
}

}  // namespace

SampledSignal detail_projection(const SampledSignal& f, const MraFilter& filter, int j)
{
    return project_onto(f, filter, j - 1) - project_onto(f, filter, j);
}

BesovNorm besov_norm(const SampledSignal& f, const MraFilter& filter, double sigma, int j_min,
                     int j_max)
{
    if (j_max <= j_min) {
        throw std::invalid_argument("besov_norm: need j_min < j_max");
    }
    BesovNorm out;
    auto finer = project_onto(f, filter, j_min);
    for (int j = j_min + 1; j <= j_max; ++j) {
        auto coarser = project_onto(f, filter, j);
        const double d = l2_distance(finer, coarser);
        out.details.push_back(d);
        out.sum += std::pow(2.0, -j * sigma) * d;
        finer = std::move(coarser);
    }
    out.remainder = std::pow(2.0, -j_max * sigma) * l2_norm(finer);
    return out;
}

double h_alpha_tensor_norm(const SampledSignal& f, double alpha)
{
    if (!(alpha >= 0.0)) {
        throw std::invalid_argument("h_alpha_tensor_norm: alpha must be nonnegative");
    }
    const auto F = spectrum(f);
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double w = F.omega(j);
        acc += std::pow(1.0 + w * w, alpha) * std::norm(F[j]);
    }
    return std::sqrt(acc / f.grid().period());
}

ReverseHolder reverse_holder_check(const MraSpace& space, const std::vector<double>& radii,
                                   std::size_t trials, std::uint64_t seed)
{
    ReverseHolder out;
    out.ratios.assign(radii.size(), 0.0);
    const double s = space.scale();
    const bool grad = space.filter().has_derivative();
    double grad_c = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto c = random_coefficients(space, seed, t);
        const auto f = synthesize(c);
        const double nf = l2_norm(f);
        if (nf == 0.0) {
            continue;
        }
        std::optional<SampledSignal> df;
        if (grad) {
            df = synthesize_derivative(c);
        }
        for (std::size_t i = 0; i < radii.size(); ++i) {
            const double r = radii[i];
            const double env = std::sqrt(1.0 + r / s) * nf;
            const double ratio =
                amalgam_norm(f, {Exponent::infinity(), Exponent::finite(2.0), r}) / env;
            out.ratios[i] = std::max(out.ratios[i], ratio);
            if (df) {
                const double g =
                    amalgam_norm(*df, {Exponent::infinity(), Exponent::finite(2.0), r});
                grad_c = std::max(grad_c, g / (env / s));
            }
        }
    }
    for (double v : out.ratios) {
        out.constant = std::max(out.constant, v);
    }
    if (grad) {
        out.gradient_constant = grad_c;
    }
    return out;
}

}  // namespace deformlab
