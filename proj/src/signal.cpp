#include "deformlab/signal.hpp"

#include "deformlab/fft.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace deformlab {

Grid::Grid(std::size_t n_samples, double spacing) : n_(n_samples), spacing_(spacing)
{
    if (n_samples < 2) {
        throw std::invalid_argument("Grid: need at least two samples");
    }
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
        throw std::invalid_argument("Grid: spacing must be positive and finite");
    }
}

long Grid::signed_index(std::size_t j) const
{
    const auto n = static_cast<long>(n_);
    const auto jj = static_cast<long>(j);
    // Bins j >= ceil(N/2) alias to negative frequencies.
    return jj < (n + 1) / 2 ? jj : jj - n;
}

double Grid::omega(std::size_t j) const
{
    return 2.0 * std::numbers::pi * static_cast<double>(signed_index(j)) / period();
}

void require_same_grid(const Grid& a, const Grid& b, const char* where)
{
    if (!(a == b)) {
        throw std::invalid_argument(std::string(where) + ": grid mismatch");
    }
}

SampledSignal::SampledSignal(Grid grid) : grid_(grid), samples_(grid.size()) {}

SampledSignal::SampledSignal(Grid grid, std::vector<Complex> samples)
    : grid_(grid), samples_(std::move(samples))
{
    if (samples_.size() != grid_.size()) {
        throw std::invalid_argument("SampledSignal: sample count does not match grid");
    }
    for (const auto& v : samples_) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw std::invalid_argument("SampledSignal: non-finite sample");
        }
    }
}

SampledSignal SampledSignal::from_real(Grid grid, const std::vector<double>& values)
{
    std::vector<Complex> s(values.begin(), values.end());
    return SampledSignal(grid, std::move(s));
}

SampledSignal& SampledSignal::operator+=(const SampledSignal& other)
{
    require_same_grid(grid_, other.grid_, "SampledSignal::operator+=");
    for (std::size_t k = 0; k < samples_.size(); ++k) {
        samples_[k] += other.samples_[k];
    }
    return *this;
}

SampledSignal& SampledSignal::operator-=(const SampledSignal& other)
{
    require_same_grid(grid_, other.grid_, "SampledSignal::operator-=");
    for (std::size_t k = 0; k < samples_.size(); ++k) {
        samples_[k] -= other.samples_[k];
    }
    return *this;
}

SampledSignal& SampledSignal::operator*=(Complex scale)
{
    for (auto& v : samples_) {
        v *= scale;
    }
    return *this;
}

SampledSignal SampledSignal::shifted(long shift) const
{
    const auto n = static_cast<long>(samples_.size());
    SampledSignal out(grid_);
    for (long k = 0; k < n; ++k) {
        long src = (k - shift) % n;
        if (src < 0) {
            src += n;
        }
        out.samples_[static_cast<std::size_t>(k)] = samples_[static_cast<std::size_t>(src)];
    }
    return out;
}

std::vector<double> SampledSignal::abs() const
{
    std::vector<double> out(samples_.size());
    std::transform(samples_.begin(), samples_.end(), out.begin(),
                   [](const Complex& v) { return std::abs(v); });
    return out;
}

SampledSignal operator+(SampledSignal a, const SampledSignal& b) { return a += b; }
SampledSignal operator-(SampledSignal a, const SampledSignal& b) { return a -= b; }
SampledSignal operator*(Complex scale, SampledSignal a) { return a *= scale; }

Spectrum::Spectrum(Grid grid, std::vector<Complex> coefficients)
    : grid_(grid), coefficients_(std::move(coefficients))
{
    if (coefficients_.size() != grid_.size()) {
        throw std::invalid_argument("Spectrum: coefficient count does not match grid");
    }
}

Spectrum spectrum(const SampledSignal& f)
{
    auto coeffs = fft::forward(f.samples());
    const double delta = f.grid().spacing();
    for (auto& c : coeffs) {
        c *= delta;
    }
    return Spectrum(f.grid(), std::move(coeffs));
}

SampledSignal inverse(const Spectrum& F)
{
    auto samples = fft::inverse(F.coefficients());
    const double inv_delta = 1.0 / F.grid().spacing();
    for (auto& v : samples) {
        v *= inv_delta;
    }
    return SampledSignal(F.grid(), std::move(samples));
}

double exact_sum(std::span<const double> values)
{
    // Shewchuk's partials with a correctly rounded final step (as in Python's fsum).
    std::vector<double> partials;
    double plain = 0.0;
    for (double v : values) {
        plain += v;
    }
    if (!std::isfinite(plain)) {
        return plain;
    }
    for (double x : values) {
        std::size_t i = 0;
        for (double y : partials) {
            if (std::abs(x) < std::abs(y)) {
                std::swap(x, y);
            }
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) {
                partials[i++] = lo;
            }
            x = hi;
        }
        partials.resize(i);
        partials.push_back(x);
    }
    std::size_t n = partials.size();
    if (n == 0) {
        return 0.0;
    }
    double hi = partials[--n];
    double lo = 0.0;
    while (n > 0) {
        const double x = hi;
        const double y = partials[--n];
        hi = x + y;
        lo = y - (hi - x);
        if (lo != 0.0) {
            break;
        }
    }
    if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
        const double y = lo * 2.0;
        const double x = hi + y;
        if (y == x - hi) {
            hi = x;
        }
    }
    return hi;
}

double l2_norm_squared(const SampledSignal& f)
{
    std::vector<double> sq(f.size());
    std::transform(f.samples().begin(), f.samples().end(), sq.begin(),
                   [](const Complex& v) {
                       // |v|^2 rather than std::norm so that window sups of
                       // |f| reproduce the same bits.
                       const double a = std::abs(v);
                       return a * a;
                   });
    return f.grid().spacing() * exact_sum(sq);
}

double l2_norm(const SampledSignal& f) { return std::sqrt(l2_norm_squared(f)); }

Complex inner(const SampledSignal& f, const SampledSignal& g)
{
    require_same_grid(f.grid(), g.grid(), "inner");
    Complex acc = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        acc += f[k] * std::conj(g[k]);
    }
    return f.grid().spacing() * acc;
}

double l2_distance(const SampledSignal& f, const SampledSignal& g)
{
    require_same_grid(f.grid(), g.grid(), "l2_distance");
    std::vector<double> sq(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        sq[k] = std::norm(f[k] - g[k]);
    }
    return std::sqrt(f.grid().spacing() * exact_sum(sq));
}

SampledSignal convolve(const SampledSignal& f, const SampledSignal& g)
{
    require_same_grid(f.grid(), g.grid(), "convolve");
    auto F = spectrum(f);
    const auto G = spectrum(g);
    for (std::size_t j = 0; j < F.coefficients().size(); ++j) {
        F[j] *= G[j];
    }
    return inverse(F);
}

SampledSignal make_tent(double s, const Grid& grid, TentNormalization norm)
{
    const double delta = grid.spacing();
    const double steps = s / delta;
    if (!(s > 0.0) || std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
        throw std::invalid_argument("make_tent: scale must be a positive multiple of the spacing");
    }
    if (2.0 * s > grid.period() * (1.0 + 1e-12)) {
        throw std::invalid_argument("make_tent: support 2s exceeds the period");
    }
    const double centre = grid.period() / 2.0;
    const double amplitude = norm == TentNormalization::L2Scaled ? 1.0 / std::sqrt(s) : 1.0;
    SampledSignal f(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double v = 1.0 - std::abs(grid.x(k) - centre) / s;
        f[k] = v > 0.0 ? amplitude * v : 0.0;
    }
    return f;
}

SampledSignal make_sinc_packet(double band_limit, const Grid& grid)
{
    const double nyquist = std::numbers::pi / grid.spacing();
    if (!(band_limit > 0.0) || band_limit > nyquist * (1.0 + 1e-12)) {
        throw std::invalid_argument("make_sinc_packet: band limit must lie in (0, pi/delta]");
    }
    const double centre = grid.period() / 2.0;
    const double edge_tol = 1e-9 * band_limit;
    std::vector<Complex> coeffs(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double w = std::abs(grid.omega(j));
        double weight = 0.0;
        if (w < band_limit - edge_tol) {
            weight = 1.0;
        } else if (w <= band_limit + edge_tol) {
            weight = 0.5;
        }
        // Phase shift to place the peak at the centre of the period.
        coeffs[j] = weight * std::polar(1.0, -grid.omega(j) * centre);
    }
    // The unpaired Nyquist bin of an even grid stands for both +pi and -pi.
    if (grid.size() % 2 == 0 && std::abs(nyquist - band_limit) <= edge_tol) {
        coeffs[grid.size() / 2] = std::polar(1.0, -nyquist * centre);
    }
    auto f = inverse(Spectrum(grid, std::move(coeffs)));
    for (auto& v : f.samples()) {
        v = v.real();
    }
    f *= 1.0 / l2_norm(f);
    return f;
}

void write_csv(std::ostream& out, const SampledSignal& f)
{
    out << "index,x,re,im\n";
    out.precision(17);
    for (std::size_t k = 0; k < f.size(); ++k) {
        out << k << ',' << f.grid().x(k) << ',' << f[k].real() << ',' << f[k].imag() << '\n';
    }
}

void write_csv(std::ostream& out, const Spectrum& F)
{
    out << "k,omega,re,im\n";
    out.precision(17);
    for (std::size_t j = 0; j < F.coefficients().size(); ++j) {
        out << F.grid().signed_index(j) << ',' << F.omega(j) << ',' << F[j].real() << ','
            << F[j].imag() << '\n';
    }
}

SampledSignal read_signal_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("index,x,re,im", 0) != 0) {
        throw std::invalid_argument("read_signal_csv: expected header index,x,re,im");
    }
    std::vector<double> xs;
    std::vector<Complex> values;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::stringstream row(line);
        std::string cell;
        double fields[4];
        for (double& field : fields) {
            if (!std::getline(row, cell, ',')) {
                throw std::invalid_argument("read_signal_csv: short row: " + line);
            }
            field = std::stod(cell);
        }
        if (static_cast<std::size_t>(fields[0]) != values.size()) {
            throw std::invalid_argument("read_signal_csv: indices must be 0..N-1 in order");
        }
        xs.push_back(fields[1]);
        values.emplace_back(fields[2], fields[3]);
    }
    if (values.size() < 2) {
        throw std::invalid_argument("read_signal_csv: need at least two rows");
    }
    const Grid grid(values.size(), xs[1] - xs[0]);
    return SampledSignal(grid, std::move(values));
}

SampledSignal read_signal_csv_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open " + path);
    }
    return read_signal_csv(in);
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value)
{
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &value, 8);
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    out.write(reinterpret_cast<const char*>(&bits), 8);
}

template <typename T>
T get_le(std::istream& in)
{
    std::uint64_t bits;
    if (!in.read(reinterpret_cast<char*>(&bits), 8)) {
        throw std::invalid_argument("read_binary: truncated stream");
    }
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    T value;
    std::memcpy(&value, &bits, 8);
    return value;
}

}  // namespace

void write_binary(std::ostream& out, const SampledSignal& f)
{
    out.write("DFL1", 4);
    put_le<std::uint64_t>(out, f.size());
    put_le<double>(out, f.grid().spacing());
    for (const auto& v : f.samples()) {
        put_le<double>(out, v.real());
        put_le<double>(out, v.imag());
    }
}

SampledSignal read_binary(std::istream& in)
{
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "DFL1", 4) != 0) {
        throw std::invalid_argument("read_binary: bad magic");
    }
    const auto n = get_le<std::uint64_t>(in);
    const auto spacing = get_le<double>(in);
    std::vector<Complex> values(n);
    for (auto& v : values) {
        const double re = get_le<double>(in);
        const double im = get_le<double>(in);
        v = {re, im};
    }
    return SampledSignal(Grid(n, spacing), std::move(values));
}

}  // namespace deformlab
