#pragma once

// Uniform periodic grids, sampled signals and their spectra.
//
// Every signal lives on the torus [0, L) sampled at N points with spacing
// delta. Integrals are Riemann sums with weight delta, so the discrete L2
// norm is sqrt(delta * sum |f_k|^2) and convolution carries the same weight
// (a discrete delta of mass one has a single sample of height 1/delta).

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace deformlab {

using Complex = std::complex<double>;

class Grid {
public:
    Grid(std::size_t n_samples, double spacing);

    std::size_t size() const { return n_; }
    double spacing() const { return spacing_; }
    double period() const { return static_cast<double>(n_) * spacing_; }
    double x(std::size_t k) const { return static_cast<double>(k) * spacing_; }

    /// Angular frequency of DFT bin j (FFT ordering, j in [0, N)).
    double omega(std::size_t j) const;
    /// Signed frequency index of DFT bin j in {-floor(N/2), ..., ceil(N/2)-1}.
    long signed_index(std::size_t j) const;

    bool operator==(const Grid& other) const = default;

private:
    std::size_t n_;
    double spacing_;
};

void require_same_grid(const Grid& a, const Grid& b, const char* where);

class SampledSignal {
public:
    explicit SampledSignal(Grid grid);
    SampledSignal(Grid grid, std::vector<Complex> samples);
    static SampledSignal from_real(Grid grid, const std::vector<double>& values);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return samples_.size(); }
    const std::vector<Complex>& samples() const { return samples_; }
    std::vector<Complex>& samples() { return samples_; }
    const Complex& operator[](std::size_t k) const { return samples_[k]; }
    Complex& operator[](std::size_t k) { return samples_[k]; }

    SampledSignal& operator+=(const SampledSignal& other);
    SampledSignal& operator-=(const SampledSignal& other);
    SampledSignal& operator*=(Complex scale);

    /// Circular shift: result[k] = this[k - shift].
    SampledSignal shifted(long shift) const;
    std::vector<double> abs() const;

private:
    Grid grid_;
    std::vector<Complex> samples_;
};

SampledSignal operator+(SampledSignal a, const SampledSignal& b);
SampledSignal operator-(SampledSignal a, const SampledSignal& b);
SampledSignal operator*(Complex scale, SampledSignal a);

/// Fourier-series coefficients F_j = delta * DFT(f)_j, approximating the
/// continuous transform integral at omega_j = 2 pi j / L.
class Spectrum {
public:
    Spectrum(Grid grid, std::vector<Complex> coefficients);

    const Grid& grid() const { return grid_; }
    const std::vector<Complex>& coefficients() const { return coefficients_; }
    std::vector<Complex>& coefficients() { return coefficients_; }
    const Complex& operator[](std::size_t j) const { return coefficients_[j]; }
    Complex& operator[](std::size_t j) { return coefficients_[j]; }
    double omega(std::size_t j) const { return grid_.omega(j); }

private:
    Grid grid_;
    std::vector<Complex> coefficients_;
};

Spectrum spectrum(const SampledSignal& f);
SampledSignal inverse(const Spectrum& F);

/// Correctly rounded sum; the result does not depend on the input order,
/// which keeps norms exactly invariant under circular shifts.
double exact_sum(std::span<const double> values);

double l2_norm(const SampledSignal& f);
double l2_norm_squared(const SampledSignal& f);
/// <f, g> = delta * sum f_k conj(g_k).
Complex inner(const SampledSignal& f, const SampledSignal& g);
double l2_distance(const SampledSignal& f, const SampledSignal& g);

/// Periodic convolution with measure weight delta, computed spectrally.
SampledSignal convolve(const SampledSignal& f, const SampledSignal& g);

enum class TentNormalization { Unit, L2Scaled };

/// Tent of half-width s centred at L/2. Unit: max(0, 1 - |x - L/2|/s).
/// L2Scaled multiplies by s^{-1/2}.
SampledSignal make_tent(double s, const Grid& grid,
                        TentNormalization norm = TentNormalization::L2Scaled);

/// Band-limited packet with flat spectrum on [-R, R] (half weight on bins
/// sitting exactly on the band edge), centred at L/2, unit L2 norm.
SampledSignal make_sinc_packet(double band_limit, const Grid& grid);

// CSV: `index,x,re,im` for signals, `k,omega,re,im` for spectra.
void write_csv(std::ostream& out, const SampledSignal& f);
void write_csv(std::ostream& out, const Spectrum& F);
SampledSignal read_signal_csv(std::istream& in);
SampledSignal read_signal_csv_file(const std::string& path);

// Binary dump: magic "DFL1", u64 N, f64 spacing, then N (re, im) pairs,
// all little-endian.
void write_binary(std::ostream& out, const SampledSignal& f);
SampledSignal read_binary(std::istream& in);

}  // namespace deformlab
