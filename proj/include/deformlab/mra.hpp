#pragma once

// Multiresolution approximation spaces U_s on the periodic grid.
//
// U_s is spanned by the periodized translates s^{-1/2} phi((x - n s)/s),
// n = 0..M-1 with M = L/s. Projection is orthogonal in the sampled inner
// product and is done spectrally through the periodized Gram symbol, so it
// is exact on the grid.

#include "deformlab/signal.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deformlab {

enum class FilterKind { Box, BSpline, Shannon };

class MraFilter {
public:
    /// phi = 1_[0,1).
    static MraFilter box() { return MraFilter(FilterKind::Box, 0); }
    /// Cardinal B-spline of degree n >= 1, centred at 0 (odd n) or 1/2 (even n).
    static MraFilter bspline(int degree);
    /// phi(t) = sin(pi t) / (pi t).
    static MraFilter shannon() { return MraFilter(FilterKind::Shannon, 0); }
    /// "box", "bspline<n>" or "shannon".
    static MraFilter parse(std::string_view name);

    FilterKind kind() const { return kind_; }
    int degree() const { return degree_; }
    std::string name() const;

    double phi(double t) const;
    Complex phi_hat(double w) const;
    bool has_derivative() const { return kind_ != FilterKind::Box; }
    /// Pointwise derivative; one-sided (right) at B-spline knots.
    double dphi(double t) const;

    bool compact() const { return kind_ != FilterKind::Shannon; }
    /// Support [lo, hi] of a compact filter.
    double support_lo() const;
    double support_hi() const;
    /// m with |phi_hat(w)| <= (2/|w|)^m for large |w|; 0 when phi_hat has
    /// compact support.
    int decay_order() const;

    bool operator==(const MraFilter& other) const = default;

private:
    MraFilter(FilterKind kind, int degree) : kind_(kind), degree_(degree) {}
    FilterKind kind_;
    int degree_;
};

class MraSpace {
public:
    /// scale must be a positive multiple of the spacing dividing the period.
    MraSpace(MraFilter filter, double scale, Grid grid);

    const MraFilter& filter() const { return filter_; }
    double scale() const { return scale_; }
    const Grid& grid() const { return grid_; }
    /// Number of basis functions M = L / s.
    std::size_t size() const { return m_; }
    /// Samples per basis step h = s / delta.
    std::size_t step() const { return h_; }

    bool operator==(const MraSpace& other) const = default;

private:
    MraFilter filter_;
    double scale_;
    Grid grid_;
    std::size_t m_;
    std::size_t h_;
};

class MraCoefficients {
public:
    explicit MraCoefficients(MraSpace space);
    MraCoefficients(MraSpace space, std::vector<Complex> coeffs);

    const MraSpace& space() const { return space_; }
    const std::vector<Complex>& coeffs() const { return coeffs_; }
    std::vector<Complex>& coeffs() { return coeffs_; }

private:
    MraSpace space_;
    std::vector<Complex> coeffs_;
};

struct RieszBounds {
    double lower = 0.0;
    double upper = 0.0;
    long terms = 0;           // k-range used on each side
    double tail_bound = 0.0;  // bound on the neglected part of the sum
    bool closed_form = false;
};

/// Essential inf/sup of sum_k |phi_hat(w - 2 pi k)|^2 on a uniform w grid.
RieszBounds riesz_bounds(const MraFilter& filter, std::size_t resolution = 4096);

struct BranchResult {
    bool holds = false;
    double value = 0.0;  // meaningful only when holds
    std::string detail;
};

struct AssumptionB {
    BranchResult wiener;    // phi in X^{inf,1}
    BranchResult weighted;  // weighted periodization bound
    bool holds() const { return wiener.holds || weighted.holds; }
};

AssumptionB verify_assumption_b(const MraFilter& filter, double alpha);
/// The same two branches applied to the derivative of phi.
AssumptionB verify_assumption_c(const MraFilter& filter, double alpha);

MraCoefficients project(const SampledSignal& f, const MraSpace& space);
SampledSignal synthesize(const MraCoefficients& c);
/// Grid samples of the derivative of the expansion.
SampledSignal synthesize_derivative(const MraCoefficients& c);

Complex eval_at(const MraCoefficients& c, double x);
std::vector<Complex> eval_many(const MraCoefficients& c, std::span<const double> xs);
std::vector<Complex> eval_derivative_many(const MraCoefficients& c, std::span<const double> xs);

/// Coefficients of a random element of U_s (iid standard normal, real or complex).
MraCoefficients random_coefficients(const MraSpace& space, std::uint64_t seed,
                                    std::uint64_t stream = 0, bool complex_valued = false);

/// The unit-norm Shannon atom at the centre of the period with band limit R
/// (scale pi/R, which must be a multiple of the spacing).
MraCoefficients sinc_packet_coefficients(double band_limit, const Grid& grid);
/// The L2-normalized tent of half-width s as a BSpline(1) element of U_s.
MraCoefficients tent_coefficients(double s, const Grid& grid,
                                  TentNormalization norm = TentNormalization::L2Scaled);

/// V_j = U_{2^j}. Detail P_{W_j} f = P_{V_{j-1}} f - P_{V_j} f.
SampledSignal detail_projection(const SampledSignal& f, const MraFilter& filter, int j);

struct BesovNorm {
    double sum = 0.0;        // sum_{j_min < j <= j_max} 2^{-j sigma} ||P_{W_j} f||
    double remainder = 0.0;  // 2^{-j_max sigma} ||P_{V_{j_max}} f||
    std::vector<double> details;  // ||P_{W_j} f|| for j = j_min+1 .. j_max
};

BesovNorm besov_norm(const SampledSignal& f, const MraFilter& filter, double sigma, int j_min,
                     int j_max);

/// ||<w>^alpha f_hat||_{L2} with the Parseval normalization (alpha = 0 gives l2_norm).
double h_alpha_tensor_norm(const SampledSignal& f, double alpha);

struct ReverseHolder {
    double constant = 0.0;
    std::optional<double> gradient_constant;  // set when the filter has a derivative
    std::vector<double> ratios;               // per r, max over trials
};

/// max ||f||_{X^{inf,2}_r} / ((1 + r/s)^{1/2} ||f||) over random f in U_s;
/// the gradient variant divides ||f'||_{X^{inf,2}_r} by s^{-1}(1 + r/s)^{1/2} ||f||.
ReverseHolder reverse_holder_check(const MraSpace& space, const std::vector<double>& radii,
                                   std::size_t trials, std::uint64_t seed);

}  // namespace deformlab
