#pragma once

// Wiener amalgam norms X^{p,q}_r on the periodic grid.
//
// The inner L^p norm runs over the closed window {|y| <= r}, which on the
// grid is W = floor(r / delta) samples on each side. The outer integral is
// evaluated at every grid point.

#include "deformlab/signal.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deformlab {

/// Lebesgue exponent in [1, inf]. Infinity is its own state, not a large float.
class Exponent {
public:
    static Exponent finite(double p);
    static Exponent infinity() { return Exponent(); }
    /// Accepts a number >= 1 or "inf" / "infinity".
    static Exponent parse(std::string_view text);

    bool is_infinite() const { return !value_.has_value(); }
    double value() const;
    /// 1/p, zero for p = inf.
    double reciprocal() const { return value_ ? 1.0 / *value_ : 0.0; }
    std::string to_string() const;

    bool operator==(const Exponent& other) const = default;

private:
    Exponent() = default;
    explicit Exponent(double p) : value_(p) {}
    std::optional<double> value_;
};

struct AmalgamParams {
    Exponent p;
    Exponent q;
    double r;
};

/// Number of grid samples on each side of the closed window of radius r.
std::size_t window_half_width(const Grid& grid, double r);

double amalgam_norm(const SampledSignal& f, const AmalgamParams& params);

/// l^q over unit cells [k, k+1) of the cell-wise L^p norms. Needs 1/delta
/// and L to be integers.
double amalgam_norm_discrete(const SampledSignal& f, Exponent p, Exponent q);

/// Sliding maximum of |f| over the closed radius-r window, O(N).
SampledSignal window_sup(const SampledSignal& f, double r);

/// D_r f(x) = f(r x), realized by reusing the samples on a grid with spacing
/// delta / r.
SampledSignal dilate(const SampledSignal& f, double r);

/// Relative gap between ||f||_{X_r} and r^{1/p+1/q} ||D_r f||_{X_1}.
double check_rescaling(const SampledSignal& f, Exponent p, Exponent q, double r);

struct EmbeddingCheck {
    double constant = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
};

/// max ||f||_{X^{p1,q}_r} / (r^{1/p1-1/p2} ||f||_{X^{p2,q}_r}) over the set.
EmbeddingCheck check_embedding_const(const std::vector<SampledSignal>& signals, Exponent p1,
                                     Exponent p2, Exponent q, double r);

struct ConvolutionExponents {
    Exponent p1, q1;
    Exponent p2, q2;
    Exponent p, q;
};

struct ConvolutionDilationCheck {
    double c_conv = 0.0;
    double c_dil = 0.0;
    std::size_t skipped = 0;
};

/// Empirical constants of the convolution and dilation inequalities. The
/// dilation factors default to {1/4, 1/2, 2, 4}; the dilation constant is
/// measured in the (p, q) norm.
ConvolutionDilationCheck check_convolution_dilation(
    const std::vector<std::pair<SampledSignal, SampledSignal>>& pairs,
    const ConvolutionExponents& exps, double r,
    const std::vector<double>& dilations = {0.25, 0.5, 2.0, 4.0});

}  // namespace deformlab
