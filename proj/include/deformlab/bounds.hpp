#pragma once

// Harnesses that evaluate both sides of the deformation stability estimates
// and the sharpness constructions, and summarize them as BoundReports.

#include "deformlab/scattering.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace deformlab {

struct RegimeRow {
    std::string label;  // which quantity the row measures
    double ratio = 0.0;  // ||tau||_inf / s (or the swept parameter)
    double omega = 0.0;  // ||omega||_inf for modulated rows
    double lhs = 0.0;
    double rhs = 0.0;  // envelope
    double quotient = 0.0;  // lhs / rhs, 0 when rhs = 0
};

struct SlopeFit {
    std::string label;
    double slope = 0.0;
    double stderr_ = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
};

struct Check {
    std::string name;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool pass = false;
};

struct BoundReport {
    std::string theorem_id;
    std::vector<RegimeRow> regimes;
    double fitted_constant = 0.0;   // max quotient over the envelope rows
    double constant_spread = 0.0;   // max / min quotient over the same rows
    std::vector<SlopeFit> slope_fits;
    std::vector<Check> checks;
    std::map<std::string, double> diagnostics;

    bool passed() const;
    const Check* find_check(const std::string& name) const;
    std::string to_json() const;
    void write_csv(std::ostream& out) const;
};

/// Least squares line through (log x, log y) with the usual standard error.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, std::string label = {});

/// (r) for r <= 1, r^{1/2} beyond.
double two_regime_envelope(double ratio);

struct SensitivityConfig {
    std::string filter = "bspline1";
    double alpha = 1.0;  // Assumption B/C parameter
    double s = 8.0;
    std::size_t n = 4096;
    double spacing = 1.0;
    std::vector<double> ratios;  // default 2^-6 .. 2^6
    std::size_t trials = 8;
    std::size_t support_atoms = 3;  // random coefficients around the centre
    std::uint64_t seed = 1;
    std::optional<NetworkConfig> network;  // adds feature-distance rows
    double small_slope_lo = 0.9;
    double small_slope_hi = 1.1;
    double large_slope_max = 0.6;
    double spread_max = 4.0;
};

struct BesovConfig {
    std::string filter = "bspline1";
    std::vector<double> tent_scales{2.0, 8.0, 32.0};
    std::vector<double> amplitude_factors{0.25, 0.5, 1.0, 2.0};
    std::size_t n = 8192;
    double spacing = 0.25;
    double sigma = 0.5;
    double remainder_max = 0.1;
    double spread_max = 2.0;
    double growth_max = 1.4142135623730951 * 1.3;
};

struct SharpLargeConfig {
    std::size_t n = 4096;
    double spacing = 1.0;
    double band_limit = 0.39269908169872414;  // pi / 8
    double rk_min = 4.0;
    double rk_max = 64.0;
    std::size_t points = 9;
    double slope_tol = 0.05;
    double plateau_tol = 0.02;
};

struct SharpSmallConfig {
    double s = 64.0;
    std::size_t n = 1024;
    double spacing = 1.0;
    std::vector<int> n_alt{4, 8, 16, 32};
    int j = 6;
    int q = 1;
    int depth = 1;
    double norm_tol = 0.02;
    double feature_slope_lo = 0.85;
    double feature_slope_hi = 1.15;
    double low_slope = -1.5;
    double low_slope_tol = 0.2;
    double cross_spread_max = 2.0;
};

struct RandomMeanConfig {
    std::string filter = "bspline1";  // f is the centred atom of U_s (the tent for bspline1)
    double s = 32.0;
    std::size_t n = 1024;
    double spacing = 1.0;
    std::vector<double> amplitude_ratios{0.125, 0.5, 1.0, 2.0, 8.0};
    std::size_t n_mc = 40;
    std::uint64_t seed = 7;
    NetworkConfig network{{{9, 8}, {9, 1}}, 2, 0.0};
    double se_max = 0.1;
    double spread_max = 4.0;
};

struct ModulatedConfig {
    SensitivityConfig base;
    double tau_ratio = 1.0 / 1024.0;
    std::vector<double> omega_amplitudes{1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0};
    std::vector<double> constant_phases{1e-3, 0.1, 1.0};
    double phase_tol = 1e-8;
    double slope_lo = 0.9;
    double slope_hi = 1.1;
};

BoundReport verify_sensitivity(const SensitivityConfig& config);
BoundReport verify_besov(const BesovConfig& config);
BoundReport sharpness_large_regime(const SharpLargeConfig& config);
BoundReport sharpness_small_regime(const SharpSmallConfig& config);
BoundReport verify_random_mean(const RandomMeanConfig& config);
BoundReport verify_modulated(const ModulatedConfig& config);

/// Reruns the sensitivity sweep on the mu-rescaled problem (spacing / mu,
/// s / mu, amplitudes / mu) and returns the largest relative change of any
/// lhs / rhs quotient.
double dimensional_consistency(const SensitivityConfig& config, double mu);

/// E[min{(|tau|/s)^2, |tau|/s}] for tau ~ Uniform[-A, A].
double uniform_envelope_moment(double amplitude, double s);

/// Integer j with 2^{-j} <= N_alt / (2 s) < 2^{-j+1}.
int bracket_exponent(int n_alt, double s);

SensitivityConfig sensitivity_config_from_json(const std::string& text);
BesovConfig besov_config_from_json(const std::string& text);
SharpLargeConfig sharp_large_config_from_json(const std::string& text);
SharpSmallConfig sharp_small_config_from_json(const std::string& text);
RandomMeanConfig random_mean_config_from_json(const std::string& text);
ModulatedConfig modulated_config_from_json(const std::string& text);

/// Dispatch on "sensitivity", "besov", "sharp-large", "sharp-small",
/// "random" or "modulated" with a JSON config (empty text gives defaults).
BoundReport run_theorem(const std::string& theorem, const std::string& config_text);

}  // namespace deformlab
