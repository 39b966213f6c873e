#pragma once

// Random-deformation error sweeps, weighted polynomial regression and the
// inflection-point scale estimator.

#include "deformlab/mra.hpp"
#include "deformlab/scattering.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace deformlab {

struct SignalSpec {
    std::string kind = "tent";  // "tent" or an MRA filter name (centred atom)
    double s = 128.0;
    std::size_t n = 1024;
};

struct ExperimentNetwork {
    int j = 9;
    std::vector<int> q{8, 1};  // per layer; the last entry repeats
    int depth = 2;
};

struct SweepSpec {
    std::optional<double> a_min;  // default: one grid step
    std::optional<double> a_max;  // default: support length 2 s
    std::size_t points = 64;
    std::size_t n_real = 50;
    bool include_zero = true;
    double variance_floor = 1e-12;
    int degree = 3;
};

struct ExperimentConfig {
    SignalSpec signal;
    ExperimentNetwork network;
    SweepSpec sweep;
    std::uint64_t seed = 2024;
};

ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& config);

/// Layers {J, Q_k} with eps_path = 0.
NetworkConfig experiment_network(const ExperimentNetwork& network);
MraCoefficients experiment_signal(const SignalSpec& signal);
/// Optional 0 followed by `points` log-spaced values in [a_min, a_max].
std::vector<double> amplitude_grid(double a_min, double a_max, std::size_t points, bool include_zero);

struct SweepResult {
    std::vector<double> amplitudes;
    std::vector<std::vector<double>> errors;  // [amplitude][realization]
    std::vector<double> variance;             // sample variance per amplitude
    std::size_t n_real = 0;
    std::uint64_t seed = 0;
    NetworkConfig network;
    double s = 0.0;

    std::vector<double> mean() const;
};

/// e = ||Phi(F_tau f) - Phi(f)||^2 / ||f||^2 for n_real iid Uniform[-A, A]
/// fields at every amplitude. Realization r at amplitude index i uses stream
/// (i << 32) + r.
SweepResult stability_sweep(const MraCoefficients& f, const std::vector<double>& amplitudes,
                            std::size_t n_real, const NetworkConfig& network, std::uint64_t seed);

/// Builds a SweepResult from given errors (variances computed here).
SweepResult sweep_from_errors(std::vector<double> amplitudes, std::vector<std::vector<double>> errors);

struct RegressionFit {
    std::vector<double> coefficients;  // a_0 .. a_degree
    std::vector<double> std_errors;
    std::vector<double> p_values;
    double r_squared = 0.0;
    double adj_r_squared = 0.0;
    double sigma = 0.0;  // residual standard error (weighted)
    std::size_t n = 0;
    std::optional<double> s_hat;  // cubic only, when a_3 != 0
    bool reliable = false;        // |a_3| > 2 se(a_3)
};

/// Weighted least squares polynomial fit through a pivoted QR of the
/// weighted design (x rescaled to [-1, 1]).
RegressionFit wls_polyfit(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& w, int degree);

/// Cubic fit of one realization's errors with weights 1 / variance.
RegressionFit wls_cubic_fit(const SweepResult& sweep, std::size_t realization,
                            double variance_floor = 1e-12, int degree = 3);

/// -a2 / (3 a3).
double s_hat_from(double a2, double a3);

/// (A/s)^2 for A <= s, (3/2)(A/s) - (1/2)(s/A) beyond.
double theoretical_envelope(double amplitude, double s);

struct ScaleEstimate {
    std::vector<double> s_values;           // reliable fits, by realization
    std::vector<std::size_t> used;          // their realization indices
    std::vector<std::size_t> excluded;      // flagged realizations
    double mean = 0.0;
    double std_error = 0.0;
    double t_factor = 0.0;  // Student-t 97.5% quantile at n - 1
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double loo_max_change = 0.0;  // leave-one-amplitude-out, realization 0
    bool failed = false;
    std::string message;
    std::uint64_t seed = 0;
};

/// Fits every realization and aggregates; more than 20% flagged fits fails
/// the estimate.
ScaleEstimate estimate_scale(const SweepResult& sweep, double variance_floor = 1e-12);

struct ExperimentRun {
    ExperimentConfig config;
    SweepResult sweep;
    std::vector<RegressionFit> fits;
    ScaleEstimate estimate;
};

ExperimentRun run_experiment(const ExperimentConfig& config);

void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
std::string fit_to_json(const RegressionFit& fit);
std::string estimate_to_json(const ScaleEstimate& estimate, const ExperimentConfig& config);
/// Error cloud of one realization, its regression curve and the envelope
/// shape scaled to the mean errors.
void write_sweep_svg(std::ostream& out, const ExperimentRun& run, std::size_t realization = 0);

}  // namespace deformlab
