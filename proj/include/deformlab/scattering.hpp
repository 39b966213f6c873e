#pragma once

// Generalized scattering networks with Shannon Littlewood-Paley banks.
//
// A bank with parameters (J, Q) on a grid has the low-pass indicator
// |omega| <= omega_J = 2^{-J} pi / delta and band-pass indicators on
// omega_J 2^{m/Q} < |omega| <= omega_J 2^{(m+1)/Q}, m = 0 .. JQ-1, so the
// bands tile (omega_J, pi/delta]. Bands containing no DFT bin are dropped.
// Layers apply the modulus without pooling.

#include "deformlab/deform.hpp"
#include "deformlab/mra.hpp"
#include "deformlab/signal.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace deformlab {

struct Band {
    int index = 0;  // m in the edge formula
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::size_t> bins;  // DFT bins (FFT ordering) with lo < |omega| <= hi
};

class FilterBank {
public:
    FilterBank(Grid grid, int j, int q);

    const Grid& grid() const { return grid_; }
    int j() const { return j_; }
    int q() const { return q_; }
    double low_pass_edge() const { return omega_j_; }
    const std::vector<std::size_t>& low_pass_bins() const { return low_pass_; }
    /// Non-empty band-pass filters in increasing frequency.
    const std::vector<Band>& bands() const { return bands_; }
    std::size_t dropped_bands() const { return dropped_; }

    /// sum_lambda |g_lambda(omega_j)|^2 + |chi(omega_j)|^2 for every bin.
    std::vector<double> frame_function() const;
    /// Essential inf and sup of the frame function.
    std::pair<double, double> frame_bounds() const;

private:
    Grid grid_;
    int j_;
    int q_;
    double omega_j_;
    std::vector<std::size_t> low_pass_;
    std::vector<Band> bands_;
    std::size_t dropped_ = 0;
};

FilterBank shannon_bank(int j, int q, const Grid& grid);

struct LayerModule {
    FilterBank bank;
    double lipschitz = 1.0;       // modulus
    double pooling_factor = 1.0;  // S
    double pooling_lipschitz = 1.0;  // R, identity pooling

    /// max{B, B L^2 R^2} <= 1.
    bool admissible() const;
};

struct LayerConfig {
    int j = 0;
    int q = 1;
};

struct NetworkConfig {
    std::vector<LayerConfig> layers;
    int max_depth = 2;
    double eps_path = 1e-6;
};

NetworkConfig network_config_from_json(const std::string& text);
std::string network_config_to_json(const NetworkConfig& config);

/// Path of band indices (positions in each layer's bands()), root = {}.
using Path = std::vector<int>;

class ScatteringNetwork {
public:
    ScatteringNetwork(const NetworkConfig& config, const Grid& grid);

    const Grid& grid() const { return grid_; }
    const NetworkConfig& config() const { return config_; }
    int max_depth() const { return config_.max_depth; }
    double eps_path() const { return config_.eps_path; }
    /// Module used by nodes at the given depth: its bands spawn the children
    /// and its low-pass filter produces the node's feature.
    const LayerModule& module_at(std::size_t depth) const;
    const std::vector<LayerModule>& modules() const { return modules_; }

private:
    NetworkConfig config_;
    Grid grid_;
    std::vector<LayerModule> modules_;
};

struct FeatureVector {
    std::map<Path, SampledSignal> entries;
    double eps_path = 0.0;
    std::size_t pruned = 0;

    double norm() const;
};

/// U[q] f = |...|f * g_{q_1}| * ... * g_{q_n}|.
SampledSignal propagate(const ScatteringNetwork& net, const SampledSignal& f, const Path& q);

/// Breadth-first feature extraction; max_depth defaults to the network's.
FeatureVector extract_features(const ScatteringNetwork& net, const SampledSignal& f,
                               std::optional<int> max_depth = std::nullopt);

/// Missing paths count as zero signals.
double feature_distance(const FeatureVector& a, const FeatureVector& b);

/// max over depths n <= 2 of ||Phi^n(T_c f) - T_c Phi^n(f)|| / ||f||; c in samples.
double check_translation_covariance(const ScatteringNetwork& net, const SampledSignal& f, long shift);

struct LipschitzEstimate {
    double max_ratio = 0.0;
    std::size_t evaluated = 0;
    std::size_t excluded = 0;  // identical pairs
};

/// feature_distance(Phi f, Phi h) / ||f - h||, empty for f == h.
std::optional<double> lipschitz_ratio(const ScatteringNetwork& net, const SampledSignal& f,
                                      const SampledSignal& h);
/// Random real signal pairs with iid normal samples at mixed scales.
LipschitzEstimate estimate_lipschitz(const ScatteringNetwork& net, std::size_t pair_count,
                                     std::uint64_t seed);

struct MollifierRow {
    double mu = 0.0;
    double value = 0.0;   // ||(F_tau f - f) * mu^{-1} chi_0(./mu)||
    double target = 0.0;  // ||F_tau f - f||
};

/// chi_0 is the unit-mass triangle of half-width `radius`; mu runs through
/// 1, 1/2, 1/4, ... while mu * radius >= 2 delta.
std::vector<MollifierRow> root_feature_limit(const MraCoefficients& c, const DeformationField& field,
                                             double radius);

void write_features_csv(std::ostream& out, const FeatureVector& features);
std::string path_to_string(const Path& q);

}  // namespace deformlab
