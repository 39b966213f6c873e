#pragma once

// Deformation operators F_{tau,omega} f(x) = e^{i omega(x)} f(x - tau(x)) on
// the periodic grid, field constructors and the maximal-operator checks.

#include "deformlab/mra.hpp"
#include "deformlab/signal.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace deformlab {

class DeformationField {
public:
    explicit DeformationField(Grid grid);
    DeformationField(Grid grid, std::vector<double> tau,
                     std::optional<std::vector<double>> omega = std::nullopt);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return tau_.size(); }
    const std::vector<double>& tau() const { return tau_; }
    const std::optional<std::vector<double>>& omega() const { return omega_; }

    double sup_norm() const;
    /// max |omega_k|, 0 without a phase.
    double omega_sup_norm() const;

    DeformationField with_omega(std::vector<double> omega) const;
    DeformationField without_omega() const;
    DeformationField scaled(double factor) const;

private:
    Grid grid_;
    std::vector<double> tau_;
    std::optional<std::vector<double>> omega_;
};

/// iid Uniform[-A, A] per grid point.
struct RandomFieldSpec {
    double amplitude = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

/// Samples e^{i omega_k} f(x_k - tau_k) with f evaluated in closed form.
SampledSignal deform(const MraCoefficients& c, const DeformationField& field);

DeformationField tau_constant(double c, const Grid& grid);
/// tau(x) = x - L/2 for |x - L/2| <= K, 0 elsewhere.
DeformationField tau_radial_identity(double k, const Grid& grid);
/// Cells I_k = [c + k s/N, c + (k+1) s/N), k >= 0, right of the centre c = L/2
/// carry -s/N (k even) and +s/N (k odd); the field vanishes left of c.
DeformationField tau_alternating(double s, int n_alt, const Grid& grid);

DeformationField draw_random_field(const RandomFieldSpec& spec, const Grid& grid);

/// tau*(x_k) = argmax over grid offsets |y| <= r of |f(x_k - y)|; ties go to
/// the smallest |y|, then to y > 0.
DeformationField maximal_selector(const SampledSignal& f, double r);
/// tau*(x_k) = argmax over grid offsets |y| <= r of |f(x_k - y) - f(x_k)|.
DeformationField worst_case_selector(const SampledSignal& f, double r);

/// Field of amplitude a picking, at each x_k, the displacement y among +-a and
/// the grid offsets |y| <= a that maximizes |f(x_k - y) - f(x_k)|.
DeformationField worst_case_field(const MraCoefficients& c, double amplitude);

struct MaximalCheck {
    double lhs = 0.0;  // ||f||_{X^{inf,2}_r}
    double rhs = 0.0;  // ||F_{tau*} f||
    double gap = 0.0;  // lhs - rhs
};

MaximalCheck maximal_characterization_check(const MraCoefficients& c, double r);

/// Same selector, but lhs takes the window sup over offsets on a grid
/// `subdivision` times finer, evaluated off-grid.
MaximalCheck refined_maximal_check(const MraCoefficients& c, double r, int subdivision = 8);

/// ||F_tau f - f|| / (||tau||_inf ||f'||_{X^{inf,2}_r}) with r = ||tau||_inf,
/// raised to one grid spacing when smaller. Empty when tau or f' vanishes.
std::optional<double> gradient_sensitivity_check(const MraCoefficients& c,
                                                 const DeformationField& field);

void write_field_csv(std::ostream& out, const DeformationField& field);
DeformationField read_field_csv(std::istream& in);

std::string random_field_spec_to_json(const RandomFieldSpec& spec);
RandomFieldSpec random_field_spec_from_json(const std::string& text);

}  // namespace deformlab
