#include "deformlab/deform.hpp"

#include "deformlab/amalgam.hpp"
#include "deformlab/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace deformlab {

namespace {

void require_finite(const std::vector<double>& v, const char* what)
{
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument(std::string("DeformationField: non-finite ") + what);
        }
    }
}

double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

// Number of whole grid steps in r, at least one.
long offset_steps(const Grid& grid, double r) { return static_cast<long>(window_half_width(grid, r)); }

std::size_t wrap_index(long k, std::size_t n)
{
    const long nl = static_cast<long>(n);
    return static_cast<std::size_t>(((k % nl) + nl) % nl);
}

// Offsets ordered 0, 1, -1, 2, -2, ... so that a strict comparison keeps the
// smallest |y| on ties.
template <typename Score>
DeformationField select_offsets(const SampledSignal& f, double r, Score score)
{
    const Grid& g = f.grid();
    const long w = std::min<long>(offset_steps(g, r), static_cast<long>(g.size()));
    std::vector<double> tau(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        long best = 0;
        double best_score = score(k, k);
        for (long m = 1; m <= w; ++m) {
            for (long y : {m, -m}) {
                const double v = score(k, wrap_index(static_cast<long>(k) - y, g.size()));
                if (v > best_score) {
                    best_score = v;
                    best = y;
                }
            }
        }
        tau[k] = static_cast<double>(best) * g.spacing();
    }
    return DeformationField(g, std::move(tau));
}

}  // namespace

DeformationField::DeformationField(Grid grid) : grid_(grid), tau_(grid.size(), 0.0) {}

DeformationField::DeformationField(Grid grid, std::vector<double> tau,
                                   std::optional<std::vector<double>> omega)
    : grid_(grid), tau_(std::move(tau)), omega_(std::move(omega))
{
    if (tau_.size() != grid_.size()) {
        throw std::invalid_argument("DeformationField: tau length does not match the grid");
    }
    require_finite(tau_, "tau");
    if (omega_) {
        if (omega_->size() != grid_.size()) {
            throw std::invalid_argument("DeformationField: omega length does not match the grid");
        }
        require_finite(*omega_, "omega");
    }
}

double DeformationField::sup_norm() const { return max_abs(tau_); }

double DeformationField::omega_sup_norm() const { return omega_ ? max_abs(*omega_) : 0.0; }

DeformationField DeformationField::with_omega(std::vector<double> omega) const
{
    return DeformationField(grid_, tau_, std::move(omega));
}

DeformationField DeformationField::without_omega() const { return DeformationField(grid_, tau_); }

DeformationField DeformationField::scaled(double factor) const
{
    auto tau = tau_;
    for (auto& t : tau) {
        t *= factor;
    }
    return DeformationField(grid_, std::move(tau), omega_);
}

SampledSignal deform(const MraCoefficients& c, const DeformationField& field)
{
    const Grid& g = c.space().grid();
    if (!(g == field.grid())) {
        throw std::invalid_argument("deform: field and signal live on different grids");
    }
    std::vector<double> xs(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        xs[k] = g.x(k) - field.tau()[k];
    }
    auto values = eval_many(c, xs);
    if (field.omega()) {
        for (std::size_t k = 0; k < g.size(); ++k) {
            values[k] *= std::polar(1.0, (*field.omega())[k]);
        }
    }
    return SampledSignal(g, std::move(values));
}

DeformationField tau_constant(double c, const Grid& grid)
{
    return DeformationField(grid, std::vector<double>(grid.size(), c));
}

DeformationField tau_radial_identity(double k, const Grid& grid)
{
    if (!(k >= 0.0) || k > grid.period() / 2.0) {
        throw std::invalid_argument("tau_radial_identity: need 0 <= K <= L/2");
    }
    const double centre = grid.period() / 2.0;
    std::vector<double> tau(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = grid.x(i) - centre;
        tau[i] = std::abs(d) <= k ? d : 0.0;
    }
    return DeformationField(grid, std::move(tau));
}

DeformationField tau_alternating(double s, int n_alt, const Grid& grid)
{
    if (n_alt < 2 || n_alt % 2 != 0) {
        throw std::invalid_argument("tau_alternating: N_alt must be a positive even integer");
    }
    if (grid.size() % 2 != 0) {
        throw std::invalid_argument("tau_alternating: grid needs an even number of samples");
    }
    const double cell = s / n_alt;
    const double per_cell = cell / grid.spacing();
    const double rounded = std::round(per_cell);
    if (!(s > 0.0) || rounded < 1.0 || std::abs(per_cell - rounded) > 1e-9 * per_cell) {
        throw std::invalid_argument("tau_alternating: s / N_alt must be a multiple of the spacing");
    }
    const auto m = static_cast<std::size_t>(rounded);
    const std::size_t centre = grid.size() / 2;
    std::vector<double> tau(grid.size(), 0.0);
    for (std::size_t i = centre; i < grid.size(); ++i) {
        const std::size_t k = (i - centre) / m;
        tau[i] = k % 2 == 0 ? -cell : cell;
    }
    return DeformationField(grid, std::move(tau));
}

DeformationField draw_random_field(const RandomFieldSpec& spec, const Grid& grid)
{
    if (!(spec.amplitude >= 0.0) || !std::isfinite(spec.amplitude)) {
        throw std::invalid_argument("draw_random_field: amplitude must be finite and >= 0");
    }
    CounterRng rng(spec.seed, spec.stream);
    std::vector<double> tau(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        tau[k] = spec.amplitude * (2.0 * rng.uniform_at(k) - 1.0);
    }
    return DeformationField(grid, std::move(tau));
}

DeformationField maximal_selector(const SampledSignal& f, double r)
{
    const auto mag = f.abs();
    return select_offsets(f, r, [&](std::size_t, std::size_t j) { return mag[j]; });
}

DeformationField worst_case_selector(const SampledSignal& f, double r)
{
    return select_offsets(f, r, [&](std::size_t k, std::size_t j) { return std::abs(f[j] - f[k]); });
}

DeformationField worst_case_field(const MraCoefficients& c, double amplitude)
{
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
        throw std::invalid_argument("worst_case_field: amplitude must be finite and >= 0");
    }
    const Grid& g = c.space().grid();
    if (amplitude == 0.0) {
        return DeformationField(g);
    }
    const auto f = synthesize(c);
    const std::size_t n = g.size();
    const long w = std::min<long>(static_cast<long>(std::floor(amplitude / g.spacing() + 1e-9)),
                                  static_cast<long>(n));
    std::vector<double> xs(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
        xs[2 * k] = g.x(k) - amplitude;
        xs[2 * k + 1] = g.x(k) + amplitude;
    }
    const auto ends = eval_many(c, xs);
    std::vector<double> tau(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double best = 0.0;
        double best_y = 0.0;
        for (long m = 1; m <= w; ++m) {
            for (long y : {m, -m}) {
                const double v = std::abs(f[wrap_index(static_cast<long>(k) - y, n)] - f[k]);
                if (v > best) {
                    best = v;
                    best_y = static_cast<double>(y) * g.spacing();
                }
            }
        }
        const double plus = std::abs(ends[2 * k] - f[k]);
        const double minus = std::abs(ends[2 * k + 1] - f[k]);
        if (plus > best) {
            best = plus;
            best_y = amplitude;
        }
        if (minus > best) {
            best_y = -amplitude;
        }
        tau[k] = best_y;
    }
    return DeformationField(g, std::move(tau));
}

MaximalCheck maximal_characterization_check(const MraCoefficients& c, double r)
{
    const auto f = synthesize(c);
    MaximalCheck out;
    out.lhs = amalgam_norm(f, {Exponent::infinity(), Exponent::finite(2.0), r});
    out.rhs = l2_norm(deform(c, maximal_selector(f, r)));
    out.gap = out.lhs - out.rhs;
    return out;
}

MaximalCheck refined_maximal_check(const MraCoefficients& c, double r, int subdivision)
{
    if (subdivision < 1) {
        throw std::invalid_argument("refined_maximal_check: subdivision must be >= 1");
    }
    const Grid& g = c.space().grid();
    const auto f = synthesize(c);
    const long w = offset_steps(g, r) * subdivision;
    const double step = g.spacing() / subdivision;
    std::vector<double> xs;
    xs.reserve(g.size() * static_cast<std::size_t>(2 * w + 1));
    for (std::size_t k = 0; k < g.size(); ++k) {
        for (long m = -w; m <= w; ++m) {
            xs.push_back(g.x(k) - static_cast<double>(m) * step);
        }
    }
    const auto values = eval_many(c, xs);
    std::vector<double> sup(g.size(), 0.0);
    const auto span = static_cast<std::size_t>(2 * w + 1);
    for (std::size_t k = 0; k < g.size(); ++k) {
        for (std::size_t i = 0; i < span; ++i) {
            sup[k] = std::max(sup[k], std::abs(values[k * span + i]));
        }
    }
    MaximalCheck out;
    out.lhs = l2_norm(SampledSignal::from_real(g, sup));
    out.rhs = l2_norm(deform(c, maximal_selector(f, r)));
    out.gap = out.lhs - out.rhs;
    return out;
}

std::optional<double> gradient_sensitivity_check(const MraCoefficients& c,
                                                 const DeformationField& field)
{
    if (!c.space().filter().has_derivative()) {
        throw std::invalid_argument("gradient_sensitivity_check: filter has no derivative");
    }
    const double t = field.sup_norm();
    if (t == 0.0) {
        return std::nullopt;
    }
    const Grid& g = c.space().grid();
    const double r = std::max(t, g.spacing());
    const double grad = amalgam_norm(synthesize_derivative(c),
                                     {Exponent::infinity(), Exponent::finite(2.0), r});
    if (grad == 0.0) {
        return std::nullopt;
    }
    const double err = l2_distance(deform(c, field.without_omega()), synthesize(c));
    return err / (t * grad);
}

void write_field_csv(std::ostream& out, const DeformationField& field)
{
    out << "index,x,tau,omega\n";
    out.precision(17);
    for (std::size_t k = 0; k < field.size(); ++k) {
        out << k << ',' << field.grid().x(k) << ',' << field.tau()[k] << ','
            << (field.omega() ? (*field.omega())[k] : 0.0) << '\n';
    }
}

DeformationField read_field_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("index,x,tau,omega", 0) != 0) {
        throw std::invalid_argument("read_field_csv: expected header index,x,tau,omega");
    }
    std::vector<double> xs;
    std::vector<double> tau;
    std::vector<double> omega;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::stringstream row(line);
        std::string cell;
        double fields[4];
        for (double& field : fields) {
            if (!std::getline(row, cell, ',')) {
                throw std::invalid_argument("read_field_csv: short row: " + line);
            }
            field = std::stod(cell);
        }
        if (static_cast<std::size_t>(fields[0]) != tau.size()) {
            throw std::invalid_argument("read_field_csv: indices must be 0..N-1 in order");
        }
        xs.push_back(fields[1]);
        tau.push_back(fields[2]);
        omega.push_back(fields[3]);
    }
    if (tau.size() < 2) {
        throw std::invalid_argument("read_field_csv: need at least two rows");
    }
    const Grid grid(tau.size(), xs[1] - xs[0]);
    const bool has_omega = std::any_of(omega.begin(), omega.end(), [](double v) { return v != 0.0; });
    if (has_omega) {
        return DeformationField(grid, std::move(tau), std::move(omega));
    }
    return DeformationField(grid, std::move(tau));
}

std::string random_field_spec_to_json(const RandomFieldSpec& spec)
{
    nlohmann::json j = {{"law", "uniform"}, {"amplitude", spec.amplitude}, {"seed", spec.seed}};
    if (spec.stream != 0) {
        j["stream"] = spec.stream;
    }
    return j.dump();
}

RandomFieldSpec random_field_spec_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("RandomFieldSpec: ") + e.what());
    }
    if (j.value("law", std::string("uniform")) != "uniform") {
        throw std::invalid_argument("RandomFieldSpec: only the uniform law is supported");
    }
    RandomFieldSpec spec;
    try {
        spec.amplitude = j.at("amplitude").get<double>();
        spec.seed = j.at("seed").get<std::uint64_t>();
        spec.stream = j.value("stream", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("RandomFieldSpec: ") + e.what());
    }
    if (!(spec.amplitude >= 0.0)) {
        throw std::invalid_argument("RandomFieldSpec: amplitude must be >= 0");
    }
    return spec;
}

}  // namespace deformlab
