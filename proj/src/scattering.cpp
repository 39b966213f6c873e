#include "deformlab/scattering.hpp"

#include "deformlab/fft.hpp"
#include "deformlab/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace deformlab {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double edge_tol = 1e-9;

using Buffer = std::vector<Complex>;

// Inverse transform of the spectrum restricted to the given bins.
Buffer restrict_bins(const Buffer& spec, const std::vector<std::size_t>& bins)
{
    Buffer masked(spec.size(), Complex(0.0));
    for (std::size_t j : bins) {
        masked[j] = spec[j];
    }
    return fft::inverse(masked);
}

void modulus_in_place(Buffer& v)
{
    for (auto& z : v) {
        z = std::abs(z);
    }
}

double energy(const Buffer& v, double delta)
{
    double acc = 0.0;
    for (const auto& z : v) {
        const double a = std::abs(z);
        acc += a * a;
    }
    return delta * acc;
}

}  // namespace

FilterBank::FilterBank(Grid grid, int j, int q) : grid_(grid), j_(j), q_(q)
{
    if (j < 0 || q < 1) {
        throw std::invalid_argument("shannon_bank: need J >= 0 and Q >= 1");
    }
    const double nyquist = pi / grid.spacing();
    omega_j_ = std::ldexp(nyquist, -j);
    const double bin = 2.0 * pi / grid.period();
    if (omega_j_ < bin * (1.0 - edge_tol)) {
        throw std::invalid_argument("shannon_bank: low-pass band is thinner than one frequency bin");
    }
    const int count = j * q;
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(count));
    for (std::size_t b = 0; b < grid.size(); ++b) {
        const double w = std::abs(grid.omega(b));
        if (w <= omega_j_ * (1.0 + edge_tol)) {
            low_pass_.push_back(b);
            continue;
        }
        const double t = q * std::log2(w / omega_j_);
        int m = static_cast<int>(std::ceil(t - edge_tol)) - 1;
        m = std::clamp(m, 0, count - 1);
        members[static_cast<std::size_t>(m)].push_back(b);
    }
    for (int m = 0; m < count; ++m) {
        auto& bins = members[static_cast<std::size_t>(m)];
        if (bins.empty()) {
            ++dropped_;
            continue;
        }
        Band band;
        band.index = m;
        band.lo = omega_j_ * std::exp2(static_cast<double>(m) / q);
        band.hi = omega_j_ * std::exp2(static_cast<double>(m + 1) / q);
        band.bins = std::move(bins);
        bands_.push_back(std::move(band));
    }
}

std::vector<double> FilterBank::frame_function() const
{
    std::vector<double> frame(grid_.size(), 0.0);
    for (std::size_t b : low_pass_) {
        frame[b] += 1.0;
    }
    for (const auto& band : bands_) {
        for (std::size_t b : band.bins) {
            frame[b] += 1.0;
        }
    }
    return frame;
}

std::pair<double, double> FilterBank::frame_bounds() const
{
    const auto frame = frame_function();
    const auto [lo, hi] = std::minmax_element(frame.begin(), frame.end());
    return {*lo, *hi};
}

FilterBank shannon_bank(int j, int q, const Grid& grid) { return FilterBank(grid, j, q); }

bool LayerModule::admissible() const
{
    const double b = bank.frame_bounds().second;
    const double lr = lipschitz * pooling_lipschitz;
    return std::max(b, b * lr * lr) <= 1.0;
}

NetworkConfig network_config_from_json(const std::string& text)
{
    NetworkConfig cfg;
    try {
        const auto j = nlohmann::json::parse(text);
        for (const auto& layer : j.at("layers")) {
            cfg.layers.push_back({layer.at("J").get<int>(), layer.at("Q").get<int>()});
        }
        cfg.max_depth = j.value("max_depth", 2);
        cfg.eps_path = j.value("eps_path", 1e-6);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("network config: ") + e.what());
    }
    return cfg;
}

std::string network_config_to_json(const NetworkConfig& config)
{
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : config.layers) {
        layers.push_back({{"J", l.j}, {"Q", l.q}});
    }
    nlohmann::json j = {{"layers", layers}, {"max_depth", config.max_depth}, {"eps_path", config.eps_path}};
    return j.dump();
}

ScatteringNetwork::ScatteringNetwork(const NetworkConfig& config, const Grid& grid)
    : config_(config), grid_(grid)
{
    if (config.layers.empty()) {
        throw std::invalid_argument("ScatteringNetwork: need at least one layer");
    }
    if (config.max_depth < 0) {
        throw std::invalid_argument("ScatteringNetwork: max_depth must be >= 0");
    }
    if (!(config.eps_path >= 0.0)) {
        throw std::invalid_argument("ScatteringNetwork: eps_path must be >= 0");
    }
    for (const auto& l : config.layers) {
        modules_.push_back(LayerModule{shannon_bank(l.j, l.q, grid)});
        if (!modules_.back().admissible()) {
            throw std::invalid_argument("ScatteringNetwork: layer is not admissible");
        }
    }
}

const LayerModule& ScatteringNetwork::module_at(std::size_t depth) const
{
    return modules_[std::min(depth, modules_.size() - 1)];
}

double FeatureVector::norm() const
{
    std::vector<double> parts;
    parts.reserve(entries.size());
    for (const auto& [path, s] : entries) {
        parts.push_back(l2_norm_squared(s));
    }
    return std::sqrt(exact_sum(parts));
}

SampledSignal propagate(const ScatteringNetwork& net, const SampledSignal& f, const Path& q)
{
    require_same_grid(f.grid(), net.grid(), "propagate");
    Buffer u = f.samples();
    for (std::size_t n = 0; n < q.size(); ++n) {
        const auto& bands = net.module_at(n).bank.bands();
        if (q[n] < 0 || static_cast<std::size_t>(q[n]) >= bands.size()) {
            throw std::invalid_argument("propagate: invalid band index in path");
        }
        u = restrict_bins(fft::forward(u), bands[static_cast<std::size_t>(q[n])].bins);
        modulus_in_place(u);
    }
    return SampledSignal(f.grid(), std::move(u));
}

FeatureVector extract_features(const ScatteringNetwork& net, const SampledSignal& f,
                               std::optional<int> max_depth)
{
    require_same_grid(f.grid(), net.grid(), "extract_features");
    const int depth_limit = max_depth.value_or(net.max_depth());
    if (depth_limit < 0) {
        throw std::invalid_argument("extract_features: max_depth must be >= 0");
    }
    const double delta = f.grid().spacing();
    const double threshold = net.eps_path() * l2_norm_squared(f);

    FeatureVector out;
    out.eps_path = net.eps_path();
    struct Node {
        Path path;
        Buffer signal;
    };
    std::deque<Node> queue;
    queue.push_back({{}, f.samples()});
    while (!queue.empty()) {
        Node node = std::move(queue.front());
        queue.pop_front();
        const std::size_t depth = node.path.size();
        const auto& module = net.module_at(depth);
        const Buffer spec = fft::forward(node.signal);
        out.entries.emplace(node.path,
                            SampledSignal(f.grid(), restrict_bins(spec, module.bank.low_pass_bins())));
        if (static_cast<int>(depth) >= depth_limit) {
            continue;
        }
        const auto& bands = module.bank.bands();
        for (std::size_t b = 0; b < bands.size(); ++b) {
            Buffer child = restrict_bins(spec, bands[b].bins);
            modulus_in_place(child);
            const double e = energy(child, delta);
            if (e == 0.0 || e < threshold) {
                ++out.pruned;
                continue;
            }
            Path p = node.path;
            p.push_back(static_cast<int>(b));
            queue.push_back({std::move(p), std::move(child)});
        }
    }
    return out;
}

double feature_distance(const FeatureVector& a, const FeatureVector& b)
{
    std::vector<double> parts;
    auto ia = a.entries.begin();
    auto ib = b.entries.begin();
    while (ia != a.entries.end() || ib != b.entries.end()) {
        if (ib == b.entries.end() || (ia != a.entries.end() && ia->first < ib->first)) {
            parts.push_back(l2_norm_squared(ia->second));
            ++ia;
        } else if (ia == a.entries.end() || ib->first < ia->first) {
            parts.push_back(l2_norm_squared(ib->second));
            ++ib;
        } else {
            require_same_grid(ia->second.grid(), ib->second.grid(), "feature_distance");
            const double d = l2_distance(ia->second, ib->second);
            parts.push_back(d * d);
            ++ia;
            ++ib;
        }
    }
    return std::sqrt(exact_sum(parts));
}

double check_translation_covariance(const ScatteringNetwork& net, const SampledSignal& f, long shift)
{
    const double norm = l2_norm(f);
    if (norm == 0.0) {
        return 0.0;
    }
    const int depth = std::min(2, net.max_depth());
    const auto base = extract_features(net, f, depth);
    const auto moved = extract_features(net, f.shifted(shift), depth);
    std::vector<std::vector<double>> per_depth(static_cast<std::size_t>(depth) + 1);
    for (const auto& [path, s] : base.entries) {
        const auto it = moved.entries.find(path);
        const auto shifted = s.shifted(shift);
        const double d = it == moved.entries.end() ? l2_norm(shifted) : l2_distance(it->second, shifted);
        per_depth[path.size()].push_back(d * d);
    }
    for (const auto& [path, s] : moved.entries) {
        if (!base.entries.count(path)) {
            per_depth[path.size()].push_back(l2_norm_squared(s));
        }
    }
    double worst = 0.0;
    for (auto& parts : per_depth) {
        worst = std::max(worst, std::sqrt(exact_sum(parts)) / norm);
    }
    return worst;
}

std::optional<double> lipschitz_ratio(const ScatteringNetwork& net, const SampledSignal& f,
                                      const SampledSignal& h)
{
    const double denom = l2_distance(f, h);
    if (denom == 0.0) {
        return std::nullopt;
    }
    return feature_distance(extract_features(net, f), extract_features(net, h)) / denom;
}

LipschitzEstimate estimate_lipschitz(const ScatteringNetwork& net, std::size_t pair_count,
                                     std::uint64_t seed)
{
    const Grid& g = net.grid();
    LipschitzEstimate out;
    for (std::size_t i = 0; i < pair_count; ++i) {
        CounterRng rng(seed, i);
        // Perturbation sizes from 1e-3 to 1 relative to the base signal.
        const double scale = std::pow(10.0, -3.0 * rng.uniform());
        std::vector<double> a(g.size());
        std::vector<double> b(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
            a[k] = rng.normal();
        }
        for (std::size_t k = 0; k < g.size(); ++k) {
            b[k] = a[k] + scale * rng.normal();
        }
        const auto ratio = lipschitz_ratio(net, SampledSignal::from_real(g, a), SampledSignal::from_real(g, b));
        if (!ratio) {
            ++out.excluded;
            continue;
        }
        out.max_ratio = std::max(out.max_ratio, *ratio);
        ++out.evaluated;
    }
    return out;
}

std::vector<MollifierRow> root_feature_limit(const MraCoefficients& c, const DeformationField& field,
                                             double radius)
{
    const Grid& g = c.space().grid();
    if (!(radius >= 2.0 * g.spacing())) {
        throw std::invalid_argument("root_feature_limit: kernel narrower than two grid steps");
    }
    const auto diff = deform(c, field) - synthesize(c);
    const double target = l2_norm(diff);
    std::vector<MollifierRow> rows;
    for (double mu = 1.0; mu * radius >= 2.0 * g.spacing() * (1.0 - 1e-12); mu *= 0.5) {
        const double width = mu * radius;
        SampledSignal kernel(g);
        double mass = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double x = std::min(g.x(k), g.period() - g.x(k));
            const double v = std::max(0.0, 1.0 - x / width) / width;
            kernel[k] = v;
            mass += v;
        }
        // Unit discrete mass.
        kernel *= 1.0 / (mass * g.spacing());
        rows.push_back({mu, l2_norm(convolve(diff, kernel)), target});
    }
    return rows;
}

std::string path_to_string(const Path& q)
{
    if (q.empty()) {
        return "root";
    }
    std::string s;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (i) {
            s += '/';
        }
        s += std::to_string(q[i]);
    }
    return s;
}

void write_features_csv(std::ostream& out, const FeatureVector& features)
{
    out << "path,l2_norm\n";
    out.precision(17);
    for (const auto& [path, s] : features.entries) {
        out << path_to_string(path) << ',' << l2_norm(s) << '\n';
    }
}

}  // namespace deformlab
