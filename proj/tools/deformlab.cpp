#include "deformlab/amalgam.hpp"
#include "deformlab/bounds.hpp"
#include "deformlab/deform.hpp"
#include "deformlab/experiments.hpp"
#include "deformlab/mra.hpp"
#include "deformlab/scattering.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace deformlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

json branch(const BranchResult& b) { return b.holds ? json(b.value) : json("fail"); }

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"deformlab: deformation stability of scattering networks"};
    app.require_subcommand(1);

    std::string p_text = "2";
    std::string q_text = "2";
    double radius = 1.0;
    std::string input;
    auto* norms = app.add_subcommand("norms", "Wiener amalgam norm of a signal CSV");
    norms->add_option("--p", p_text, "inner exponent (number >= 1 or inf)");
    norms->add_option("--q", q_text, "outer exponent (number >= 1 or inf)");
    norms->add_option("--r", radius, "window radius")->check(CLI::PositiveNumber);
    norms->add_option("--input", input, "signal CSV (index,x,re,im)")->required();

    auto* mra = app.add_subcommand("mra", "multiresolution checks");
    mra->require_subcommand(1);
    std::string filter_name = "bspline1";
    double alpha = 1.0;
    auto* mra_verify = mra->add_subcommand("verify", "Riesz bounds and Assumptions B/C");
    mra_verify->add_option("--filter", filter_name, "box, bspline<n> or shannon");
    mra_verify->add_option("--alpha", alpha, "decay parameter");

    std::string theorem;
    std::string config_path;
    std::string out_dir = ".";
    auto* verify = app.add_subcommand("verify", "evaluate a stability estimate or sharpness construction");
    verify->add_option("--theorem", theorem, "estimate to evaluate")
        ->required()
        ->check(CLI::IsMember({"sensitivity", "besov", "sharp-large", "sharp-small", "random", "modulated"}));
    verify->add_option("--config", config_path, "JSON config (defaults when omitted)");
    verify->add_option("--out", out_dir, "directory for the regime CSV");

    std::string sweep_config;
    std::string sweep_out = "results";
    auto* sweep = app.add_subcommand("sweep", "random-deformation sweep and scale estimate");
    sweep->add_option("--config", sweep_config, "experiment.json")->required();
    sweep->add_option("--out", sweep_out, "output directory");

    std::string net_config;
    std::string features_out;
    auto* features = app.add_subcommand("features", "scattering features of a signal CSV");
    features->add_option("--network", net_config, "network config JSON")->required();
    features->add_option("--input", input, "signal CSV")->required();
    features->add_option("--out", features_out, "features CSV (path,l2_norm); stdout when omitted");

    std::string spec_path;
    std::size_t n = 1024;
    double spacing = 1.0;
    std::string field_out;
    auto* field = app.add_subcommand("field", "draw a random deformation field");
    field->add_option("--spec", spec_path, "RandomFieldSpec JSON")->required();
    field->add_option("--N", n, "grid size")->check(CLI::PositiveNumber);
    field->add_option("--spacing", spacing, "grid spacing")->check(CLI::PositiveNumber);
    field->add_option("--out", field_out, "field CSV (index,x,tau,omega); stdout when omitted");

    std::string kind = "tent";
    double scale = 64.0;
    std::string signal_out;
    auto* signal = app.add_subcommand("signal", "write a test signal CSV");
    signal->add_option("--kind", kind, "tent, sinc (band limit pi/s) or an MRA filter name (centred atom)");
    signal->add_option("--s", scale, "scale")->check(CLI::PositiveNumber);
    signal->add_option("--N", n, "grid size")->check(CLI::PositiveNumber);
    signal->add_option("--spacing", spacing, "grid spacing")->check(CLI::PositiveNumber);
    signal->add_option("--out", signal_out, "signal CSV; stdout when omitted");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*norms) {
            const auto f = read_signal_csv_file(input);
            const AmalgamParams params{Exponent::parse(p_text), Exponent::parse(q_text), radius};
            const json j = {{"norm", amalgam_norm(f, params)},
                            {"params", {{"p", params.p.to_string()}, {"q", params.q.to_string()}, {"r", radius}}},
                            {"grid", {{"N", f.size()}, {"spacing", f.grid().spacing()}, {"period", f.grid().period()}}}};
            std::cout << j.dump(2) << '\n';
        } else if (*mra_verify) {
            const auto filter = MraFilter::parse(filter_name);
            const auto riesz = riesz_bounds(filter);
            const auto b = verify_assumption_b(filter, alpha);
            const json j = {{"filter", filter.name()},
                            {"alpha", alpha},
                            {"riesz", {riesz.lower, riesz.upper}},
                            {"wiener", branch(b.wiener)},
                            {"weighted", branch(b.weighted)},
                            {"assumption_c", verify_assumption_c(filter, alpha).holds()}};
            std::cout << j.dump(2) << '\n';
        } else if (*verify) {
            const std::string text = config_path.empty() ? std::string() : read_file(config_path);
            const auto report = run_theorem(theorem, text);
            fs::create_directories(out_dir);
            auto csv = open_out(fs::path(out_dir) / (theorem + "_regimes.csv"));
            report.write_csv(csv);
            std::cout << report.to_json() << '\n';
        } else if (*sweep) {
            const auto cfg = experiment_config_from_json(read_file(sweep_config));
            const auto run = run_experiment(cfg);
            const fs::path dir(sweep_out);
            fs::create_directories(dir);
            {
                auto out = open_out(dir / "sweep.csv");
                write_sweep_csv(out, run.sweep);
            }
            {
                json fits = json::array();
                for (const auto& f : run.fits) {
                    fits.push_back(json::parse(fit_to_json(f)));
                }
                auto out = open_out(dir / "fit.json");
                out << json{{"realization_0", fits.front()}, {"per_realization", fits}}.dump(2) << '\n';
            }
            {
                auto out = open_out(dir / "estimate.json");
                out << estimate_to_json(run.estimate, cfg) << '\n';
            }
            {
                auto out = open_out(dir / "sweep.svg");
                write_sweep_svg(out, run);
            }
            std::cout << estimate_to_json(run.estimate, cfg) << '\n';
            if (run.estimate.failed) {
                std::cerr << "estimate failed: " << run.estimate.message << '\n';
                return 2;
            }
        } else if (*features) {
            const auto f = read_signal_csv_file(input);
            const ScatteringNetwork net(network_config_from_json(read_file(net_config)), f.grid());
            const auto phi = extract_features(net, f);
            if (features_out.empty()) {
                write_features_csv(std::cout, phi);
            } else {
                auto out = open_out(features_out);
                write_features_csv(out, phi);
            }
        } else if (*signal) {
            const Grid g(n, spacing);
            SampledSignal f(g);
            if (kind == "tent") {
                f = make_tent(scale, g);
            } else if (kind == "sinc") {
                f = make_sinc_packet(std::numbers::pi / scale, g);
            } else {
                MraCoefficients c(MraSpace(MraFilter::parse(kind), scale, g));
                c.coeffs()[c.space().size() / 2] = 1.0;
                f = synthesize(c);
            }
            if (signal_out.empty()) {
                write_csv(std::cout, f);
            } else {
                auto out = open_out(signal_out);
                write_csv(out, f);
            }
        } else if (*field) {
            const auto spec = random_field_spec_from_json(read_file(spec_path));
            const auto tau = draw_random_field(spec, Grid(n, spacing));
            if (field_out.empty()) {
                write_field_csv(std::cout, tau);
            } else {
                auto out = open_out(field_out);
                write_field_csv(out, tau);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
