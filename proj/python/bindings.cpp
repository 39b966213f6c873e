#include "deformlab/amalgam.hpp"
#include "deformlab/bounds.hpp"
#include "deformlab/deform.hpp"
#include "deformlab/experiments.hpp"
#include "deformlab/mra.hpp"
#include "deformlab/scattering.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace deformlab;

namespace {

using ComplexArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <class T>
std::vector<T> to_vector(const py::array_t<T, py::array::c_style | py::array::forcecast>& a)
{
    if (a.ndim() != 1) {
        throw std::invalid_argument("expected a one-dimensional array");
    }
    return {a.data(), a.data() + a.size()};
}

template <class T>
py::array_t<T> to_array(const std::vector<T>& v)
{
    return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

Exponent exponent(const py::object& o)
{
    if (py::isinstance<py::str>(o)) {
        return Exponent::parse(o.cast<std::string>());
    }
    const double p = o.cast<double>();
    return std::isinf(p) ? Exponent::infinity() : Exponent::finite(p);
}

py::object branch(const BranchResult& b)
{
    return b.holds ? py::object(py::float_(b.value)) : py::object(py::none());
}

}  // namespace

PYBIND11_MODULE(_deformlab, m)
{
    m.doc() = "Deformation stability of scattering networks on sampled periodic signals";

    py::class_<Grid>(m, "Grid")
        .def(py::init<std::size_t, double>(), py::arg("n"), py::arg("spacing") = 1.0)
        .def_property_readonly("n", &Grid::size)
        .def_property_readonly("spacing", &Grid::spacing)
        .def_property_readonly("period", &Grid::period)
        .def("x", [](const Grid& g) {
            std::vector<double> x(g.size());
            for (std::size_t k = 0; k < x.size(); ++k) {
                x[k] = g.x(k);
            }
            return to_array(x);
        })
        .def("__repr__", [](const Grid& g) {
            return "Grid(n=" + std::to_string(g.size()) + ", spacing=" + std::to_string(g.spacing()) + ")";
        });

    py::class_<SampledSignal>(m, "Signal")
        .def(py::init([](const Grid& g, const ComplexArray& samples) {
                 return SampledSignal(g, to_vector(samples));
             }),
             py::arg("grid"), py::arg("samples"))
        .def_property_readonly("grid", &SampledSignal::grid)
        .def_property_readonly("samples", [](const SampledSignal& f) { return to_array(f.samples()); })
        .def("shifted", &SampledSignal::shifted)
        .def("__len__", &SampledSignal::size);

    m.def("l2_norm", &l2_norm);
    m.def("l2_distance", &l2_distance);
    m.def("make_tent", [](double s, const Grid& g, bool unit) {
              return make_tent(s, g, unit ? TentNormalization::Unit : TentNormalization::L2Scaled);
          },
          py::arg("s"), py::arg("grid"), py::arg("unit") = false);
    m.def("make_sinc_packet", &make_sinc_packet, py::arg("band_limit"), py::arg("grid"));
    m.def("read_signal_csv", &read_signal_csv_file);

    m.def("amalgam_norm",
          [](const SampledSignal& f, const py::object& p, const py::object& q, double r) {
              return amalgam_norm(f, AmalgamParams{exponent(p), exponent(q), r});
          },
          py::arg("f"), py::arg("p") = 2.0, py::arg("q") = 2.0, py::arg("r") = 1.0);
    m.def("check_rescaling", [](const SampledSignal& f, const py::object& p, const py::object& q, double r) {
        return check_rescaling(f, exponent(p), exponent(q), r);
    });

    py::class_<MraFilter>(m, "Filter")
        .def_static("parse", &MraFilter::parse)
        .def_property_readonly("name", &MraFilter::name)
        .def("phi", &MraFilter::phi)
        .def("__repr__", [](const MraFilter& f) { return "Filter('" + f.name() + "')"; });

    py::class_<MraSpace>(m, "Space")
        .def(py::init([](const std::string& filter, double scale, const Grid& g) {
                 return MraSpace(MraFilter::parse(filter), scale, g);
             }),
             py::arg("filter"), py::arg("scale"), py::arg("grid"))
        .def_property_readonly("filter", &MraSpace::filter)
        .def_property_readonly("scale", &MraSpace::scale)
        .def_property_readonly("grid", &MraSpace::grid)
        .def("__len__", &MraSpace::size);

    py::class_<MraCoefficients>(m, "Coefficients")
        .def(py::init([](const MraSpace& space, const ComplexArray& c) {
                 return MraCoefficients(space, to_vector(c));
             }),
             py::arg("space"), py::arg("coeffs"))
        .def_property_readonly("space", &MraCoefficients::space)
        .def_property_readonly("coeffs",
                               [](const MraCoefficients& c) { return to_array(c.coeffs()); });

    m.def("synthesize", &synthesize);
    m.def("project", &project);
    m.def("tent_coefficients", [](double s, const Grid& g) { return tent_coefficients(s, g); });
    m.def("random_coefficients", &random_coefficients, py::arg("space"), py::arg("seed"),
          py::arg("stream") = 0, py::arg("complex_valued") = false);

    m.def("mra_verify", [](const std::string& filter_name, double alpha) {
              const auto filter = MraFilter::parse(filter_name);
              const auto riesz = riesz_bounds(filter);
              const auto b = verify_assumption_b(filter, alpha);
              py::dict d;
              d["filter"] = filter.name();
              d["riesz"] = py::make_tuple(riesz.lower, riesz.upper);
              d["wiener"] = branch(b.wiener);
              d["weighted"] = branch(b.weighted);
              d["assumption_c"] = verify_assumption_c(filter, alpha).holds();
              return d;
          },
          py::arg("filter") = "bspline1", py::arg("alpha") = 1.0);

    py::class_<DeformationField>(m, "Field")
        .def(py::init([](const Grid& g, const RealArray& tau, std::optional<RealArray> omega) {
                 std::optional<std::vector<double>> w;
                 if (omega) {
                     w = to_vector(*omega);
                 }
                 return DeformationField(g, to_vector(tau), std::move(w));
             }),
             py::arg("grid"), py::arg("tau"), py::arg("omega") = py::none())
        .def_property_readonly("tau", [](const DeformationField& f) { return to_array(f.tau()); })
        .def_property_readonly("omega", [](const DeformationField& f) -> py::object {
            return f.omega() ? py::object(to_array(*f.omega())) : py::object(py::none());
        })
        .def("sup_norm", &DeformationField::sup_norm);

    m.def("random_field", [](double amplitude, const Grid& g, std::uint64_t seed, std::uint64_t stream) {
              return draw_random_field(RandomFieldSpec{amplitude, seed, stream}, g);
          },
          py::arg("amplitude"), py::arg("grid"), py::arg("seed") = 0, py::arg("stream") = 0);
    m.def("worst_case_field", &worst_case_field);
    m.def("deform", &deform);

    py::class_<ScatteringNetwork>(m, "Network")
        .def(py::init([](const std::string& config_json, const Grid& g) {
                 return ScatteringNetwork(network_config_from_json(config_json), g);
             }),
             py::arg("config_json"), py::arg("grid"))
        .def_property_readonly("config_json",
                               [](const ScatteringNetwork& n) { return network_config_to_json(n.config()); });

    py::class_<FeatureVector>(m, "Features")
        .def("norm", &FeatureVector::norm)
        .def("path_norms", [](const FeatureVector& v) {
            py::dict d;
            for (const auto& [q, s] : v.entries) {
                d[py::str(path_to_string(q))] = l2_norm(s);
            }
            return d;
        })
        .def_readonly("pruned", &FeatureVector::pruned);

    m.def("extract_features",
          [](const ScatteringNetwork& net, const SampledSignal& f) { return extract_features(net, f); });
    m.def("feature_distance", &feature_distance);

    py::class_<BoundReport>(m, "BoundReport")
        .def_readonly("theorem_id", &BoundReport::theorem_id)
        .def_readonly("fitted_constant", &BoundReport::fitted_constant)
        .def_readonly("constant_spread", &BoundReport::constant_spread)
        .def_property_readonly("passed", &BoundReport::passed)
        .def("to_json", &BoundReport::to_json);

    m.def("run_theorem", &run_theorem, py::arg("theorem"), py::arg("config_json") = "",
          py::call_guard<py::gil_scoped_release>());

    m.def("s_hat_from", &s_hat_from, py::arg("a2"), py::arg("a3"));
    m.def("theoretical_envelope", &theoretical_envelope);
    m.def("wls_polyfit",
          [](const RealArray& x, const RealArray& y, const RealArray& w, int degree) {
              const auto fit = wls_polyfit(to_vector(x), to_vector(y), to_vector(w), degree);
              return fit_to_json(fit);
          },
          py::arg("x"), py::arg("y"), py::arg("w"), py::arg("degree") = 3);
    m.def("run_experiment", [](const std::string& config_json) {
              const auto cfg = experiment_config_from_json(config_json);
              ExperimentRun run;
              {
                  py::gil_scoped_release release;
                  run = run_experiment(cfg);
              }
              return estimate_to_json(run.estimate, cfg);
          },
          py::arg("config_json"));
}
