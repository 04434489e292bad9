#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hyperlab/boundary.hpp"
#include "hyperlab/errors.hpp"
#include "hyperlab/furstenberg.hpp"
#include "hyperlab/group.hpp"
#include "hyperlab/llt.hpp"
#include "hyperlab/measure.hpp"
#include "hyperlab/spherical.hpp"

namespace py = pybind11;
using namespace hyperlab;

namespace {

py::dict summary_dict(const SpectralSummary& s) {
    py::dict d;
    d["sigma"] = s.sigma;
    d["lambda2_abs"] = s.lambda2_abs;
    d["gap"] = s.gap;
    d["eta_min"] = s.eta_min;
    d["eta_prime_min"] = s.eta_prime_min;
    d["residual"] = s.residual;
    d["eta"] = s.eta;
    d["eta_prime"] = s.eta_prime;
    return d;
}

}  // namespace

PYBIND11_MODULE(_hyperlab, m) {
    m.doc() = "Random walks on SL(2,R): group coordinates, boundary operators, spherical analysis";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<BudgetError>(m, "BudgetError", PyExc_MemoryError);

    py::class_<GroupElement>(m, "GroupElement")
        .def(py::init<>())
        .def(py::init<double, double, double, double>(), py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"))
        .def_static("rotation", &GroupElement::rotation)
        .def_static("diagonal", &GroupElement::diagonal)
        .def_static("unipotent", &GroupElement::unipotent)
        .def_readonly("a", &GroupElement::a)
        .def_readonly("b", &GroupElement::b)
        .def_readonly("c", &GroupElement::c)
        .def_readonly("d", &GroupElement::d)
        .def("det", &GroupElement::det)
        .def("inverse", &GroupElement::inverse)
        .def("renormalized", &GroupElement::renormalized)
        .def("entries", [](const GroupElement& g) { return std::vector<double>{g.a, g.b, g.c, g.d}; })
        .def("__mul__", [](const GroupElement& g, const GroupElement& h) { return g * h; })
        .def("__repr__", [](const GroupElement& g) {
            return "GroupElement([[" + std::to_string(g.a) + ", " + std::to_string(g.b) + "], [" +
                   std::to_string(g.c) + ", " + std::to_string(g.d) + "]])";
        });

    py::class_<IwasawaFactors>(m, "IwasawaFactors")
        .def_readonly("theta", &IwasawaFactors::theta)
        .def_readonly("t", &IwasawaFactors::t)
        .def_readonly("x", &IwasawaFactors::x)
        .def("reconstruct", &IwasawaFactors::reconstruct);
    py::class_<CartanFactors>(m, "CartanFactors")
        .def_readonly("theta1", &CartanFactors::theta1)
        .def_readonly("t", &CartanFactors::t)
        .def_readonly("theta2", &CartanFactors::theta2)
        .def("reconstruct", &CartanFactors::reconstruct);

    m.def("iwasawa", &iwasawa);
    m.def("cartan", &cartan);
    m.def("iwasawa_height", &iwasawa_height);
    m.def("cartan_norm", &cartan_norm);
    m.def("boundary_action", &boundary_action);

    py::class_<AtomicMeasure>(m, "AtomicMeasure")
        .def(py::init([](const std::vector<std::pair<GroupElement, double>>& atoms) {
            std::vector<Atom> v;
            for (const auto& [g, w] : atoms) v.push_back({g, w});
            return AtomicMeasure::from_unnormalized(std::move(v));
        }))
        .def("__len__", &AtomicMeasure::size)
        .def("atoms", [](const AtomicMeasure& mu) {
            std::vector<std::pair<GroupElement, double>> out;
            for (const auto& a : mu.atoms()) out.emplace_back(a.g, a.weight);
            return out;
        });
    m.def("default_measure", &default_measure, py::arg("eps") = 0.3);
    m.def("generator_measure", &generator_measure, py::arg("words"), py::arg("eps"));
    m.def("moment", &moment);
    m.def("support_radius", &support_radius);
    m.def("sample_product", py::overload_cast<const AtomicMeasure&, int, std::uint64_t>(&sample_product));

    m.def("c_inverse_sq", py::overload_cast<double>(&c_inverse_sq));
    m.def("spherical_function", &spherical_function, py::arg("r"), py::arg("t"));
    m.attr("PLANCHEREL_CONSTANT") = kPlancherelConstant;

    m.def(
        "perron_summary",
        [](const AtomicMeasure& mu, int N) {
            const auto S = assemble_transfer(mu, 0.0, FourierTruncation::omega(N), OperatorKind::Transfer);
            return summary_dict(spectral_summary(S));
        },
        py::arg("mu"), py::arg("N") = 32);

    m.def(
        "stationary_density",
        [](const AtomicMeasure& mu, int N, int points) {
            const auto psi = stationary_density(mu, FourierTruncation::omega(N));
            py::dict d;
            d["mass"] = psi.mass;
            d["positivity_min"] = psi.positivity_min;
            d["eigenvalue_distance"] = psi.eigenvalue_distance;
            d["coefficients"] = psi.coefficients;
            d["values"] = synthesize_real_on_grid(psi.coefficients, psi.trunc, points);
            if (N >= 32) d["s"] = smoothness_report(psi).s;
            return d;
        },
        py::arg("mu"), py::arg("N") = 32, py::arg("points") = 256);
}
