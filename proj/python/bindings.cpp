#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sparseobs/analysis.hpp"
#include "sparseobs/design.hpp"
#include "sparseobs/model_io.hpp"

namespace py = pybind11;
using namespace sparseobs;

namespace {

DesignSpec make_spec(NormType norm, std::optional<double> gamma, std::optional<double> penalty,
                     std::optional<Vector> rho, std::optional<Vector> kappa_sq_max, double lmi_margin) {
  if (gamma.has_value() == penalty.has_value()) {
    throw std::invalid_argument("give exactly one of gamma and penalty");
  }
  DesignSpec s = gamma ? DesignSpec::fixed(norm, *gamma) : DesignSpec::penalized(norm, *penalty);
  if (rho) s.rho = *rho;
  s.kappa_sq_max = std::move(kappa_sq_max);
  s.lmi_margin = lmi_margin;
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse sensor precision and observer gain design";

  py::register_exception<ModelFormatError>(m, "ModelFormatError", PyExc_ValueError);
  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
  py::register_exception<NotDetectableError>(m, "NotDetectableError", PyExc_ValueError);

  py::enum_<NormType>(m, "NormType").value("H2", NormType::H2).value("Hinf", NormType::Hinf);

  py::enum_<DesignStatus>(m, "DesignStatus")
      .value("Optimal", DesignStatus::Optimal)
      .value("Infeasible", DesignStatus::Infeasible)
      .value("MaxIter", DesignStatus::MaxIter)
      .value("NumericalFailure", DesignStatus::NumericalFailure)
      .value("PolishInfeasible", DesignStatus::PolishInfeasible);

  py::class_<LtiPlant>(m, "LtiPlant")
      .def(py::init<>())
      .def_readwrite("A", &LtiPlant::A)
      .def_readwrite("B_u", &LtiPlant::B_u)
      .def_readwrite("B_d", &LtiPlant::B_d)
      .def_readwrite("C_y", &LtiPlant::C_y)
      .def_readwrite("C_z", &LtiPlant::C_z)
      .def_readwrite("D_u", &LtiPlant::D_u)
      .def_readwrite("D_d", &LtiPlant::D_d)
      .def_readwrite("S_d", &LtiPlant::S_d)
      .def_readwrite("sensor_names", &LtiPlant::sensor_names)
      .def_property_readonly("nx", &LtiPlant::nx)
      .def_property_readonly("ny", &LtiPlant::ny)
      .def("validate", &LtiPlant::validate);

  m.def("load_model", &load_model, py::arg("path"), "Read a JSON model and apply its weights.");
  m.def("is_detectable", &is_detectable, py::arg("A"), py::arg("C"));

  py::class_<DesignSpec>(m, "DesignSpec")
      .def(py::init(&make_spec), py::arg("norm"), py::arg("gamma") = py::none(), py::arg("penalty") = py::none(),
           py::arg("rho") = py::none(), py::arg("kappa_sq_max") = py::none(), py::arg("lmi_margin") = 1e-8)
      .def_readonly("norm", &DesignSpec::norm)
      .def_readwrite("rho", &DesignSpec::rho)
      .def_readwrite("kappa_sq_max", &DesignSpec::kappa_sq_max)
      .def_readwrite("lmi_margin", &DesignSpec::lmi_margin);

  py::class_<ReweightOptions>(m, "ReweightOptions")
      .def(py::init<>())
      .def_readwrite("epsilon", &ReweightOptions::epsilon)
      .def_readwrite("lam", &ReweightOptions::lambda)
      .def_readwrite("max_iters", &ReweightOptions::max_iters)
      .def_readwrite("support_tol", &ReweightOptions::support_tol)
      .def_readwrite("convergence_tol", &ReweightOptions::convergence_tol);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("rho", &IterationRecord::rho)
      .def_readonly("beta", &IterationRecord::beta)
      .def_readonly("kappa_sq", &IterationRecord::kappa_sq)
      .def_readonly("unit_objective", &IterationRecord::unit_objective)
      .def_readonly("support", &IterationRecord::support);

  py::class_<DesignResult>(m, "DesignResult")
      .def_readonly("status", &DesignResult::status)
      .def_readonly("norm", &DesignResult::norm)
      .def_readonly("L", &DesignResult::L)
      .def_property_readonly("kappa_sq", [](const DesignResult& r) { return r.kappa_sq.kappa_sq; })
      .def_readonly("gamma", &DesignResult::gamma)
      .def_readonly("objective", &DesignResult::objective)
      .def_readonly("support", &DesignResult::support)
      .def_readonly("iterations", &DesignResult::iterations);

  m.def("solve_design", [](const LtiPlant& p, const DesignSpec& s) { return solve_design(p, s); }, py::arg("plant"),
        py::arg("spec"));
  m.def("sparse_design",
        [](const LtiPlant& p, const DesignSpec& s, const ReweightOptions& o) { return sparse_design(p, s, o); },
        py::arg("plant"), py::arg("spec"), py::arg("options") = ReweightOptions{});
  m.def("polish", [](const LtiPlant& p, const DesignSpec& s, const std::vector<int>& support) {
    return polish(p, s, support);
  }, py::arg("plant"), py::arg("spec"), py::arg("support"));

  py::class_<SubsetRecord>(m, "SubsetRecord")
      .def_readonly("mask", &SubsetRecord::mask)
      .def_readonly("r", &SubsetRecord::r)
      .def_readonly("status", &SubsetRecord::status)
      .def_readonly("l1_of_kappa_sq", &SubsetRecord::l1_of_kappa_sq);

  py::class_<ExhaustiveResult>(m, "ExhaustiveResult")
      .def_readonly("best", &ExhaustiveResult::best)
      .def_readonly("best_mask", &ExhaustiveResult::best_mask)
      .def_readonly("table", &ExhaustiveResult::table);

  m.def("exhaustive_search",
        [](const LtiPlant& p, const DesignSpec& s, int threads) {
          ExhaustiveOptions o;
          o.threads = threads;
          py::gil_scoped_release release;
          return exhaustive_search(p, s, o);
        },
        py::arg("plant"), py::arg("spec"), py::arg("threads") = 0);

  py::class_<NormCertificate>(m, "NormCertificate")
      .def_readonly("norm", &NormCertificate::norm)
      .def_readonly("value", &NormCertificate::value)
      .def_readonly("gamma_target", &NormCertificate::gamma_target)
      .def_readonly("satisfied", &NormCertificate::satisfied)
      .def_readonly("accuracy", &NormCertificate::accuracy);

  m.def("certify_design",
        [](const LtiPlant& p, const DesignResult& r, double gamma) {
          return certify(build_error_system(p, r.L, r.kappa_sq), r.norm, gamma);
        },
        py::arg("plant"), py::arg("result"), py::arg("gamma"),
        "Norm of the error system assembled from a design, compared with gamma.");
  m.def("h2_norm", [](const Matrix& a, const Matrix& b, const Matrix& c) {
    ErrorSystem s{a, b, c, {}};
    return h2_norm(s);
  }, py::arg("A"), py::arg("B"), py::arg("C"));
  m.def("hinf_norm", [](const Matrix& a, const Matrix& b, const Matrix& c, double rel_tol) {
    ErrorSystem s{a, b, c, {}};
    return hinf_norm(s, rel_tol);
  }, py::arg("A"), py::arg("B"), py::arg("C"), py::arg("rel_tol") = 1e-6);
}
