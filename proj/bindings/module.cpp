#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "netctrl/bounds.hpp"
#include "netctrl/ctrb.hpp"
#include "netctrl/energy.hpp"
#include "netctrl/experiments.hpp"
#include "netctrl/gramian.hpp"
#include "netctrl/network.hpp"

namespace py = pybind11;
using namespace netctrl;

PYBIND11_MODULE(_core, m) {
    m.doc() = "minimum-energy target control of linear discrete-time networks";

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<NotControllableError>(m, "NotControllableError", PyExc_RuntimeError);
    py::register_exception<SingularMatrixError>(m, "SingularMatrixError", PyExc_RuntimeError);
    py::register_exception<DegenerateSpectrumError>(m, "DegenerateSpectrumError",
                                                    PyExc_RuntimeError);
    py::register_exception<DegenerateDecompositionError>(m, "DegenerateDecompositionError",
                                                         PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<Network>(m, "Network")
        .def(py::init([](const Eigen::MatrixXd& adjacency) { return make_network(adjacency); }),
             py::arg("adjacency"))
        .def_readonly("adjacency", &Network::adjacency)
        .def_readonly("labels", &Network::labels)
        .def_property_readonly("n", &Network::size)
        .def("to_json", &network_to_json);

    m.def("network_from_json", &network_from_json, py::arg("json_text"));
    m.def("parse_edge_list", &parse_edge_list, py::arg("text"), py::arg("n") = 0);
    m.def("load_edge_list", &load_edge_list, py::arg("path"), py::arg("n") = 0);

    py::class_<ErRecipe>(m, "ErRecipe")
        .def(py::init([](int n, double p, double weight_lo, double weight_hi,
                         double self_loop_offset, std::uint64_t seed) {
                 return ErRecipe{n, p, weight_lo, weight_hi, self_loop_offset, seed};
             }),
             py::arg("n"), py::arg("p"), py::arg("weight_lo"), py::arg("weight_hi"),
             py::arg("self_loop_offset"), py::arg("seed") = 0)
        .def_readwrite("n", &ErRecipe::n)
        .def_readwrite("p", &ErRecipe::edge_prob)
        .def_readwrite("weight_lo", &ErRecipe::weight_lo)
        .def_readwrite("weight_hi", &ErRecipe::weight_hi)
        .def_readwrite("self_loop_offset", &ErRecipe::self_loop_offset)
        .def_readwrite("seed", &ErRecipe::seed);

    m.def("generate_er", &generate_er, py::arg("recipe"));

    m.def(
        "discretize",
        [](const Eigen::MatrixXd& sys, const Eigen::MatrixXd& input, double eta) {
            const auto d = discretize({sys, input, eta});
            return py::make_tuple(d.A, d.B);
        },
        py::arg("sys_matrix"), py::arg("input_matrix"), py::arg("sampling_period"));

    m.def(
        "input_matrix",
        [](const std::vector<int>& drivers, int n) { return input_matrix(DriverSet{drivers}, n); },
        py::arg("drivers"), py::arg("n"));
    m.def(
        "output_matrix",
        [](const std::vector<int>& targets, int n) { return output_matrix(TargetSet{targets}, n); },
        py::arg("targets"), py::arg("n"));
    m.def("controllability_matrix", &controllability_matrix, py::arg("A"), py::arg("B"));
    m.def("output_controllability_matrix", &output_controllability_matrix, py::arg("A"),
          py::arg("B"), py::arg("C"));
    m.def("numerical_rank", &numerical_rank, py::arg("M"), py::arg("tol") = -1.0);

    py::class_<ControllableDecomposition>(m, "ControllableDecomposition")
        .def_readonly("rank", &ControllableDecomposition::rank)
        .def_readonly("R", &ControllableDecomposition::R)
        .def_readonly("A_c", &ControllableDecomposition::A_c)
        .def_readonly("B_c", &ControllableDecomposition::B_c)
        .def_readonly("A_nc", &ControllableDecomposition::A_nc)
        .def_readonly("R1", &ControllableDecomposition::R1);
    m.def("decompose_gram_schmidt", &decompose_gram_schmidt, py::arg("A"), py::arg("B"),
          py::arg("tol") = -1.0);

    py::class_<PermutationDecomposition>(m, "PermutationDecomposition")
        .def_readonly("controllable", &PermutationDecomposition::controllable)
        .def_readonly("uncontrollable", &PermutationDecomposition::uncontrollable)
        .def_readonly("theta", &PermutationDecomposition::theta)
        .def_readonly("A_c_bar", &PermutationDecomposition::A_c_bar)
        .def_readonly("warning", &PermutationDecomposition::warning);
    m.def("decompose_permutation", &decompose_permutation, py::arg("A"), py::arg("B"),
          py::arg("tol") = -1.0);

    py::class_<StructuralReport>(m, "StructuralReport")
        .def_readonly("accessible", &StructuralReport::accessible)
        .def_readonly("dilation_free", &StructuralReport::dilation_free);
    m.def("structural_checks", &structural_checks, py::arg("A"), py::arg("B"));

    m.def("gramian_full", &gramian_full, py::arg("A"), py::arg("B"), py::arg("tau_f"));

    py::class_<GramianBundle>(m, "GramianBundle")
        .def_readonly("tau_f", &GramianBundle::tau_f)
        .def_readonly("W", &GramianBundle::W)
        .def_readonly("W_C", &GramianBundle::W_C)
        .def_readonly("script_W", &GramianBundle::script_W)
        .def_readonly("eig_min", &GramianBundle::eig_min)
        .def_readonly("eig_max", &GramianBundle::eig_max);
    m.def(
        "gramian_target",
        [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const std::vector<int>& targets,
           int tau_f) { return gramian_target(A, B, TargetSet{targets}, tau_f); },
        py::arg("A"), py::arg("B"), py::arg("targets"), py::arg("tau_f"));

    py::class_<EigenbasisForm>(m, "EigenbasisForm")
        .def_readonly("P", &EigenbasisForm::P)
        .def_readonly("lam", &EigenbasisForm::lambda)
        .def_readonly("Q", &EigenbasisForm::Q)
        .def_readonly("M", &EigenbasisForm::M);
    m.def("eigenbasis_form", &eigenbasis_form, py::arg("A"), py::arg("B"), py::arg("tau_f"));

    py::enum_<EnergyConvention>(m, "EnergyConvention")
        .value("Sum", EnergyConvention::Sum)
        .value("HalfSum", EnergyConvention::HalfSum);

    py::class_<OptimalPlan>(m, "OptimalPlan")
        .def_readonly("inputs", &OptimalPlan::inputs)
        .def_readonly("energy", &OptimalPlan::energy)
        .def_readonly("trajectory", &OptimalPlan::trajectory)
        .def_readonly("condition_number", &OptimalPlan::condition_number);

    m.def(
        "optimal_input",
        [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const std::vector<int>& targets,
           const Eigen::VectorXd& x0, const Eigen::VectorXd& y_f, int tau_f,
           EnergyConvention convention, double endpoint_tol) {
            return optimal_input(A, B, TargetSet{targets}, {x0, y_f, tau_f}, convention,
                                 endpoint_tol);
        },
        py::arg("A"), py::arg("B"), py::arg("targets"), py::arg("x0"), py::arg("y_f"),
        py::arg("tau_f"), py::arg("convention") = EnergyConvention::Sum,
        py::arg("endpoint_tol") = 1e-8);
    m.def(
        "minimum_energy",
        [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const std::vector<int>& targets,
           const Eigen::VectorXd& x0, const Eigen::VectorXd& y_f, int tau_f,
           EnergyConvention convention) {
            return minimum_energy(A, B, TargetSet{targets}, {x0, y_f, tau_f}, convention);
        },
        py::arg("A"), py::arg("B"), py::arg("targets"), py::arg("x0"), py::arg("y_f"),
        py::arg("tau_f"), py::arg("convention") = EnergyConvention::Sum);
    m.def("simulate", &simulate, py::arg("A"), py::arg("B"), py::arg("inputs"), py::arg("x0"));
    m.def("energy_sandwich", &energy_sandwich, py::arg("W_C"), py::arg("y_f_unit"));

    py::class_<TraceStats>(m, "TraceStats")
        .def_readonly("alpha_over", &TraceStats::alpha_over)
        .def_readonly("beta_over", &TraceStats::beta_over)
        .def_readonly("alpha_under", &TraceStats::alpha_under)
        .def_readonly("beta_under", &TraceStats::beta_under)
        .def_readonly("dim", &TraceStats::dim);

    m.def("lam_extreme_estimate", &lam_extreme_estimate, py::arg("alpha"), py::arg("beta"),
          py::arg("dim"));
    m.def("trace_stats_exact", &trace_stats_exact, py::arg("M"));

    py::enum_<RegimeKind>(m, "RegimeKind")
        .value("Constant", RegimeKind::Constant)
        .value("InverseTime", RegimeKind::InverseTime)
        .value("PowerLaw", RegimeKind::PowerLaw);
    py::enum_<BoundSide>(m, "BoundSide")
        .value("Lower", BoundSide::Lower)
        .value("Upper", BoundSide::Upper);
    py::class_<Regime>(m, "Regime")
        .def_readonly("kind", &Regime::kind)
        .def_readonly("lambda_abs", &Regime::lambda_abs)
        .def("__repr__", [](const Regime& r) { return regime_label(r); });
    m.def("classify_regime", &classify_regime, py::arg("spectrum_c"), py::arg("side"));

    py::class_<DiagonalExtremes>(m, "DiagonalExtremes")
        .def_readonly("lam_min_M", &DiagonalExtremes::lam_min_M)
        .def_readonly("lam_max_M", &DiagonalExtremes::lam_max_M)
        .def_readonly("regime_min", &DiagonalExtremes::regime_min)
        .def_readonly("regime_max", &DiagonalExtremes::regime_max)
        .def_readonly("stable_limit_min", &DiagonalExtremes::stable_limit_min)
        .def_readonly("stable_limit_max", &DiagonalExtremes::stable_limit_max);
    m.def("alpha_beta_full_n_drivers", &alpha_beta_full_n_drivers, py::arg("spectrum"),
          py::arg("tau_f"));
    m.def("alpha_beta_one_driver", &alpha_beta_one_driver, py::arg("P"), py::arg("lam"),
          py::arg("driver"), py::arg("tau_f"));
    m.def("alpha_beta_m_drivers", &alpha_beta_m_drivers, py::arg("P"), py::arg("lam"),
          py::arg("drivers"), py::arg("tau_f"));
    m.def("alpha_beta_target", &alpha_beta_target, py::arg("decomposition"),
          py::arg("driver_positions"), py::arg("tau_f"));

    py::class_<BoundEstimate>(m, "BoundEstimate")
        .def_readonly("E_upper", &BoundEstimate::E_upper)
        .def_readonly("E_lower", &BoundEstimate::E_lower)
        .def_readonly("log10_E_upper", &BoundEstimate::log10_E_upper)
        .def_readonly("log10_E_lower", &BoundEstimate::log10_E_lower)
        .def_readonly("regime_upper", &BoundEstimate::regime_upper)
        .def_readonly("regime_lower", &BoundEstimate::regime_lower)
        .def_readonly("overflow_upper", &BoundEstimate::overflow_upper)
        .def_readonly("overflow_lower", &BoundEstimate::overflow_lower);
    m.def("estimate_bounds", &estimate_bounds, py::arg("decomposition"),
          py::arg("driver_positions"), py::arg("tau_f"));
    m.def(
        "c1_constant",
        [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const std::vector<int>& targets,
           int tau_start, int tau_step, double rel_tol, int max_steps) {
            return c1_constant(A, B, TargetSet{targets}, tau_start, tau_step, rel_tol, max_steps);
        },
        py::arg("A"), py::arg("B"), py::arg("targets"), py::arg("tau_start") = 20,
        py::arg("tau_step") = 5, py::arg("rel_tol") = 1e-3, py::arg("max_steps") = 40);

    m.def("controllable_node_members", &controllable_node_members, py::arg("decomposition"),
          py::arg("tol") = 1e-8);
    m.def("connected_components", &connected_components, py::arg("A"));
    m.def(
        "select_spanning_targets",
        [](const ControllableDecomposition& dec, const std::vector<int>& forced) {
            return select_spanning_targets(dec, forced);
        },
        py::arg("decomposition"), py::arg("forced"));

    // demonstration networks and recipe execution
    m.def("demo_star4", &demo_star4);
    m.def("demo_driver_choice5", &demo_driver_choice5);
    m.def("demo_target_vs_full10", &demo_target_vs_full10, py::arg("seed") = 2);
    m.def("demo_sphere_wc", &demo_sphere_wc);
    m.def("demo_triangle3", &demo_triangle3);

    m.def(
        "run_recipe",
        [](const std::string& config_json, const std::string& recipe,
           std::optional<std::uint64_t> seed, std::optional<std::string> out_dir) {
            auto cfg = parse_config(config_json);
            if (!recipe.empty()) {
                auto tmp = parse_config("{\"recipe\": \"" + recipe + "\"}");
                cfg.recipe = tmp.recipe;
            }
            if (seed) cfg.seed = *seed;
            if (out_dir) cfg.out_dir = *out_dir;
            const auto result = run_recipe(cfg);
            return py::make_tuple(result.files_written, result.summary_json);
        },
        py::arg("config_json"), py::arg("recipe") = "", py::arg("seed") = py::none(),
        py::arg("out_dir") = py::none());
}
