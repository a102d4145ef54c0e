#include "netctrl/energy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace netctrl {

namespace {

struct TargetSolve {
    Eigen::MatrixXd C;
    Eigen::VectorXd beta;  // y_f - C A^{tau_f} x0
    Eigen::VectorXd z;     // (C W C^T)^{-1} beta
    double energy = 0.0;   // beta^T z (Sum convention)
    double condition = 0.0;
};

TargetSolve solve_target(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const TargetSet& targets, const ControlTask& task) {
    const int n = static_cast<int>(A.rows());
    if (task.tau_f < 1) throw ParameterError("ControlTask: tau_f must be >= 1");
    if (task.x0.size() != n) throw ParameterError("ControlTask: x0 size must equal n");
    if (static_cast<int>(task.y_f.size()) != static_cast<int>(targets.indices.size()))
        throw ParameterError("ControlTask: y_f size must equal the number of targets");

    TargetSolve s;
    s.C = output_matrix(targets, n);
    const Eigen::MatrixXd W = gramian_full(A, B, task.tau_f);
    const Eigen::MatrixXd W_C = s.C * W * s.C.transpose();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W_C);
    const double eig_min = es.eigenvalues()(0);
    const double eig_max = es.eigenvalues()(es.eigenvalues().size() - 1);
    if (!(eig_min > std::max(1e-300, 1e-13 * eig_max)))
        throw NotControllableError(
            "minimum-energy solve: C W C^T is singular (not target-controllable at tau_f = " +
            std::to_string(task.tau_f) + ")");
    s.condition = eig_max / eig_min;

    Eigen::VectorXd free_end = task.x0;
    for (int t = 0; t < task.tau_f; ++t) free_end = A * free_end;
    s.beta = task.y_f - s.C * free_end;

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(W_C);
    if (ldlt.info() != Eigen::Success)
        throw NotControllableError("minimum-energy solve: factorization of C W C^T failed");
    s.z = ldlt.solve(s.beta);
    s.energy = s.beta.dot(s.z);
    return s;
}

}  // namespace

double minimum_energy(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const TargetSet& targets, const ControlTask& task,
                      EnergyConvention convention) {
    const auto s = solve_target(A, B, targets, task);
    return convention == EnergyConvention::HalfSum ? 0.5 * s.energy : s.energy;
}

OptimalPlan optimal_input(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const TargetSet& targets, const ControlTask& task,
                          EnergyConvention convention, double endpoint_tol) {
    const auto s = solve_target(A, B, targets, task);
    const int m = static_cast<int>(B.cols());

    OptimalPlan plan;
    plan.condition_number = s.condition;
    plan.inputs.resize(m, task.tau_f);
    // u(t) = B^T (A^T)^{tau_f - t - 1} C^T z, filled backwards with a running product
    Eigen::VectorXd w = s.C.transpose() * s.z;
    for (int t = task.tau_f - 1; t >= 0; --t) {
        plan.inputs.col(t) = B.transpose() * w;
        if (t > 0) w = A.transpose() * w;
    }
    plan.trajectory = simulate(A, B, plan.inputs, task.x0);

    const Eigen::VectorXd reached = s.C * plan.trajectory.col(task.tau_f);
    const double miss = (reached - task.y_f).cwiseAbs().maxCoeff();
    if (miss > endpoint_tol)
        throw NumericalError("optimal_input: endpoint error " + std::to_string(miss) +
                             " exceeds tolerance " + std::to_string(endpoint_tol));

    plan.energy = plan.inputs.squaredNorm();
    if (convention == EnergyConvention::HalfSum) plan.energy *= 0.5;
    return plan;
}

Eigen::MatrixXd simulate(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& inputs, const Eigen::VectorXd& x0) {
    const int n = static_cast<int>(A.rows());
    if (x0.size() != n) throw ParameterError("simulate: x0 size must equal n");
    if (inputs.rows() != B.cols())
        throw ParameterError("simulate: inputs row count must equal the input dimension");
    const int steps = static_cast<int>(inputs.cols());
    Eigen::MatrixXd traj(n, steps + 1);
    traj.col(0) = x0;
    for (int t = 0; t < steps; ++t)
        traj.col(t + 1) = A * traj.col(t) + B * inputs.col(t);
    return traj;
}

std::pair<double, double> energy_sandwich(const Eigen::MatrixXd& W_C,
                                          const Eigen::VectorXd& y_f_unit) {
    if (W_C.rows() != W_C.cols()) throw ParameterError("energy_sandwich: W_C must be square");
    if (std::abs(y_f_unit.norm() - 1.0) > 1e-12)
        throw ParameterError("energy_sandwich: y_f must have unit norm");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W_C);
    const double eig_min = es.eigenvalues()(0);
    const double eig_max = es.eigenvalues()(es.eigenvalues().size() - 1);
    if (!(eig_min > 0.0))
        throw ParameterError("energy_sandwich: W_C must be positive definite");
    return {1.0 / eig_max, 1.0 / eig_min};
}

void export_plan_csv(const OptimalPlan& plan, const std::string& csv_path) {
    std::ofstream csv(csv_path);
    if (!csv) throw FormatError("export_plan_csv: cannot open " + csv_path);
    const int m = static_cast<int>(plan.inputs.rows());
    const int n = static_cast<int>(plan.trajectory.rows());
    const int tau_f = static_cast<int>(plan.inputs.cols());
    csv << "t";
    for (int k = 1; k <= m; ++k) csv << ",u" << k;
    for (int k = 1; k <= n; ++k) csv << ",x" << k;
    csv << "\n";
    char buf[40];
    for (int t = 0; t <= tau_f; ++t) {
        csv << t;
        for (int k = 0; k < m; ++k) {
            const double u = (t < tau_f) ? plan.inputs(k, t) : 0.0;
            std::snprintf(buf, sizeof(buf), "%.17g", u);
            csv << "," << buf;
        }
        for (int k = 0; k < n; ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", plan.trajectory(k, t));
            csv << "," << buf;
        }
        csv << "\n";
    }
}

std::string plan_summary_json(const OptimalPlan& plan) {
    nlohmann::json j;
    j["E"] = plan.energy;
    j["tau_f"] = static_cast<int>(plan.inputs.cols());
    j["condition_number"] = plan.condition_number;
    return j.dump(2);
}

}  // namespace netctrl
