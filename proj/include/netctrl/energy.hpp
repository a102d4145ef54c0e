#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "netctrl/ctrb.hpp"
#include "netctrl/gramian.hpp"

namespace netctrl {

// Steering task: drive the target coordinates from x0 to y_f in tau_f steps.
struct ControlTask {
    Eigen::VectorXd x0;
    Eigen::VectorXd y_f;
    int tau_f = 0;
};

// E = sum_t u^T u (the convention used by the scaling analysis); HalfSum
// restores the 1/2 factor of the variational derivation.
enum class EnergyConvention { Sum, HalfSum };

struct OptimalPlan {
    Eigen::MatrixXd inputs;      // m x tau_f, column t = u(t)
    double energy = 0.0;
    Eigen::MatrixXd trajectory;  // n x (tau_f + 1)
    double condition_number = 0.0;  // of W_C
};

// Minimum-energy input u*(t) = B^T (A^T)^{tau_f-t-1} C^T (C W C^T)^{-1} (y_f - C A^{tau_f} x0),
// realized through a symmetric factorization of W_C and a backward recursion.
OptimalPlan optimal_input(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const TargetSet& targets, const ControlTask& task,
                          EnergyConvention convention = EnergyConvention::Sum,
                          double endpoint_tol = 1e-8);

// E = beta^T (C W C^T)^{-1} beta without materializing the input sequence.
double minimum_energy(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const TargetSet& targets, const ControlTask& task,
                      EnergyConvention convention = EnergyConvention::Sum);

// Rollout x(t+1) = A x(t) + B u(t); returns n x (cols(inputs)+1).
Eigen::MatrixXd simulate(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& inputs, const Eigen::VectorXd& x0);

// (1/lambda_max, 1/lambda_min) of a positive definite W_C; y_f must be unit.
std::pair<double, double> energy_sandwich(const Eigen::MatrixXd& W_C,
                                          const Eigen::VectorXd& y_f_unit);

// CSV with columns t, u_1..u_m, x_1..x_n plus a JSON summary
// {E, tau_f, condition_number}.
void export_plan_csv(const OptimalPlan& plan, const std::string& csv_path);
std::string plan_summary_json(const OptimalPlan& plan);

}  // namespace netctrl
