#pragma once

#include <Eigen/Dense>
#include <string>

#include "netctrl/ctrb.hpp"

namespace netctrl {

// Finite-horizon controllability Gramian W = sum_{t=0}^{tau_f-1} A^t B B^T (A^T)^t,
// accumulated with a running product.
Eigen::MatrixXd gramian_full(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int tau_f);

// Gramians for a target set: the full W, the target block W_C = C W C^T, and
// the controllable-subsystem Gramian script_W whose R1-congruence reproduces
// W_C (checked on construction).
struct GramianBundle {
    int tau_f = 0;
    Eigen::MatrixXd W;         // n x n
    Eigen::MatrixXd W_C;       // r x r
    Eigen::MatrixXd script_W;  // rank x rank, Gramian of (A_c, B_c)
    double eig_min = 0.0;      // extreme eigenvalues of W_C
    double eig_max = 0.0;
};

GramianBundle gramian_target(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                             const TargetSet& targets, int tau_f);

// Eigenbasis form of the Gramian: A = P Lambda P^T with |lambda| ascending,
// Q = P^T B B^T P and M(i,j) = q_ij (1 - (l_i l_j)^tau_f) / (1 - l_i l_j),
// with the direct-sum branch near l_i l_j = 1. spectrum(M) == spectrum(W).
struct EigenbasisForm {
    Eigen::MatrixXd P;
    Eigen::VectorXd lambda;
    Eigen::MatrixXd Q;
    Eigen::MatrixXd M;
};

EigenbasisForm eigenbasis_form(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int tau_f);

// True when |lambda_max(A)|^(2 tau_f) * ||B B^T|| would exceed double range;
// exact-energy operations refuse in that case while the bound pipeline
// switches to log-magnitude forms.
bool gramian_would_overflow(const Eigen::MatrixXd& A, int tau_f);

// Writes W_C as CSV plus a JSON header {tau_f, r, eig_min, eig_max}.
void dump_gramian(const GramianBundle& bundle, const std::string& csv_path,
                  const std::string& json_path);

}  // namespace netctrl
