#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "netctrl/errors.hpp"

namespace netctrl {

// Driver nodes, 1-based. Induces B = [e_{d1} ... e_{dm}].
struct DriverSet {
    std::vector<int> indices;
};

// Target nodes, 1-based. Induces C stacking the matching identity rows.
struct TargetSet {
    std::vector<int> indices;
};

Eigen::MatrixXd input_matrix(const DriverSet& drivers, int n);
Eigen::MatrixXd output_matrix(const TargetSet& targets, int n);

// [B, AB, ..., A^{n-1}B], built by iterated multiplication.
Eigen::MatrixXd controllability_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// [CB, CAB, ..., CA^{n-1}B]; full row rank iff target-controllable.
Eigen::MatrixXd output_controllability_matrix(const Eigen::MatrixXd& A,
                                              const Eigen::MatrixXd& B,
                                              const Eigen::MatrixXd& C);

// Count of singular values above tol * sigma_max. tol <= 0 selects the
// standard rule max(rows, cols) * machine epsilon.
int numerical_rank(const Eigen::MatrixXd& M, double tol = -1.0);

// Orthogonal coordinate change splitting the dynamics into a controllable
// block (A_c, B_c) and an uncontrollable block A_nc. Rows of R are the basis:
// the first `rank` rows span the column space of the controllability matrix.
struct ControllableDecomposition {
    int rank = 0;
    Eigen::MatrixXd R;     // n x n orthogonal
    Eigen::MatrixXd A_c;   // rank x rank
    Eigen::MatrixXd B_c;   // rank x m
    Eigen::MatrixXd A_nc;  // (n-rank) x (n-rank)
    Eigen::MatrixXd R1;    // top-left rank x rank block of R
};

ControllableDecomposition decompose_gram_schmidt(const Eigen::MatrixXd& A,
                                                 const Eigen::MatrixXd& B,
                                                 double tol = -1.0);

// Node-permutation decomposition for nonsingular A: controllable nodes are the
// ones whose indicator vectors lie in the column space of the controllability
// matrix; the controllable block is then the induced subgraph adjacency.
struct PermutationDecomposition {
    std::vector<int> controllable;    // 1-based node ids
    std::vector<int> uncontrollable;  // 1-based node ids
    Eigen::MatrixXd theta;            // permutation matrix, x_bar = theta * x
    Eigen::MatrixXd A_c_bar;          // induced adjacency on controllable nodes
    std::optional<std::string> warning;  // set when the two decompositions disagree
};

PermutationDecomposition decompose_permutation(const Eigen::MatrixXd& A,
                                               const Eigen::MatrixXd& B,
                                               double tol = -1.0);

// Structural controllability ingredients: per-node accessibility from the
// drivers and absence of dilation (full row rank of [A B]).
struct StructuralReport {
    std::vector<bool> accessible;
    bool dilation_free = false;
};

StructuralReport structural_checks(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Nodes (1-based) whose indicator vectors lie in the controllable subspace.
std::vector<int> controllable_node_members(const ControllableDecomposition& dec,
                                           double tol = 1e-8);

// Connected components of the nonzero pattern, each sorted, largest first.
std::vector<std::vector<int>> connected_components(const Eigen::MatrixXd& A);

// Deterministic choice of `rank` target nodes (0-based) such that the matching
// columns of R.topRows(rank) are well conditioned; `forced` nodes are kept.
std::vector<int> select_spanning_targets(const ControllableDecomposition& dec,
                                         const std::vector<int>& forced);

// Decomposition report: {"rank":..., "controllable":[...], "R":[row major],
// "A_c":..., "B_c":...}
std::string decomposition_report_json(const ControllableDecomposition& dec,
                                      const std::vector<int>& controllable_nodes);

}  // namespace netctrl
