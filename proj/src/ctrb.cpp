#include "netctrl/ctrb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "json.hpp"

namespace netctrl {

namespace {

void validate_indices(const std::vector<int>& idx, int n, const char* what) {
    if (idx.empty()) throw ParameterError(std::string(what) + ": index set must be nonempty");
    std::set<int> uniq(idx.begin(), idx.end());
    if (uniq.size() != idx.size())
        throw ParameterError(std::string(what) + ": indices must be distinct");
    for (int i : idx)
        if (i < 1 || i > n)
            throw ParameterError(std::string(what) + ": index " + std::to_string(i) +
                                 " out of range 1.." + std::to_string(n));
}

// Two-pass Gram-Schmidt projection of w against the rows of basis[0..k).
void project_out(Eigen::VectorXd& w, const std::vector<Eigen::VectorXd>& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& v : basis) w -= v.dot(w) * v;
}

}  // namespace

Eigen::MatrixXd input_matrix(const DriverSet& drivers, int n) {
    validate_indices(drivers.indices, n, "DriverSet");
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, static_cast<int>(drivers.indices.size()));
    for (int k = 0; k < static_cast<int>(drivers.indices.size()); ++k)
        B(drivers.indices[k] - 1, k) = 1.0;
    return B;
}

Eigen::MatrixXd output_matrix(const TargetSet& targets, int n) {
    validate_indices(targets.indices, n, "TargetSet");
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<int>(targets.indices.size()), n);
    for (int k = 0; k < static_cast<int>(targets.indices.size()); ++k)
        C(k, targets.indices[k] - 1) = 1.0;
    return C;
}

Eigen::MatrixXd controllability_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    const auto n = A.rows();
    if (A.cols() != n) throw ParameterError("controllability_matrix: A must be square");
    if (B.rows() != n) throw ParameterError("controllability_matrix: B row count must match A");
    const auto m = B.cols();
    Eigen::MatrixXd K(n, n * m);
    Eigen::MatrixXd X = B;
    for (Eigen::Index block = 0; block < n; ++block) {
        K.middleCols(block * m, m) = X;
        if (block + 1 < n) X = A * X;
    }
    return K;
}

Eigen::MatrixXd output_controllability_matrix(const Eigen::MatrixXd& A,
                                              const Eigen::MatrixXd& B,
                                              const Eigen::MatrixXd& C) {
    if (C.cols() != A.rows())
        throw ParameterError("output_controllability_matrix: C column count must match A");
    return C * controllability_matrix(A, B);
}

int numerical_rank(const Eigen::MatrixXd& M, double tol) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    if (tol <= 0.0)
        tol = static_cast<double>(std::max(M.rows(), M.cols())) *
              std::numeric_limits<double>::epsilon();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * sv(0)) ++rank;
    return rank;
}

ControllableDecomposition decompose_gram_schmidt(const Eigen::MatrixXd& A,
                                                 const Eigen::MatrixXd& B,
                                                 double tol) {
    const int n = static_cast<int>(A.rows());
    const Eigen::MatrixXd K = controllability_matrix(A, B);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(K);
    const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    if (tol <= 0.0)
        tol = static_cast<double>(std::max(K.rows(), K.cols())) *
              std::numeric_limits<double>::epsilon();
    const double accept = tol * smax;

    // Left-to-right greedy selection over the columns of the controllability
    // matrix; this reproduces the "first maximal independent group" choice.
    std::vector<Eigen::VectorXd> basis;
    for (Eigen::Index j = 0; j < K.cols() && static_cast<int>(basis.size()) < n; ++j) {
        Eigen::VectorXd w = K.col(j);
        project_out(w, basis);
        if (w.norm() > accept) basis.push_back(w.normalized());
    }
    const int rank = static_cast<int>(basis.size());
    if (rank == 0)
        throw DegenerateDecompositionError(
            "decompose_gram_schmidt: controllability matrix has rank zero");

    // Extend with coordinate vectors to an orthonormal basis of the full space.
    for (int j = 0; j < n && static_cast<int>(basis.size()) < n; ++j) {
        Eigen::VectorXd w = Eigen::VectorXd::Unit(n, j);
        project_out(w, basis);
        if (w.norm() > 1e-8) basis.push_back(w.normalized());
    }
    if (static_cast<int>(basis.size()) != n)
        throw NumericalError("decompose_gram_schmidt: failed to complete orthonormal basis");

    ControllableDecomposition dec;
    dec.rank = rank;
    dec.R.resize(n, n);
    for (int i = 0; i < n; ++i) dec.R.row(i) = basis[i].transpose();
    const Eigen::MatrixXd A_bar = dec.R * A * dec.R.transpose();
    dec.A_c = A_bar.topLeftCorner(rank, rank);
    dec.A_nc = A_bar.bottomRightCorner(n - rank, n - rank);
    dec.B_c = (dec.R * B).topRows(rank);
    dec.R1 = dec.R.topLeftCorner(rank, rank);
    return dec;
}

PermutationDecomposition decompose_permutation(const Eigen::MatrixXd& A,
                                               const Eigen::MatrixXd& B,
                                               double tol) {
    const int n = static_cast<int>(A.rows());
    if (numerical_rank(A) < n)
        throw SingularMatrixError(
            "decompose_permutation: A is singular; use decompose_gram_schmidt instead");

    const auto dec = decompose_gram_schmidt(A, B, tol);

    PermutationDecomposition out;
    out.controllable = controllable_node_members(dec);
    for (int i = 1; i <= n; ++i)
        if (std::find(out.controllable.begin(), out.controllable.end(), i) ==
            out.controllable.end())
            out.uncontrollable.push_back(i);
    const int r = static_cast<int>(out.controllable.size());
    if (r != dec.rank)
        out.warning = "membership count " + std::to_string(r) +
                      " disagrees with controllability rank " + std::to_string(dec.rank) +
                      "; node labelling may be unreliable";

    out.theta = Eigen::MatrixXd::Zero(n, n);
    int row = 0;
    for (int node : out.controllable) out.theta(row++, node - 1) = 1.0;
    for (int node : out.uncontrollable) out.theta(row++, node - 1) = 1.0;

    out.A_c_bar.resize(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            out.A_c_bar(i, j) = A(out.controllable[i] - 1, out.controllable[j] - 1);

    // No controllable node may link to an uncontrollable one.
    const double coupling_tol = (tol > 0 ? tol : 1e-8);
    double worst = 0.0;
    for (int ci : out.controllable)
        for (int uj : out.uncontrollable)
            worst = std::max(worst, std::abs(A(ci - 1, uj - 1)));
    if (worst > coupling_tol && !out.warning)
        out.warning = "nonzero coupling " + std::to_string(worst) +
                      " between controllable and uncontrollable nodes";
    return out;
}

StructuralReport structural_checks(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    StructuralReport report;
    report.accessible.assign(n, false);

    // BFS over the nonzero pattern from every driver node.
    std::vector<int> queue;
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < n; ++i)
            if (B(i, k) != 0.0 && !report.accessible[i]) {
                report.accessible[i] = true;
                queue.push_back(i);
            }
    while (!queue.empty()) {
        const int u = queue.back();
        queue.pop_back();
        for (int v = 0; v < n; ++v)
            if (v != u && A(v, u) != 0.0 && !report.accessible[v]) {
                report.accessible[v] = true;
                queue.push_back(v);
            }
    }

    Eigen::MatrixXd AB(n, n + m);
    AB << A, B;
    report.dilation_free = (numerical_rank(AB) == n);
    return report;
}

std::vector<int> controllable_node_members(const ControllableDecomposition& dec, double tol) {
    const int n = static_cast<int>(dec.R.cols());
    const Eigen::MatrixXd Q = dec.R.topRows(dec.rank).transpose();  // n x r orthonormal
    std::vector<int> members;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(n, i);
        if ((e - Q * (Q.transpose() * e)).norm() <= tol) members.push_back(i + 1);
    }
    return members;
}

std::vector<std::vector<int>> connected_components(const Eigen::MatrixXd& A) {
    const int n = static_cast<int>(A.rows());
    std::vector<bool> seen(n, false);
    std::vector<std::vector<int>> comps;
    for (int s = 0; s < n; ++s) {
        if (seen[s]) continue;
        std::vector<int> comp{s}, stack{s};
        seen[s] = true;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v)
                if (v != u && A(u, v) != 0.0 && !seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                    comp.push_back(v);
                }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() > b.size() : a.front() < b.front();
    });
    return comps;
}

std::vector<int> select_spanning_targets(const ControllableDecomposition& dec,
                                         const std::vector<int>& forced) {
    const Eigen::MatrixXd Rt = dec.R.topRows(dec.rank);
    const int n = static_cast<int>(Rt.cols());
    std::vector<int> chosen = forced;
    std::vector<Eigen::VectorXd> basis;
    for (int f : forced) {
        Eigen::VectorXd w = Rt.col(f);
        project_out(w, basis);
        if (w.norm() <= 1e-12)
            throw ParameterError("select_spanning_targets: forced nodes are dependent");
        basis.push_back(w.normalized());
    }
    while (static_cast<int>(chosen.size()) < dec.rank) {
        int best = -1;
        double best_res = -1.0;
        for (int j = 0; j < n; ++j) {
            if (std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
            Eigen::VectorXd w = Rt.col(j);
            project_out(w, basis);
            const double res = w.norm();
            if (res > best_res) {
                best_res = res;
                best = j;
            }
        }
        if (best < 0 || best_res <= 1e-12)
            throw NumericalError("select_spanning_targets: no independent column left");
        chosen.push_back(best);
        Eigen::VectorXd w = Rt.col(best);
        project_out(w, basis);
        basis.push_back(w.normalized());
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

std::string decomposition_report_json(const ControllableDecomposition& dec,
                                      const std::vector<int>& controllable_nodes) {
    nlohmann::json j;
    j["rank"] = dec.rank;
    j["controllable"] = controllable_nodes;
    auto dump = [](const Eigen::MatrixXd& M) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < M.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    j["R"] = dump(dec.R);
    j["A_c"] = dump(dec.A_c);
    j["B_c"] = dump(dec.B_c);
    return j.dump(2);
}

}  // namespace netctrl
