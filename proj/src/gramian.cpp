#include "netctrl/gramian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"

namespace netctrl {

namespace {

void require_symmetric(const Eigen::MatrixXd& A, const char* what) {
    if (A.rows() != A.cols())
        throw ParameterError(std::string(what) + ": matrix must be square");
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ParameterError(std::string(what) + ": matrix must be symmetric");
}

}  // namespace

Eigen::MatrixXd gramian_full(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int tau_f) {
    const auto n = A.rows();
    if (A.cols() != n) throw ParameterError("gramian_full: A must be square");
    if (B.rows() != n) throw ParameterError("gramian_full: B row count must match A");
    if (tau_f < 1) throw ParameterError("gramian_full: tau_f must be >= 1");

    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd X = B;
    for (int t = 0; t < tau_f; ++t) {
        W.noalias() += X * X.transpose();
        if (t + 1 < tau_f) X = A * X;
    }
    if (!W.allFinite())
        throw NumericalError("gramian_full: entries overflowed at tau_f = " +
                             std::to_string(tau_f));
    return 0.5 * (W + W.transpose());
}

GramianBundle gramian_target(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                             const TargetSet& targets, int tau_f) {
    const int n = static_cast<int>(A.rows());
    const Eigen::MatrixXd C = output_matrix(targets, n);
    const int r = static_cast<int>(C.rows());

    if (numerical_rank(output_controllability_matrix(A, B, C)) < r)
        throw NotControllableError(
            "gramian_target: system is not output controllable for the given targets");

    GramianBundle bundle;
    bundle.tau_f = tau_f;
    bundle.W = gramian_full(A, B, tau_f);
    bundle.W_C = C * bundle.W * C.transpose();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bundle.W_C);
    bundle.eig_min = es.eigenvalues()(0);
    bundle.eig_max = es.eigenvalues()(r - 1);
    if (!(bundle.eig_min > std::max(1e-300, 1e-13 * bundle.eig_max)))
        throw NotControllableError(
            "gramian_target: W_C is numerically singular at tau_f = " + std::to_string(tau_f) +
            " (horizon too short or targets unreachable)");

    // Cross-check against the controllable-subsystem route W_C = R1^T script_W R1,
    // with R1 the target columns of the first `rank` rows of R.
    const auto dec = decompose_gram_schmidt(A, B);
    bundle.script_W = gramian_full(dec.A_c, dec.B_c, tau_f);
    Eigen::MatrixXd R1t(dec.rank, r);
    for (int k = 0; k < r; ++k) R1t.col(k) = dec.R.topRows(dec.rank).col(targets.indices[k] - 1);
    const Eigen::MatrixXd W_C_alt = R1t.transpose() * bundle.script_W * R1t;
    const double err = (W_C_alt - bundle.W_C).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, bundle.W_C.cwiseAbs().maxCoeff());
    if (err > 1e-8 * scale)
        throw NumericalError("gramian_target: subsystem-Gramian cross-check failed, error " +
                             std::to_string(err));
    return bundle;
}

EigenbasisForm eigenbasis_form(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int tau_f) {
    require_symmetric(A, "eigenbasis_form");
    if (tau_f < 1) throw ParameterError("eigenbasis_form: tau_f must be >= 1");
    const auto n = A.rows();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success)
        throw NumericalError("eigenbasis_form: eigendecomposition failed");

    // reorder by |lambda| ascending (stable)
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXd raw = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(raw(a)) < std::abs(raw(b));
    });

    EigenbasisForm form;
    form.lambda.resize(n);
    form.P.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        form.lambda(k) = raw(order[k]);
        form.P.col(k) = es.eigenvectors().col(order[k]);
    }
    form.Q = form.P.transpose() * B * B.transpose() * form.P;

    form.M.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double x = form.lambda(i) * form.lambda(j);
            double geom;
            if (std::abs(1.0 - x) < 1e-7) {
                // direct sum near the pole; avoids catastrophic cancellation
                geom = 0.0;
                double term = 1.0;
                for (int t = 0; t < tau_f; ++t) {
                    geom += term;
                    term *= x;
                }
            } else {
                geom = (1.0 - std::pow(x, tau_f)) / (1.0 - x);
            }
            form.M(i, j) = form.Q(i, j) * geom;
            form.M(j, i) = form.M(i, j);
        }
    }
    if (!form.M.allFinite())
        throw NumericalError("eigenbasis_form: M overflowed at tau_f = " + std::to_string(tau_f));
    return form;
}

bool gramian_would_overflow(const Eigen::MatrixXd& A, int tau_f) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const double lam_max = es.eigenvalues().cwiseAbs().maxCoeff();
    if (lam_max <= 1.0) return false;
    const double log_limit = std::log(std::numeric_limits<double>::max()) - 40.0;
    return 2.0 * (tau_f - 1) * std::log(lam_max) > log_limit;
}

void dump_gramian(const GramianBundle& bundle, const std::string& csv_path,
                  const std::string& json_path) {
    std::ofstream csv(csv_path);
    if (!csv) throw FormatError("dump_gramian: cannot open " + csv_path);
    char buf[40];
    const auto r = bundle.W_C.rows();
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < r; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", bundle.W_C(i, j));
            csv << buf << (j + 1 < r ? "," : "");
        }
        csv << "\n";
    }
    nlohmann::json j;
    j["tau_f"] = bundle.tau_f;
    j["r"] = static_cast<int>(r);
    j["eig_min"] = bundle.eig_min;
    j["eig_max"] = bundle.eig_max;
    std::ofstream js(json_path);
    if (!js) throw FormatError("dump_gramian: cannot open " + json_path);
    js << j.dump(2) << "\n";
}

}  // namespace netctrl
