#include "netctrl/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "netctrl/gramian.hpp"

namespace netctrl {

namespace {

constexpr double kUnitBand = 1e-9;
constexpr double kGapTol = 1e-7;

double geometric_sum(double x, int tau_f) {
    if (std::abs(1.0 - x) < kGapTol) {
        double sum = 0.0, term = 1.0;
        for (int t = 0; t < tau_f; ++t) {
            sum += term;
            term *= x;
        }
        return sum;
    }
    return (1.0 - std::pow(x, tau_f)) / (1.0 - x);
}

double signed_ipow(double x, int n) {
    double r = 1.0, base = x;
    for (int k = n; k > 0; k >>= 1) {
        if (k & 1) r *= base;
        base *= base;
    }
    return r;
}

double logaddexp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

// log f(alpha, beta) from log alpha, log beta
double log_f_estimate(double log_alpha, double log_beta, int dim) {
    const double ln_n = std::log(static_cast<double>(dim));
    const double t1 = log_alpha - ln_n;
    double log_inner = -std::numeric_limits<double>::infinity();
    const double e = 2.0 * log_alpha - ln_n;
    if (e < log_beta) log_inner = log_beta + std::log1p(-std::exp(e - log_beta));
    double t2 = -std::numeric_limits<double>::infinity();
    if (dim > 1 && log_inner > -std::numeric_limits<double>::infinity())
        t2 = 0.5 * (std::log((dim - 1.0) / dim) + log_inner);
    return 0.5 * logaddexp(t1, t2);
}

void check_simple_spectrum(const Eigen::VectorXd& lam) {
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        for (Eigen::Index j = i + 1; j < lam.size(); ++j)
            if (std::abs(lam(i) - lam(j)) < kGapTol)
                throw DegenerateSpectrumError(
                    "closed-form inverse requires a simple spectrum; eigenvalues " +
                    std::to_string(lam(i)) + " and " + std::to_string(lam(j)) +
                    " are closer than 1e-7");
}

// Closed-form inverse of M(i,j) = p_i p_j / (1 - l_i l_j) for distinct l with
// l_i l_j != 1:  M^-1(i,j) = g_i g_j / ((1 - l_i l_j) D_i D_j p_i p_j) with
// g_i = prod_k (1 - l_k l_i) and D_i = prod_{k != i} (l_i - l_k). The diagonal
// reduces to the textbook Cauchy form; the off-diagonal signs come with D_i D_j.
Eigen::MatrixXd stable_block_closed_inverse(const Eigen::VectorXd& lam,
                                            const Eigen::VectorXd& p) {
    const Eigen::Index n = lam.size();
    check_simple_spectrum(lam);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(p(i)) < 1e-12)
            throw SingularMatrixError(
                "closed-form inverse: driver has a vanishing eigenvector component");
        for (Eigen::Index j = 0; j < n; ++j)
            if (std::abs(1.0 - lam(i) * lam(j)) < kGapTol)
                throw DegenerateSpectrumError(
                    "closed-form inverse: eigenvalue product at the unit pole");
    }
    Eigen::VectorXd g(n), D(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double gi = 1.0, Di = 1.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            gi *= (1.0 - lam(k) * lam(i));
            if (k != i) Di *= (lam(i) - lam(k));
        }
        g(i) = gi;
        D(i) = Di;
    }
    Eigen::MatrixXd Minv(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            Minv(i, j) = g(i) * g(j) / ((1.0 - lam(i) * lam(j)) * D(i) * D(j) * p(i) * p(j));
    return Minv;
}

struct StatPair {
    double value_alpha = 0.0;
    double value_beta = 0.0;
    double log_alpha = 0.0;
    double log_beta = 0.0;
    bool finite = true;
};

// alpha = s^2 ||K||_F^2, beta = s^4 ||K K||_F^2 with explicit log bookkeeping.
StatPair stats_from_scaled_core(const Eigen::MatrixXd& K, double log_scale) {
    StatPair out;
    const double fro2 = K.squaredNorm();
    const Eigen::MatrixXd K2 = K * K;
    const double fro2_sq = K2.squaredNorm();
    out.log_alpha = 2.0 * log_scale + std::log(fro2);
    out.log_beta = 4.0 * log_scale + std::log(fro2_sq);
    out.value_alpha = std::exp(out.log_alpha);
    out.value_beta = std::exp(out.log_beta);
    out.finite = std::isfinite(out.value_alpha) && std::isfinite(out.value_beta) &&
                 out.value_alpha > 0.0 && out.value_beta > 0.0;
    return out;
}

// Trace stats of W_C^-1 where W_C = PR M PR^T, M(i,j) = q_ij G_ij(tau_f).
// Branches follow the spectrum: stable block truncation, unit block, or the
// scaled all-unstable form.
StatPair closed_under_stats(const Eigen::VectorXd& lam, const Eigen::MatrixXd& PR,
                            const Eigen::MatrixXd& Pr, const Eigen::MatrixXd& Qc,
                            const std::vector<int>& driver_rows, int tau_f) {
    const int r = static_cast<int>(lam.size());
    int mu = 0;
    while (mu < r && std::abs(lam(mu)) < 1.0 - kUnitBand) ++mu;
    int unit = 0;
    while (mu + unit < r && std::abs(std::abs(lam(mu + unit)) - 1.0) <= kUnitBand) ++unit;

    if (mu >= 1) {
        // first-mu stable rows/columns of M^-1 dominate; invert the stable block
        Eigen::MatrixXd Minv1;
        if (driver_rows.size() == 1) {
            Eigen::VectorXd p(mu);
            for (int i = 0; i < mu; ++i) p(i) = PR(driver_rows[0], i);
            Minv1 = stable_block_closed_inverse(lam.head(mu), p);
        } else {
            Eigen::MatrixXd M1(mu, mu);
            for (int i = 0; i < mu; ++i)
                for (int j = 0; j < mu; ++j) M1(i, j) = Qc(i, j) / (1.0 - lam(i) * lam(j));
            Eigen::FullPivLU<Eigen::MatrixXd> lu(M1);
            if (!lu.isInvertible())
                throw SingularMatrixError("closed under stats: stable block is singular");
            Minv1 = lu.inverse();
        }
        const Eigen::MatrixXd K = Pr.leftCols(mu) * Minv1 * Pr.leftCols(mu).transpose();
        return stats_from_scaled_core(K, 0.0);
    }

    if (unit >= 1) {
        // M ~ [[tau_f Q_u, .], [., explosive]]; the unit block rules M^-1
        Eigen::MatrixXd K;
        if (unit == 1 || driver_rows.size() == 1) {
            const double q11 = Qc(0, 0);
            if (std::abs(q11) < 1e-14)
                throw SingularMatrixError("closed under stats: unit mode is driver-blind");
            K = Pr.col(0) * Pr.col(0).transpose() / q11;
        } else {
            Eigen::MatrixXd Qu = Qc.topLeftCorner(unit, unit);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(Qu);
            if (!lu.isInvertible())
                throw DegenerateSpectrumError(
                    "closed under stats: unit block not invertible; use exact traces");
            K = Pr.leftCols(unit) * lu.inverse() * Pr.leftCols(unit).transpose();
        }
        return stats_from_scaled_core(K, -std::log(static_cast<double>(tau_f)));
    }

    // all unstable: M^-1 ~ |l_1|^{-2 tau_f} Dt N^-1 Dt with N = Q / (l_i l_j - 1)
    Eigen::MatrixXd Ninv;
    if (driver_rows.size() == 1) {
        Eigen::VectorXd p(r);
        for (int i = 0; i < r; ++i) p(i) = PR(driver_rows[0], i);
        Ninv = -stable_block_closed_inverse(lam, p);  // N = -[p p/(1 - l l)]
    } else {
        Eigen::MatrixXd N(r, r);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) N(i, j) = Qc(i, j) / (lam(i) * lam(j) - 1.0);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(N);
        if (!lu.isInvertible())
            throw SingularMatrixError("closed under stats: unstable core is singular");
        Ninv = lu.inverse();
    }
    Eigen::VectorXd Dt(r);
    for (int i = 0; i < r; ++i) Dt(i) = signed_ipow(lam(0) / lam(i), tau_f);
    const Eigen::MatrixXd K =
        Pr * (Dt.asDiagonal() * Ninv * Dt.asDiagonal()).eval() * Pr.transpose();
    return stats_from_scaled_core(K, -2.0 * tau_f * std::log(std::abs(lam(0))));
}

// Trace stats of W_C = PR (Q o G) PR^T. Stable spectra use the tau-free
// kernel 1/(1 - l_i l_j); otherwise the exact geometric factors, with a
// common log scale pulled out when entries exceed double range.
StatPair closed_over_stats(const Eigen::VectorXd& lam, const Eigen::MatrixXd& PR,
                           const Eigen::MatrixXd& Qc, int tau_f) {
    const int r = static_cast<int>(lam.size());
    const double lam_max_abs = lam.cwiseAbs().maxCoeff();
    const bool all_stable = lam_max_abs < 1.0 - kUnitBand;

    double log_scale = 0.0;
    Eigen::MatrixXd G(r, r);
    if (all_stable) {
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) G(i, j) = 1.0 / (1.0 - lam(i) * lam(j));
    } else if (2.0 * tau_f * std::log(std::max(lam_max_abs, 1.0)) < 600.0) {
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) G(i, j) = geometric_sum(lam(i) * lam(j), tau_f);
    } else {
        // scaled form: G_ij = s * Ghat_ij with s = |l_r|^{2(tau_f - 1)}
        log_scale = 2.0 * (tau_f - 1) * std::log(lam_max_abs);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) {
                const double x = lam(i) * lam(j);
                const double ax = std::abs(x);
                if (ax <= 1.0 + kUnitBand) {
                    const double v =
                        (std::abs(1.0 - x) < kGapTol) ? tau_f : 1.0 / (1.0 - x);
                    G(i, j) = v * std::exp(-log_scale);
                } else {
                    // (x^{tau_f} - 1)/(x - 1), log magnitude tau_f ln|x| - ln|x-1|
                    const double logmag = tau_f * std::log(ax) - std::log(std::abs(x - 1.0));
                    const double sign = (x > 0.0) ? 1.0 : -signed_ipow(-1.0, tau_f);
                    G(i, j) = sign * std::exp(logmag - log_scale);
                }
            }
    }
    const Eigen::MatrixXd K = PR * Qc.cwiseProduct(G) * PR.transpose();
    return stats_from_scaled_core(K, log_scale);
}

Eigen::VectorXd sorted_abs_spectrum(const Eigen::VectorXd& lam) {
    Eigen::VectorXd s = lam;
    std::sort(s.data(), s.data() + s.size(),
              [](double a, double b) { return std::abs(a) < std::abs(b); });
    return s;
}

struct EigenData {
    Eigen::VectorXd lambda;  // |.| ascending
    Eigen::MatrixXd P;       // matching eigenvectors
};

EigenData sorted_eigs(const Eigen::MatrixXd& P_in, const Eigen::VectorXd& lam_in) {
    std::vector<int> order(lam_in.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(lam_in(a)) < std::abs(lam_in(b));
    });
    EigenData data;
    data.lambda.resize(lam_in.size());
    data.P.resize(P_in.rows(), P_in.cols());
    for (Eigen::Index k = 0; k < lam_in.size(); ++k) {
        data.lambda(k) = lam_in(order[k]);
        data.P.col(k) = P_in.col(order[k]);
    }
    return data;
}

Eigen::MatrixXd driver_q_matrix(const Eigen::MatrixXd& PR, const std::vector<int>& rows) {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(PR.cols(), PR.cols());
    for (int h : rows) Q.noalias() += PR.row(h).transpose() * PR.row(h);
    return Q;
}

}  // namespace

double lam_extreme_estimate(double alpha, double beta, int dim) {
    if (dim < 1) throw ParameterError("lam_extreme_estimate: dim must be >= 1");
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw ParameterError("lam_extreme_estimate: traces must be positive");
    const double n = static_cast<double>(dim);
    double inner = beta - alpha * alpha / n;
    const double tol = 1e-12 * std::max(1.0, beta);
    if (inner < -tol)
        throw NumericalError("lam_extreme_estimate: inner radicand " + std::to_string(inner) +
                             " is negative beyond tolerance");
    if (inner < 0.0) inner = 0.0;
    const double outer = alpha / n + std::sqrt((n - 1.0) / n * inner);
    return std::sqrt(outer);
}

TraceStats trace_stats_exact(const Eigen::MatrixXd& M) {
    const Eigen::Index n = M.rows();
    if (M.cols() != n) throw ParameterError("trace_stats_exact: M must be square");
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw ParameterError("trace_stats_exact: M must be symmetric");

    TraceStats stats;
    stats.dim = static_cast<int>(n);
    stats.alpha_over = M.squaredNorm();
    stats.beta_over = (M * M).squaredNorm();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const double eig_min = es.eigenvalues().minCoeff();
    const double eig_max = es.eigenvalues().maxCoeff();
    if (!(eig_min > std::max(1e-300, n * std::numeric_limits<double>::epsilon() * eig_max)))
        throw SingularMatrixError(
            "trace_stats_exact: M is singular, inverse traces are undefined");

    // factored inverse application, no classical inverse
    const Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw SingularMatrixError("trace_stats_exact: Cholesky factorization failed");
    const Eigen::MatrixXd X = llt.solve(Eigen::MatrixXd::Identity(n, n));
    stats.alpha_under = X.squaredNorm();
    stats.beta_under = (X * X).squaredNorm();
    return stats;
}

Regime classify_regime(const Eigen::VectorXd& spectrum_c, BoundSide side) {
    if (spectrum_c.size() == 0) throw ParameterError("classify_regime: empty spectrum");
    const Eigen::VectorXd abs = spectrum_c.cwiseAbs();
    const double key = (side == BoundSide::Lower) ? abs.maxCoeff() : abs.minCoeff();
    Regime regime;
    regime.lambda_abs = key;
    if (std::abs(key - 1.0) <= kUnitBand)
        regime.kind = RegimeKind::InverseTime;
    else if (key < 1.0)
        regime.kind = RegimeKind::Constant;
    else
        regime.kind = RegimeKind::PowerLaw;
    return regime;
}

std::string regime_label(const Regime& regime) {
    switch (regime.kind) {
        case RegimeKind::Constant:
            return "constant";
        case RegimeKind::InverseTime:
            return "inverse-time";
        case RegimeKind::PowerLaw: {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "power-law(%.6g)", regime.lambda_abs);
            return buf;
        }
    }
    return "unknown";
}

DiagonalExtremes alpha_beta_full_n_drivers(const Eigen::VectorXd& spectrum, int tau_f) {
    if (tau_f < 1) throw ParameterError("alpha_beta_full_n_drivers: tau_f must be >= 1");
    const Eigen::VectorXd lam = sorted_abs_spectrum(spectrum);
    const double l1 = lam(0), ln = lam(lam.size() - 1);

    DiagonalExtremes out;
    out.lam_min_M = geometric_sum(l1 * l1, tau_f);
    out.lam_max_M = geometric_sum(ln * ln, tau_f);
    out.regime_min = classify_regime(spectrum, BoundSide::Upper);
    out.regime_max = classify_regime(spectrum, BoundSide::Lower);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.stable_limit_min = std::abs(l1) < 1.0 ? 1.0 / (1.0 - l1 * l1) : nan;
    out.stable_limit_max = std::abs(ln) < 1.0 ? 1.0 / (1.0 - ln * ln) : nan;
    return out;
}

namespace {

TraceStats stats_from_pairs(const StatPair& over, const StatPair* under, int dim) {
    TraceStats stats;
    stats.dim = dim;
    stats.alpha_over = over.value_alpha;
    stats.beta_over = over.value_beta;
    if (under && under->finite) {
        stats.alpha_under = under->value_alpha;
        stats.beta_under = under->value_beta;
    }
    return stats;
}

}  // namespace

TraceStats alpha_beta_one_driver(const Eigen::MatrixXd& P, const Eigen::VectorXd& lambda,
                                 int driver, int tau_f) {
    return alpha_beta_m_drivers(P, lambda, {driver}, tau_f);
}

TraceStats alpha_beta_m_drivers(const Eigen::MatrixXd& P, const Eigen::VectorXd& lambda,
                                const std::vector<int>& drivers, int tau_f) {
    if (drivers.empty()) throw ParameterError("alpha_beta_m_drivers: empty driver set");
    const int n = static_cast<int>(lambda.size());
    for (int d : drivers)
        if (d < 1 || d > n) throw ParameterError("alpha_beta_m_drivers: driver index out of range");
    const EigenData data = sorted_eigs(P, lambda);
    std::vector<int> rows;
    for (int d : drivers) rows.push_back(d - 1);
    const Eigen::MatrixXd Qc = driver_q_matrix(data.P, rows);
    const StatPair over = closed_over_stats(data.lambda, data.P, Qc, tau_f);
    if (drivers.size() == 1) {
        const StatPair under =
            closed_under_stats(data.lambda, data.P, data.P, Qc, rows, tau_f);
        return stats_from_pairs(over, &under, n);
    }
    return stats_from_pairs(over, nullptr, n);
}

TraceStats alpha_beta_target(const ControllableDecomposition& dec,
                             const std::vector<int>& driver_positions, int tau_f) {
    const int r = dec.rank;
    if (driver_positions.empty())
        throw ParameterError("alpha_beta_target: empty driver set");
    for (int d : driver_positions)
        if (d < 1 || d > r)
            throw ParameterError(
                "alpha_beta_target: drivers must sit among the first `rank` nodes");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dec.A_c);
    if (es.info() != Eigen::Success)
        throw NumericalError("alpha_beta_target: eigendecomposition of A_c failed");
    const EigenData data = sorted_eigs(es.eigenvectors(), es.eigenvalues());

    const Eigen::MatrixXd PR = dec.R1.transpose() * data.P;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(PR);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 1e-12 * sv(0)))
        throw SingularMatrixError("alpha_beta_target: P_R = R1^T P_c is singular");
    const Eigen::MatrixXd Pr =
        Eigen::PartialPivLU<Eigen::MatrixXd>(PR).solve(Eigen::MatrixXd::Identity(r, r))
            .transpose();

    std::vector<int> rows;
    for (int d : driver_positions) rows.push_back(d - 1);
    const Eigen::MatrixXd Qc = driver_q_matrix(PR, rows);

    // consistency: columns of B_c must match the R1 columns of the drivers
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (static_cast<int>(k) < dec.B_c.cols()) {
            const double err = (dec.B_c.col(k) - dec.R1.col(rows[k])).cwiseAbs().maxCoeff();
            if (err > 1e-9)
                throw ParameterError(
                    "alpha_beta_target: driver positions disagree with the decomposition's B_c");
        }
    }

    const StatPair over = closed_over_stats(data.lambda, PR, Qc, tau_f);
    const StatPair under = closed_under_stats(data.lambda, PR, Pr, Qc, rows, tau_f);
    return stats_from_pairs(over, &under, r);
}

BoundEstimate estimate_bounds(const ControllableDecomposition& dec,
                              const std::vector<int>& driver_positions, int tau_f) {
    const int r = dec.rank;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dec.A_c);
    const EigenData data = sorted_eigs(es.eigenvectors(), es.eigenvalues());
    const Eigen::MatrixXd PR = dec.R1.transpose() * data.P;
    const Eigen::MatrixXd Pr =
        Eigen::PartialPivLU<Eigen::MatrixXd>(PR).solve(Eigen::MatrixXd::Identity(r, r))
            .transpose();
    std::vector<int> rows;
    for (int d : driver_positions) rows.push_back(d - 1);
    const Eigen::MatrixXd Qc = driver_q_matrix(PR, rows);

    BoundEstimate out;
    out.regime_lower = classify_regime(data.lambda, BoundSide::Lower);
    out.regime_upper = classify_regime(data.lambda, BoundSide::Upper);

    const StatPair over = closed_over_stats(data.lambda, PR, Qc, tau_f);
    const double log_f_over = log_f_estimate(over.log_alpha, over.log_beta, r);
    out.log10_E_lower = -log_f_over / std::log(10.0);
    out.E_lower = std::exp(-log_f_over);
    out.overflow_lower = !over.finite || !std::isfinite(out.E_lower) || out.E_lower == 0.0;

    const StatPair under = closed_under_stats(data.lambda, PR, Pr, Qc, rows, tau_f);
    const double log_f_under = log_f_estimate(under.log_alpha, under.log_beta, r);
    out.log10_E_upper = log_f_under / std::log(10.0);
    out.E_upper = std::exp(log_f_under);
    out.overflow_upper = !under.finite || !std::isfinite(out.E_upper) || out.E_upper == 0.0;
    return out;
}

double c1_constant(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const TargetSet& targets,
                   int tau_start, int tau_step, double rel_tol, int max_steps) {
    const Eigen::MatrixXd C = output_matrix(targets, static_cast<int>(A.rows()));
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k < max_steps; ++k) {
        const int tau = tau_start + k * tau_step;
        const Eigen::MatrixXd W_C = C * gramian_full(A, B, tau) * C.transpose();
        const TraceStats stats = trace_stats_exact(W_C);
        const double f = lam_extreme_estimate(*stats.alpha_under, *stats.beta_under,
                                              static_cast<int>(C.rows()));
        if (std::isfinite(prev) && std::abs(f - prev) < rel_tol * std::abs(f)) return f;
        prev = f;
    }
    throw NumericalError("c1_constant: did not converge; spectrum may not be stable");
}

}  // namespace netctrl
