#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "netctrl/ctrb.hpp"

namespace netctrl {

// Trace functionals of a positive definite matrix and of its inverse.
// The under pair is absent when the producing routine cannot (or need not)
// evaluate it, e.g. m-driver closed forms.
struct TraceStats {
    double alpha_over = 0.0;  // trace(M^2)
    double beta_over = 0.0;   // trace(M^4)
    std::optional<double> alpha_under;  // trace(M^-2)
    std::optional<double> beta_under;   // trace(M^-4)
    int dim = 0;
};

// f(alpha, beta) = sqrt(alpha/n + sqrt((n-1)/n (beta - alpha^2/n))): extreme-
// eigenvalue approximation of a PD matrix from the traces of its square and
// fourth power. Exact at n = 2 and for two-level spectra.
double lam_extreme_estimate(double alpha, double beta, int dim);

// Exact traces via Frobenius norms of M, M^2 and of factored inverse
// applications; never forms an explicit classical inverse.
TraceStats trace_stats_exact(const Eigen::MatrixXd& M);

// Scaling-regime classification keyed on the extreme eigenvalue modulus:
// the lower energy bound follows |lambda_cr| (largest), the upper bound
// |lambda_c1| (smallest). Equality band |.| - 1 <= 1e-9.
enum class RegimeKind { Constant, InverseTime, PowerLaw };
enum class BoundSide { Lower, Upper };

struct Regime {
    RegimeKind kind = RegimeKind::Constant;
    double lambda_abs = 0.0;  // the governing eigenvalue modulus
};

Regime classify_regime(const Eigen::VectorXd& spectrum_c, BoundSide side);
std::string regime_label(const Regime& regime);

// n-driver (B = I) case: M is diagonal, extremes are available exactly.
struct DiagonalExtremes {
    double lam_min_M = 0.0;  // (1 - l_1^{2 tau_f}) / (1 - l_1^2), pole-guarded
    double lam_max_M = 0.0;
    Regime regime_min;  // large-tau_f behavior of each extreme
    Regime regime_max;
    double stable_limit_min = 0.0;  // 1/(1 - l^2) when |l| < 1, NaN otherwise
    double stable_limit_max = 0.0;
};

DiagonalExtremes alpha_beta_full_n_drivers(const Eigen::VectorXd& spectrum, int tau_f);

// Closed-form trace stats for one driver node h (1-based index into the
// state coordinates): alpha/beta_over from the eigenvector-weighted double
// and triple sums, alpha/beta_under from the closed-form inverse of the
// stable block (or its scaled asymptotic form in unit/unstable regimes).
TraceStats alpha_beta_one_driver(const Eigen::MatrixXd& P, const Eigen::VectorXd& lambda,
                                 int driver, int tau_f);

// m-driver generalization with q_ij = sum_k p_{d_k i} p_{d_k j}; only the
// over pair has a printed closed form, the under pair is left unset.
TraceStats alpha_beta_m_drivers(const Eigen::MatrixXd& P, const Eigen::VectorXd& lambda,
                                const std::vector<int>& drivers, int tau_f);

// Target-control trace stats of W_C through the controllable decomposition:
// W_C = P_R M_C P_R^T with P_R = R1^T P_c. Assumes the targets are the first
// `rank` nodes and the drivers sit among them; driver_positions are 1-based
// node ids (<= rank). Both pairs are evaluated.
TraceStats alpha_beta_target(const ControllableDecomposition& dec,
                             const std::vector<int>& driver_positions, int tau_f);

// Energy-bound estimates for a decomposed system at one horizon. Values are
// in linear scale when representable; log10 fields are always filled so the
// sweep can keep power-law rows beyond double range (overflow flags set).
struct BoundEstimate {
    double E_upper = 0.0;
    double E_lower = 0.0;
    double log10_E_upper = 0.0;
    double log10_E_lower = 0.0;
    Regime regime_upper;
    Regime regime_lower;
    bool overflow_upper = false;
    bool overflow_lower = false;
};

BoundEstimate estimate_bounds(const ControllableDecomposition& dec,
                              const std::vector<int>& driver_positions, int tau_f);

// Numeric evaluation of the constant the m-driver upper bound approaches when
// the controllable spectrum is stable: the large-tau_f limit of f applied to
// exact inverse traces of W_C, declared converged at < 0.1% change.
double c1_constant(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const TargetSet& targets,
                   int tau_start = 20, int tau_step = 5, double rel_tol = 1e-3,
                   int max_steps = 40);

}  // namespace netctrl
