#ifndef PNAR_GEE_HPP
#define PNAR_GEE_HPP

#include "pnar/qmle.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>

namespace pnar {

enum class WorkingKind { Identity, AR1, EQC };
enum class TauMethod { MeanPairwise, MaxPairwise };

std::string working_kind_name(WorkingKind kind);
std::string tau_method_name(TauMethod method);
/// "ar1", "eqc", "identity" (ParseError otherwise).
WorkingKind parse_working_kind(const std::string& text);
/// "mean" / "max" (ParseError otherwise).
TauMethod parse_tau_method(const std::string& text);

struct WorkingCorrelation {
    WorkingKind kind = WorkingKind::Identity;
    double tau = 0.0;
};

/// Open interval of valid tau: (-1, 1) for AR1, (-1/(N-1), 1) for EQC.
std::pair<double, double> tau_domain(WorkingKind kind, int n);

/// P(tau)^{-1} v in O(N) using the closed-form inverses (tridiagonal for AR1,
/// identity-plus-constant for EQC). Throws std::domain_error if tau is outside
/// the open validity interval.
Eigen::VectorXd working_inverse_apply(const WorkingCorrelation& wc, const Eigen::Ref<const Eigen::VectorXd>& v);

/// Dense P(tau): tau^{|i-j|} (AR1) or 1 on the diagonal and tau elsewhere (EQC).
Eigen::MatrixXd working_correlation_matrix(const WorkingCorrelation& wc, int n);

struct TauEstimate {
    double value = 0.0;   ///< clipped into the validity domain
    double raw = 0.0;
    bool clipped = false;
};

/// Pairwise uncentred correlations sum_t r_it r_jt / sqrt(sum r_it^2 sum r_jt^2)
/// of the columns of `residuals` (rows = time), reduced by mean or max over
/// i < j, then clipped into the domain of `kind` with margin 1e-6. Throws
/// NumericalError if a column is constant.
TauEstimate estimate_tau_from_residuals(const Eigen::MatrixXd& residuals, WorkingKind kind, TauMethod method);

/// Pearson residuals (Y - lambda)/sqrt(lambda) at the fitted theta, (T-p) x N.
Eigen::MatrixXd pearson_residuals(const Design& d, const Eigen::VectorXd& theta);

TauEstimate estimate_tau(const Design& d, const FitResult& fit, WorkingKind kind, TauMethod method);

/// sum_t dlambda_t^T D_t^{-1/2} P^{-1} D_t^{-1/2} (Y_t - lambda_t).
Eigen::VectorXd gee_estimating_function(const Design& d, const Eigen::VectorXd& theta, const WorkingCorrelation& wc);

struct GeeOptions {
    int max_iter = 500;
    double tol = 1e-6;        ///< projected estimating-function infinity norm
    double step_tol = 1e-10;  ///< relative parameter change
    double beta0_lower = 1e-8;
};

/// Two-step estimator: tau from the QMLE residuals, then projected Fisher
/// scoring on the estimating equation from the QMLE start. Covariance is the
/// GEE sandwich M^{-1} Q M^{-1}.
FitResult gee_fit(const Design& d, WorkingKind kind, const FitResult& start, TauMethod method,
                  const GeeOptions& opt = {});

/// Same with a fixed working correlation (no tau estimation).
FitResult gee_fit_fixed(const Design& d, const WorkingCorrelation& wc, const FitResult& start,
                        const GeeOptions& opt = {});

}  // namespace pnar

#endif  // PNAR_GEE_HPP
