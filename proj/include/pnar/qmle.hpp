#ifndef PNAR_QMLE_HPP
#define PNAR_QMLE_HPP

#include "pnar/model.hpp"
#include "pnar/network.hpp"
#include "pnar/simulate.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pnar {

/// Stacked regressors for t = start..T-1, t-major (row (t-start)*N + i). The
/// regressors do not depend on theta, so every likelihood evaluation is a
/// matrix-vector product against this block.
struct Design {
    Link link = Link::Linear;
    int p = 1;
    int nodes = 0;
    int periods = 0;        ///< T of the source panel
    int start = 1;          ///< rows conditioned on (>= p)
    Eigen::MatrixXd x;      ///< (N (T-start)) x (2p+1)
    Eigen::VectorXd y;      ///< responses aligned with x

    int steps() const noexcept { return periods - start; }
    int num_params() const noexcept { return 2 * p + 1; }
    auto step_rows(int s) const { return x.middleRows(static_cast<Eigen::Index>(s) * nodes, nodes); }
    auto step_y(int s) const { return y.segment(static_cast<Eigen::Index>(s) * nodes, nodes); }
};

/// Conditions on the first `start` rows (default p); models of different lag
/// order compared on one panel should share the same start. Throws
/// DimensionError if counts and network disagree on N and
/// std::invalid_argument if p < 1, start < p or T < start.
Design build_design(const CountMatrix& counts, const Network& net, Link link, int p,
                    std::optional<int> start = std::nullopt);

/// Intensities lambda(theta) for every design row. Throws NumericalError when a
/// linear intensity is not strictly positive or any value is non-finite.
Eigen::VectorXd design_intensity(const Design& d, const Eigen::VectorXd& theta);

double quasi_loglik(const Design& d, const Eigen::VectorXd& theta);
Eigen::VectorXd score(const Design& d, const Eigen::VectorXd& theta);

/// Per-step score summands s_t, one column per usable step.
Eigen::MatrixXd score_summands(const Design& d, const Eigen::VectorXd& theta);

/// True conditional covariance of Y_t given the past, indexed by panel row.
using SigmaOracle = std::function<Eigen::MatrixXd(int t)>;

struct InformationSet {
    Eigen::MatrixXd h;                     ///< Hessian of the negative quasi-loglik
    Eigen::MatrixXd b_hat;                 ///< sum_t s_t s_t^T
    std::optional<Eigen::MatrixXd> b_cond; ///< only with a SigmaOracle
};

InformationSet hessian_and_information(const Design& d, const Eigen::VectorXd& theta,
                                       const SigmaOracle& sigma = nullptr);

// Convenience overloads working straight from a panel.
double quasi_loglik(const Eigen::VectorXd& theta, const PanelData& panel, const Network& net, Link link);
Eigen::VectorXd score(const Eigen::VectorXd& theta, const PanelData& panel, const Network& net, Link link);
InformationSet hessian_and_information(const Eigen::VectorXd& theta, const PanelData& panel, const Network& net,
                                       Link link, const SigmaOracle& sigma = nullptr);

struct GeeInfo {
    std::string wc_kind;
    double tau_hat = 0.0;
    double tau_raw = 0.0;     ///< before clipping
    bool tau_clipped = false;
    std::string tau_method;
};

struct FitResult {
    Link link = Link::Linear;
    int p = 1;
    int nodes = 0;
    int periods = 0;
    int start = 1;  ///< rows conditioned on
    Eigen::VectorXd theta;
    double loglik = 0.0;
    Eigen::MatrixXd h;
    Eigen::MatrixXd b_hat;
    Eigen::MatrixXd v;         ///< (N T) H^{-1} B H^{-1}
    Eigen::VectorXd se;
    Eigen::VectorXd t_stats;
    Eigen::VectorXd p_values;
    bool converged = false;
    bool singular_hessian = false;
    int iterations = 0;
    double gradient_norm = 0.0;
    std::string status;
    std::vector<double> loglik_trace;  ///< nondecreasing
    std::optional<GeeInfo> gee;

    int num_params() const noexcept { return 2 * p + 1; }
    PnarSpec spec() const { return PnarSpec::from_theta(link, p, theta); }
};

struct FitOptions {
    int max_iter = 500;
    double grad_tol = 1e-6;
    double rel_tol = 1e-10;
    double beta0_lower = 1e-8;
    std::optional<Eigen::VectorXd> init;
};

/// Default starting point: linear 0.5*ybar and 0.25/p on every lag
/// coefficient; log-linear log(1+ybar) and zeros.
Eigen::VectorXd default_start(const Design& d);

/// Box bounds for the link: linear beta0 >= lower0, others >= 0; log-linear
/// unbounded.
void parameter_bounds(Link link, int m, double lower0, Eigen::VectorXd& lower, Eigen::VectorXd& upper);

/// Fills se / t / p-values / V from h and b_hat (flags singular H).
void finish_covariance(FitResult& fit);

FitResult fit(const Design& d, const FitOptions& opt = {});
FitResult fit(const PanelData& panel, const Network& net, Link link, int p, const FitOptions& opt = {});

struct WaldRow {
    std::string name;
    double estimate = 0.0;
    double se = 0.0;
    double t = 0.0;
    double p_value = 1.0;
    bool reject_5pct = false;
};

/// Names beta0, beta1_1..beta1_p, beta2_1..beta2_p.
std::vector<std::string> coefficient_names(int p);

/// Two-sided normal p-value for a t statistic.
double two_sided_p(double t);

/// Throws std::domain_error if any se is zero or not finite.
std::vector<WaldRow> wald_summary(const FitResult& fit);

}  // namespace pnar

#endif  // PNAR_QMLE_HPP
