#ifndef PNAR_MODEL_HPP
#define PNAR_MODEL_HPP

#include "pnar/network.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pnar {

enum class Link { Linear, LogLinear };

std::string link_name(Link link);
/// Accepts "linear" and "loglin" / "log-linear".
Link parse_link(const std::string& text);

/**
 * PNAR(p) mean specification. Parameter vector layout is
 * theta = (beta0, beta1_1..beta1_p, beta2_1..beta2_p), m = 2p + 1, where
 * beta1_h weights the neighbour average w_i^T Y_{t-h} (network effect) and
 * beta2_h the node's own lag (momentum effect).
 */
struct PnarSpec {
    Link link = Link::Linear;
    int p = 1;
    double beta0 = 0.0;
    Eigen::VectorXd beta1;
    Eigen::VectorXd beta2;

    int num_params() const noexcept { return 2 * p + 1; }
    Eigen::VectorXd theta() const;
    static PnarSpec from_theta(Link link, int p, const Eigen::Ref<const Eigen::VectorXd>& theta);

    /// Linear: beta0 > 0 and all lag coefficients >= 0. Log-linear: finite.
    void validate() const;
};

/// Lags are ordered most recent first: lags[0] = Y_{t-1}, ..., lags[p-1] = Y_{t-p}.
/// Returns lambda_t for the linear link and nu_t = log(lambda_t) for the
/// log-linear link.
Eigen::VectorXd linear_predictor(const PnarSpec& spec, const Network& net,
                                 std::span<const Eigen::VectorXi> lags);

/// Conditional intensity lambda_t for either link (exp(nu_t) when log-linear).
Eigen::VectorXd intensity(const PnarSpec& spec, const Network& net, std::span<const Eigen::VectorXi> lags);

struct StabilityReport {
    /// sum_h (beta1_h + beta2_h) for linear, sum_h (|beta1_h| + |beta2_h|) for log-linear.
    double sum_condition = 0.0;
    /// rho(sum_h G_h), or rho(sum_h |G_h|) for log-linear, with G_h = beta1_h W + beta2_h I.
    double spectral_radius = 0.0;
    bool spectral_converged = false;
    bool sum_stable = false;
    bool spectral_stable = false;
};

/// Never throws for unstable coefficients; it only reports.
StabilityReport check_stability(const PnarSpec& spec, const Network& net);

struct MomentSet {
    Eigen::VectorXd mu;
    Eigen::MatrixXd gamma0;
    std::vector<Eigen::MatrixXd> gamma_lags;  ///< Cov(Y_t, Y_{t-h}), h = 1..max_lag
    Eigen::MatrixXd companion;                 ///< Np x Np
    Eigen::VectorXd companion_intercept;       ///< (beta0 1_N, 0, ..., 0)
    bool used_kronecker = false;
    int fixed_point_iterations = 0;
};

struct MomentOptions {
    int max_lag = 0;
    /// Np above this switches from the (Np)^2 Kronecker solve to the
    /// Lyapunov fixed point Gamma <- G* Gamma G*^T + Sigma*.
    int kronecker_threshold = 60;
    double fixed_point_tol = 1e-12;
    int fixed_point_max_iter = 10000;
    std::optional<bool> force_kronecker;  ///< testing hook
};

/// Unconditional mean and autocovariances of a stationary linear PNAR(p)
/// through its companion VAR(1) form. `sigma` is E(xi_t xi_t^T); it defaults to
/// diag(mu), exact under the independence copula. Gamma(h) = J G*^h Var(Y*) J^T.
MomentSet unconditional_moments(const PnarSpec& spec, const Network& net,
                                const Eigen::MatrixXd* sigma = nullptr, const MomentOptions& opt = {});

/// Stationary mean of the linear model, beta0 / (1 - sum_h(beta1_h + beta2_h)).
double stationary_mean(const PnarSpec& spec);

}  // namespace pnar

#endif  // PNAR_MODEL_HPP
