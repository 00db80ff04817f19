#ifndef PNAR_COPULA_HPP
#define PNAR_COPULA_HPP

#include "pnar/rng.hpp"

#include <Eigen/Dense>

#include <string>

namespace pnar {

enum class CopulaFamily { Independence, GaussianAR1, Clayton };

/// Dependence structure of the exponential waiting times behind one count
/// vector. `param` is rho in (-1,1) for GaussianAR1 (R_ij = rho^|i-j|),
/// theta > 0 for Clayton and ignored for Independence. `truncation` is K, the
/// number of waiting times drawn per node and time step.
struct CopulaSpec {
    CopulaFamily family = CopulaFamily::Independence;
    double param = 0.0;
    int truncation = 1000;

    /// Throws std::invalid_argument when param or truncation is out of domain.
    void validate() const;
    std::string to_string() const;

    static CopulaSpec independence(int k = 1000) { return {CopulaFamily::Independence, 0.0, k}; }
    static CopulaSpec gaussian_ar1(double rho, int k = 1000) { return {CopulaFamily::GaussianAR1, rho, k}; }
    static CopulaSpec clayton(double theta, int k = 1000) { return {CopulaFamily::Clayton, theta, k}; }
};

/// Parses "indep", "gauss:<rho>" or "clayton:<theta>".
CopulaSpec parse_copula(const std::string& text, int truncation = 1000);
std::string family_name(CopulaFamily f);

/// Standard normal CDF and quantile, |error| well below 1e-12 on [-8, 8].
double normal_cdf(double z);
double normal_quantile(double p);

/// One joint draw U = (U_1..U_n) from the copula.
Eigen::VectorXd sample_uniforms(const CopulaSpec& spec, Eigen::Index n, Rng& rng);

struct CountDraw {
    Eigen::VectorXi counts;
    int saturated = 0;  ///< nodes whose count hit the truncation K
};

/// Copula-Poisson draw: waiting times X_il = -log(U_il)/lambda_i are summed
/// until they pass 1; Y_i is the number of arrivals in [0, 1], capped at K.
/// Marginally Y_i ~ Poisson(lambda_i) whatever the copula. Vectors U_l are
/// only generated while some node is still inside the unit interval, which
/// leaves every returned count unchanged.
CountDraw draw_counts(const CopulaSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& lambdas, Rng& rng);

}  // namespace pnar

#endif  // PNAR_COPULA_HPP
