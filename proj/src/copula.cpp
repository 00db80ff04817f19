#include "pnar/copula.hpp"

#include "pnar/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pnar {

void CopulaSpec::validate() const {
    if (truncation < 1) throw std::invalid_argument("copula truncation K must be >= 1");
    switch (family) {
    case CopulaFamily::GaussianAR1:
        if (!(param > -1.0 && param < 1.0)) throw std::invalid_argument("Gaussian AR-1 rho must lie in (-1,1)");
        break;
    case CopulaFamily::Clayton:
        if (!(param > 0.0) || !std::isfinite(param)) throw std::invalid_argument("Clayton theta must be > 0");
        break;
    case CopulaFamily::Independence:
        break;
    }
}

std::string family_name(CopulaFamily f) {
    switch (f) {
    case CopulaFamily::Independence: return "indep";
    case CopulaFamily::GaussianAR1: return "gauss";
    case CopulaFamily::Clayton: return "clayton";
    }
    return "?";
}

std::string CopulaSpec::to_string() const {
    std::ostringstream os;
    os << family_name(family);
    if (family != CopulaFamily::Independence) {
        os.precision(17);
        os << ':' << param;
    }
    return os.str();
}

CopulaSpec parse_copula(const std::string& text, int truncation) {
    CopulaSpec spec;
    spec.truncation = truncation;
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    if (head == "indep" || head == "independence") {
        if (colon != std::string::npos) throw ParseError("independence copula takes no parameter");
        spec.family = CopulaFamily::Independence;
    } else if (head == "gauss" || head == "gaussian") {
        spec.family = CopulaFamily::GaussianAR1;
    } else if (head == "clayton") {
        spec.family = CopulaFamily::Clayton;
    } else {
        throw ParseError("unknown copula '" + text + "'");
    }
    if (spec.family != CopulaFamily::Independence) {
        if (colon == std::string::npos) throw ParseError("copula '" + head + "' needs a parameter");
        try {
            std::size_t used = 0;
            const std::string num = text.substr(colon + 1);
            spec.param = std::stod(num, &used);
            if (used != num.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError("bad copula parameter in '" + text + "'");
        }
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    return spec;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -INFINITY;
        if (p == 1.0) return INFINITY;
        throw std::invalid_argument("normal_quantile needs p in [0,1]");
    }
    // Acklam's rational approximation followed by one Halley step on erfc.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int k = 0; k < 2; ++k) {
        // Work in the tail that keeps the residual well conditioned.
        const double e = x < 0.0 ? normal_cdf(x) - p : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
        const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
        x = x - u / (1.0 + 0.5 * x * u);
    }
    return x;
}

namespace {

/// -log Phi(z) without cancellation in either tail.
double neg_log_normal_cdf(double z) {
    if (z > 0.0) return -std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
    return -std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
}

/// Fills e(i) = -log U_i for one joint copula draw, for the coordinates that
/// are still needed. The AR-1 latent recursion is generated on the prefix
/// [0, limit); the other families are conditionally independent given their
/// shared frailty, so only active coordinates are drawn.
void draw_neg_log_uniforms(const CopulaSpec& spec, Eigen::Index limit, const std::vector<char>& active,
                           Eigen::VectorXd& e, Rng& rng) {
    switch (spec.family) {
    case CopulaFamily::Independence: {
        std::exponential_distribution<double> expo(1.0);
        for (Eigen::Index i = 0; i < limit; ++i)
            if (active[i]) e(i) = expo(rng);
        break;
    }
    case CopulaFamily::GaussianAR1: {
        std::normal_distribution<double> gauss(0.0, 1.0);
        const double rho = spec.param;
        const double innov = std::sqrt(1.0 - rho * rho);
        double z = gauss(rng);
        e(0) = neg_log_normal_cdf(z);
        for (Eigen::Index i = 1; i < limit; ++i) {
            z = rho * z + innov * gauss(rng);
            e(i) = neg_log_normal_cdf(z);
        }
        break;
    }
    case CopulaFamily::Clayton: {
        // Marshall-Olkin: U_i = (1 + E_i / G)^(-1/theta), G ~ Gamma(1/theta, 1).
        const double theta = spec.param;
        std::gamma_distribution<double> frailty(1.0 / theta, 1.0);
        std::exponential_distribution<double> expo(1.0);
        double g = frailty(rng);
        while (g <= 0.0) g = frailty(rng);
        for (Eigen::Index i = 0; i < limit; ++i)
            if (active[i]) e(i) = std::log1p(expo(rng) / g) / theta;
        break;
    }
    }
}

}  // namespace

Eigen::VectorXd sample_uniforms(const CopulaSpec& spec, Eigen::Index n, Rng& rng) {
    spec.validate();
    Eigen::VectorXd u(n);
    if (n == 0) return u;
    switch (spec.family) {
    case CopulaFamily::Independence: {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            double v = unif(rng);
            while (v <= 0.0) v = unif(rng);
            u(i) = v;
        }
        break;
    }
    case CopulaFamily::GaussianAR1: {
        std::normal_distribution<double> gauss(0.0, 1.0);
        const double rho = spec.param;
        const double innov = std::sqrt(1.0 - rho * rho);
        double z = gauss(rng);
        u(0) = normal_cdf(z);
        for (Eigen::Index i = 1; i < n; ++i) {
            z = rho * z + innov * gauss(rng);
            u(i) = normal_cdf(z);
        }
        break;
    }
    case CopulaFamily::Clayton: {
        const double theta = spec.param;
        std::gamma_distribution<double> frailty(1.0 / theta, 1.0);
        std::exponential_distribution<double> expo(1.0);
        double g = frailty(rng);
        while (g <= 0.0) g = frailty(rng);
        for (Eigen::Index i = 0; i < n; ++i) u(i) = std::exp(-std::log1p(expo(rng) / g) / theta);
        break;
    }
    }
    return u;
}

CountDraw draw_counts(const CopulaSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& lambdas, Rng& rng) {
    spec.validate();
    const Eigen::Index n = lambdas.size();
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(lambdas(i) > 0.0) || !std::isfinite(lambdas(i)))
            throw NumericalError("copula-Poisson draw needs finite positive intensities");

    CountDraw out;
    out.counts = Eigen::VectorXi::Zero(n);
    if (n == 0) return out;

    Eigen::VectorXd elapsed = Eigen::VectorXd::Zero(n);
    std::vector<char> active(static_cast<std::size_t>(n), 1);
    Eigen::Index last_active = n - 1;
    Eigen::VectorXd e(n);
    const int k = spec.truncation;
    for (int l = 1; l <= k && last_active >= 0; ++l) {
        draw_neg_log_uniforms(spec, last_active + 1, active, e, rng);
        Eigen::Index new_last = -1;
        for (Eigen::Index i = 0; i <= last_active; ++i) {
            if (!active[i]) continue;
            elapsed(i) += e(i) / lambdas(i);
            if (elapsed(i) <= 1.0) {
                out.counts(i) = l;
                new_last = i;
            } else {
                active[i] = 0;
            }
        }
        last_active = new_last;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        if (out.counts(i) == k) ++out.saturated;
    return out;
}

}  // namespace pnar
