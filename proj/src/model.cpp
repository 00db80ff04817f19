#include "pnar/model.hpp"

#include "pnar/errors.hpp"
#include "pnar/power_iteration.hpp"

#include <cmath>
#include <stdexcept>

namespace pnar {

std::string link_name(Link link) { return link == Link::Linear ? "linear" : "loglin"; }

Link parse_link(const std::string& text) {
    if (text == "linear" || text == "lin") return Link::Linear;
    if (text == "loglin" || text == "log-linear" || text == "loglinear") return Link::LogLinear;
    throw ParseError("unknown link '" + text + "' (expected linear or loglin)");
}

Eigen::VectorXd PnarSpec::theta() const {
    Eigen::VectorXd th(num_params());
    th(0) = beta0;
    th.segment(1, p) = beta1;
    th.segment(1 + p, p) = beta2;
    return th;
}

PnarSpec PnarSpec::from_theta(Link link, int p, const Eigen::Ref<const Eigen::VectorXd>& theta) {
    if (p < 1) throw std::invalid_argument("lag order p must be >= 1");
    if (theta.size() != 2 * p + 1)
        throw DimensionError("theta must have 2p+1 = " + std::to_string(2 * p + 1) + " entries");
    PnarSpec s;
    s.link = link;
    s.p = p;
    s.beta0 = theta(0);
    s.beta1 = theta.segment(1, p);
    s.beta2 = theta.segment(1 + p, p);
    return s;
}

void PnarSpec::validate() const {
    if (p < 1) throw std::invalid_argument("lag order p must be >= 1");
    if (beta1.size() != p || beta2.size() != p) throw DimensionError("beta1/beta2 must have p entries");
    if (!std::isfinite(beta0) || !beta1.allFinite() || !beta2.allFinite())
        throw std::invalid_argument("coefficients must be finite");
    if (link == Link::Linear) {
        if (!(beta0 > 0.0)) throw std::invalid_argument("linear PNAR needs beta0 > 0");
        if ((beta1.array() < 0.0).any() || (beta2.array() < 0.0).any())
            throw std::invalid_argument("linear PNAR needs nonnegative lag coefficients");
    }
}

Eigen::VectorXd linear_predictor(const PnarSpec& spec, const Network& net, std::span<const Eigen::VectorXi> lags) {
    if (static_cast<int>(lags.size()) != spec.p)
        throw DimensionError("expected " + std::to_string(spec.p) + " lag vectors, got " +
                             std::to_string(lags.size()));
    const int n = net.size();
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, spec.beta0);
    for (int h = 0; h < spec.p; ++h) {
        const Eigen::VectorXi& y = lags[h];
        if (y.size() != n) throw DimensionError("lag vector length differs from N");
        if ((y.array() < 0).any()) throw std::invalid_argument("counts must be nonnegative");
        Eigen::VectorXd x = y.cast<double>();
        if (spec.link == Link::LogLinear) x = x.array().log1p();
        eta.noalias() += spec.beta1(h) * (net.weights() * x);
        eta.noalias() += spec.beta2(h) * x;
    }
    return eta;
}

Eigen::VectorXd intensity(const PnarSpec& spec, const Network& net, std::span<const Eigen::VectorXi> lags) {
    Eigen::VectorXd eta = linear_predictor(spec, net, lags);
    if (spec.link == Link::LogLinear) return eta.array().exp();
    return eta;
}

StabilityReport check_stability(const PnarSpec& spec, const Network& net) {
    StabilityReport r;
    const bool absolute = spec.link == Link::LogLinear;
    double b1 = 0.0, b2 = 0.0;
    for (int h = 0; h < spec.p; ++h) {
        b1 += absolute ? std::abs(spec.beta1(h)) : spec.beta1(h);
        b2 += absolute ? std::abs(spec.beta2(h)) : spec.beta2(h);
    }
    r.sum_condition = b1 + b2;
    r.sum_stable = r.sum_condition < 1.0;

    // sum_h G_h = b1 W + b2 I. For b1, b2 >= 0 its spectral radius is
    // b2 + b1 rho(W), with rho(W) taken blockwise over the strong components.
    if (b1 >= 0.0 && b2 >= 0.0) {
        const EigenEstimate est = perron_root_blockwise(net.weights(), {1e-14, 10000});
        r.spectral_radius = b2 + b1 * est.value;
        r.spectral_converged = est.converged;
    } else {
        // Linear specs with negative coefficients are invalid anyway; fall back
        // to a dense eigen-decomposition.
        Eigen::MatrixXd e = b1 * net.dense_weights();
        e.diagonal().array() += b2;
        r.spectral_radius = e.eigenvalues().cwiseAbs().maxCoeff();
        r.spectral_converged = true;
    }
    r.spectral_stable = r.spectral_radius < 1.0;
    return r;
}

double stationary_mean(const PnarSpec& spec) {
    const double s = spec.beta1.sum() + spec.beta2.sum();
    return spec.beta0 / (1.0 - s);
}

MomentSet unconditional_moments(const PnarSpec& spec, const Network& net, const Eigen::MatrixXd* sigma,
                                const MomentOptions& opt) {
    if (spec.link != Link::Linear)
        throw std::invalid_argument("closed-form moments exist only for the linear link");
    spec.validate();
    const StabilityReport st = check_stability(spec, net);
    if (!st.sum_stable) throw std::domain_error("non-stationary specification: coefficient sum >= 1");

    const int n = net.size();
    const int p = spec.p;
    const int np = n * p;

    MomentSet out;
    out.mu = Eigen::VectorXd::Constant(n, stationary_mean(spec));

    Eigen::MatrixXd sig;
    if (sigma != nullptr) {
        if (sigma->rows() != n || sigma->cols() != n) throw DimensionError("Sigma must be N x N");
        const double scale = std::max(1.0, sigma->cwiseAbs().maxCoeff());
        if ((*sigma - sigma->transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
            throw std::invalid_argument("Sigma must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*sigma, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10 * scale)
            throw std::invalid_argument("Sigma must be positive semidefinite");
        sig = *sigma;
    } else {
        sig = out.mu.asDiagonal();
    }

    const Eigen::MatrixXd w = net.dense_weights();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(np, np);
    for (int h = 0; h < p; ++h) {
        Eigen::MatrixXd gh = spec.beta1(h) * w;
        gh.diagonal().array() += spec.beta2(h);
        g.block(0, h * n, n, n) = gh;
    }
    for (int h = 1; h < p; ++h) g.block(h * n, (h - 1) * n, n, n).setIdentity();
    out.companion = g;
    out.companion_intercept = Eigen::VectorXd::Zero(np);
    out.companion_intercept.head(n).setConstant(spec.beta0);

    Eigen::MatrixXd sig_star = Eigen::MatrixXd::Zero(np, np);
    sig_star.topLeftCorner(n, n) = sig;

    const bool kron = opt.force_kronecker.value_or(np <= opt.kronecker_threshold);
    Eigen::MatrixXd var_star(np, np);
    if (kron) {
        // vec(Gamma) = (I - G (x) G)^{-1} vec(Sigma*)
        const Eigen::Index dim = static_cast<Eigen::Index>(np) * np;
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim, dim);
        for (int i = 0; i < np; ++i)
            for (int j = 0; j < np; ++j) {
                const double gij = g(i, j);
                if (gij == 0.0) continue;
                m.block(static_cast<Eigen::Index>(i) * np, static_cast<Eigen::Index>(j) * np, np, np) -= gij * g;
            }
        const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(sig_star.data(), dim);
        const Eigen::VectorXd sol = m.partialPivLu().solve(rhs);
        var_star = Eigen::Map<const Eigen::MatrixXd>(sol.data(), np, np);
        out.used_kronecker = true;
    } else {
        var_star = sig_star;
        Eigen::MatrixXd next(np, np);
        for (int it = 1; it <= opt.fixed_point_max_iter; ++it) {
            next.noalias() = g * var_star * g.transpose();
            next += sig_star;
            const double change = (next - var_star).cwiseAbs().maxCoeff();
            var_star.swap(next);
            out.fixed_point_iterations = it;
            if (change <= opt.fixed_point_tol * std::max(1.0, var_star.cwiseAbs().maxCoeff())) break;
        }
    }
    var_star = 0.5 * (var_star + var_star.transpose());
    out.gamma0 = var_star.topLeftCorner(n, n);

    Eigen::MatrixXd lagged = var_star;
    for (int h = 1; h <= opt.max_lag; ++h) {
        lagged = g * lagged;
        out.gamma_lags.push_back(lagged.topLeftCorner(n, n));
    }
    return out;
}

}  // namespace pnar
