#include "pnar/gee.hpp"

#include "pnar/errors.hpp"
#include "pnar/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pnar {

std::string working_kind_name(WorkingKind kind) {
    switch (kind) {
        case WorkingKind::AR1: return "ar1";
        case WorkingKind::EQC: return "eqc";
        default: return "identity";
    }
}

std::string tau_method_name(TauMethod method) { return method == TauMethod::MaxPairwise ? "max" : "mean"; }

WorkingKind parse_working_kind(const std::string& text) {
    if (text == "ar1") return WorkingKind::AR1;
    if (text == "eqc") return WorkingKind::EQC;
    if (text == "identity" || text == "indep") return WorkingKind::Identity;
    throw ParseError("unknown working correlation '" + text + "' (expected ar1, eqc or identity)");
}

TauMethod parse_tau_method(const std::string& text) {
    if (text == "mean") return TauMethod::MeanPairwise;
    if (text == "max") return TauMethod::MaxPairwise;
    throw ParseError("unknown tau method '" + text + "' (expected mean or max)");
}

std::pair<double, double> tau_domain(WorkingKind kind, int n) {
    if (kind == WorkingKind::EQC && n > 1) return {-1.0 / (n - 1), 1.0};
    return {-1.0, 1.0};
}

Eigen::VectorXd working_inverse_apply(const WorkingCorrelation& wc, const Eigen::Ref<const Eigen::VectorXd>& v) {
    const Eigen::Index n = v.size();
    if (wc.kind == WorkingKind::Identity || n == 0) return v;
    const auto [lo, hi] = tau_domain(wc.kind, static_cast<int>(n));
    const double tau = wc.tau;
    if (!(tau > lo && tau < hi)) throw std::domain_error("tau outside the working-correlation domain");

    Eigen::VectorXd out(n);
    if (wc.kind == WorkingKind::AR1) {
        if (n == 1) return v;
        const double scale = 1.0 / (1.0 - tau * tau);
        const double mid = 1.0 + tau * tau;
        out(0) = v(0) - tau * v(1);
        for (Eigen::Index i = 1; i + 1 < n; ++i) out(i) = mid * v(i) - tau * (v(i - 1) + v(i + 1));
        out(n - 1) = v(n - 1) - tau * v(n - 2);
        return scale * out;
    }
    const double nn = static_cast<double>(n);
    const double denom = (1.0 - tau) * (1.0 + (nn - 1.0) * tau);
    const double a = (1.0 + (nn - 2.0) * tau) / denom;
    const double b = -tau / denom;
    out = (a - b) * v;
    out.array() += b * v.sum();
    return out;
}

Eigen::MatrixXd working_correlation_matrix(const WorkingCorrelation& wc, int n) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    if (wc.kind == WorkingKind::Identity) return p;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) p(i, j) = wc.kind == WorkingKind::AR1 ? std::pow(wc.tau, std::abs(i - j)) : wc.tau;
    return p;
}

TauEstimate estimate_tau_from_residuals(const Eigen::MatrixXd& residuals, WorkingKind kind, TauMethod method) {
    const Eigen::Index n = residuals.cols();
    TauEstimate est;
    if (kind == WorkingKind::Identity) return est;
    if (n < 2 || residuals.rows() < 2) throw std::invalid_argument("tau estimation needs N >= 2 and T >= 2");
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto col = residuals.col(i);
        if ((col.array() - col.mean()).abs().maxCoeff() == 0.0)
            throw NumericalError("residual series of node " + std::to_string(i) + " is constant");
    }
    const Eigen::MatrixXd cross = residuals.transpose() * residuals;
    const Eigen::VectorXd inv_norm = cross.diagonal().cwiseSqrt().cwiseInverse();
    double sum = 0.0, best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 1; j < n; ++j)
        for (Eigen::Index i = 0; i < j; ++i) {
            const double c = cross(i, j) * inv_norm(i) * inv_norm(j);
            sum += c;
            best = std::max(best, c);
        }
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    est.raw = method == TauMethod::MaxPairwise ? best : sum / pairs;

    const auto [lo, hi] = tau_domain(kind, static_cast<int>(n));
    const double margin = 1e-6;
    est.value = std::clamp(est.raw, lo + margin, hi - margin);
    est.clipped = est.value != est.raw;
    return est;
}

Eigen::MatrixXd pearson_residuals(const Design& d, const Eigen::VectorXd& theta) {
    const Eigen::VectorXd lam = design_intensity(d, theta);
    const Eigen::VectorXd r = ((d.y - lam).array() / lam.array().sqrt()).matrix();
    // r is t-major, so each step is a contiguous block of N entries.
    return Eigen::Map<const Eigen::MatrixXd>(r.data(), d.nodes, d.steps()).transpose();
}

TauEstimate estimate_tau(const Design& d, const FitResult& fit, WorkingKind kind, TauMethod method) {
    return estimate_tau_from_residuals(pearson_residuals(d, fit.theta), kind, method);
}

namespace {

struct GeeTerms {
    Eigen::VectorXd psi;
    Eigen::MatrixXd m;
    Eigen::MatrixXd q;
};

// Whitened derivative Z_t = D^{-1/2} dlambda_t and residual e_t = D^{-1/2}(Y-lambda)
// give psi_t = Z^T P^{-1} e and M_t = Z^T P^{-1} Z.
GeeTerms gee_terms(const Design& d, const Eigen::VectorXd& theta, const WorkingCorrelation& wc, bool full) {
    const Eigen::VectorXd lam = design_intensity(d, theta);
    const int n = d.nodes, m = d.num_params();
    GeeTerms out;
    out.psi = Eigen::VectorXd::Zero(m);
    if (full) {
        out.m = Eigen::MatrixXd::Zero(m, m);
        out.q = Eigen::MatrixXd::Zero(m, m);
    }
    Eigen::MatrixXd z(n, m), pz(n, m);
    for (int k = 0; k < d.steps(); ++k) {
        const auto l = lam.segment(static_cast<Eigen::Index>(k) * n, n);
        const Eigen::VectorXd root = l.cwiseSqrt();
        const Eigen::VectorXd e = (d.step_y(k) - l).cwiseQuotient(root);
        if (d.link == Link::LogLinear) z = root.asDiagonal() * d.step_rows(k);
        else z = root.cwiseInverse().asDiagonal() * d.step_rows(k);
        const Eigen::VectorXd pe = working_inverse_apply(wc, e);
        const Eigen::VectorXd psi_t = z.transpose() * pe;
        out.psi += psi_t;
        if (full) {
            for (int c = 0; c < m; ++c) pz.col(c) = working_inverse_apply(wc, z.col(c));
            out.m.noalias() += z.transpose() * pz;
            out.q.noalias() += psi_t * psi_t.transpose();
        }
    }
    if (full) out.m = 0.5 * (out.m + out.m.transpose());
    return out;
}

}  // namespace

Eigen::VectorXd gee_estimating_function(const Design& d, const Eigen::VectorXd& theta, const WorkingCorrelation& wc) {
    return gee_terms(d, theta, wc, false).psi;
}

FitResult gee_fit_fixed(const Design& d, const WorkingCorrelation& wc, const FitResult& start, const GeeOptions& opt) {
    if (start.link != d.link || start.p != d.p) throw std::invalid_argument("start fit does not match the design");
    const int m = d.num_params();
    Eigen::VectorXd lower, upper;
    parameter_bounds(d.link, m, opt.beta0_lower, lower, upper);

    auto projected_norm = [&](const Eigen::VectorXd& th, const Eigen::VectorXd& psi) {
        // psi is an ascent direction; reuse the descent-form helper on -psi.
        return projected_gradient_norm(th, -psi, lower, upper);
    };
    auto safe_psi = [&](const Eigen::VectorXd& th, Eigen::VectorXd& psi) {
        try {
            psi = gee_estimating_function(d, th, wc);
            return psi.allFinite();
        } catch (const NumericalError&) {
            return false;
        }
    };

    FitResult res = start;
    res.gee.reset();
    res.loglik_trace.clear();
    Eigen::VectorXd theta = start.theta.cwiseMax(lower).cwiseMin(upper);
    Eigen::VectorXd psi;
    if (!safe_psi(theta, psi)) throw NumericalError("estimating function not finite at the start");
    double merit = projected_norm(theta, psi);
    res.converged = false;
    res.status = "iteration limit reached";
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        if (merit < opt.tol) {
            res.converged = true;
            res.status = "estimating function below tolerance";
            break;
        }
        const GeeTerms terms = gee_terms(d, theta, wc, true);
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < m; ++i) {
            const bool blocked = (theta(i) <= lower(i) && psi(i) < 0.0) || (theta(i) >= upper(i) && psi(i) > 0.0);
            if (!blocked) free.push_back(i);
        }
        const auto nf = static_cast<Eigen::Index>(free.size());
        Eigen::MatrixXd mff(nf, nf);
        Eigen::VectorXd pf(nf);
        for (Eigen::Index a = 0; a < nf; ++a) {
            pf(a) = psi(free[a]);
            for (Eigen::Index c = 0; c < nf; ++c) mff(a, c) = terms.m(free[a], free[c]);
        }
        const Eigen::VectorXd df = mff.ldlt().solve(pf);
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(m);
        for (Eigen::Index a = 0; a < nf; ++a) dir(free[a]) = df(a);
        if (!dir.allFinite()) {
            res.status = "singular scoring matrix";
            break;
        }

        bool accepted = false;
        Eigen::VectorXd cand(m), psi_new(m);
        double merit_new = merit;
        double alpha = 1.0;
        for (int k = 0; k < 60; ++k, alpha *= 0.5) {
            cand = (theta + alpha * dir).cwiseMax(lower).cwiseMin(upper);
            if (!safe_psi(cand, psi_new)) continue;
            merit_new = projected_norm(cand, psi_new);
            if (merit_new < merit) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            res.status = "damped scoring step made no progress";
            break;
        }
        const double change = (cand - theta).lpNorm<Eigen::Infinity>();
        theta = cand;
        psi = psi_new;
        merit = merit_new;
        if (change <= opt.step_tol * std::max(1.0, theta.lpNorm<Eigen::Infinity>())) {
            res.converged = true;
            res.status = "parameter change below tolerance";
            ++it;
            break;
        }
    }
    if (!res.converged && merit < opt.tol) {
        res.converged = true;
        res.status = "estimating function below tolerance";
    }

    res.theta = theta;
    res.iterations = it;
    res.gradient_norm = merit;
    res.loglik = quasi_loglik(d, theta);
    const GeeTerms terms = gee_terms(d, theta, wc, true);
    res.h = terms.m;
    res.b_hat = terms.q;
    finish_covariance(res);
    return res;
}

FitResult gee_fit(const Design& d, WorkingKind kind, const FitResult& start, TauMethod method,
                  const GeeOptions& opt) {
    TauEstimate tau = estimate_tau(d, start, kind, method);
    FitResult res = gee_fit_fixed(d, {kind, tau.value}, start, opt);
    GeeInfo info;
    info.wc_kind = working_kind_name(kind);
    info.tau_hat = tau.value;
    info.tau_raw = tau.raw;
    info.tau_clipped = tau.clipped;
    info.tau_method = tau_method_name(method);
    res.gee = info;
    return res;
}

}  // namespace pnar
