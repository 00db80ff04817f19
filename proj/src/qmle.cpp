#include "pnar/qmle.hpp"

#include "pnar/errors.hpp"
#include "pnar/optimizer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pnar {

Design build_design(const CountMatrix& counts, const Network& net, Link link, int p, std::optional<int> start) {
    if (p < 1) throw std::invalid_argument("lag order p must be >= 1");
    const int first = start.value_or(p);
    if (first < p) throw std::invalid_argument("conditioning rows must cover the p lags");
    if (counts.cols() != net.size())
        throw DimensionError("panel has " + std::to_string(counts.cols()) + " nodes but network has " +
                             std::to_string(net.size()));
    if (counts.rows() < first) throw std::invalid_argument("panel is shorter than the conditioning rows");
    if ((counts.array() < 0).any()) throw std::invalid_argument("counts must be nonnegative");

    Design d;
    d.link = link;
    d.p = p;
    d.nodes = static_cast<int>(counts.cols());
    d.periods = static_cast<int>(counts.rows());
    d.start = first;
    const int n = d.nodes;
    const int steps = d.steps();
    const int m = d.num_params();

    // Transformed series and their neighbour averages, one column per row of
    // the panel.
    Eigen::MatrixXd z = counts.transpose().cast<double>();
    if (link == Link::LogLinear) z = z.array().log1p();
    const Eigen::MatrixXd wz = net.weights() * z;

    d.x.resize(static_cast<Eigen::Index>(n) * steps, m);
    d.y.resize(static_cast<Eigen::Index>(n) * steps);
    for (int s = 0; s < steps; ++s) {
        const int t = s + first;
        auto rows = d.x.middleRows(static_cast<Eigen::Index>(s) * n, n);
        rows.col(0).setOnes();
        for (int h = 1; h <= p; ++h) {
            rows.col(h) = wz.col(t - h);
            rows.col(p + h) = z.col(t - h);
        }
        d.y.segment(static_cast<Eigen::Index>(s) * n, n) = counts.row(t).transpose().cast<double>();
    }
    return d;
}

namespace {

void check_theta(const Design& d, const Eigen::VectorXd& theta) {
    if (theta.size() != d.num_params())
        throw DimensionError("theta must have 2p+1 = " + std::to_string(d.num_params()) + " entries");
    if (!theta.allFinite()) throw NumericalError("theta has non-finite entries");
}

}  // namespace

Eigen::VectorXd design_intensity(const Design& d, const Eigen::VectorXd& theta) {
    check_theta(d, theta);
    Eigen::VectorXd lam = d.x * theta;
    if (d.link == Link::LogLinear) {
        lam = lam.array().exp();
        if (!lam.allFinite()) throw NumericalError("log-linear intensity overflowed");
    } else if (lam.size() > 0 && !(lam.minCoeff() > 0.0)) {
        throw NumericalError("linear intensity is not strictly positive at this theta");
    }
    return lam;
}

double quasi_loglik(const Design& d, const Eigen::VectorXd& theta) {
    const Eigen::VectorXd lam = design_intensity(d, theta);
    double ll = 0.0;
    for (Eigen::Index r = 0; r < lam.size(); ++r) {
        const double y = d.y(r);
        if (y > 0.0) ll += y * std::log(lam(r));
        ll -= lam(r);
    }
    if (!std::isfinite(ll)) throw NumericalError("quasi-loglikelihood is not finite");
    return ll;
}

namespace {

// Per-row residual entering the score: y/lambda - 1 (linear) or y - lambda.
Eigen::VectorXd score_residual(const Design& d, const Eigen::VectorXd& lam) {
    if (d.link == Link::LogLinear) return d.y - lam;
    return (d.y.array() / lam.array() - 1.0).matrix();
}

}  // namespace

Eigen::VectorXd score(const Design& d, const Eigen::VectorXd& theta) {
    const Eigen::VectorXd lam = design_intensity(d, theta);
    return d.x.transpose() * score_residual(d, lam);
}

Eigen::MatrixXd score_summands(const Design& d, const Eigen::VectorXd& theta) {
    const Eigen::VectorXd lam = design_intensity(d, theta);
    const Eigen::VectorXd r = score_residual(d, lam);
    Eigen::MatrixXd s(d.num_params(), d.steps());
    for (int k = 0; k < d.steps(); ++k)
        s.col(k) = d.step_rows(k).transpose() * r.segment(static_cast<Eigen::Index>(k) * d.nodes, d.nodes);
    return s;
}

InformationSet hessian_and_information(const Design& d, const Eigen::VectorXd& theta, const SigmaOracle& sigma) {
    const Eigen::VectorXd lam = design_intensity(d, theta);
    Eigen::VectorXd c(lam.size());
    if (d.link == Link::LogLinear) c = lam;
    else c = (d.y.array() / lam.array().square()).matrix();

    InformationSet out;
    const int m = d.num_params();
    out.h = Eigen::MatrixXd::Zero(m, m);
    out.h.selfadjointView<Eigen::Lower>().rankUpdate(d.x.transpose() * c.cwiseSqrt().asDiagonal());
    out.h = out.h.selfadjointView<Eigen::Lower>();

    const Eigen::MatrixXd s = score_summands(d, theta);
    out.b_hat = s * s.transpose();

    if (sigma) {
        Eigen::MatrixXd bc = Eigen::MatrixXd::Zero(m, m);
        for (int k = 0; k < d.steps(); ++k) {
            const Eigen::MatrixXd sig = sigma(k + d.start);
            if (sig.rows() != d.nodes || sig.cols() != d.nodes) throw DimensionError("Sigma_t must be N x N");
            Eigen::MatrixXd g = d.step_rows(k);
            if (d.link == Link::Linear)
                g = lam.segment(static_cast<Eigen::Index>(k) * d.nodes, d.nodes).cwiseInverse().asDiagonal() * g;
            bc.noalias() += g.transpose() * sig * g;
        }
        out.b_cond = bc;
    }
    return out;
}

double quasi_loglik(const Eigen::VectorXd& theta, const PanelData& panel, const Network& net, Link link) {
    const int p = (static_cast<int>(theta.size()) - 1) / 2;
    return quasi_loglik(build_design(panel.counts, net, link, p), theta);
}

Eigen::VectorXd score(const Eigen::VectorXd& theta, const PanelData& panel, const Network& net, Link link) {
    const int p = (static_cast<int>(theta.size()) - 1) / 2;
    return score(build_design(panel.counts, net, link, p), theta);
}

InformationSet hessian_and_information(const Eigen::VectorXd& theta, const PanelData& panel, const Network& net,
                                       Link link, const SigmaOracle& sigma) {
    const int p = (static_cast<int>(theta.size()) - 1) / 2;
    return hessian_and_information(build_design(panel.counts, net, link, p), theta, sigma);
}

Eigen::VectorXd default_start(const Design& d) {
    const double ybar = d.y.size() > 0 ? d.y.mean() : 0.0;
    Eigen::VectorXd th = Eigen::VectorXd::Zero(d.num_params());
    if (d.link == Link::Linear) {
        th(0) = std::max(0.5 * ybar, 1e-3);
        th.tail(2 * d.p).setConstant(0.25 / d.p);
    } else {
        th(0) = std::log1p(ybar);
    }
    return th;
}

void parameter_bounds(Link link, int m, double lower0, Eigen::VectorXd& lower, Eigen::VectorXd& upper) {
    const double inf = std::numeric_limits<double>::infinity();
    upper = Eigen::VectorXd::Constant(m, inf);
    if (link == Link::Linear) {
        lower = Eigen::VectorXd::Zero(m);
        lower(0) = lower0;
    } else {
        lower = Eigen::VectorXd::Constant(m, -inf);
    }
}

double two_sided_p(double t) { return std::erfc(std::abs(t) / std::sqrt(2.0)); }

void finish_covariance(FitResult& fit) {
    const int m = fit.num_params();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    fit.se = Eigen::VectorXd::Constant(m, nan);
    fit.t_stats = Eigen::VectorXd::Constant(m, nan);
    fit.p_values = Eigen::VectorXd::Constant(m, nan);
    fit.v = Eigen::MatrixXd::Constant(m, m, nan);
    fit.singular_hessian = true;
    if (!fit.h.allFinite() || !fit.b_hat.allFinite()) return;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fit.h);
    const Eigen::VectorXd ev = es.eigenvalues();
    if (!(ev.minCoeff() > 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff()))) return;
    fit.singular_hessian = false;

    const Eigen::MatrixXd hinv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    Eigen::MatrixXd cov = hinv * fit.b_hat * hinv;
    cov = 0.5 * (cov + cov.transpose());
    fit.v = static_cast<double>(fit.nodes) * fit.periods * cov;
    fit.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    for (int i = 0; i < m; ++i) {
        fit.t_stats(i) = fit.theta(i) / fit.se(i);
        fit.p_values(i) = std::isfinite(fit.t_stats(i)) ? two_sided_p(fit.t_stats(i)) : nan;
    }
}

namespace {

// Near the optimum the objective stops resolving progress in floating point
// while the gradient can still shrink; finish with projected Newton steps on
// the free variables, kept only while the projected gradient decreases and the
// objective does not increase beyond summation roundoff.
void polish_newton(const Objective& f, const HessianFn& hess, const Eigen::VectorXd& lower,
                   const Eigen::VectorXd& upper, double grad_tol, BoxResult& br) {
    if (!std::isfinite(br.value)) return;
    const Eigen::Index m = br.x.size();
    for (int k = 0; k < 8 && br.projected_grad_norm >= 0.01 * grad_tol; ++k) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < m; ++i) {
            const bool at_lo = br.x(i) <= lower(i) && br.grad(i) > 0.0;
            const bool at_hi = br.x(i) >= upper(i) && br.grad(i) < 0.0;
            if (!at_lo && !at_hi) free.push_back(i);
        }
        if (free.empty()) return;
        const Eigen::MatrixXd h = hess(br.x);
        const auto nf = static_cast<Eigen::Index>(free.size());
        Eigen::MatrixXd hf(nf, nf);
        Eigen::VectorXd gf(nf);
        for (Eigen::Index a = 0; a < nf; ++a) {
            gf(a) = br.grad(free[a]);
            for (Eigen::Index c = 0; c < nf; ++c) hf(a, c) = h(free[a], free[c]);
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hf);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return;
        const Eigen::VectorXd df = ldlt.solve(-gf);
        Eigen::VectorXd x = br.x;
        for (Eigen::Index a = 0; a < nf; ++a) x(free[a]) += df(a);
        x = x.cwiseMax(lower).cwiseMin(upper);
        Eigen::VectorXd g;
        const double fx = f(x, &g);
        if (!std::isfinite(fx) || fx > br.value + 1e-12 * std::max(1.0, std::abs(br.value))) return;
        const double pgn = projected_gradient_norm(x, g, lower, upper);
        if (pgn >= br.projected_grad_norm) return;
        br.x = x;
        br.grad = g;
        br.value = fx;
        br.projected_grad_norm = pgn;
        if (br.trace.empty() || fx <= br.trace.back()) br.trace.push_back(fx);
        ++br.iterations;
        if (pgn < grad_tol) {
            br.converged = true;
            br.status = "projected gradient below tolerance";
        }
    }
}

}  // namespace

FitResult fit(const Design& d, const FitOptions& opt) {
    if (d.steps() < 1) throw std::invalid_argument("fit needs T >= p+1");
    const int m = d.num_params();
    Eigen::VectorXd lower, upper;
    parameter_bounds(d.link, m, opt.beta0_lower, lower, upper);

    Eigen::VectorXd start = opt.init.value_or(default_start(d));
    if (start.size() != m) throw DimensionError("initial theta has the wrong length");

    auto objective = [&](const Eigen::VectorXd& th, Eigen::VectorXd* grad) -> double {
        try {
            const Eigen::VectorXd lam = design_intensity(d, th);
            double ll = 0.0;
            for (Eigen::Index r = 0; r < lam.size(); ++r) {
                if (d.y(r) > 0.0) ll += d.y(r) * std::log(lam(r));
                ll -= lam(r);
            }
            if (grad) *grad = -(d.x.transpose() * score_residual(d, lam));
            return -ll;
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    auto seed = [&](const Eigen::VectorXd& th) -> Eigen::MatrixXd {
        try {
            const Eigen::VectorXd lam = design_intensity(d, th);
            Eigen::VectorXd c = d.link == Link::LogLinear ? lam : (d.y.array() / lam.array().square()).matrix();
            return d.x.transpose() * c.asDiagonal() * d.x;
        } catch (const NumericalError&) {
            return Eigen::MatrixXd::Identity(m, m);
        }
    };

    BoxOptions bo;
    bo.max_iter = opt.max_iter;
    bo.grad_tol = opt.grad_tol;
    bo.rel_tol = opt.rel_tol;
    BoxResult br = minimize_box(objective, start, lower, upper, bo, seed);
    polish_newton(objective, seed, lower, upper, opt.grad_tol, br);

    FitResult res;
    res.link = d.link;
    res.p = d.p;
    res.nodes = d.nodes;
    res.periods = d.periods;
    res.start = d.start;
    res.theta = br.x;
    res.loglik = -br.value;
    res.converged = br.converged;
    res.iterations = br.iterations;
    res.gradient_norm = br.projected_grad_norm;
    res.status = br.status;
    res.loglik_trace.reserve(br.trace.size());
    for (double v : br.trace) res.loglik_trace.push_back(-v);

    if (std::isfinite(br.value)) {
        const InformationSet info = hessian_and_information(d, res.theta);
        res.h = info.h;
        res.b_hat = info.b_hat;
    } else {
        res.h = Eigen::MatrixXd::Constant(m, m, std::numeric_limits<double>::quiet_NaN());
        res.b_hat = res.h;
    }
    finish_covariance(res);
    return res;
}

FitResult fit(const PanelData& panel, const Network& net, Link link, int p, const FitOptions& opt) {
    return fit(build_design(panel.counts, net, link, p), opt);
}

std::vector<std::string> coefficient_names(int p) {
    std::vector<std::string> names{"beta0"};
    for (int h = 1; h <= p; ++h) names.push_back("beta1_" + std::to_string(h));
    for (int h = 1; h <= p; ++h) names.push_back("beta2_" + std::to_string(h));
    return names;
}

std::vector<WaldRow> wald_summary(const FitResult& fit) {
    const int m = fit.num_params();
    if (fit.se.size() != m || fit.theta.size() != m) throw DimensionError("fit has inconsistent dimensions");
    const auto names = coefficient_names(fit.p);
    std::vector<WaldRow> rows;
    for (int i = 0; i < m; ++i) {
        const double se = fit.se(i);
        if (!std::isfinite(se) || se <= 0.0)
            throw std::domain_error("standard error of " + names[i] + " is zero or not finite");
        WaldRow r;
        r.name = names[i];
        r.estimate = fit.theta(i);
        r.se = se;
        r.t = r.estimate / se;
        r.p_value = two_sided_p(r.t);
        r.reject_5pct = r.p_value < 0.05;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace pnar
