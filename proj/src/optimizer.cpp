#include "pnar/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pnar {

namespace {

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
    return x.cwiseMax(lower).cwiseMin(upper);
}

bool at_lower(double x, double l) { return x <= l + 1e-12 * std::max(1.0, std::abs(l)); }
bool at_upper(double x, double u) { return x >= u - 1e-12 * std::max(1.0, std::abs(u)); }

Eigen::MatrixXd scaled_identity(const Eigen::VectorXd& g, Eigen::Index m) {
    const double s = std::max(1.0, g.lpNorm<Eigen::Infinity>());
    return s * Eigen::MatrixXd::Identity(m, m);
}

}  // namespace

double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper) {
    double norm = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double pg = g(i);
        if (pg > 0.0) pg = std::min(pg, x(i) - lower(i));
        else pg = std::max(pg, x(i) - upper(i));
        norm = std::max(norm, std::abs(pg));
    }
    return norm;
}

BoxResult minimize_box(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper, const BoxOptions& opt, const HessianFn& seed_hessian) {
    const Eigen::Index m = x0.size();
    BoxResult res;
    Eigen::VectorXd x = project(x0, lower, upper);
    Eigen::VectorXd g(m);
    double fx = f(x, &g);
    if (!std::isfinite(fx) || !g.allFinite()) {
        res.x = x;
        res.value = fx;
        res.grad = g;
        res.status = "objective not finite at the starting point";
        return res;
    }
    res.trace.push_back(fx);

    Eigen::MatrixXd b;
    if (seed_hessian) {
        b = seed_hessian(x);
        b = 0.5 * (b + b.transpose());
        Eigen::LLT<Eigen::MatrixXd> llt(b);
        if (llt.info() != Eigen::Success || !b.allFinite()) b = scaled_identity(g, m);
    } else {
        b = scaled_identity(g, m);
    }

    bool reset_once = false;
    Eigen::VectorXd g_new(m);
    for (int it = 1; it <= opt.max_iter; ++it) {
        res.iterations = it - 1;
        const double pgn = projected_gradient_norm(x, g, lower, upper);
        if (pgn < opt.grad_tol) {
            res.converged = true;
            res.status = "projected gradient below tolerance";
            break;
        }

        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < m; ++i) {
            const bool blocked = (at_lower(x(i), lower(i)) && g(i) > 0.0) || (at_upper(x(i), upper(i)) && g(i) < 0.0);
            if (!blocked) free.push_back(i);
        }
        Eigen::VectorXd d = Eigen::VectorXd::Zero(m);
        {
            const auto nf = static_cast<Eigen::Index>(free.size());
            Eigen::MatrixXd bff(nf, nf);
            Eigen::VectorXd gf(nf);
            for (Eigen::Index a = 0; a < nf; ++a) {
                gf(a) = g(free[a]);
                for (Eigen::Index c = 0; c < nf; ++c) bff(a, c) = b(free[a], free[c]);
            }
            Eigen::LDLT<Eigen::MatrixXd> ldlt(bff);
            Eigen::VectorXd df = ldlt.solve(-gf);
            if (ldlt.info() != Eigen::Success || !df.allFinite() || df.dot(gf) >= 0.0) df = -gf;
            for (Eigen::Index a = 0; a < nf; ++a) d(free[a]) = df(a);
        }

        double alpha = 1.0;
        bool accepted = false;
        Eigen::VectorXd x_new(m);
        double f_new = fx;
        for (int k = 0; k < opt.max_backtracks; ++k, alpha *= 0.5) {
            x_new = project(x + alpha * d, lower, upper);
            const Eigen::VectorXd step = x_new - x;
            if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
            f_new = f(x_new, nullptr);
            if (!std::isfinite(f_new)) continue;
            if (f_new <= fx + opt.armijo * g.dot(step)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!reset_once) {
                // Stale curvature; retry once from a steepest-descent model.
                b = scaled_identity(g, m);
                reset_once = true;
                continue;
            }
            res.status = "line search failed";
            break;
        }
        reset_once = false;
        f_new = f(x_new, &g_new);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const Eigen::VectorXd bs = b * s;
            b += (y * y.transpose()) / sy - (bs * bs.transpose()) / s.dot(bs);
        }
        const double change = std::abs(fx - f_new);
        x = x_new;
        g = g_new;
        fx = f_new;
        res.trace.push_back(fx);
        res.iterations = it;
        if (change <= opt.rel_tol * std::max(1.0, std::abs(fx))) {
            res.converged = true;
            res.status = "relative objective change below tolerance";
            break;
        }
        if (it == opt.max_iter) res.status = "iteration limit reached";
    }
    res.x = x;
    res.value = fx;
    res.grad = g;
    res.projected_grad_norm = projected_gradient_norm(x, g, lower, upper);
    if (res.status.empty()) res.status = res.converged ? "converged" : "iteration limit reached";
    return res;
}

}  // namespace pnar
