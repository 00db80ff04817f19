#include <doctest.h>

#include "oracles.hpp"
#include "pnar/optimizer.hpp"

#include <cmath>
#include <limits>

using namespace pnar;

namespace {

const double inf = std::numeric_limits<double>::infinity();

Objective quadratic(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    return [a, b](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        if (g) *g = a * x - b;
        return 0.5 * x.dot(a * x) - b.dot(x);
    };
}

double rosen(const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    const double a = 1.0 - x(0), b = x(1) - x(0) * x(0);
    if (g) {
        g->resize(2);
        (*g)(0) = -2.0 * a - 400.0 * x(0) * b;
        (*g)(1) = 200.0 * b;
    }
    return a * a + 100.0 * b * b;
}

void check_monotone(const BoxResult& r) {
    for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k] <= r.trace[k - 1]);
}

}  // namespace

TEST_CASE("unconstrained quadratic reaches the linear-system solution") {
    Eigen::MatrixXd a(3, 3);
    a << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
    const Eigen::Vector3d b(1, -2, 3);
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(3, -inf), hi = Eigen::VectorXd::Constant(3, inf);
    const BoxResult r = minimize_box(quadratic(a, b), Eigen::VectorXd::Zero(3), lo, hi);
    CHECK(r.converged);
    CHECK(oracle::rel_err(r.x, Eigen::VectorXd(a.ldlt().solve(b))) < 1e-6);
    check_monotone(r);

    // Seeding with the exact Hessian solves it in one step.
    const BoxResult s = minimize_box(quadratic(a, b), Eigen::VectorXd::Zero(3), lo, hi, {},
                                     [a](const Eigen::VectorXd&) { return a; });
    CHECK(s.converged);
    CHECK(s.iterations <= 2);
}

TEST_CASE("bound-constrained quadratic lands on the active face") {
    // min 0.5|x|^2 - (1,-1).x over x >= 0 has solution (1, 0).
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::Vector2d b(1, -1);
    const BoxResult r = minimize_box(quadratic(a, b), Eigen::Vector2d(3, 3), Eigen::VectorXd::Zero(2),
                                     Eigen::VectorXd::Constant(2, inf));
    CHECK(r.converged);
    CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.x(1) == 0.0);
    CHECK(r.projected_grad_norm < 1e-6);
    check_monotone(r);
}

TEST_CASE("Rosenbrock with and without an active upper bound") {
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -5), hi = Eigen::VectorXd::Constant(2, 5);
    BoxOptions opt;
    opt.rel_tol = 0.0;
    const BoxResult r = minimize_box(rosen, Eigen::Vector2d(-1.2, 1.0), lo, hi, opt);
    CHECK(r.converged);
    CHECK((r.x - Eigen::Vector2d(1, 1)).cwiseAbs().maxCoeff() < 1e-4);
    check_monotone(r);

    // With x0 <= 0.5 the constrained minimiser is (0.5, 0.25).
    const BoxResult c = minimize_box(rosen, Eigen::Vector2d(-1.2, 1.0), lo, Eigen::Vector2d(0.5, 5), opt);
    CHECK(c.converged);
    CHECK(c.x(0) == 0.5);
    CHECK(c.x(1) == doctest::Approx(0.25).epsilon(1e-5));
    check_monotone(c);
}

TEST_CASE("projected gradient ignores outward components at bounds") {
    const Eigen::Vector2d x(0, 1), g(2, -3);
    const Eigen::Vector2d lo(0, -inf), hi(inf, 1);
    CHECK(projected_gradient_norm(x, g, lo, hi) == 0.0);
    // |P(x - g) - x|_inf: x - g = (-1.5, 3.5) projects to (0, 1).
    CHECK(projected_gradient_norm(Eigen::Vector2d(0.5, 0.5), g, lo, hi) == 0.5);
    CHECK(projected_gradient_norm(Eigen::Vector2d(5, -5), g, lo, hi) == 3.0);
}

TEST_CASE("non-finite values are treated as outside the domain") {
    // f = x - log x on x > 0 with a barrier returning inf for x <= 0.
    Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        if (x(0) <= 0) return inf;
        if (g) *g = Eigen::VectorXd::Constant(1, 1.0 - 1.0 / x(0));
        return x(0) - std::log(x(0));
    };
    const BoxResult r = minimize_box(f, Eigen::VectorXd::Constant(1, 5.0), Eigen::VectorXd::Constant(1, -inf),
                                     Eigen::VectorXd::Constant(1, inf));
    CHECK(r.converged);
    CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-5));
    check_monotone(r);
}

TEST_CASE("iteration cap returns a non-converged result") {
    BoxOptions opt;
    opt.max_iter = 2;
    opt.rel_tol = 0.0;
    const BoxResult r = minimize_box(rosen, Eigen::Vector2d(-1.2, 1.0), Eigen::VectorXd::Constant(2, -5),
                                     Eigen::VectorXd::Constant(2, 5), opt);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 2);
    CHECK(std::isfinite(r.value));
}
