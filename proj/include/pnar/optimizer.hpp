#ifndef PNAR_OPTIMIZER_HPP
#define PNAR_OPTIMIZER_HPP

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace pnar {

/// f(x) and, when grad != nullptr, its gradient. May return a non-finite
/// value to signal that x is outside the objective's domain.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;
/// Optional curvature used to seed the quasi-Newton matrix.
using HessianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd& x)>;

struct BoxOptions {
    int max_iter = 500;
    double grad_tol = 1e-6;      ///< projected-gradient infinity norm
    double rel_tol = 1e-10;      ///< relative objective change between iterates
    double armijo = 1e-4;
    int max_backtracks = 60;
};

struct BoxResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd grad;
    double projected_grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string status;
    std::vector<double> trace;  ///< objective after every accepted iterate
};

/// Projected-gradient infinity norm for the box [lower, upper].
double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                               const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

/**
 * Minimises f over the box [lower, upper] with a projected BFGS method:
 * variables at a bound whose gradient pushes outward are frozen, the search
 * direction solves the reduced quasi-Newton system on the free variables and
 * a backtracking Armijo search runs along the projected path. Accepted steps
 * never increase f.
 */
BoxResult minimize_box(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper, const BoxOptions& opt = {},
                       const HessianFn& seed_hessian = nullptr);

}  // namespace pnar

#endif  // PNAR_OPTIMIZER_HPP
