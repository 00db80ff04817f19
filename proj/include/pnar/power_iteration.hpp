#ifndef PNAR_POWER_ITERATION_HPP
#define PNAR_POWER_ITERATION_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <vector>

namespace pnar {

struct PowerIterationOptions {
    double tol = 1e-12;
    int max_iter = 10000;
};

struct EigenEstimate {
    double value = 0.0;
    Eigen::VectorXd vector;
    int iterations = 0;
    bool converged = false;
};

using LinearOperator = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

/// Largest |eigenvalue| of a symmetric operator. Iterates on A^2 so that
/// +r/-r eigenvalue pairs (bipartite graphs) do not cause oscillation.
EigenEstimate symmetric_spectral_radius(const LinearOperator& apply, Eigen::Index n,
                                        const PowerIterationOptions& opt = {});

EigenEstimate symmetric_spectral_radius(const Eigen::MatrixXd& a,
                                        const PowerIterationOptions& opt = {});

/// Perron root of a nonnegative matrix. Power iteration on A + I (same Perron
/// vector, no peripheral eigenvalues) started from the all-ones vector, stopped
/// on the Collatz-Wielandt bracket.
EigenEstimate perron_root(const LinearOperator& apply, Eigen::Index n,
                          const PowerIterationOptions& opt = {});

EigenEstimate perron_root(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a,
                          const PowerIterationOptions& opt = {});

/// Strongly connected components of the nonzero pattern of a square matrix.
/// Returns one label per row, labels 0..count-1.
std::vector<int> strong_components(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a, int& count);

/// Perron root of a possibly reducible nonnegative matrix: the largest Perron
/// root over its irreducible diagonal blocks. Plain power iteration converges
/// only sublinearly when the dominant eigenvalue is defective, which happens
/// for chains feeding into isolated nodes.
EigenEstimate perron_root_blockwise(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a,
                                    const PowerIterationOptions& opt = {});

}  // namespace pnar

#endif  // PNAR_POWER_ITERATION_HPP
