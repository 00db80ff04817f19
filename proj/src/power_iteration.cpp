#include "pnar/power_iteration.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

namespace pnar {

namespace {

Eigen::VectorXd start_vector(Eigen::Index n) {
    // Positive and non-constant, so it overlaps every Perron vector and is
    // unlikely to be orthogonal to the dominant eigenspace of a general matrix.
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.05 * std::sin(1.0 + static_cast<double>(i));
    return v / v.norm();
}

}  // namespace

EigenEstimate symmetric_spectral_radius(const LinearOperator& apply, Eigen::Index n,
                                        const PowerIterationOptions& opt) {
    EigenEstimate est;
    if (n == 0) {
        est.converged = true;
        return est;
    }
    Eigen::VectorXd v = start_vector(n);
    Eigen::VectorXd w(n), u(n);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opt.max_iter; ++it) {
        apply(v, w);
        const double lam = w.norm();
        est.iterations = it;
        if (lam == 0.0) {
            est.value = 0.0;
            est.vector = v;
            est.converged = true;
            return est;
        }
        apply(w, u);
        const double un = u.norm();
        est.value = lam;
        if (std::abs(lam - prev) <= opt.tol * lam) {
            est.vector = v;
            est.converged = true;
            return est;
        }
        prev = lam;
        if (un == 0.0) {
            // A v lies in the null space of A: v had no dominant component.
            v = w / lam;
            continue;
        }
        v = u / un;
    }
    est.vector = v;
    return est;
}

EigenEstimate symmetric_spectral_radius(const Eigen::MatrixXd& a, const PowerIterationOptions& opt) {
    return symmetric_spectral_radius(
        [&a](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out.noalias() = a * in; }, a.rows(), opt);
}

EigenEstimate perron_root(const LinearOperator& apply, Eigen::Index n, const PowerIterationOptions& opt) {
    EigenEstimate est;
    if (n == 0) {
        est.converged = true;
        return est;
    }
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
    Eigen::VectorXd y(n);
    double prev = std::numeric_limits<double>::infinity();
    int settled_runs = 0;
    for (int it = 1; it <= opt.max_iter; ++it) {
        apply(x, y);
        y += x;  // shift by the identity
        est.iterations = it;

        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (x(i) > 1e-300) {
                const double r = y(i) / x(i);
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
        }
        const double ny = y.norm();
        const double ratio = ny / x.norm();
        est.value = ratio - 1.0;
        const bool bracket = hi - lo <= opt.tol * hi;
        const bool settled = std::abs(ratio - prev) <= opt.tol * ratio;
        x = y / ny;
        if (bracket) {
            est.value = 0.5 * (hi + lo) - 1.0;
            est.converged = true;
            break;
        }
        // Reducible matrices (isolated nodes, disconnected blocks) keep the
        // bracket open forever; accept the norm ratio once it has settled twice.
        settled_runs = settled ? settled_runs + 1 : 0;
        if (settled_runs >= 2) {
            est.converged = true;
            break;
        }
        prev = ratio;
    }
    est.value = std::max(est.value, 0.0);
    est.vector = x;
    return est;
}

EigenEstimate perron_root(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a,
                          const PowerIterationOptions& opt) {
    return perron_root(
        [&a](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out.noalias() = a * in; }, a.rows(), opt);
}

std::vector<int> strong_components(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a, int& count) {
    // Iterative Tarjan.
    using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
    const int n = static_cast<int>(a.rows());
    std::vector<int> index(n, -1), low(n, 0), label(n, -1), stack;
    std::vector<char> on_stack(n, 0);
    std::vector<std::pair<int, Matrix::InnerIterator>> calls;
    int next_index = 0;
    count = 0;
    for (int root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = 1;
        calls.emplace_back(root, Matrix::InnerIterator(a, root));
        while (!calls.empty()) {
            auto& [v, it] = calls.back();
            bool descended = false;
            for (; it; ++it) {
                if (it.value() == 0.0) continue;
                const int w = static_cast<int>(it.col());
                if (index[w] < 0) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    ++it;
                    calls.emplace_back(w, Matrix::InnerIterator(a, w));
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[v] = std::min(low[v], index[w]);
            }
            if (descended) continue;
            const int done = v;
            if (low[done] == index[done]) {
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    label[w] = count;
                } while (w != done);
                ++count;
            }
            calls.pop_back();
            if (!calls.empty()) {
                const int parent = calls.back().first;
                low[parent] = std::min(low[parent], low[done]);
            }
        }
    }
    return label;
}

EigenEstimate perron_root_blockwise(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a,
                                    const PowerIterationOptions& opt) {
    using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
    const int n = static_cast<int>(a.rows());
    int count = 0;
    const std::vector<int> label = strong_components(a, count);
    std::vector<std::vector<int>> members(count);
    for (int i = 0; i < n; ++i) members[label[i]].push_back(i);

    EigenEstimate best;
    best.converged = true;
    best.vector = Eigen::VectorXd::Zero(n);
    for (const auto& block : members) {
        const int m = static_cast<int>(block.size());
        std::vector<int> local(n, -1);
        for (int k = 0; k < m; ++k) local[block[k]] = k;
        std::vector<Eigen::Triplet<double>> trips;
        for (int k = 0; k < m; ++k)
            for (Matrix::InnerIterator it(a, block[k]); it; ++it) {
                const int j = local[static_cast<int>(it.col())];
                if (j >= 0 && it.value() != 0.0) trips.emplace_back(k, j, it.value());
            }
        if (trips.empty()) continue;  // single node without a loop: root 0
        Matrix sub(m, m);
        sub.setFromTriplets(trips.begin(), trips.end());
        const EigenEstimate est = perron_root(sub, opt);
        best.iterations += est.iterations;
        best.converged = best.converged && est.converged;
        if (est.value > best.value) {
            best.value = est.value;
            best.vector.setZero();
            for (int k = 0; k < m; ++k) best.vector(block[k]) = est.vector(k);
        }
    }
    return best;
}

}  // namespace pnar
