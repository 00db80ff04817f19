#ifndef PNAR_NETWORK_HPP
#define PNAR_NETWORK_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pnar {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Edge = std::pair<int, int>;

/**
 * Fixed directed network: binary adjacency A with zero diagonal, out-degrees
 * n_i and the row-normalised weight matrix W (w_ij = a_ij / n_i, zero row for
 * isolated nodes). Immutable once built.
 */
class Network {
public:
    Network() = default;

    int size() const noexcept { return n_; }
    const SparseRowMatrix& adjacency() const noexcept { return adjacency_; }
    const SparseRowMatrix& weights() const noexcept { return weights_; }
    const Eigen::VectorXi& out_degree() const noexcept { return degree_; }

    /// Directed edge count divided by N(N-1).
    double density() const noexcept;
    int edge_count() const noexcept { return static_cast<int>(adjacency_.nonZeros()); }
    int isolated_count() const noexcept;
    /// Self-loops discarded while building.
    int dropped_self_loops() const noexcept { return dropped_self_loops_; }
    /// Block labels (0-based) when generated by a block model, empty otherwise.
    const std::vector<int>& block_labels() const noexcept { return blocks_; }

    Eigen::MatrixXd dense_adjacency() const { return Eigen::MatrixXd(adjacency_); }
    Eigen::MatrixXd dense_weights() const { return Eigen::MatrixXd(weights_); }
    std::vector<Edge> edges() const;

    /// Apply a node relabelling: new node k is old node perm[k].
    Network permuted(std::span<const int> perm) const;

    friend Network build_network(std::span<const Edge> edges, int n);
    friend Network with_block_labels(Network net, std::vector<int> labels);

private:
    int n_ = 0;
    int dropped_self_loops_ = 0;
    SparseRowMatrix adjacency_;
    SparseRowMatrix weights_;
    Eigen::VectorXi degree_;
    std::vector<int> blocks_;
};

/// Assemble a network from ordered pairs. Self-loops are dropped and counted;
/// duplicate pairs collapse to a single edge. Throws std::out_of_range for
/// indices outside [0, n) and std::invalid_argument for n <= 0.
Network build_network(std::span<const Edge> edges, int n);

Network with_block_labels(Network net, std::vector<int> labels);

struct SbmParams {
    int nodes = 0;
    int blocks = 5;
    std::optional<double> p_in;   ///< default nodes^-0.3
    std::optional<double> p_out;  ///< default nodes^-1
    std::optional<double> target_density;  ///< thinning; off by default
};

/// Stochastic block model: uniform block labels, each ordered off-diagonal
/// pair drawn independently with p_in (same block) or p_out.
Network gen_sbm(const SbmParams& params, std::uint64_t seed);

/// Erdos-Renyi digraph with edge probability p (default nodes^-0.3).
Network gen_er(int nodes, std::optional<double> p, std::uint64_t seed);

/// Uniformly drop realised edges until density <= target. Returns the input
/// unchanged when it is already sparse enough.
Network thin_to_density(const Network& net, double target_density, std::uint64_t seed);

struct NetworkDiagnostics {
    double lambda_max_wstar = 0.0;  ///< largest |eigenvalue| of W + W^T
    bool lambda_converged = false;
    bool reducible = false;         ///< W is not an irreducible stochastic matrix
    std::optional<Eigen::VectorXd> pi;  ///< stationary distribution of W
    bool pi_converged = false;
    std::optional<double> sum_pi_sq;
    std::optional<double> mu_pi;            ///< N^gamma * sum pi_i^2
    std::optional<double> lambda_max_sigma_xi;
    std::optional<double> mu_xi;            ///< lambda_max(Sigma_xi) / (log N)^delta
    double density = 0.0;
    int isolated_nodes = 0;
};

struct DiagnoseOptions {
    double delta = 8.0;
    double gamma = 0.5;
    double tol = 1e-12;
    int max_iter = 10000;
};

NetworkDiagnostics diagnose_network(const Network& net,
                                    const Eigen::MatrixXd* residual_covariance = nullptr,
                                    const DiagnoseOptions& opt = {});

/// True when every node reaches every other node along directed edges.
bool strongly_connected(const Network& net);

/// Edge-list text: one "i,j" pair per line, '#' comments, optional "N=<count>"
/// header. Without a header N is one more than the largest index.
Network read_edge_list(std::istream& in);
Network read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const Network& net);

}  // namespace pnar

#endif  // PNAR_NETWORK_HPP
