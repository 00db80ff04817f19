#include "pnar/network.hpp"

#include "pnar/errors.hpp"
#include "pnar/power_iteration.hpp"
#include "pnar/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace pnar {

double Network::density() const noexcept {
    if (n_ < 2) return 0.0;
    return static_cast<double>(adjacency_.nonZeros()) / (static_cast<double>(n_) * (n_ - 1));
}

int Network::isolated_count() const noexcept {
    return static_cast<int>((degree_.array() == 0).count());
}

std::vector<Edge> Network::edges() const {
    std::vector<Edge> out;
    out.reserve(static_cast<std::size_t>(adjacency_.nonZeros()));
    for (int i = 0; i < adjacency_.outerSize(); ++i)
        for (SparseRowMatrix::InnerIterator it(adjacency_, i); it; ++it)
            out.emplace_back(i, static_cast<int>(it.col()));
    return out;
}

Network Network::permuted(std::span<const int> perm) const {
    if (static_cast<int>(perm.size()) != n_) throw DimensionError("permutation length differs from N");
    std::vector<int> inverse(n_, -1);
    for (int k = 0; k < n_; ++k) {
        if (perm[k] < 0 || perm[k] >= n_ || inverse[perm[k]] != -1)
            throw std::invalid_argument("not a permutation");
        inverse[perm[k]] = k;
    }
    std::vector<Edge> moved;
    for (auto [i, j] : edges()) moved.emplace_back(inverse[i], inverse[j]);
    Network out = build_network(moved, n_);
    if (!blocks_.empty()) {
        std::vector<int> labels(n_);
        for (int k = 0; k < n_; ++k) labels[k] = blocks_[perm[k]];
        out.blocks_ = std::move(labels);
    }
    return out;
}

Network build_network(std::span<const Edge> edges, int n) {
    if (n <= 0) throw std::invalid_argument("network needs at least one node");
    Network net;
    net.n_ = n;
    std::vector<Edge> kept;
    kept.reserve(edges.size());
    for (auto [i, j] : edges) {
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw std::out_of_range("edge (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") outside node range [0," + std::to_string(n) + ")");
        if (i == j) {
            ++net.dropped_self_loops_;
            continue;
        }
        kept.emplace_back(i, j);
    }
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());

    net.degree_ = Eigen::VectorXi::Zero(n);
    for (auto [i, j] : kept) ++net.degree_(i);

    std::vector<Eigen::Triplet<double>> a_trip, w_trip;
    a_trip.reserve(kept.size());
    w_trip.reserve(kept.size());
    for (auto [i, j] : kept) {
        a_trip.emplace_back(i, j, 1.0);
        w_trip.emplace_back(i, j, 1.0 / net.degree_(i));
    }
    net.adjacency_.resize(n, n);
    net.adjacency_.setFromTriplets(a_trip.begin(), a_trip.end());
    net.weights_.resize(n, n);
    net.weights_.setFromTriplets(w_trip.begin(), w_trip.end());
    net.adjacency_.makeCompressed();
    net.weights_.makeCompressed();
    return net;
}

Network with_block_labels(Network net, std::vector<int> labels) {
    if (static_cast<int>(labels.size()) != net.n_) throw DimensionError("label count differs from N");
    net.blocks_ = std::move(labels);
    return net;
}

namespace {

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
}

}  // namespace

Network gen_sbm(const SbmParams& params, std::uint64_t seed) {
    const int n = params.nodes;
    const int k = params.blocks;
    if (k < 1) throw std::invalid_argument("SBM needs at least one block");
    if (n < k) throw std::invalid_argument("SBM block count exceeds node count");
    const double p_in = params.p_in.value_or(std::pow(static_cast<double>(n), -0.3));
    const double p_out = params.p_out.value_or(1.0 / n);
    check_probability(p_in, "p_in");
    check_probability(p_out, "p_out");

    Rng rng(seed);
    std::uniform_int_distribution<int> block(0, k - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> labels(n);
    for (auto& b : labels) b = block(rng);

    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double p = labels[i] == labels[j] ? p_in : p_out;
            if (unif(rng) < p) edges.emplace_back(i, j);
        }
    Network net = with_block_labels(build_network(edges, n), std::move(labels));
    if (params.target_density) net = thin_to_density(net, *params.target_density, derive_seed(seed, {1}));
    return net;
}

Network gen_er(int nodes, std::optional<double> p, std::uint64_t seed) {
    if (nodes <= 0) throw std::invalid_argument("network needs at least one node");
    const double prob = p.value_or(std::pow(static_cast<double>(nodes), -0.3));
    check_probability(prob, "edge probability");
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Edge> edges;
    for (int i = 0; i < nodes; ++i)
        for (int j = 0; j < nodes; ++j)
            if (i != j && unif(rng) < prob) edges.emplace_back(i, j);
    return build_network(edges, nodes);
}

Network thin_to_density(const Network& net, double target_density, std::uint64_t seed) {
    check_probability(target_density, "target density");
    const int n = net.size();
    if (net.density() <= target_density) return net;
    const auto keep = static_cast<std::size_t>(
        std::floor(target_density * static_cast<double>(n) * (n - 1)));
    std::vector<Edge> edges = net.edges();
    Rng rng(seed);
    std::shuffle(edges.begin(), edges.end(), rng);
    edges.resize(std::min(keep, edges.size()));
    Network out = build_network(edges, n);
    if (!net.block_labels().empty()) out = with_block_labels(std::move(out), net.block_labels());
    return out;
}

bool strongly_connected(const Network& net) {
    const int n = net.size();
    if (n <= 1) return n == 1;
    auto reach_all = [n](const SparseRowMatrix& m) {
        std::vector<char> seen(n, 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        int count = 1;
        while (!q.empty()) {
            const int i = q.front();
            q.pop();
            for (SparseRowMatrix::InnerIterator it(m, i); it; ++it) {
                const auto j = static_cast<int>(it.col());
                if (!seen[j]) {
                    seen[j] = 1;
                    ++count;
                    q.push(j);
                }
            }
        }
        return count == n;
    };
    const SparseRowMatrix transposed = net.adjacency().transpose();
    return reach_all(net.adjacency()) && reach_all(transposed);
}

NetworkDiagnostics diagnose_network(const Network& net, const Eigen::MatrixXd* residual_covariance,
                                    const DiagnoseOptions& opt) {
    const int n = net.size();
    NetworkDiagnostics d;
    d.density = net.density();
    d.isolated_nodes = net.isolated_count();
    const PowerIterationOptions pit{opt.tol, opt.max_iter};

    const SparseRowMatrix& w = net.weights();
    const SparseRowMatrix wt = w.transpose();
    const SparseRowMatrix wstar = w + wt;
    const EigenEstimate lam = symmetric_spectral_radius(
        [&wstar](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out.noalias() = wstar * in; }, n, pit);
    d.lambda_max_wstar = lam.value;
    d.lambda_converged = lam.converged;

    d.reducible = d.isolated_nodes > 0 || !strongly_connected(net);
    if (!d.reducible) {
        // Lazy chain (I + W)/2 has the same stationary law and is aperiodic.
        Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / n);
        Eigen::VectorXd next(n);
        for (int it = 0; it < opt.max_iter; ++it) {
            next.noalias() = wt * pi;
            next = 0.5 * (next + pi);
            next /= next.sum();
            const double change = (next - pi).lpNorm<Eigen::Infinity>();
            pi.swap(next);
            if (change < opt.tol) {
                d.pi_converged = true;
                break;
            }
        }
        const double s2 = pi.squaredNorm();
        d.pi = std::move(pi);
        d.sum_pi_sq = s2;
        d.mu_pi = std::pow(static_cast<double>(n), opt.gamma) * s2;
    }

    if (residual_covariance != nullptr) {
        if (residual_covariance->rows() != n || residual_covariance->cols() != n)
            throw DimensionError("residual covariance must be N x N");
        const EigenEstimate sx = symmetric_spectral_radius(*residual_covariance, pit);
        d.lambda_max_sigma_xi = sx.value;
        if (n > 1) d.mu_xi = sx.value / std::pow(std::log(static_cast<double>(n)), opt.delta);
    }
    return d;
}

Network read_edge_list(std::istream& in) {
    std::vector<Edge> edges;
    std::optional<int> declared;
    int max_index = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }),
                   line.end());
        if (line.empty()) continue;
        if (line.rfind("N=", 0) == 0) {
            try {
                std::size_t used = 0;
                declared = std::stoi(line.substr(2), &used);
                if (used != line.size() - 2) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ParseError("edge list line " + std::to_string(lineno) + ": bad N header");
            }
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError("edge list line " + std::to_string(lineno) + ": expected i,j");
        try {
            std::size_t ui = 0, uj = 0;
            const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
            const int i = std::stoi(a, &ui);
            const int j = std::stoi(b, &uj);
            if (ui != a.size() || uj != b.size()) throw std::invalid_argument("trailing");
            edges.emplace_back(i, j);
            max_index = std::max({max_index, i, j});
        } catch (const std::exception&) {
            throw ParseError("edge list line " + std::to_string(lineno) + ": expected integer pair");
        }
    }
    const int n = declared.value_or(max_index + 1);
    if (n <= 0) throw ParseError("edge list declares no nodes");
    return build_network(edges, n);
}

Network read_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list " + path);
    return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const Network& net) {
    out << "N=" << net.size() << '\n';
    for (auto [i, j] : net.edges()) out << i << ',' << j << '\n';
}

}  // namespace pnar
