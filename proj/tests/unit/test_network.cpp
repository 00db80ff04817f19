#include <doctest.h>

#include "oracles.hpp"
#include "pnar/errors.hpp"
#include "pnar/network.hpp"
#include "pnar/power_iteration.hpp"
#include "pnar/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

using namespace pnar;

namespace {

void check_row_sums(const Network& net) {
    const Eigen::MatrixXd w = net.dense_weights();
    for (int i = 0; i < net.size(); ++i) {
        const double s = w.row(i).sum();
        if (net.out_degree()(i) > 0) CHECK(std::abs(s - 1.0) < 1e-12);
        else CHECK(s == 0.0);
        CHECK(w.row(i).minCoeff() >= 0.0);
        CHECK(w.row(i).maxCoeff() <= 1.0);
        CHECK(w(i, i) == 0.0);
    }
}

// Dense Perron vector of W^T normalised to sum one.
Eigen::VectorXd dense_stationary(const Eigen::MatrixXd& w) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(w.transpose());
    Eigen::Index best = 0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
        if (std::abs(es.eigenvalues()(k) - 1.0) < std::abs(es.eigenvalues()(best) - 1.0)) best = k;
    Eigen::VectorXd v = es.eigenvectors().col(best).real();
    return v / v.sum();
}

}  // namespace

TEST_CASE("two mutual edges give a swap matrix") {
    const std::vector<Edge> e{{0, 1}, {1, 0}};
    const Network net = build_network(e, 2);
    Eigen::MatrixXd expect(2, 2);
    expect << 0, 1, 1, 0;
    CHECK(net.dense_weights().isApprox(expect));
    CHECK(net.edge_count() == 2);
}

TEST_CASE("out-star splits weight and leaves isolated rows zero") {
    const std::vector<Edge> e{{0, 1}, {0, 2}};
    const Network net = build_network(e, 3);
    const Eigen::MatrixXd w = net.dense_weights();
    CHECK(w(0, 1) == 0.5);
    CHECK(w(0, 2) == 0.5);
    CHECK(w.row(1).sum() == 0.0);
    CHECK(w.row(2).sum() == 0.0);
    CHECK(net.isolated_count() == 2);
    check_row_sums(net);
}

TEST_CASE("self-loops are dropped and counted, duplicates collapse") {
    const std::vector<Edge> loop{{0, 0}};
    const Network one = build_network(loop, 1);
    CHECK(one.dense_weights()(0, 0) == 0.0);
    CHECK(one.dropped_self_loops() == 1);

    const std::vector<Edge> dup{{0, 1}, {0, 1}, {1, 1}, {1, 0}};
    const Network net = build_network(dup, 2);
    CHECK(net.edge_count() == 2);
    CHECK(net.dropped_self_loops() == 1);
}

TEST_CASE("build_network rejects bad input") {
    const std::vector<Edge> bad{{0, 3}};
    CHECK_THROWS_AS(build_network(bad, 3), std::out_of_range);
    const std::vector<Edge> neg{{-1, 0}};
    CHECK_THROWS_AS(build_network(neg, 3), std::out_of_range);
    CHECK_THROWS_AS(build_network(std::vector<Edge>{}, 0), std::invalid_argument);
}

TEST_CASE("gen_sbm is a pure function of parameters and seed") {
    SbmParams p;
    p.nodes = 60;
    const Network a = gen_sbm(p, 42), b = gen_sbm(p, 42), c = gen_sbm(p, 43);
    CHECK(a.dense_adjacency() == b.dense_adjacency());
    CHECK(a.block_labels() == b.block_labels());
    CHECK(a.dense_adjacency() != c.dense_adjacency());
    check_row_sums(a);
}

TEST_CASE("gen_sbm within-block edge frequency matches N^-0.3") {
    // Pooled within-block and between-block frequencies over many draws.
    SbmParams p;
    p.nodes = 100;
    const double p_in = std::pow(100.0, -0.3), p_out = 0.01;
    double in_edges = 0, in_pairs = 0, out_edges = 0, out_pairs = 0;
    for (int s = 0; s < 200; ++s) {
        const Network net = gen_sbm(p, derive_seed(7, {static_cast<std::uint64_t>(s)}));
        const auto& lab = net.block_labels();
        const Eigen::MatrixXd a = net.dense_adjacency();
        for (int i = 0; i < 100; ++i)
            for (int j = 0; j < 100; ++j) {
                if (i == j) continue;
                if (lab[i] == lab[j]) {
                    in_pairs += 1;
                    in_edges += a(i, j);
                } else {
                    out_pairs += 1;
                    out_edges += a(i, j);
                }
            }
    }
    const double f_in = in_edges / in_pairs, f_out = out_edges / out_pairs;
    CHECK(std::abs(f_in - p_in) < 3 * std::sqrt(p_in * (1 - p_in) / in_pairs));
    CHECK(std::abs(f_out - p_out) < 3 * std::sqrt(p_out * (1 - p_out) / out_pairs));
}

TEST_CASE("gen_sbm block labels are uniform") {
    SbmParams p;
    p.nodes = 5000;
    p.p_in = 0.0;
    p.p_out = 0.0;
    const Network net = gen_sbm(p, 3);
    std::vector<int> counts(5, 0);
    for (int l : net.block_labels()) ++counts[l];
    // Chi-square with 4 df; 99.9% quantile is 18.47.
    double stat = 0.0;
    for (int c : counts) stat += (c - 1000.0) * (c - 1000.0) / 1000.0;
    CHECK(stat < 18.47);
    CHECK(net.edge_count() == 0);
    CHECK(net.isolated_count() == 5000);
}

TEST_CASE("gen_sbm argument checks") {
    SbmParams p;
    p.nodes = 3;
    p.blocks = 4;
    CHECK_THROWS_AS(gen_sbm(p, 1), std::invalid_argument);
    p.blocks = 2;
    p.p_in = 1.5;
    CHECK_THROWS_AS(gen_sbm(p, 1), std::invalid_argument);
}

TEST_CASE("gen_er limits and density") {
    const Network full = gen_er(6, 1.0, 1);
    CHECK(full.edge_count() == 30);
    const Eigen::MatrixXd w = full.dense_weights();
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) CHECK(w(i, j) == doctest::Approx(i == j ? 0.0 : 0.2));
    CHECK(gen_er(6, 0.0, 1).edge_count() == 0);
    CHECK_THROWS_AS(gen_er(6, -0.1, 1), std::invalid_argument);

    const double p = std::pow(100.0, -0.3);
    double edges = 0;
    const int reps = 100;
    for (int s = 0; s < reps; ++s) edges += gen_er(100, std::nullopt, 1000 + s).edge_count();
    const double pairs = reps * 100.0 * 99.0;
    CHECK(std::abs(edges / pairs - p) < 3 * std::sqrt(p * (1 - p) / pairs));
}

TEST_CASE("thinning removes edges down to the target density") {
    const Network net = gen_er(80, 0.2, 5);
    const Network thin = thin_to_density(net, 0.05, 9);
    CHECK(thin.density() <= 0.05 + 1e-12);
    CHECK(thin.density() > 0.05 - 1.0 / (80 * 79));
    const Eigen::MatrixXd a = net.dense_adjacency(), b = thin.dense_adjacency();
    CHECK(((b.array() > 0) && (a.array() == 0)).count() == 0);
    check_row_sums(thin);
    CHECK(thin_to_density(thin, 0.5, 1).edge_count() == thin.edge_count());
}

TEST_CASE("diagnostics on the symmetric 2-cycle") {
    const std::vector<Edge> e{{0, 1}, {1, 0}};
    const NetworkDiagnostics d = diagnose_network(build_network(e, 2));
    REQUIRE(d.pi);
    CHECK((*d.pi)(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK((*d.pi)(1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(*d.sum_pi_sq == doctest::Approx(0.5));
    CHECK(d.lambda_max_wstar == doctest::Approx(2.0).epsilon(1e-10));
    CHECK_FALSE(d.reducible);
    CHECK(*d.mu_pi == doctest::Approx(std::sqrt(2.0) * 0.5));
}

TEST_CASE("empty graph is flagged reducible and pi is omitted") {
    const NetworkDiagnostics d = diagnose_network(build_network(std::vector<Edge>{}, 4));
    CHECK(d.reducible);
    CHECK_FALSE(d.pi.has_value());
    CHECK_FALSE(d.mu_pi.has_value());
}

TEST_CASE("one-way chain is reducible even without isolated rows") {
    const std::vector<Edge> e{{0, 1}, {1, 2}, {2, 1}};
    CHECK_FALSE(strongly_connected(build_network(e, 3)));
    CHECK(diagnose_network(build_network(e, 3)).reducible);
}

TEST_CASE("power-iteration diagnostics agree with dense eigensolvers") {
    for (int s = 0; s < 10; ++s) {
        const int n = 10 + 4 * s;
        const Network net = gen_er(n, 0.3, 100 + s);
        const Eigen::MatrixXd w = net.dense_weights();
        const Eigen::MatrixXd ws = w + w.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ws);
        const double dense = es.eigenvalues().cwiseAbs().maxCoeff();
        const NetworkDiagnostics d = diagnose_network(net);
        CHECK(std::abs(d.lambda_max_wstar - dense) < 1e-8);
        if (!d.reducible) {
            REQUIRE(d.pi);
            const Eigen::VectorXd& pi = *d.pi;
            CHECK((pi.transpose() * w - pi.transpose()).lpNorm<Eigen::Infinity>() < 1e-10);
            CHECK((pi - dense_stationary(w)).lpNorm<Eigen::Infinity>() < 1e-9);
            CHECK(*d.sum_pi_sq >= 1.0 / n - 1e-15);
            CHECK(*d.sum_pi_sq <= 1.0);
            CHECK(pi.minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("symmetric spectral radius handles +r/-r pairs") {
    // Bipartite adjacency has eigenvalues +-sqrt(2).
    Eigen::MatrixXd a(3, 3);
    a << 0, 1, 1, 1, 0, 0, 1, 0, 0;
    const EigenEstimate e = symmetric_spectral_radius(a);
    CHECK(e.converged);
    CHECK(e.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("residual covariance feeds mu_xi") {
    const Network net = gen_er(20, 0.4, 8);
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(20, 20) * 2.0;
    sigma(0, 1) = sigma(1, 0) = 1.0;
    const NetworkDiagnostics d = diagnose_network(net, &sigma);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    CHECK(*d.lambda_max_sigma_xi == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-9));
    CHECK(*d.mu_xi == doctest::Approx(3.0 / std::pow(std::log(20.0), 8.0)).epsilon(1e-9));
    Eigen::MatrixXd wrong = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(diagnose_network(net, &wrong), DimensionError);
}

TEST_CASE("mu_pi stays bounded across SBM sizes") {
    // sum pi^2 ~ 1/N for these graphs, so N^0.5 sum pi^2 should shrink, not grow.
    std::vector<double> avg;
    for (int n : {200, 300, 400}) {
        double acc = 0.0;
        int used = 0;
        for (int s = 0; s < 10; ++s) {
            SbmParams p;
            p.nodes = n;
            const NetworkDiagnostics d = diagnose_network(gen_sbm(p, derive_seed(11, {std::uint64_t(n), std::uint64_t(s)})));
            if (d.mu_pi) {
                acc += *d.mu_pi;
                ++used;
            }
        }
        if (used > 0) avg.push_back(acc / used);
    }
    for (double v : avg) CHECK(v < 1.0);
}

TEST_CASE("permutation relabels nodes consistently") {
    const Network net = gen_er(12, 0.3, 21);
    std::vector<int> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[0], perm[5]);
    const Network q = net.permuted(perm);
    const Eigen::MatrixXd w = net.dense_weights(), wq = q.dense_weights();
    for (int k = 0; k < 12; ++k)
        for (int l = 0; l < 12; ++l) CHECK(wq(k, l) == w(perm[k], perm[l]));
}

TEST_CASE("edge-list text round trip and parse errors") {
    const Network net = gen_er(15, 0.2, 4);
    std::stringstream ss;
    write_edge_list(ss, net);
    const Network back = read_edge_list(ss);
    CHECK(back.size() == 15);
    CHECK(back.dense_adjacency() == net.dense_adjacency());

    std::istringstream with_comments("# header\nN=4\n0,1 # edge\n\n2,3\n");
    const Network c = read_edge_list(with_comments);
    CHECK(c.size() == 4);
    CHECK(c.edge_count() == 2);

    std::istringstream implicit("0,1\n1,4\n");
    CHECK(read_edge_list(implicit).size() == 5);

    std::istringstream garbage("0;1\n");
    CHECK_THROWS_AS(read_edge_list(garbage), ParseError);
    std::istringstream out_of_range("N=2\n0,5\n");
    CHECK_THROWS(read_edge_list(out_of_range));
    CHECK_THROWS_AS(read_edge_list_file("/nonexistent/edges.txt"), std::runtime_error);
}
