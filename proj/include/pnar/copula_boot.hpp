#ifndef PNAR_COPULA_BOOT_HPP
#define PNAR_COPULA_BOOT_HPP

#include "pnar/copula.hpp"
#include "pnar/qmle.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pnar {

/// sum |Y_obs - Y_sim| / sum Y_obs. Throws DimensionError on shape mismatch and
/// std::domain_error when the observed panel is all zero.
double wmae(const CountMatrix& observed, const CountMatrix& simulated);

struct CopulaCandidate {
    CopulaFamily family = CopulaFamily::GaussianAR1;
    std::vector<double> grid;
};

/// n equally spaced points from a to b inclusive.
std::vector<double> linspace(double a, double b, int n);

/// Gaussian AR-1 on 0.1..0.9 and Clayton on 0.5..8, 17 points each.
std::vector<CopulaCandidate> default_copula_grids();

/// Comma-separated "family:lo:hi:count" items, e.g. "gauss:0.1:0.9:17,clayton:0.5:8:17";
/// a single value may be given as "family:value". Throws ParseError.
std::vector<CopulaCandidate> parse_copula_grids(const std::string& text);

struct BootstrapOptions {
    int replications = 100;
    std::uint64_t seed = 0;
    int truncation = 1000;
    /// Reorder nodes by decreasing sample variance before fitting, so that the
    /// AR-1 copula couples nodes of similar scale.
    bool order_by_variance = false;
    FitOptions fit;
};

struct ReplicationRecord {
    int replication = 0;
    bool ok = false;
    int candidate = -1;  ///< index into the candidate list
    double param = 0.0;
    double wmae = 0.0;
    int failed_simulations = 0;
};

struct CopulaSelection {
    FitResult fit;
    std::vector<CopulaCandidate> candidates;
    int replications = 0;
    int chosen = -1;                 ///< modal candidate index, -1 if none won
    CopulaFamily chosen_family = CopulaFamily::Independence;
    double rho_hat = 0.0;
    double rho_se = 0.0;             ///< NaN when fewer than two winning replications
    bool rho_se_defined = false;
    std::vector<int> selection_counts;  ///< per candidate
    int skipped = 0;
    long failed_simulations = 0;
    std::vector<int> node_order;        ///< permutation applied before fitting
    std::vector<ReplicationRecord> records;
};

/**
 * Parametric bootstrap over copula families. theta is fitted once; every
 * replication re-simulates one panel per (candidate, grid point) from the
 * observed first p rows with theta fixed and records the WMAE minimiser. The
 * modal family wins and its parameter is averaged over the replications it
 * won. Each simulation uses its own stream derived from
 * (seed, replication, candidate, grid index).
 */
CopulaSelection bootstrap_copula_select(const PanelData& panel, const Network& net, Link link, int p,
                                        const std::vector<CopulaCandidate>& candidates,
                                        const BootstrapOptions& opt);

}  // namespace pnar

#endif  // PNAR_COPULA_BOOT_HPP
