#ifndef PNAR_SIMULATE_HPP
#define PNAR_SIMULATE_HPP

#include "pnar/copula.hpp"
#include "pnar/model.hpp"
#include "pnar/network.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace pnar {

using CountMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

struct PanelMeta {
    std::string spec_hash;
    std::string copula;
    std::uint64_t seed = 0;
    int burn_in = 0;
    long saturated = 0;  ///< copula draws that hit the truncation K
};

/// T x N count panel (row t is Y_t), optionally with the intensity path that
/// generated it.
struct PanelData {
    CountMatrix counts;
    std::optional<Eigen::MatrixXd> intensity;
    PanelMeta meta;

    int periods() const noexcept { return static_cast<int>(counts.rows()); }
    int nodes() const noexcept { return static_cast<int>(counts.cols()); }
    Eigen::VectorXi row(int t) const { return counts.row(t).transpose(); }
};

struct SimulateOptions {
    int periods = 100;
    int burn_in = 500;
    std::uint64_t seed = 0;
    /// Starting intensity; defaults to the stationary mean (linear) or
    /// exp(beta0 / (1 - sum|beta|)) clipped to [1e-6, 1e6] (log-linear).
    std::optional<Eigen::VectorXd> init;
    bool allow_unstable = false;
    bool keep_intensity = true;
    /// Fraction of node-steps allowed to saturate at K before the run fails.
    double max_saturation_fraction = 0.01;
};

/// Hash of (link, p, theta) used to tag simulated panels.
std::string spec_hash(const PnarSpec& spec);

/// Runs the copula-Poisson recursion for burn_in + periods steps and keeps the
/// last `periods`. Throws std::domain_error for specs failing the coefficient
/// sum condition unless allow_unstable is set.
PanelData simulate(const PnarSpec& spec, const Network& net, const CopulaSpec& copula,
                   const SimulateOptions& opt);

/// Time-aligned re-simulation: the first p rows of the result are
/// `initial_lags` (oldest first) and the remaining rows are generated from
/// them without burn-in, for a total of `periods` rows.
PanelData simulate_from_lags(const PnarSpec& spec, const Network& net, const CopulaSpec& copula,
                             const CountMatrix& initial_lags, int periods, Rng& rng);

/// Fitted conditional intensities lambda_t(spec) for t = p..T-1 as a
/// (T-p) x N matrix.
Eigen::MatrixXd fitted_intensity(const PanelData& panel, const PnarSpec& spec, const Network& net);

/// T_eff^{-1} sum_t |xi_t xi_t^T| (elementwise absolute) with
/// xi_t = Y_t - lambda_t(spec).
Eigen::MatrixXd empirical_noise_covariance(const PanelData& panel, const PnarSpec& spec, const Network& net);

struct ProfileEntry {
    int node = 0;
    int distance = 0;
    double correlation = 0.0;
    bool defined = true;  ///< false when either series is constant
};

/// Sample correlations corr(Y_anchor, Y_j), j != anchor, ordered by |j - anchor|
/// then by j.
std::vector<ProfileEntry> correlation_decay_profile(const PanelData& panel, int anchor);

/// Counts CSV: header "t,node_0,...,node_{N-1}", one row per step.
void write_counts_csv(std::ostream& out, const CountMatrix& counts);
/// Intensity CSV with the same layout, values at 17 significant digits.
void write_intensity_csv(std::ostream& out, const Eigen::MatrixXd& intensity);
/// Throws ParseError on malformed content.
CountMatrix read_counts_csv(std::istream& in);
CountMatrix read_counts_csv_file(const std::string& path);

}  // namespace pnar

#endif  // PNAR_SIMULATE_HPP
