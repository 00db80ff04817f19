#include "pnar/copula_boot.hpp"

#include "pnar/errors.hpp"
#include "pnar/rng.hpp"
#include "pnar/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pnar {

double wmae(const CountMatrix& observed, const CountMatrix& simulated) {
    if (observed.rows() != simulated.rows() || observed.cols() != simulated.cols())
        throw DimensionError("observed and simulated panels differ in shape");
    const double denom = observed.cast<double>().sum();
    if (!(denom > 0.0)) throw std::domain_error("observed panel is all zero");
    return (observed - simulated).cwiseAbs().cast<double>().sum() / denom;
}

std::vector<double> linspace(double a, double b, int n) {
    if (n < 1) throw std::invalid_argument("grid needs at least one point");
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = a;
        return out;
    }
    for (int k = 0; k < n; ++k) out[k] = a + (b - a) * k / (n - 1);
    return out;
}

std::vector<CopulaCandidate> default_copula_grids() {
    return {{CopulaFamily::GaussianAR1, linspace(0.1, 0.9, 17)}, {CopulaFamily::Clayton, linspace(0.5, 8.0, 17)}};
}

std::vector<CopulaCandidate> parse_copula_grids(const std::string& text) {
    std::vector<CopulaCandidate> out;
    std::stringstream items(text);
    std::string item;
    while (std::getline(items, item, ',')) {
        std::vector<std::string> parts;
        std::stringstream ps(item);
        std::string part;
        while (std::getline(ps, part, ':')) parts.push_back(part);
        if (parts.size() != 2 && parts.size() != 4) throw ParseError("bad grid item '" + item + "'");
        CopulaCandidate c;
        if (parts[0] == "gauss" || parts[0] == "gaussian") c.family = CopulaFamily::GaussianAR1;
        else if (parts[0] == "clayton") c.family = CopulaFamily::Clayton;
        else if (parts[0] == "indep") c.family = CopulaFamily::Independence;
        else throw ParseError("unknown copula family '" + parts[0] + "'");
        try {
            if (parts.size() == 2) {
                c.grid = {std::stod(parts[1])};
            } else {
                const int n = std::stoi(parts[3]);
                if (n < 1) throw ParseError("grid count must be positive in '" + item + "'");
                c.grid = linspace(std::stod(parts[1]), std::stod(parts[2]), n);
            }
        } catch (const std::logic_error&) {
            throw ParseError("bad number in grid item '" + item + "'");
        }
        for (double v : c.grid) CopulaSpec{c.family, v, 1000}.validate();
        out.push_back(std::move(c));
    }
    if (out.empty()) throw ParseError("empty grid specification");
    return out;
}

CopulaSelection bootstrap_copula_select(const PanelData& panel, const Network& net, Link link, int p,
                                        const std::vector<CopulaCandidate>& candidates,
                                        const BootstrapOptions& opt) {
    if (candidates.empty()) throw std::invalid_argument("no copula candidates");
    for (const auto& c : candidates)
        if (c.grid.empty()) throw std::invalid_argument("empty parameter grid for " + family_name(c.family));
    if (opt.replications < 1) throw std::invalid_argument("replications must be >= 1");
    if (panel.nodes() != net.size()) throw DimensionError("panel width differs from network size");

    CopulaSelection sel;
    sel.candidates = candidates;
    sel.replications = opt.replications;
    sel.selection_counts.assign(candidates.size(), 0);

    const int n = panel.nodes();
    sel.node_order.resize(n);
    std::iota(sel.node_order.begin(), sel.node_order.end(), 0);
    CountMatrix obs = panel.counts;
    Network work = net;
    if (opt.order_by_variance) {
        const Eigen::MatrixXd y = panel.counts.cast<double>();
        const Eigen::RowVectorXd mean = y.colwise().mean();
        const Eigen::RowVectorXd var = (y.rowwise() - mean).colwise().squaredNorm();
        std::stable_sort(sel.node_order.begin(), sel.node_order.end(),
                         [&](int a, int b) { return var(a) > var(b); });
        for (int k = 0; k < n; ++k) obs.col(k) = panel.counts.col(sel.node_order[k]);
        work = net.permuted(sel.node_order);
    }

    sel.fit = fit(build_design(obs, work, link, p), opt.fit);
    const PnarSpec spec = sel.fit.spec();
    const CountMatrix initial = obs.topRows(p);

    for (int b = 0; b < opt.replications; ++b) {
        ReplicationRecord rec;
        rec.replication = b;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            for (std::size_t g = 0; g < candidates[c].grid.size(); ++g) {
                const CopulaSpec cop{candidates[c].family, candidates[c].grid[g], opt.truncation};
                Rng rng = make_rng(opt.seed, {static_cast<std::uint64_t>(b), c, g});
                try {
                    const PanelData sim = simulate_from_lags(spec, work, cop, initial, panel.periods(), rng);
                    const double loss = wmae(obs, sim.counts);
                    // Strict '<' keeps the first candidate/grid point on ties.
                    if (loss < best) {
                        best = loss;
                        rec.candidate = static_cast<int>(c);
                        rec.param = cop.param;
                        rec.wmae = loss;
                        rec.ok = true;
                    }
                } catch (const NumericalError&) {
                    ++rec.failed_simulations;
                } catch (const std::domain_error&) {
                    ++rec.failed_simulations;
                }
            }
        }
        sel.failed_simulations += rec.failed_simulations;
        if (rec.ok) ++sel.selection_counts[rec.candidate];
        else ++sel.skipped;
        sel.records.push_back(rec);
    }

    const auto it = std::max_element(sel.selection_counts.begin(), sel.selection_counts.end());
    if (*it == 0) throw std::runtime_error("no replication produced a usable simulation");
    sel.chosen = static_cast<int>(it - sel.selection_counts.begin());
    sel.chosen_family = candidates[sel.chosen].family;

    std::vector<double> wins;
    for (const auto& rec : sel.records)
        if (rec.ok && rec.candidate == sel.chosen) wins.push_back(rec.param);
    const double mean = std::accumulate(wins.begin(), wins.end(), 0.0) / wins.size();
    sel.rho_hat = mean;
    if (wins.size() >= 2) {
        double ss = 0.0;
        for (double v : wins) ss += (v - mean) * (v - mean);
        sel.rho_se = std::sqrt(ss / (wins.size() - 1));
        sel.rho_se_defined = true;
    } else {
        sel.rho_se = std::numeric_limits<double>::quiet_NaN();
    }
    return sel;
}

}  // namespace pnar
