#include "pnar/simulate.hpp"

#include "pnar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pnar {

std::string spec_hash(const PnarSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    os << link_name(spec.link) << '|' << spec.p;
    const Eigen::VectorXd th = spec.theta();
    for (Eigen::Index i = 0; i < th.size(); ++i) os << '|' << th(i);
    const std::uint64_t h = stream_tag(os.str());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

Eigen::VectorXd default_init(const PnarSpec& spec, int n) {
    if (spec.link == Link::Linear) {
        const double s = spec.beta1.sum() + spec.beta2.sum();
        const double mu = s < 1.0 ? spec.beta0 / (1.0 - s) : spec.beta0;
        return Eigen::VectorXd::Constant(n, mu);
    }
    const double s = spec.beta1.cwiseAbs().sum() + spec.beta2.cwiseAbs().sum();
    const double nu = s < 1.0 ? spec.beta0 / (1.0 - s) : spec.beta0;
    return Eigen::VectorXd::Constant(n, std::clamp(std::exp(nu), 1e-6, 1e6));
}

/// Intensity of the next step from lags ordered most recent first.
void next_intensity(const PnarSpec& spec, const Network& net, const std::deque<Eigen::VectorXd>& lag_regressors,
                    Eigen::VectorXd& out) {
    out.setConstant(spec.beta0);
    for (int h = 0; h < spec.p; ++h) {
        out.noalias() += spec.beta1(h) * (net.weights() * lag_regressors[h]);
        out.noalias() += spec.beta2(h) * lag_regressors[h];
    }
    if (spec.link == Link::LogLinear) out = out.array().exp();
    if (!out.allFinite()) throw NumericalError("intensity overflow during simulation");
}

Eigen::VectorXd regressor(const PnarSpec& spec, const Eigen::VectorXi& y) {
    Eigen::VectorXd x = y.cast<double>();
    if (spec.link == Link::LogLinear) x = x.array().log1p();
    return x;
}

}  // namespace

PanelData simulate(const PnarSpec& spec, const Network& net, const CopulaSpec& copula, const SimulateOptions& opt) {
    spec.validate();
    copula.validate();
    if (opt.periods < 1) throw std::invalid_argument("simulation length T must be >= 1");
    if (opt.burn_in < 0) throw std::invalid_argument("burn-in must be >= 0");
    const int n = net.size();
    if (!opt.allow_unstable && !check_stability(spec, net).sum_stable)
        throw std::domain_error("unstable specification: coefficient sum condition violated");

    Eigen::VectorXd lambda = opt.init ? *opt.init : default_init(spec, n);
    if (lambda.size() != n) throw DimensionError("initial intensity length differs from N");
    if (!(lambda.array() > 0.0).all()) throw NumericalError("initial intensity must be positive");

    Rng rng(opt.seed);
    long saturated = 0;
    std::deque<Eigen::VectorXd> lags;
    for (int h = 0; h < spec.p; ++h) {
        CountDraw d = draw_counts(copula, lambda, rng);
        saturated += d.saturated;
        lags.push_front(regressor(spec, d.counts));
    }

    PanelData panel;
    panel.counts.resize(opt.periods, n);
    if (opt.keep_intensity) panel.intensity = Eigen::MatrixXd(opt.periods, n);
    const int total = opt.burn_in + opt.periods;
    for (int s = 0; s < total; ++s) {
        next_intensity(spec, net, lags, lambda);
        CountDraw d = draw_counts(copula, lambda, rng);
        saturated += d.saturated;
        const int t = s - opt.burn_in;
        if (t >= 0) {
            panel.counts.row(t) = d.counts.transpose();
            if (panel.intensity) panel.intensity->row(t) = lambda.transpose();
        }
        lags.pop_back();
        lags.push_front(regressor(spec, d.counts));
    }
    const double steps = static_cast<double>(total + spec.p) * n;
    if (saturated > opt.max_saturation_fraction * steps)
        throw NumericalError("copula truncation K saturated in " + std::to_string(saturated) +
                             " node-steps; increase K");

    panel.meta = {spec_hash(spec), copula.to_string(), opt.seed, opt.burn_in, saturated};
    return panel;
}

PanelData simulate_from_lags(const PnarSpec& spec, const Network& net, const CopulaSpec& copula,
                             const CountMatrix& initial_lags, int periods, Rng& rng) {
    spec.validate();
    const int n = net.size();
    if (initial_lags.rows() != spec.p || initial_lags.cols() != n)
        throw DimensionError("initial lags must be p x N");
    if (periods < spec.p) throw std::invalid_argument("periods must cover the initial lags");

    PanelData panel;
    panel.counts.resize(periods, n);
    panel.counts.topRows(spec.p) = initial_lags;
    panel.intensity = Eigen::MatrixXd::Constant(periods, n, std::nan(""));
    std::deque<Eigen::VectorXd> lags;
    for (int h = 0; h < spec.p; ++h) lags.push_front(regressor(spec, initial_lags.row(h).transpose()));

    Eigen::VectorXd lambda(n);
    long saturated = 0;
    for (int t = spec.p; t < periods; ++t) {
        next_intensity(spec, net, lags, lambda);
        CountDraw d = draw_counts(copula, lambda, rng);
        saturated += d.saturated;
        panel.counts.row(t) = d.counts.transpose();
        panel.intensity->row(t) = lambda.transpose();
        lags.pop_back();
        lags.push_front(regressor(spec, d.counts));
    }
    panel.meta = {spec_hash(spec), copula.to_string(), 0, 0, saturated};
    return panel;
}

Eigen::MatrixXd fitted_intensity(const PanelData& panel, const PnarSpec& spec, const Network& net) {
    const int n = net.size();
    if (panel.nodes() != n) throw DimensionError("panel width differs from network size");
    const int t_eff = panel.periods() - spec.p;
    if (t_eff < 1) throw DimensionError("panel needs at least p+1 rows");
    Eigen::MatrixXd out(t_eff, n);
    std::vector<Eigen::VectorXi> lags(spec.p);
    for (int t = spec.p; t < panel.periods(); ++t) {
        for (int h = 0; h < spec.p; ++h) lags[h] = panel.row(t - 1 - h);
        out.row(t - spec.p) = intensity(spec, net, lags).transpose();
    }
    return out;
}

Eigen::MatrixXd empirical_noise_covariance(const PanelData& panel, const PnarSpec& spec, const Network& net) {
    const Eigen::MatrixXd lambda = fitted_intensity(panel, spec, net);
    const int n = net.size();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index r = 0; r < lambda.rows(); ++r) {
        const Eigen::VectorXd xi =
            panel.counts.row(r + spec.p).transpose().cast<double>() - lambda.row(r).transpose();
        acc.noalias() += (xi * xi.transpose()).cwiseAbs();
    }
    return acc / static_cast<double>(lambda.rows());
}

std::vector<ProfileEntry> correlation_decay_profile(const PanelData& panel, int anchor) {
    const int n = panel.nodes();
    if (anchor < 0 || anchor >= n) throw std::out_of_range("anchor node out of range");
    if (panel.periods() < 30) throw std::invalid_argument("correlation profile needs T >= 30");

    const Eigen::MatrixXd y = panel.counts.cast<double>();
    const Eigen::RowVectorXd mean = y.colwise().mean();
    const Eigen::MatrixXd centered = y.rowwise() - mean;
    const Eigen::VectorXd ss = centered.colwise().squaredNorm();

    std::vector<ProfileEntry> out;
    out.reserve(static_cast<std::size_t>(n - 1));
    for (int j = 0; j < n; ++j) {
        if (j == anchor) continue;
        ProfileEntry e;
        e.node = j;
        e.distance = std::abs(j - anchor);
        if (ss(anchor) == 0.0 || ss(j) == 0.0) {
            e.defined = false;
            e.correlation = std::nan("");
        } else {
            e.correlation = centered.col(anchor).dot(centered.col(j)) / std::sqrt(ss(anchor) * ss(j));
        }
        out.push_back(e);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ProfileEntry& a, const ProfileEntry& b) { return a.distance < b.distance; });
    return out;
}

void write_counts_csv(std::ostream& out, const CountMatrix& counts) {
    out << 't';
    for (Eigen::Index j = 0; j < counts.cols(); ++j) out << ",node_" << j;
    out << '\n';
    for (Eigen::Index t = 0; t < counts.rows(); ++t) {
        out << t;
        for (Eigen::Index j = 0; j < counts.cols(); ++j) out << ',' << counts(t, j);
        out << '\n';
    }
}

void write_intensity_csv(std::ostream& out, const Eigen::MatrixXd& intensity) {
    out << 't';
    for (Eigen::Index j = 0; j < intensity.cols(); ++j) out << ",node_" << j;
    out << '\n';
    char buf[40];
    for (Eigen::Index t = 0; t < intensity.rows(); ++t) {
        out << t;
        for (Eigen::Index j = 0; j < intensity.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", intensity(t, j));
            out << ',' << buf;
        }
        out << '\n';
    }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

CountMatrix read_counts_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("counts CSV is empty");
    const auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "t") throw ParseError("counts CSV header must start with 't,node_0'");
    const std::size_t n = header.size() - 1;
    for (std::size_t j = 0; j < n; ++j)
        if (header[j + 1] != "node_" + std::to_string(j))
            throw ParseError("counts CSV header column " + std::to_string(j + 1) + " should be node_" +
                             std::to_string(j));

    std::vector<std::vector<int>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv(line);
        if (cells.size() != n + 1)
            throw ParseError("counts CSV line " + std::to_string(lineno) + ": expected " + std::to_string(n + 1) +
                             " columns");
        std::vector<int> row(n);
        for (std::size_t j = 0; j < n; ++j) {
            try {
                std::size_t used = 0;
                const long v = std::stol(cells[j + 1], &used);
                if (used != cells[j + 1].size() || v < 0 || v > std::numeric_limits<int>::max())
                    throw std::invalid_argument("bad");
                row[j] = static_cast<int>(v);
            } catch (const std::exception&) {
                throw ParseError("counts CSV line " + std::to_string(lineno) + ": '" + cells[j + 1] +
                                 "' is not a nonnegative integer");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("counts CSV has no data rows");
    CountMatrix counts(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t j = 0; j < n; ++j) counts(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
    return counts;
}

CountMatrix read_counts_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open counts CSV " + path);
    return read_counts_csv(in);
}

}  // namespace pnar
