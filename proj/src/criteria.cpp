#include "pnar/criteria.hpp"

#include "pnar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pnar {

InformationCriteria information_criteria(double loglik, int m, double n_eff, double trace_term) {
    if (m < 1) throw std::invalid_argument("parameter count must be positive");
    if (!(n_eff > 0.0)) throw std::invalid_argument("effective sample size must be positive");
    InformationCriteria ic;
    ic.aic = -2.0 * loglik + 2.0 * m;
    ic.bic = -2.0 * loglik + m * std::log(n_eff);
    ic.qic = -2.0 * loglik + 2.0 * trace_term;
    ic.trace_term = trace_term;
    ic.n_eff = n_eff;
    return ic;
}

double qic_trace(const Eigen::MatrixXd& h, const Eigen::MatrixXd& b_hat) {
    if (h.rows() != h.cols() || b_hat.rows() != h.rows() || b_hat.cols() != h.cols())
        throw DimensionError("H and B must be square and of equal size");
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::numeric_limits<double>::quiet_NaN();
    // trace(B H^{-1}) = trace(H^{-1} B)
    return ldlt.solve(b_hat).trace();
}

InformationCriteria information_criteria(const FitResult& fit, SampleSize convention) {
    const double periods = convention == SampleSize::FullNT ? fit.periods : fit.periods - fit.start;
    const double n_eff = static_cast<double>(fit.nodes) * periods;
    InformationCriteria ic = information_criteria(fit.loglik, fit.num_params(), n_eff, qic_trace(fit.h, fit.b_hat));
    ic.from_converged_fit = fit.converged;
    return ic;
}

std::vector<RankedModel> rank_models(std::span<const FitResult> fits, SampleSize convention) {
    if (fits.empty()) throw std::invalid_argument("no fits to rank");
    std::vector<RankedModel> table;
    for (std::size_t k = 0; k < fits.size(); ++k) {
        const FitResult& f = fits[k];
        if (f.nodes != fits[0].nodes || f.periods != fits[0].periods)
            throw DimensionError("fits were made on panels of different shapes");
        if (f.start != fits[0].start)
            throw DimensionError("fits condition on different numbers of initial rows");
        RankedModel r;
        r.input_index = k;
        r.link = f.link;
        r.p = f.p;
        r.num_params = f.num_params();
        r.loglik = f.loglik;
        r.converged = f.converged;
        r.ic = information_criteria(f, convention);
        table.push_back(r);
    }
    auto key_less = [](double a, double b) {
        // NaN criteria sort last.
        if (std::isnan(a)) return false;
        if (std::isnan(b)) return true;
        return a < b;
    };
    std::stable_sort(table.begin(), table.end(), [&](const RankedModel& a, const RankedModel& b) {
        if (a.ic.qic != b.ic.qic) return key_less(a.ic.qic, b.ic.qic);
        if (a.num_params != b.num_params) return a.num_params < b.num_params;
        if (a.link != b.link) return a.link == Link::Linear;
        return a.input_index < b.input_index;
    });

    // Winners use the same tie-breaks, which the sorted order already encodes
    // for QIC; AIC and BIC scan in sorted order so earlier rows win ties.
    auto flag = [&](auto get, auto set) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < table.size(); ++k)
            if (key_less(get(table[k]), get(table[best]))) best = k;
        set(table[best]);
    };
    flag([](const RankedModel& r) { return r.ic.aic; }, [](RankedModel& r) { r.best_aic = true; });
    flag([](const RankedModel& r) { return r.ic.bic; }, [](RankedModel& r) { r.best_bic = true; });
    table.front().best_qic = true;
    return table;
}

void write_ranking_text(std::ostream& out, const std::vector<RankedModel>& table) {
    char line[256];
    std::snprintf(line, sizeof line, "%-8s %3s %3s %14s %14s %14s %14s %5s\n", "link", "p", "m", "loglik", "AIC",
                  "BIC", "QIC", "conv");
    out << line;
    for (const RankedModel& r : table) {
        auto cell = [](double v, bool best) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%13.3f%c", v, best ? '*' : ' ');
            return std::string(buf);
        };
        std::snprintf(line, sizeof line, "%-8s %3d %3d %14.3f %s %s %s %5s\n", link_name(r.link).c_str(), r.p,
                      r.num_params, r.loglik, cell(r.ic.aic, r.best_aic).c_str(), cell(r.ic.bic, r.best_bic).c_str(),
                      cell(r.ic.qic, r.best_qic).c_str(), r.converged ? "yes" : "no");
        out << line;
    }
}

}  // namespace pnar
