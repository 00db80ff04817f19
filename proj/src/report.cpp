#include "pnar/report.hpp"

#include <cmath>

namespace pnar {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
    return out;
}

json ic_json(const InformationCriteria& ic) {
    return {{"aic", number(ic.aic)}, {"bic", number(ic.bic)}, {"qic", number(ic.qic)}};
}

}  // namespace

json fit_report(const FitResult& fit, const InformationCriteria& ic) {
    json j;
    j["theta"] = vec(fit.theta);
    j["names"] = coefficient_names(fit.p);
    j["se"] = vec(fit.se);
    j["t"] = vec(fit.t_stats);
    j["p_values"] = vec(fit.p_values);
    j["loglik"] = number(fit.loglik);
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["gradient_norm"] = number(fit.gradient_norm);
    j["singular_hessian"] = fit.singular_hessian;
    j["ic"] = ic_json(ic);
    j["model"] = {{"link", link_name(fit.link)}, {"p", fit.p}};
    j["data"] = {{"N", fit.nodes}, {"T", fit.periods}};
    if (fit.gee) {
        j["gee"] = {{"wc_kind", fit.gee->wc_kind},
                    {"tau_hat", number(fit.gee->tau_hat)},
                    {"tau_method", fit.gee->tau_method},
                    {"tau_raw", number(fit.gee->tau_raw)},
                    {"tau_clipped", fit.gee->tau_clipped}};
    }
    return j;
}

json gee_block(const FitResult& fit) {
    json j;
    if (fit.gee) {
        j["wc_kind"] = fit.gee->wc_kind;
        j["tau_hat"] = number(fit.gee->tau_hat);
        j["tau_method"] = fit.gee->tau_method;
        j["tau_raw"] = number(fit.gee->tau_raw);
        j["tau_clipped"] = fit.gee->tau_clipped;
    }
    j["theta"] = vec(fit.theta);
    j["se"] = vec(fit.se);
    j["t"] = vec(fit.t_stats);
    j["p_values"] = vec(fit.p_values);
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["estimating_function_norm"] = number(fit.gradient_norm);
    return j;
}

json ranking_report(const std::vector<RankedModel>& table) {
    json rows = json::array();
    for (const RankedModel& r : table) {
        rows.push_back({{"link", link_name(r.link)},
                        {"p", r.p},
                        {"num_params", r.num_params},
                        {"loglik", number(r.loglik)},
                        {"converged", r.converged},
                        {"ic", ic_json(r.ic)},
                        {"winner", {{"aic", r.best_aic}, {"bic", r.best_bic}, {"qic", r.best_qic}}}});
    }
    return {{"models", rows}};
}

json copula_report(const CopulaSelection& sel) {
    json grid = json::array();
    json counts = json::object();
    for (std::size_t c = 0; c < sel.candidates.size(); ++c) {
        const std::string name = family_name(sel.candidates[c].family);
        grid.push_back({{"family", name}, {"values", sel.candidates[c].grid}});
        counts[name] = counts.value(name, 0) + sel.selection_counts[c];
    }
    json j;
    j["chosen_family"] = family_name(sel.chosen_family);
    j["rho_hat"] = number(sel.rho_hat);
    j["rho_se"] = number(sel.rho_se);
    j["rho_se_defined"] = sel.rho_se_defined;
    j["selection_counts"] = counts;
    j["grid"] = grid;
    j["B"] = sel.replications;
    j["skipped"] = sel.skipped;
    j["failed_simulations"] = sel.failed_simulations;
    j["theta"] = vec(sel.fit.theta);
    return j;
}

json diagnostics_report(const NetworkDiagnostics& d) {
    json j;
    j["lambda_max_wstar"] = number(d.lambda_max_wstar);
    j["lambda_converged"] = d.lambda_converged;
    j["reducible"] = d.reducible;
    j["density"] = number(d.density);
    j["isolated_nodes"] = d.isolated_nodes;
    if (d.pi) {
        j["pi"] = vec(*d.pi);
        j["pi_converged"] = d.pi_converged;
    }
    if (d.sum_pi_sq) j["sum_pi_sq"] = number(*d.sum_pi_sq);
    if (d.mu_pi) j["mu_pi"] = number(*d.mu_pi);
    if (d.lambda_max_sigma_xi) j["lambda_max_sigma_xi"] = number(*d.lambda_max_sigma_xi);
    if (d.mu_xi) j["mu_xi"] = number(*d.mu_xi);
    return j;
}

json profile_report(const std::vector<ProfileEntry>& profile) {
    json rows = json::array();
    for (const ProfileEntry& e : profile)
        rows.push_back({{"node", e.node}, {"distance", e.distance},
                        {"correlation", e.defined ? number(e.correlation) : json(nullptr)}});
    return rows;
}

}  // namespace pnar
