#ifndef PNAR_REPORT_HPP
#define PNAR_REPORT_HPP

#include "pnar/copula_boot.hpp"
#include "pnar/criteria.hpp"
#include "pnar/network.hpp"
#include "pnar/qmle.hpp"
#include "pnar/simulate.hpp"

#include <json.hpp>

#include <vector>

namespace pnar {

/// {theta, se, t, p_values, loglik, converged, iterations, ic, model, data}
/// plus "gee" when the fit came from gee_fit. Non-finite numbers become null.
nlohmann::json fit_report(const FitResult& fit, const InformationCriteria& ic);
/// GEE estimates with the working-correlation settings used.
nlohmann::json gee_block(const FitResult& gee_fit);
nlohmann::json ranking_report(const std::vector<RankedModel>& table);
nlohmann::json copula_report(const CopulaSelection& sel);
nlohmann::json diagnostics_report(const NetworkDiagnostics& diag);
nlohmann::json profile_report(const std::vector<ProfileEntry>& profile);

}  // namespace pnar

#endif  // PNAR_REPORT_HPP
