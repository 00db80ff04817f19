#ifndef PNAR_CRITERIA_HPP
#define PNAR_CRITERIA_HPP

#include "pnar/qmle.hpp"

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace pnar {

enum class SampleSize { EffectiveNT, FullNT };

struct InformationCriteria {
    double aic = 0.0;
    double bic = 0.0;
    double qic = 0.0;
    double trace_term = 0.0;  ///< trace(B H^{-1})
    double n_eff = 0.0;
    bool from_converged_fit = true;
};

/// Raw form: -2l + 2m, -2l + m log(n_eff), -2l + 2 trace.
InformationCriteria information_criteria(double loglik, int m, double n_eff, double trace_term);

/// trace(B H^{-1}) via a symmetric solve; NaN when H is singular.
double qic_trace(const Eigen::MatrixXd& h, const Eigen::MatrixXd& b_hat);

/// n_eff is N (T-start) by default, N T with SampleSize::FullNT. Non-converged fits
/// still get criteria, with from_converged_fit = false.
InformationCriteria information_criteria(const FitResult& fit, SampleSize convention = SampleSize::EffectiveNT);

struct RankedModel {
    std::size_t input_index = 0;
    Link link = Link::Linear;
    int p = 1;
    int num_params = 0;
    double loglik = 0.0;
    bool converged = true;
    InformationCriteria ic;
    bool best_aic = false;
    bool best_bic = false;
    bool best_qic = false;
};

/// Sorted by QIC; ties broken by fewer parameters, linear before log-linear,
/// then input order. Throws DimensionError if the fits were made on panels of
/// different shapes, std::invalid_argument on an empty list.
std::vector<RankedModel> rank_models(std::span<const FitResult> fits,
                                     SampleSize convention = SampleSize::EffectiveNT);

/// Fixed-width table with one row per model and '*' marking winners.
void write_ranking_text(std::ostream& out, const std::vector<RankedModel>& table);

}  // namespace pnar

#endif  // PNAR_CRITERIA_HPP
