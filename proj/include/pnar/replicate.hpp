#ifndef PNAR_REPLICATE_HPP
#define PNAR_REPLICATE_HPP

#include "pnar/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <type_traits>
#include <vector>

namespace pnar {

/// Runs body(index, rng) for index = 0..count-1, each with its own stream
/// derived from (master, "replication", index). Results are stored by index,
/// so the output does not depend on evaluation order.
template <class Body>
auto replicate(int count, std::uint64_t master, Body&& body) {
    using Result = std::invoke_result_t<Body&, int, Rng&>;
    std::vector<Result> out;
    out.reserve(count);
    for (int s = 0; s < count; ++s) {
        Rng rng = make_rng(master, "replication", static_cast<std::uint64_t>(s));
        out.push_back(body(s, rng));
    }
    return out;
}

/// Column means and sample standard deviations of stacked replicate vectors.
struct ColumnSummary {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
    int count = 0;
};

inline ColumnSummary summarize_columns(const std::vector<Eigen::VectorXd>& rows) {
    ColumnSummary s;
    s.count = static_cast<int>(rows.size());
    if (rows.empty()) return s;
    const Eigen::Index m = rows.front().size();
    s.mean = Eigen::VectorXd::Zero(m);
    for (const auto& r : rows) s.mean += r;
    s.mean /= static_cast<double>(rows.size());
    s.sd = Eigen::VectorXd::Zero(m);
    if (rows.size() > 1) {
        for (const auto& r : rows) s.sd += (r - s.mean).array().square().matrix();
        s.sd = (s.sd / static_cast<double>(rows.size() - 1)).cwiseSqrt();
    } else {
        s.sd.setConstant(std::nan(""));
    }
    return s;
}

}  // namespace pnar

#endif  // PNAR_REPLICATE_HPP
