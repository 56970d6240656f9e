#pragma once

#include "csync/netmodel.hpp"

#include <nlohmann/json_fwd.hpp>

namespace csync {

/// One row-balance residual: sum_{k in P_l} (a_ik - a_jk) for i, j in the
/// same cluster and a foreign cluster P_l.
struct PairBalance {
    int i = 0;
    int j = 0;
    int foreign_cluster = 0; // l, 0-based
    double residual = 0.0;
};

struct InvarianceReport {
    double c1_residual = 0.0; // ||B_span^T omega||, rad/s
    double c2_residual = 0.0; // ||Vbar^T A_bar V||_F
    bool c1_satisfied = false;
    bool c2_satisfied = false;
    double tolerance = 0.0;
    std::vector<PairBalance> per_pair_balance;

    /// Pair with the largest |residual|, or nullptr when the table is empty.
    const PairBalance* worst_pair() const;
    nlohmann::json to_json() const;
};

constexpr double kDefaultInvarianceTol = 1e-8;

InvarianceReport check_c1(const Vector& omega, const WeightedNetwork& net,
                          const Partition& part, double tol = kDefaultInvarianceTol);

InvarianceReport check_c2(const WeightedNetwork& net, const Partition& part,
                          double tol = kDefaultInvarianceTol);

std::vector<PairBalance> row_balance_residuals(const WeightedNetwork& net,
                                               const Partition& part);

} // namespace csync
