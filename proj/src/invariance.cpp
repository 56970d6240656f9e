#include "csync/invariance.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace csync {

const PairBalance* InvarianceReport::worst_pair() const {
    if (per_pair_balance.empty()) return nullptr;
    return &*std::max_element(per_pair_balance.begin(), per_pair_balance.end(),
                              [](const PairBalance& a, const PairBalance& b) {
                                  return std::fabs(a.residual) < std::fabs(b.residual);
                              });
}

nlohmann::json InvarianceReport::to_json() const {
    nlohmann::json j;
    j["c1_residual"] = c1_residual;
    j["c2_residual"] = c2_residual;
    j["c1_satisfied"] = c1_satisfied;
    j["c2_satisfied"] = c2_satisfied;
    j["tolerance"] = tolerance;
    if (const PairBalance* w = worst_pair()) {
        j["worst_pair"] = {{"i", w->i + 1},
                           {"j", w->j + 1},
                           {"foreign_cluster", w->foreign_cluster + 1},
                           {"residual", w->residual}};
    }
    return j;
}

InvarianceReport check_c1(const Vector& omega, const WeightedNetwork& net,
                          const Partition& part, double tol) {
    if (tol <= 0.0) throw ValidationError("tolerance must be positive");
    if (omega.size() != net.n)
        throw ValidationError("frequency vector length does not match node count");
    Matrix B = spanning_tree_incidence(net, part);
    InvarianceReport rep;
    rep.tolerance = tol;
    rep.c1_residual = (B.transpose() * omega).norm();
    rep.c1_satisfied = rep.c1_residual < tol;
    return rep;
}

std::vector<PairBalance> row_balance_residuals(const WeightedNetwork& net,
                                               const Partition& part) {
    part.validate(net.n);
    std::vector<PairBalance> table;
    const int m = part.num_clusters();
    for (int z = 0; z < m; ++z) {
        const auto& pz = part.clusters[z];
        for (int l = 0; l < m; ++l) {
            if (l == z) continue;
            for (std::size_t a = 0; a < pz.size(); ++a) {
                for (std::size_t b = a + 1; b < pz.size(); ++b) {
                    double r = 0.0;
                    for (int k : part.clusters[l])
                        r += net.adjacency(pz[a], k) - net.adjacency(pz[b], k);
                    table.push_back({pz[a], pz[b], l, r});
                }
            }
        }
    }
    return table;
}

InvarianceReport check_c2(const WeightedNetwork& net, const Partition& part, double tol) {
    if (tol <= 0.0) throw ValidationError("tolerance must be positive");
    CharacteristicMatrices mats = characteristic_matrices(net, part);
    InvarianceReport rep;
    rep.tolerance = tol;
    rep.c2_residual = (mats.Vbar.transpose() * mats.A_bar * mats.V).norm();
    rep.c2_satisfied = rep.c2_residual < tol;
    rep.per_pair_balance = row_balance_residuals(net, part);
    return rep;
}

} // namespace csync
