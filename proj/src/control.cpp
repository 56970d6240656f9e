#include "csync/control.hpp"

#include "csync/invariance.hpp"

#include <algorithm>
#include <random>

namespace csync {

namespace {

std::vector<int> cluster_index_of(const Partition& part, int n) {
    std::vector<int> of(n, -1);
    for (int k = 0; k < part.num_clusters(); ++k)
        for (int i : part.clusters[k]) of[i] = k;
    return of;
}

} // namespace

void EditMask::validate(const Partition& part) const {
    const int n = static_cast<int>(H.rows());
    auto of = cluster_index_of(part, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double h = H(i, j);
            if (h != 0.0 && h != 1.0)
                throw ValidationError("mask entries must be 0 or 1");
            if (h != 0.0 && (i == j || of[i] == of[j]))
                throw ValidationError("mask allows an intra-cluster or diagonal entry (" +
                                      std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")");
        }
    }
}

EditMask full_inter_cluster_mask(const Partition& part, int n) {
    auto of = cluster_index_of(part, n);
    EditMask mask;
    mask.H = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (of[i] != of[j]) mask.H(i, j) = 1.0;
    return mask;
}

EditMask edge_support_mask(const WeightedNetwork& net, const Partition& part) {
    auto of = cluster_index_of(part, net.n);
    EditMask mask;
    mask.H = Matrix::Zero(net.n, net.n);
    for (int i = 0; i < net.n; ++i)
        for (int j = 0; j < net.n; ++j)
            if (of[i] != of[j] && net.adjacency(i, j) != 0.0) mask.H(i, j) = 1.0;
    return mask;
}

FeasibilityReport feasibility_check(const WeightedNetwork& net, const EditMask& mask,
                                    const Partition& part) {
    mask.validate(part);
    Matrix quotient = quotient_graph(net, part);
    FeasibilityReport rep;
    for (int z = 0; z < part.num_clusters(); ++z) {
        for (int l = 0; l < part.num_clusters(); ++l) {
            if (l == z || quotient(z, l) == 0.0) continue;
            for (int i : part.clusters[z]) {
                bool has_editable_in_edge = false;
                for (int k : part.clusters[l]) {
                    if (mask.H(i, k) != 0.0) {
                        has_editable_in_edge = true;
                        break;
                    }
                }
                if (!has_editable_in_edge) rep.violations.emplace_back(i, l);
            }
        }
    }
    rep.feasible = rep.violations.empty();
    return rep;
}

EditMask augment_mask(const WeightedNetwork& net, const Partition& part, std::uint64_t seed) {
    EditMask mask = edge_support_mask(net, part);
    std::mt19937_64 rng(seed);
    for (;;) {
        FeasibilityReport rep = feasibility_check(net, mask, part);
        if (rep.feasible) return mask;
        auto [node, foreign] = rep.violations.front();
        std::vector<int> candidates;
        for (int k : part.clusters[foreign])
            if (mask.H(node, k) == 0.0) candidates.push_back(k);
        // The violation guarantees at least one admissible source node.
        int k = candidates[static_cast<std::size_t>(rng() % candidates.size())];
        mask.H(node, k) = 1.0;
        mask.added_edges.emplace_back(node, k);
    }
}

Matrix project_invariance(const Matrix& W, const CharacteristicMatrices& mats) {
    return W - mats.Vbar * (mats.Vbar.transpose() * W * mats.V) * mats.V.transpose();
}

CorrectionResult dykstra_correct(const WeightedNetwork& net, const Partition& part,
                                 const CharacteristicMatrices& mats, const EditMask& mask,
                                 double tol, int max_iter) {
    if (tol <= 0.0) throw ValidationError("tolerance must be positive");
    FeasibilityReport feas = feasibility_check(net, mask, part);
    if (!feas.feasible)
        throw ValidationError("edit mask is infeasible: node " +
                              std::to_string(feas.violations.front().first + 1) +
                              " has no modifiable incoming edge from cluster " +
                              std::to_string(feas.violations.front().second + 1));
    const int n = net.n;
    const Matrix& A_bar = mats.A_bar;
    const Matrix& H = mask.H;
    const Matrix Hc = Matrix::Ones(n, n) - H;

    Matrix Z = A_bar;
    Matrix T = Matrix::Zero(n, n);
    Matrix Q = Matrix::Zero(n, n);
    Matrix Y = A_bar;

    CorrectionResult res;
    for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
        Y = H.cwiseProduct((Z + T).cwiseMax(0.0)) + Hc.cwiseProduct(A_bar);
        T = (Z + T - Y).eval();
        Matrix Z_next = project_invariance(Y + Q, mats);
        Q = (Y + Q - Z_next).eval();
        res.final_step = (Z_next - Z).norm();
        Z = Z_next;
        if (res.final_step < tol) {
            res.converged = true;
            ++res.iterations;
            break;
        }
    }

    // The Y-iterate satisfies the mask and nonnegativity constraints exactly;
    // at termination it is within O(tol) of the invariance subspace.
    res.Delta = Y - A_bar;
    res.c2_residual = (mats.Vbar.transpose() * (A_bar + res.Delta) * mats.V).norm();
    const double a_norm = net.adjacency.norm();
    res.frobenius_change_ratio = a_norm > 0.0 ? res.Delta.norm() / a_norm : 0.0;
    return res;
}

namespace {

// Depth of every quotient node in a depth-first spanning tree rooted at
// `root`, children visited in ascending cluster index.
std::vector<int> dfs_depths(const Matrix& quotient, int root) {
    const int m = static_cast<int>(quotient.rows());
    std::vector<int> depth(m, -1);
    std::vector<int> stack{root};
    depth[root] = 0;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        // push in descending order so the lowest index is expanded first
        for (int v = m - 1; v >= 0; --v) {
            if (quotient(u, v) != 0.0 && depth[v] < 0) {
                depth[v] = depth[u] + 1;
                stack.push_back(v);
            }
        }
    }
    return depth;
}

} // namespace

TuningResult tune_frequencies(const WeightedNetwork& net_corrected, const Vector& omega,
                              const Partition& part, const AlphaGridSpec& spec) {
    if (omega.size() != net_corrected.n)
        throw ValidationError("frequency vector length does not match node count");
    InvarianceReport c2 = check_c2(net_corrected, part, 1e-6);
    if (!c2.c2_satisfied)
        throw ValidationError("corrected network violates the weight-balance condition "
                              "(residual " + format_double(c2.c2_residual) + ")");

    const int m = part.num_clusters();
    Vector omega_av(m);
    for (int k = 0; k < m; ++k) {
        double mean = 0.0;
        for (int i : part.clusters[k]) mean += omega(i);
        omega_av(k) = mean / static_cast<double>(part.clusters[k].size());
    }

    auto jacobians = all_jacobians(net_corrected, part);
    Matrix nu = inter_cluster_gains(net_corrected, part);
    auto expand = [&](const Vector& per_cluster) {
        Vector full(net_corrected.n);
        for (int k = 0; k < m; ++k)
            for (int i : part.clusters[k]) full(i) = per_cluster(k);
        return full;
    };

    TuningResult result;
    GainMatrix gm_av = xi_matrix_clustered(jacobians, nu, omega_av);
    if (gm_av.spectral_radius < 1.0) {
        result.mu = expand(omega_av) - omega;
        result.lambda_max = gm_av.spectral_radius;
        result.step1_exit = true;
        return result;
    }

    Matrix quotient = quotient_graph(net_corrected, part);
    if (!quotient_connected(quotient))
        throw ValidationError("quotient graph is disconnected; the tuning spanning tree "
                              "is undefined");

    int root = 0;
    for (int k = 1; k < m; ++k)
        if (omega_av(k) < omega_av(root)) root = k;
    std::vector<int> depth = dfs_depths(quotient, root);

    auto lambda_at = [&](double alpha) {
        Vector per_cluster(m);
        for (int k = 0; k < m; ++k)
            per_cluster(k) = omega_av(root) + static_cast<double>(depth[k]) * alpha;
        return xi_matrix_clustered(jacobians, nu, per_cluster).spectral_radius;
    };

    double lo = 0.0, hi = -1.0;
    for (int j = 0; j <= spec.max_doublings; ++j) {
        double alpha = spec.alpha0 * std::pow(2.0, j);
        double lam = lambda_at(alpha);
        result.alpha_scan.emplace_back(alpha, lam);
        if (lam < 1.0) {
            hi = alpha;
            break;
        }
        lo = alpha;
    }
    if (hi < 0.0)
        throw SolverError("no stabilizing tuning step below the grid ceiling " +
                          format_double(spec.alpha0 * std::pow(2.0, spec.max_doublings)) +
                          " rad/s");

    for (int it = 0; it < spec.bisection_steps; ++it) {
        double mid = 0.5 * (lo + hi);
        double lam = lambda_at(mid);
        result.alpha_scan.emplace_back(mid, lam);
        (lam < 1.0 ? hi : lo) = mid;
    }

    result.alpha_star = hi;
    result.lambda_max = lambda_at(hi);
    Vector per_cluster(m);
    for (int k = 0; k < m; ++k)
        per_cluster(k) = omega_av(root) + static_cast<double>(depth[k]) * hi;
    result.mu = expand(per_cluster) - omega;
    return result;
}

} // namespace csync
