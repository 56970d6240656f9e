#pragma once

#include "csync/netmodel.hpp"
#include "csync/stability.hpp"

#include <cstdint>

namespace csync {

/// 0-1 matrix of modifiable inter-cluster entries. Entry (i, j) = 1 allows
/// changing the weight of edge (j, i). Intra-cluster and diagonal positions
/// are always zero.
struct EditMask {
    Matrix H;
    std::vector<std::pair<int, int>> added_edges; // (i, j) positions beyond the edge set

    void validate(const Partition& part) const;
};

struct FeasibilityReport {
    bool feasible = false;
    // (node, foreign cluster) pairs with no modifiable incoming edge
    std::vector<std::pair<int, int>> violations;
};

struct CorrectionResult {
    Matrix Delta;
    int iterations = 0;
    bool converged = false;
    double final_step = 0.0;        // ||Z_{k+1} - Z_k||_F at termination
    double c2_residual = 0.0;       // ||Vbar^T (A_bar + Delta) V||_F
    double frobenius_change_ratio = 0.0; // ||Delta||_F / ||A||_F
};

struct TuningResult {
    Vector mu;
    double alpha_star = 0.0;        // 0 when the cluster averages already pass
    double lambda_max = 0.0;        // spectral radius of Xi at the returned frequencies
    bool step1_exit = false;
    std::vector<std::pair<double, double>> alpha_scan; // (alpha, lambda_max)
};

/// Mask covering every inter-cluster position (the maximal mask).
EditMask full_inter_cluster_mask(const Partition& part, int n);

/// Mask restricted to the existing inter-cluster edges of the network.
EditMask edge_support_mask(const WeightedNetwork& net, const Partition& part);

/// Remark-1 style feasibility: every node must keep at least one modifiable
/// incoming edge from each cluster adjacent to its own in the quotient graph.
FeasibilityReport feasibility_check(const WeightedNetwork& net, const EditMask& mask,
                                    const Partition& part);

/// Grows the edge-support mask with uniformly random admissible edges until
/// feasibility_check passes. Deterministic given the seed.
EditMask augment_mask(const WeightedNetwork& net, const Partition& part, std::uint64_t seed);

/// Closed-form Frobenius projection onto { Z : Vbar^T Z V = 0 }.
Matrix project_invariance(const Matrix& W, const CharacteristicMatrices& mats);

constexpr double kDefaultDykstraTol = 1e-10;
constexpr int kDefaultDykstraMaxIter = 100000;

/// Dykstra alternating projections for the smallest sparse inter-cluster
/// correction. Throws ValidationError when the mask is infeasible.
CorrectionResult dykstra_correct(const WeightedNetwork& net, const Partition& part,
                                 const CharacteristicMatrices& mats, const EditMask& mask,
                                 double tol = kDefaultDykstraTol,
                                 int max_iter = kDefaultDykstraMaxIter);

struct AlphaGridSpec {
    double alpha0 = 1.0;     // rad/s, first geometric grid point
    int max_doublings = 40;  // grid ceiling alpha0 * 2^max_doublings
    int bisection_steps = 40;
};

/// Four-step frequency tuning. Requires (C2) to hold for the corrected
/// network and a connected quotient graph.
TuningResult tune_frequencies(const WeightedNetwork& net_corrected, const Vector& omega,
                              const Partition& part, const AlphaGridSpec& spec = {});

} // namespace csync
