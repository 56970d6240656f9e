#pragma once

#include "csync/netmodel.hpp"

#include <nlohmann/json_fwd.hpp>

namespace csync {

/// Jacobian of the intra-cluster phase-difference dynamics of one isolated
/// cluster, in spanning-tree difference coordinates, with its Lyapunov
/// solution X (J^T X + X J = -I).
struct ClusterJacobian {
    int cluster = 0;
    Matrix J;            // (|P_k|-1) x (|P_k|-1)
    bool hurwitz = false;
    bool lyapunov_ok = false;
    Matrix X;            // valid only when lyapunov_ok
    double mean_eigenvalue = 0.0; // trace(J)/p
    double lyap_min_eig = 0.0;    // lambda_min(X)
    double lyap_max_eig = 0.0;    // lambda_max(X)
};

struct GainMatrix {
    Matrix Xi;            // m x m, nonnegative, zero diagonal
    Matrix nu;            // m x m inter-cluster gains
    Matrix freq_gaps;     // m x m |omega_av^(k) - omega_av^(l)|, rad/s
    double spectral_radius = 0.0;
};

struct RobustnessCertificate {
    Matrix S;             // m x m
    bool is_M_matrix = false;
    bool constants_available = false;
    Vector d;             // positive weights with DS + S^T D > 0
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
    double c = 0.0;       // ultimate-bound constant

    nlohmann::json to_json() const;
};

ClusterJacobian intra_jacobian(const WeightedNetwork& net, const Partition& part, int k);

std::vector<ClusterJacobian> all_jacobians(const WeightedNetwork& net, const Partition& part);

/// Solves J^T X + X J = -I by dense Kronecker vectorization. Throws
/// SolverError when the system is singular.
Matrix solve_lyapunov(const Matrix& J);

/// Mean singular value of (s I - J)^{-1} at s = i*omega.
double mean_sv_resolvent(const Matrix& J, double omega);

GainMatrix xi_matrix(const WeightedNetwork& net, const Vector& omega, const Partition& part,
                     double c1_tol = 1e-6);

/// Gain matrix evaluated at explicit per-cluster frequencies (used by the
/// frequency-tuning search, where candidate frequencies are cluster-constant
/// by construction).
GainMatrix xi_matrix_clustered(const std::vector<ClusterJacobian>& jacobians,
                               const Matrix& nu, const Vector& omega_cluster);

/// nu_kl = max_{i in P_k} sum_{j in P_l} a_ij; zero diagonal.
Matrix inter_cluster_gains(const WeightedNetwork& net, const Partition& part);

RobustnessCertificate m_matrix_certificate(const WeightedNetwork& net, const Partition& part,
                                           const std::vector<ClusterJacobian>& jacobians);

/// Fills d, c1..c4 and c. Requires is_M_matrix.
void robustness_constants(RobustnessCertificate& cert,
                          const std::vector<ClusterJacobian>& jacobians);

double ultimate_bound(const RobustnessCertificate& cert, double gamma);

} // namespace csync
