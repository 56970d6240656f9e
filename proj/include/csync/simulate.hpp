#pragma once

#include "csync/netmodel.hpp"

#include <cstdint>
#include <string>

namespace csync {

/// Uniformly sampled phase trajectory. Rows are samples (including t = 0),
/// columns are oscillators; phases are wrapped to [0, 2*pi).
struct PhaseTrajectory {
    double dt = 0.0;
    Matrix samples;
    std::uint64_t seed = 0;
    double noise_variance = 0.0;

    int num_samples() const { return static_cast<int>(samples.rows()); }
    int num_nodes() const { return static_cast<int>(samples.cols()); }
    double duration() const { return dt * (num_samples() - 1); }
};

struct SyncMetrics {
    Matrix intra_spread;     // T x m, per-cluster max circular pairwise distance
    Matrix order_parameter;  // T x m, per-cluster Kuramoto order parameter magnitude
    Vector steady_spread_per_cluster;  // max over t >= settle
    Vector steady_order_per_cluster;   // mean over t >= settle
    double steady_spread = 0.0;        // max over clusters
};

/// Fixed-step RK4 integration of the Kuramoto dynamics
/// thetadot_i = omega_i + sum_j a_ij sin(theta_j - theta_i).
/// The phase ODE is deterministic; measurement noise is added downstream.
PhaseTrajectory integrate(const WeightedNetwork& net, const Vector& omega, const Vector& theta0,
                          double dt, double duration);

/// Same dynamics with perturbed parameters omega + delta_omega and
/// A + delta_A. With zero perturbations the output equals integrate() bitwise.
PhaseTrajectory integrate_perturbed(const WeightedNetwork& net, const Vector& omega,
                                    const Vector& delta_omega, const Matrix& delta_A,
                                    const Vector& theta0, double dt, double duration);

/// Conservative upper bound on the worst-case perturbation norm
/// gamma = max_theta ||delta||: per intra-cluster tree edge (i, j),
/// |dw_j - dw_i| + sum_z (|da_jz| + |da_iz|), stacked and taken in 2-norm.
double perturbation_norm(const Vector& delta_omega, const Matrix& delta_A,
                         const WeightedNetwork& net, const Partition& part);

SyncMetrics sync_metrics(const PhaseTrajectory& traj, const Partition& part,
                         double settle_fraction);

void save_trajectory_csv(const PhaseTrajectory& traj, const std::string& path);

/// Compact binary block: int64 n, float64 dt, int64 T, then T*n
/// little-endian float64 samples in row-major order.
void save_trajectory_bin(const PhaseTrajectory& traj, const std::string& path);
PhaseTrajectory load_trajectory_bin(const std::string& path);

} // namespace csync
