#include "csync/stability.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <complex>

namespace csync {

namespace {

double max_real_eig(const Matrix& J) {
    Eigen::EigenSolver<Matrix> es(J);
    return es.eigenvalues().real().maxCoeff();
}

} // namespace

Matrix solve_lyapunov(const Matrix& J) {
    const int p = static_cast<int>(J.rows());
    Matrix M = Matrix::Zero(p * p, p * p);
    // vec(J^T X) = (I (x) J^T) vec(X); vec(X J) = (J^T (x) I) vec(X), column-major
    for (int c = 0; c < p; ++c)
        M.block(c * p, c * p, p, p) += J.transpose();
    for (int c = 0; c < p; ++c)
        for (int r = 0; r < p; ++r)
            M.block(r * p, c * p, p, p).diagonal().array() += J(c, r);
    Vector rhs = Vector::Zero(p * p);
    for (int i = 0; i < p; ++i) rhs(i * p + i) = -1.0;

    Eigen::PartialPivLU<Matrix> lu(M);
    Vector x = lu.solve(rhs);
    Matrix X = Eigen::Map<Matrix>(x.data(), p, p);
    X = ((X + X.transpose()) / 2.0).eval();
    const double residual = (J.transpose() * X + X * J + Matrix::Identity(p, p)).norm();
    if (!std::isfinite(residual) || residual > 1e-8)
        throw SolverError("Lyapunov equation solve failed (Jacobian not Hurwitz?)");
    return X;
}

ClusterJacobian intra_jacobian(const WeightedNetwork& net, const Partition& part, int k) {
    part.validate(net.n);
    if (k < 0 || k >= part.num_clusters())
        throw ValidationError("cluster index out of range");

    std::vector<int> cluster = part.clusters[k];
    std::sort(cluster.begin(), cluster.end());
    const int p = static_cast<int>(cluster.size());

    // Isolated cluster subnetwork and its spanning-tree difference coordinates
    // x = B_T^T theta; the linearized dynamics at the synchronized state is
    // xdot = -B_T^T L B_T (B_T^T B_T)^{-1} x with L the weighted in-degree Laplacian.
    WeightedNetwork sub;
    sub.n = p;
    sub.adjacency = Matrix::Zero(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            if (i != j) sub.adjacency(i, j) = net.adjacency(cluster[i], cluster[j]);

    ClusterJacobian cj;
    cj.cluster = k;
    if ((sub.adjacency.array() == 0.0).all()) {
        // no restoring force at all
        cj.J = Matrix::Zero(p - 1, p - 1);
        cj.hurwitz = false;
        return cj;
    }

    Partition whole;
    whole.clusters = {std::vector<int>(p)};
    for (int i = 0; i < p; ++i) whole.clusters[0][i] = i;
    Matrix B = spanning_tree_incidence(sub, whole);

    Matrix L = Matrix::Zero(p, p);
    L.diagonal() = sub.adjacency.rowwise().sum();
    L -= sub.adjacency;

    Matrix gram = B.transpose() * B;
    cj.J = -(B.transpose() * L * B) * gram.inverse();
    cj.mean_eigenvalue = cj.J.trace() / static_cast<double>(p - 1);
    cj.hurwitz = max_real_eig(cj.J) < 0.0;
    if (cj.hurwitz) {
        try {
            cj.X = solve_lyapunov(cj.J);
            Eigen::SelfAdjointEigenSolver<Matrix> es(cj.X);
            cj.lyap_min_eig = es.eigenvalues().minCoeff();
            cj.lyap_max_eig = es.eigenvalues().maxCoeff();
            cj.lyapunov_ok = cj.lyap_min_eig > 0.0;
        } catch (const SolverError&) {
            cj.lyapunov_ok = false;
        }
    }
    return cj;
}

std::vector<ClusterJacobian> all_jacobians(const WeightedNetwork& net, const Partition& part) {
    std::vector<ClusterJacobian> out;
    out.reserve(part.num_clusters());
    for (int k = 0; k < part.num_clusters(); ++k) out.push_back(intra_jacobian(net, part, k));
    return out;
}

double mean_sv_resolvent(const Matrix& J, double omega) {
    using CMatrix = Eigen::MatrixXcd;
    const int p = static_cast<int>(J.rows());
    CMatrix G = (std::complex<double>(0.0, omega) * CMatrix::Identity(p, p) -
                 J.cast<std::complex<double>>())
                    .inverse();
    Eigen::JacobiSVD<CMatrix> svd(G);
    return svd.singularValues().mean();
}

Matrix inter_cluster_gains(const WeightedNetwork& net, const Partition& part) {
    const int m = part.num_clusters();
    Matrix nu = Matrix::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        for (int l = 0; l < m; ++l) {
            if (l == k) continue;
            double best = 0.0;
            for (int i : part.clusters[k]) {
                double s = 0.0;
                for (int j : part.clusters[l]) s += net.adjacency(i, j);
                best = std::max(best, s);
            }
            nu(k, l) = best;
        }
    }
    return nu;
}

GainMatrix xi_matrix_clustered(const std::vector<ClusterJacobian>& jacobians,
                               const Matrix& nu, const Vector& omega_cluster) {
    const int m = static_cast<int>(jacobians.size());
    for (const auto& cj : jacobians)
        if (!cj.hurwitz)
            throw SolverError("cluster " + std::to_string(cj.cluster + 1) +
                              " Jacobian is not Hurwitz; gain matrix unavailable");

    GainMatrix gm;
    gm.nu = nu;
    gm.Xi = Matrix::Zero(m, m);
    gm.freq_gaps = Matrix::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        for (int l = 0; l < m; ++l) {
            if (l == k) continue;
            const double gap = std::fabs(omega_cluster(k) - omega_cluster(l));
            gm.freq_gaps(k, l) = gap;
            if (nu(k, l) == 0.0) continue;
            double xi;
            if (jacobians[k].mean_eigenvalue <= jacobians[l].mean_eigenvalue) {
                xi = nu(k, l) * mean_sv_resolvent(jacobians[k].J, gap);
            } else {
                xi = nu(k, l) * mean_sv_resolvent(jacobians[k].J, 0.0) /
                     mean_sv_resolvent(jacobians[l].J, 0.0) *
                     mean_sv_resolvent(jacobians[l].J, gap);
            }
            gm.Xi(k, l) = xi;
        }
    }
    Eigen::EigenSolver<Matrix> es(gm.Xi);
    gm.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
    return gm;
}

GainMatrix xi_matrix(const WeightedNetwork& net, const Vector& omega, const Partition& part,
                     double c1_tol) {
    const int m = part.num_clusters();
    Vector omega_cluster(m);
    for (int k = 0; k < m; ++k) {
        const auto& c = part.clusters[k];
        double mean = 0.0;
        for (int i : c) mean += omega(i);
        mean /= static_cast<double>(c.size());
        for (int i : c)
            if (std::fabs(omega(i) - mean) > c1_tol)
                throw ValidationError(
                    "frequencies are not constant within cluster " + std::to_string(k + 1) +
                    "; inter-cluster frequency gaps are undefined");
        omega_cluster(k) = mean;
    }
    return xi_matrix_clustered(all_jacobians(net, part), inter_cluster_gains(net, part),
                               omega_cluster);
}

RobustnessCertificate m_matrix_certificate(const WeightedNetwork& net, const Partition& part,
                                           const std::vector<ClusterJacobian>& jacobians) {
    const int m = part.num_clusters();
    std::size_t max_size = 0;
    for (const auto& c : part.clusters) max_size = std::max(max_size, c.size());
    const double kappa = 2.0 * static_cast<double>(max_size) - 2.0;

    RobustnessCertificate cert;
    cert.S = Matrix::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        if (!jacobians[k].lyapunov_ok) {
            cert.is_M_matrix = false;
            return cert;
        }
        double gamma_kk = 0.0; // worst node's total inter-cluster in-weight
        for (int i : part.clusters[k]) {
            double s = 0.0;
            for (int l = 0; l < m; ++l) {
                if (l == k) continue;
                for (int j : part.clusters[l]) s += net.adjacency(i, j);
            }
            gamma_kk = std::max(gamma_kk, s);
        }
        cert.S(k, k) = 1.0 / jacobians[k].lyap_max_eig - kappa * gamma_kk;
        for (int l = 0; l < m; ++l) {
            if (l == k) continue;
            double gamma_kl = 0.0;
            for (int i : part.clusters[k]) {
                double s = 0.0;
                for (int j : part.clusters[l]) s += net.adjacency(i, j);
                gamma_kl = std::max(gamma_kl, s);
            }
            cert.S(k, l) = -kappa * gamma_kl;
        }
    }

    // M-matrix: Z sign pattern (holds by construction) + eigenvalues in the
    // open right half plane.
    Eigen::EigenSolver<Matrix> es(cert.S);
    cert.is_M_matrix = es.eigenvalues().real().minCoeff() > 0.0;
    return cert;
}

namespace {

double min_eig_sym_comb(const Matrix& S, const Vector& d) {
    Matrix DS = d.asDiagonal() * S;
    Matrix M = DS + DS.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    return es.eigenvalues().minCoeff();
}

} // namespace

void robustness_constants(RobustnessCertificate& cert,
                          const std::vector<ClusterJacobian>& jacobians) {
    if (!cert.is_M_matrix)
        throw ValidationError("robustness constants require an M-matrix certificate");
    const int m = static_cast<int>(cert.S.rows());

    // For a nonsingular M-matrix, d solving S^T d = 1 is positive and
    // typically yields DS + S^T D > 0 directly.
    Vector d = cert.S.transpose().partialPivLu().solve(Vector::Ones(m));
    if (d.minCoeff() <= 0.0 || min_eig_sym_comb(cert.S, d) <= 0.0) {
        // coordinate search with multiplicative updates
        d = Vector::Ones(m);
        double best = min_eig_sym_comb(cert.S, d);
        bool found = best > 0.0;
        for (int it = 0; it < 10000 && !found; ++it) {
            bool improved = false;
            for (int i = 0; i < m; ++i) {
                for (double factor : {1.1, 1.0 / 1.1}) {
                    Vector trial = d;
                    trial(i) *= factor;
                    double v = min_eig_sym_comb(cert.S, trial);
                    if (v > best) {
                        best = v;
                        d = trial;
                        improved = true;
                    }
                }
            }
            found = best > 0.0;
            if (!improved) break;
        }
        if (!found) {
            cert.constants_available = false;
            throw SolverError("no positive diagonal D with DS + S^T D > 0 was found");
        }
    }

    double min_lyap_min = std::numeric_limits<double>::infinity();
    double max_lyap_max = 0.0;
    for (const auto& cj : jacobians) {
        min_lyap_min = std::min(min_lyap_min, cj.lyap_min_eig);
        max_lyap_max = std::max(max_lyap_max, cj.lyap_max_eig);
    }

    cert.d = d;
    cert.c1 = m * d.minCoeff() * min_lyap_min;
    cert.c2 = m * d.maxCoeff() * max_lyap_max;
    cert.c3 = min_eig_sym_comb(cert.S, d) / 2.0;
    cert.c4 = 2.0 * cert.c2;
    cert.c = (cert.c4 / cert.c3) * std::sqrt(cert.c2 / cert.c1);
    cert.constants_available = true;
}

double ultimate_bound(const RobustnessCertificate& cert, double gamma) {
    if (!cert.constants_available)
        throw ValidationError("certificate constants unavailable");
    if (gamma < 0.0) throw ValidationError("gamma must be nonnegative");
    return cert.c * gamma;
}

nlohmann::json RobustnessCertificate::to_json() const {
    nlohmann::json j;
    j["is_M_matrix"] = is_M_matrix;
    j["constants_available"] = constants_available;
    std::vector<std::vector<double>> s(S.rows());
    for (int i = 0; i < S.rows(); ++i)
        for (int k = 0; k < S.cols(); ++k) s[i].push_back(S(i, k));
    j["S"] = s;
    if (constants_available) {
        j["d"] = std::vector<double>(d.data(), d.data() + d.size());
        j["c1"] = c1;
        j["c2"] = c2;
        j["c3"] = c3;
        j["c4"] = c4;
        j["c"] = c;
    }
    return j;
}

} // namespace csync
