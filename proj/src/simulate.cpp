#include "csync/simulate.hpp"

#include <bit>
#include <fstream>

namespace csync {

namespace {

void kuramoto_rhs(const Matrix& A, const Vector& omega, const Vector& theta, Vector& dtheta) {
    const int n = static_cast<int>(theta.size());
    dtheta = omega;
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            if (A(i, j) != 0.0) s += A(i, j) * std::sin(theta(j) - theta(i));
        }
        dtheta(i) += s;
    }
}

PhaseTrajectory integrate_core(const Matrix& A, const Vector& omega, const Vector& theta0,
                               double dt, double duration) {
    if (dt <= 0.0) throw ValidationError("dt must be positive");
    if (duration < dt) throw ValidationError("duration must be at least one step");
    const int n = static_cast<int>(theta0.size());
    if (omega.size() != n || A.rows() != n || A.cols() != n)
        throw ValidationError("dimension mismatch between network, frequencies and phases");

    const int steps = static_cast<int>(std::floor(duration / dt));
    PhaseTrajectory traj;
    traj.dt = dt;
    traj.samples = Matrix::Zero(steps + 1, n);

    Vector theta = theta0; // integrated unwrapped, wrapped on output only
    Vector k1(n), k2(n), k3(n), k4(n), tmp(n);
    for (int i = 0; i < n; ++i) traj.samples(0, i) = wrap_angle(theta(i));
    for (int s = 1; s <= steps; ++s) {
        kuramoto_rhs(A, omega, theta, k1);
        tmp = theta + (dt / 2.0) * k1;
        kuramoto_rhs(A, omega, tmp, k2);
        tmp = theta + (dt / 2.0) * k2;
        kuramoto_rhs(A, omega, tmp, k3);
        tmp = theta + dt * k3;
        kuramoto_rhs(A, omega, tmp, k4);
        theta += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!theta.allFinite())
            throw IntegrationError("non-finite phase state at step " + std::to_string(s));
        for (int i = 0; i < n; ++i) traj.samples(s, i) = wrap_angle(theta(i));
    }
    return traj;
}

} // namespace

PhaseTrajectory integrate(const WeightedNetwork& net, const Vector& omega, const Vector& theta0,
                          double dt, double duration) {
    return integrate_core(net.adjacency, omega, theta0, dt, duration);
}

PhaseTrajectory integrate_perturbed(const WeightedNetwork& net, const Vector& omega,
                                    const Vector& delta_omega, const Matrix& delta_A,
                                    const Vector& theta0, double dt, double duration) {
    Matrix A = net.adjacency + delta_A;
    if ((A.array() < 0.0).any())
        throw ValidationError("perturbed weights must remain nonnegative");
    return integrate_core(A, omega + delta_omega, theta0, dt, duration);
}

double perturbation_norm(const Vector& delta_omega, const Matrix& delta_A,
                         const WeightedNetwork& net, const Partition& part) {
    if (delta_omega.size() != net.n || delta_A.rows() != net.n || delta_A.cols() != net.n)
        throw ValidationError("perturbation dimensions do not match the network");
    Matrix B = spanning_tree_incidence(net, part);
    double sq = 0.0;
    for (int col = 0; col < B.cols(); ++col) {
        int tail = -1, head = -1;
        for (int i = 0; i < net.n; ++i) {
            if (B(i, col) < 0.0) tail = i;
            if (B(i, col) > 0.0) head = i;
        }
        double b = std::fabs(delta_omega(head) - delta_omega(tail));
        for (int z = 0; z < net.n; ++z)
            b += std::fabs(delta_A(head, z)) + std::fabs(delta_A(tail, z));
        sq += b * b;
    }
    return std::sqrt(sq);
}

SyncMetrics sync_metrics(const PhaseTrajectory& traj, const Partition& part,
                         double settle_fraction) {
    if (settle_fraction < 0.0 || settle_fraction >= 1.0)
        throw ValidationError("settle_fraction must be in [0, 1)");
    part.validate(traj.num_nodes());
    const int T = traj.num_samples();
    const int m = part.num_clusters();

    SyncMetrics metrics;
    metrics.intra_spread = Matrix::Zero(T, m);
    metrics.order_parameter = Matrix::Zero(T, m);
    for (int t = 0; t < T; ++t) {
        for (int k = 0; k < m; ++k) {
            const auto& c = part.clusters[k];
            double spread = 0.0;
            double re = 0.0, im = 0.0;
            for (std::size_t a = 0; a < c.size(); ++a) {
                re += std::cos(traj.samples(t, c[a]));
                im += std::sin(traj.samples(t, c[a]));
                for (std::size_t b = a + 1; b < c.size(); ++b)
                    spread = std::max(spread, circular_distance(traj.samples(t, c[a]),
                                                                traj.samples(t, c[b])));
            }
            metrics.intra_spread(t, k) = spread;
            metrics.order_parameter(t, k) = std::hypot(re, im) / static_cast<double>(c.size());
        }
    }

    const int settle = std::min(T - 1, static_cast<int>(std::ceil(settle_fraction * T)));
    metrics.steady_spread_per_cluster =
        metrics.intra_spread.bottomRows(T - settle).colwise().maxCoeff();
    metrics.steady_order_per_cluster =
        metrics.order_parameter.bottomRows(T - settle).colwise().mean();
    metrics.steady_spread = metrics.steady_spread_per_cluster.maxCoeff();
    return metrics;
}

void save_trajectory_csv(const PhaseTrajectory& traj, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << "t";
    for (int i = 0; i < traj.num_nodes(); ++i) out << ",theta" << (i + 1);
    out << '\n';
    for (int t = 0; t < traj.num_samples(); ++t) {
        out << format_double(t * traj.dt);
        for (int i = 0; i < traj.num_nodes(); ++i)
            out << ',' << format_double(traj.samples(t, i));
        out << '\n';
    }
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary trajectory format assumes a little-endian host");

template <typename T>
void write_raw(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

} // namespace

void save_trajectory_bin(const PhaseTrajectory& traj, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    write_raw<std::int64_t>(out, traj.num_nodes());
    write_raw<double>(out, traj.dt);
    write_raw<std::int64_t>(out, traj.num_samples());
    for (int t = 0; t < traj.num_samples(); ++t)
        for (int i = 0; i < traj.num_nodes(); ++i) write_raw<double>(out, traj.samples(t, i));
}

PhaseTrajectory load_trajectory_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    const auto n = read_raw<std::int64_t>(in);
    const double dt = read_raw<double>(in);
    const auto T = read_raw<std::int64_t>(in);
    if (!in || n <= 0 || T <= 0 || dt <= 0.0)
        throw ValidationError(path + ": malformed trajectory header");
    PhaseTrajectory traj;
    traj.dt = dt;
    traj.samples = Matrix::Zero(T, n);
    for (std::int64_t t = 0; t < T; ++t)
        for (std::int64_t i = 0; i < n; ++i) traj.samples(t, i) = read_raw<double>(in);
    if (!in) throw ValidationError(path + ": truncated trajectory data");
    return traj;
}

} // namespace csync
