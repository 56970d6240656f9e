#include "csync/hemodynamics.hpp"

#include <array>
#include <fstream>
#include <random>
#include <sstream>

namespace csync {

void HemoParams::validate() const {
    if (kappa <= 0.0 || gamma_fb <= 0.0 || tau <= 0.0)
        throw ValidationError("hemodynamic rates must be positive");
    if (alpha <= 0.0 || alpha >= 1.0) throw ValidationError("alpha must lie in (0, 1)");
    if (rho <= 0.0 || rho >= 1.0) throw ValidationError("rho must lie in (0, 1)");
    if (v0 <= 0.0 || v0 >= 1.0) throw ValidationError("v0 must lie in (0, 1)");
}

Timeseries neural_drive(const PhaseTrajectory& traj, double noise_variance, std::uint64_t seed) {
    if (noise_variance < 0.0) throw ValidationError("noise variance must be nonnegative");
    Timeseries z;
    z.dt = traj.dt;
    z.data = traj.samples.array().sin();
    if (noise_variance > 0.0) {
        const double sigma = std::sqrt(noise_variance);
        for (int i = 0; i < z.num_channels(); ++i) {
            std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(i) + 1)));
            std::normal_distribution<double> gauss(0.0, sigma);
            for (int t = 0; t < z.num_samples(); ++t) z.data(t, i) += gauss(rng);
        }
    }
    return z;
}

namespace {

// state: s (vasodilatory signal), f (inflow), v (volume), q (deoxyhemoglobin)
using HemoState = std::array<double, 4>;

HemoState rhs(const HemoState& x, double z, const HemoParams& p) {
    const auto [s, f, v, q] = x;
    const double outflow = std::pow(v, 1.0 / p.alpha);
    const double extraction = 1.0 - std::pow(1.0 - p.rho, 1.0 / f);
    return {z - p.kappa * s - p.gamma_fb * (f - 1.0),
            s,
            (f - outflow) / p.tau,
            (f * extraction / p.rho - outflow * q / v) / p.tau};
}

} // namespace

Timeseries balloon_windkessel(const Timeseries& z, const HemoParams& params) {
    params.validate();
    if (z.dt <= 0.0) throw ValidationError("input sampling step must be positive");
    const int T = z.num_samples();
    const int n = z.num_channels();
    const double dt = z.dt;

    Timeseries y;
    y.dt = dt;
    y.data = Matrix::Zero(T, n);
    const double k1 = 7.0 * params.rho;
    const double k2 = 2.0;
    const double k3 = 2.0 * params.rho - 0.2;

    for (int i = 0; i < n; ++i) {
        HemoState x{0.0, 1.0, 1.0, 1.0}; // rest state
        y.data(0, i) = 0.0;              // BOLD at rest is exactly zero
        for (int t = 1; t < T; ++t) {
            // drive sampled at the step endpoints, midpoint stages use the mean
            const double z0 = z.data(t - 1, i);
            const double z1 = z.data(t, i);
            const double zm = (z0 + z1) / 2.0;
            HemoState a = rhs(x, z0, params);
            HemoState xb{}, b{}, c{}, d{};
            for (int s = 0; s < 4; ++s) xb[s] = x[s] + dt / 2.0 * a[s];
            b = rhs(xb, zm, params);
            for (int s = 0; s < 4; ++s) xb[s] = x[s] + dt / 2.0 * b[s];
            c = rhs(xb, zm, params);
            for (int s = 0; s < 4; ++s) xb[s] = x[s] + dt * c[s];
            d = rhs(xb, z1, params);
            for (int s = 0; s < 4; ++s)
                x[s] += dt / 6.0 * (a[s] + 2.0 * b[s] + 2.0 * c[s] + d[s]);
            if (!(std::isfinite(x[0]) && x[1] > 0.0 && x[2] > 0.0 && x[3] > 0.0))
                throw IntegrationError("hemodynamic state left its positivity domain in region " +
                                       std::to_string(i + 1) + " at t = " +
                                       format_double(t * dt) + " s");
            y.data(t, i) = params.v0 * (k1 * (1.0 - x[3]) + k2 * (1.0 - x[3] / x[2]) +
                                        k3 * (1.0 - x[2]));
        }
    }
    return y;
}

void save_timeseries_csv(const Timeseries& ts, const std::string& path,
                         const std::string& channel_prefix) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << "t";
    for (int i = 0; i < ts.num_channels(); ++i) out << ',' << channel_prefix << (i + 1);
    out << '\n';
    for (int t = 0; t < ts.num_samples(); ++t) {
        out << format_double(t * ts.dt);
        for (int i = 0; i < ts.num_channels(); ++i) out << ',' << format_double(ts.data(t, i));
        out << '\n';
    }
}

Timeseries load_timeseries_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw ValidationError(path + ": ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2 || rows.front().size() < 2)
        throw ValidationError(path + ": need at least two samples and one channel");
    Timeseries ts;
    ts.dt = rows[1][0] - rows[0][0];
    if (ts.dt <= 0.0) throw ValidationError(path + ": time column must increase");
    const int T = static_cast<int>(rows.size());
    const int n = static_cast<int>(rows.front().size()) - 1;
    ts.data = Matrix::Zero(T, n);
    for (int t = 0; t < T; ++t)
        for (int i = 0; i < n; ++i) ts.data(t, i) = rows[t][i + 1];
    return ts;
}

} // namespace csync
