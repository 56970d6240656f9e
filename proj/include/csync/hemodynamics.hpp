#pragma once

#include "csync/simulate.hpp"

#include <cstdint>

namespace csync {

/// Uniformly sampled multichannel signal (neural drive, BOLD, ...).
struct Timeseries {
    double dt = 0.0;
    Matrix data; // T x channels

    int num_samples() const { return static_cast<int>(data.rows()); }
    int num_channels() const { return static_cast<int>(data.cols()); }
};

struct HemoParams {
    double kappa = 0.65;    // vasodilatory signal decay rate, 1/s
    double gamma_fb = 0.41; // flow feedback rate, 1/s
    double tau = 0.98;      // transit time, s
    double alpha = 0.32;    // vessel stiffness exponent
    double rho = 0.34;      // resting oxygen extraction fraction
    double v0 = 0.02;       // resting blood volume fraction

    void validate() const;
};

/// z_i(t) = sin(theta_i(t)) + white Gaussian noise with the given per-sample
/// variance. Each region gets an independent RNG stream derived from
/// (seed, region), so permuting other channels leaves a region unchanged.
Timeseries neural_drive(const PhaseTrajectory& traj, double noise_variance, std::uint64_t seed);

/// Balloon-Windkessel model, RK4 at the input sampling step; the drive is
/// taken at the step endpoints with the midpoint stages using their mean.
/// Output is the BOLD observable per region.
Timeseries balloon_windkessel(const Timeseries& z, const HemoParams& params);

void save_timeseries_csv(const Timeseries& ts, const std::string& path,
                         const std::string& channel_prefix);

/// Reads the format written by save_timeseries_csv (header row, first column
/// is time); dt is recovered from the first two time stamps.
Timeseries load_timeseries_csv(const std::string& path);

} // namespace csync
