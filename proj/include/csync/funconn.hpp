#pragma once

#include "csync/hemodynamics.hpp"

namespace csync {

struct FCMatrix {
    Matrix values; // n x n, Pearson correlations, unit diagonal
    bool thresholded = false;
    std::vector<int> zero_variance_channels; // correlations forced to 0

    int size() const { return static_cast<int>(values.rows()); }
};

/// Zero-phase (forward-backward) second-order Butterworth low-pass.
Timeseries lowpass(const Timeseries& ts, double cutoff_hz);

/// Removes each channel's least-squares projection onto the cross-channel
/// mean signal and a constant. Skipped with a warning flag when the global
/// signal has zero variance.
struct GsrResult {
    Timeseries residuals;
    bool skipped = false;
};
GsrResult global_signal_regression(const Timeseries& ts);

/// Keep every k-th sample so the sampling step becomes approximately
/// target_dt (k = round(target_dt / dt), at least 1).
Timeseries downsample(const Timeseries& ts, double target_dt);

FCMatrix pearson_fc(const Timeseries& ts, double discard_seconds);

/// Entries with |value| < tau set to zero; diagonal preserved.
FCMatrix threshold(const FCMatrix& fc, double tau);

/// Mean within-cluster minus mean between-cluster off-diagonal correlation.
double block_contrast(const FCMatrix& fc, const Partition& part);

void save_fc_csv(const FCMatrix& fc, const std::string& path);

/// 8-bit binary portable graymap; correlation -1 maps to black, +1 to white.
void save_fc_pgm(const FCMatrix& fc, const std::string& path);

} // namespace csync
