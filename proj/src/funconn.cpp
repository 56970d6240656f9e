#include "csync/funconn.hpp"

#include <algorithm>
#include <fstream>

namespace csync {

namespace {

struct Biquad {
    double b0, b1, b2, a1, a2;
};

Biquad butterworth2(double cutoff_hz, double fs) {
    const double K = std::tan(M_PI * cutoff_hz / fs);
    const double norm = 1.0 / (1.0 + std::sqrt(2.0) * K + K * K);
    Biquad bq;
    bq.b0 = K * K * norm;
    bq.b1 = 2.0 * bq.b0;
    bq.b2 = bq.b0;
    bq.a1 = 2.0 * (K * K - 1.0) * norm;
    bq.a2 = (1.0 - std::sqrt(2.0) * K + K * K) * norm;
    return bq;
}

// Direct form II transposed, state initialized to the steady state of the
// first sample so a constant signal passes through unchanged.
void filter_inplace(const Biquad& bq, double* x, int T, int stride) {
    double s1 = (1.0 - bq.b0) * x[0];
    double s2 = (bq.b2 - bq.a2) * x[0];
    for (int t = 0; t < T; ++t) {
        const double in = x[t * stride];
        const double out = bq.b0 * in + s1;
        s1 = bq.b1 * in - bq.a1 * out + s2;
        s2 = bq.b2 * in - bq.a2 * out;
        x[t * stride] = out;
    }
}

} // namespace

Timeseries lowpass(const Timeseries& ts, double cutoff_hz) {
    if (ts.dt <= 0.0) throw ValidationError("sampling step must be positive");
    const double fs = 1.0 / ts.dt;
    if (cutoff_hz <= 0.0 || cutoff_hz >= fs / 2.0)
        throw ValidationError("cutoff must lie strictly below the Nyquist frequency " +
                              format_double(fs / 2.0) + " Hz");
    const Biquad bq = butterworth2(cutoff_hz, fs);
    Timeseries out = ts;
    const int T = out.num_samples();
    std::vector<double> buf(T);
    for (int i = 0; i < out.num_channels(); ++i) {
        for (int t = 0; t < T; ++t) buf[t] = out.data(t, i);
        filter_inplace(bq, buf.data(), T, 1);
        std::reverse(buf.begin(), buf.end());
        filter_inplace(bq, buf.data(), T, 1);
        std::reverse(buf.begin(), buf.end());
        for (int t = 0; t < T; ++t) out.data(t, i) = buf[t];
    }
    return out;
}

GsrResult global_signal_regression(const Timeseries& ts) {
    if (ts.num_channels() < 2)
        throw ValidationError("global signal regression needs at least two channels");
    GsrResult res;
    res.residuals = ts;
    const int T = ts.num_samples();
    Vector g = ts.data.rowwise().mean();
    const double g_mean = g.mean();
    Vector gc = g.array() - g_mean;
    const double gc_sq = gc.squaredNorm();
    if (gc_sq == 0.0) {
        res.skipped = true;
        return res;
    }
    for (int i = 0; i < ts.num_channels(); ++i) {
        Vector x = ts.data.col(i);
        const double beta = gc.dot(x) / gc_sq;        // slope on the centered global signal
        const double intercept = x.mean() - beta * g_mean;
        res.residuals.data.col(i) = x - beta * g - Vector::Constant(T, intercept);
    }
    return res;
}

Timeseries downsample(const Timeseries& ts, double target_dt) {
    if (target_dt <= 0.0) throw ValidationError("target step must be positive");
    const int k = std::max(1, static_cast<int>(std::lround(target_dt / ts.dt)));
    Timeseries out;
    out.dt = ts.dt * k;
    const int T = (ts.num_samples() + k - 1) / k;
    out.data = Matrix::Zero(T, ts.num_channels());
    for (int t = 0; t < T; ++t) out.data.row(t) = ts.data.row(t * k);
    return out;
}

FCMatrix pearson_fc(const Timeseries& ts, double discard_seconds) {
    if (discard_seconds < 0.0) throw ValidationError("discard window must be nonnegative");
    const int start = static_cast<int>(std::lround(discard_seconds / ts.dt));
    const int T = ts.num_samples() - start;
    if (start >= ts.num_samples() || T < 2)
        throw ValidationError("fewer than two samples remain after the discard window");

    const int n = ts.num_channels();
    Matrix X = ts.data.bottomRows(T);
    Vector mean = X.colwise().mean();
    X.rowwise() -= mean.transpose();
    Vector sd = X.colwise().norm();

    FCMatrix fc;
    fc.values = Matrix::Identity(n, n);
    for (int i = 0; i < n; ++i)
        if (sd(i) == 0.0) fc.zero_variance_channels.push_back(i);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double corr = 0.0;
            if (sd(i) > 0.0 && sd(j) > 0.0)
                corr = X.col(i).dot(X.col(j)) / (sd(i) * sd(j));
            fc.values(i, j) = fc.values(j, i) = corr;
        }
    }
    return fc;
}

FCMatrix threshold(const FCMatrix& fc, double tau) {
    if (tau < 0.0 || tau > 1.0) throw ValidationError("threshold must lie in [0, 1]");
    FCMatrix out = fc;
    out.thresholded = true;
    for (int i = 0; i < out.size(); ++i)
        for (int j = 0; j < out.size(); ++j)
            if (i != j && std::fabs(out.values(i, j)) < tau) out.values(i, j) = 0.0;
    return out;
}

double block_contrast(const FCMatrix& fc, const Partition& part) {
    part.validate(fc.size());
    double within = 0.0, between = 0.0;
    int n_within = 0, n_between = 0;
    const int m = part.num_clusters();
    for (int k = 0; k < m; ++k) {
        const auto& c = part.clusters[k];
        for (std::size_t a = 0; a < c.size(); ++a)
            for (std::size_t b = a + 1; b < c.size(); ++b) {
                within += fc.values(c[a], c[b]);
                ++n_within;
            }
        for (int l = k + 1; l < m; ++l)
            for (int i : c)
                for (int j : part.clusters[l]) {
                    between += fc.values(i, j);
                    ++n_between;
                }
    }
    if (n_within == 0 || n_between == 0)
        throw ValidationError("block contrast needs at least two clusters of size >= 2");
    return within / n_within - between / n_between;
}

void save_fc_csv(const FCMatrix& fc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    for (int i = 0; i < fc.size(); ++i) {
        for (int j = 0; j < fc.size(); ++j) {
            if (j) out << ',';
            out << format_double(fc.values(i, j));
        }
        out << '\n';
    }
}

void save_fc_pgm(const FCMatrix& fc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    const int n = fc.size();
    out << "P5\n" << n << ' ' << n << "\n255\n";
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double v = std::clamp(fc.values(i, j), -1.0, 1.0);
            unsigned char px = static_cast<unsigned char>(std::lround((v + 1.0) * 127.5));
            out.put(static_cast<char>(px));
        }
    }
}

} // namespace csync
