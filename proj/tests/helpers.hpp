#pragma once

#include "csync/netmodel.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace testutil {

/// Per-test scratch directory under the system temp path, removed on exit.
class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        for (int k = 0;; ++k) {
            auto candidate = base / ("csync-test-" + std::to_string(::getpid()) + "-" +
                                     std::to_string(counter_++) + "-" + std::to_string(k));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                break;
            }
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string write(const std::string& name, const std::string& contents) const {
        const std::string p = file(name);
        std::ofstream out(p, std::ios::binary);
        out << contents;
        return p;
    }

private:
    std::filesystem::path path_;
    static inline int counter_ = 0;
};

inline csync::WeightedNetwork make_net(const csync::Matrix& A) {
    csync::WeightedNetwork net;
    net.n = static_cast<int>(A.rows());
    net.adjacency = A;
    net.validate();
    return net;
}

inline csync::Partition make_part(std::vector<std::vector<int>> clusters) {
    csync::Partition part;
    part.clusters = std::move(clusters);
    return part;
}

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Random network with cluster structure: complete intra-cluster graphs with
/// weights in [intra_lo, intra_hi], full bidirectional inter-cluster coupling
/// with weights in [inter_lo, inter_hi].
inline csync::WeightedNetwork random_clustered(const csync::Partition& part, double intra_lo,
                                               double intra_hi, double inter_lo, double inter_hi,
                                               std::mt19937_64& rng) {
    int n = 0;
    for (const auto& c : part.clusters) n += static_cast<int>(c.size());
    csync::Matrix A = csync::Matrix::Zero(n, n);
    for (const auto& c : part.clusters)
        for (int i : c)
            for (int j : c)
                if (i != j) A(i, j) = intra_lo + (intra_hi - intra_lo) * uniform01(rng);
    const int m = static_cast<int>(part.clusters.size());
    for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
            if (k == l) continue;
            for (int i : part.clusters[k])
                for (int j : part.clusters[l])
                    A(i, j) = inter_lo + (inter_hi - inter_lo) * uniform01(rng);
        }
    return make_net(A);
}

} // namespace testutil
