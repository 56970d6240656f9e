#pragma once

#include "csync/control.hpp"
#include "csync/funconn.hpp"
#include "csync/invariance.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace csync {

extern const char* kToolVersion;

struct DamageSpec {
    int cluster = 1;     // 1-based cluster index, 0 disables damage
    double scale = 0.01; // intra-cluster weight scaling factor
};

struct SolverSpec {
    double tol = 1e-10;
    int max_iter = 100000;
    std::string mask = "auto"; // "auto", "full", or a dense 0-1 CSV path
};

struct SimulationSpec {
    double dt = 1e-3;      // s
    double duration = 120; // s
    double theta0_max = 0.5;        // initial phases drawn from [0, theta0_max] rad
    double noise_variance = 1e-2;   // neural-drive noise per sample
};

struct FcSpec {
    double cutoff_hz = 0.25;
    double sample_dt = 0.5;        // s, TR-like grid the BOLD is decimated to
    double discard_seconds = 40.0;
    double threshold = 0.5;
};

struct PipelineConfig {
    std::string network;
    std::string network_format = "dense-csv"; // or "edge-list"
    std::string partition;
    std::string frequencies;                  // CSV, rad/s; empty = draw uniformly
    double frequency_range_hz[2] = {0.0, 60.0};
    DamageSpec damage;
    SolverSpec solver;
    SimulationSpec simulation;
    HemoParams hemodynamics;
    FcSpec fc;
    std::uint64_t seed = 0;
    std::string out_dir = "run";

    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig from_file(const std::string& path);
    nlohmann::json to_json() const;
    /// FNV-1a hash of the canonical JSON form.
    std::uint64_t hash() const;
};

/// In-memory results of a full pipeline run; the same artifacts are written
/// to the run directory.
struct PipelineResult {
    WeightedNetwork damaged;   // contiguous labeling
    WeightedNetwork corrected;
    Partition part;            // contiguous, perm maps back to input order
    Vector omega_initial;
    Vector omega_final;
    CorrectionResult correction;
    TuningResult tuning;
    InvarianceReport invariance_before;
    InvarianceReport invariance_after;
    RobustnessCertificate robustness;
    double lambda_max_final = 0.0;
    SyncMetrics metrics;
    FCMatrix fc;
    FCMatrix fc_thresholded;
    double within_mean = 0.0;
    double between_mean = 0.0;
    nlohmann::json report;
};

Vector load_frequencies(const std::string& path, int n);
void save_vector_csv(const Vector& v, const std::string& path);
void save_matrix_csv(const Matrix& M, const std::string& path);

/// Undo a contiguous relabeling (perm: new index -> input index) so emitted
/// files line up with the input node order. No-op for an empty perm.
Matrix to_input_order(const Matrix& M, const std::vector<int>& perm);
Vector to_input_order(const Vector& v, const std::vector<int>& perm);

/// Draw natural frequencies uniformly from the configured band (Hz,
/// converted to rad/s). Platform-independent given the seed.
Vector draw_frequencies(int n, double lo_hz, double hi_hz, std::uint64_t seed);

/// Resolves the solver mask spec ("auto", "full", or a dense CSV path) into
/// an edit mask for the given network.
EditMask resolve_mask(const SolverSpec& spec, const WeightedNetwork& net, const Partition& part,
                      std::uint64_t seed);

/// Multiply the intra-cluster weights of one cluster (1-based index in the
/// input partition order) by `scale`.
WeightedNetwork damage_network(const WeightedNetwork& net, const Partition& part,
                               const DamageSpec& spec);

/// Runs damage -> correct-weights -> tune-frequencies -> simulate ->
/// hemodynamics -> FC and writes all artifacts into config.out_dir.
PipelineResult run_pipeline(const PipelineConfig& config);

} // namespace csync
