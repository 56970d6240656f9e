#include "csync/pipeline.hpp"

#include "csync/stability.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace csync {

const char* kToolVersion = "0.1.0";

namespace {

nlohmann::json json_matrix(const Matrix& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(row);
    }
    return rows;
}

double uniform01(std::mt19937_64& rng) {
    // 53-bit mantissa draw, identical across standard library implementations
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig c;
    auto get = [&](const nlohmann::json& obj, const char* key, auto& dst) {
        if (obj.contains(key)) dst = obj.at(key).get<std::decay_t<decltype(dst)>>();
    };
    get(j, "network", c.network);
    get(j, "network_format", c.network_format);
    get(j, "partition", c.partition);
    get(j, "frequencies", c.frequencies);
    if (j.contains("frequency_range_hz")) {
        auto arr = j.at("frequency_range_hz");
        c.frequency_range_hz[0] = arr.at(0).get<double>();
        c.frequency_range_hz[1] = arr.at(1).get<double>();
    }
    if (j.contains("damage")) {
        get(j.at("damage"), "cluster", c.damage.cluster);
        get(j.at("damage"), "scale", c.damage.scale);
    }
    if (j.contains("solver")) {
        get(j.at("solver"), "tol", c.solver.tol);
        get(j.at("solver"), "max_iter", c.solver.max_iter);
        get(j.at("solver"), "mask", c.solver.mask);
    }
    if (j.contains("simulation")) {
        get(j.at("simulation"), "dt", c.simulation.dt);
        get(j.at("simulation"), "duration", c.simulation.duration);
        get(j.at("simulation"), "theta0_max", c.simulation.theta0_max);
        get(j.at("simulation"), "noise_variance", c.simulation.noise_variance);
    }
    if (j.contains("hemodynamics")) {
        const auto& h = j.at("hemodynamics");
        get(h, "kappa", c.hemodynamics.kappa);
        get(h, "gamma_fb", c.hemodynamics.gamma_fb);
        get(h, "tau", c.hemodynamics.tau);
        get(h, "alpha", c.hemodynamics.alpha);
        get(h, "rho", c.hemodynamics.rho);
        get(h, "v0", c.hemodynamics.v0);
    }
    if (j.contains("fc")) {
        get(j.at("fc"), "cutoff_hz", c.fc.cutoff_hz);
        get(j.at("fc"), "sample_dt", c.fc.sample_dt);
        get(j.at("fc"), "discard_seconds", c.fc.discard_seconds);
        get(j.at("fc"), "threshold", c.fc.threshold);
    }
    get(j, "seed", c.seed);
    get(j, "out_dir", c.out_dir);
    return c;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError(path + ": invalid JSON: " + e.what());
    }
    return from_json(j);
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json j;
    j["network"] = network;
    j["network_format"] = network_format;
    j["partition"] = partition;
    j["frequencies"] = frequencies;
    j["frequency_range_hz"] = {frequency_range_hz[0], frequency_range_hz[1]};
    j["damage"] = {{"cluster", damage.cluster}, {"scale", damage.scale}};
    j["solver"] = {{"tol", solver.tol}, {"max_iter", solver.max_iter}, {"mask", solver.mask}};
    j["simulation"] = {{"dt", simulation.dt},
                       {"duration", simulation.duration},
                       {"theta0_max", simulation.theta0_max},
                       {"noise_variance", simulation.noise_variance}};
    j["hemodynamics"] = {{"kappa", hemodynamics.kappa},   {"gamma_fb", hemodynamics.gamma_fb},
                         {"tau", hemodynamics.tau},       {"alpha", hemodynamics.alpha},
                         {"rho", hemodynamics.rho},       {"v0", hemodynamics.v0}};
    j["fc"] = {{"cutoff_hz", fc.cutoff_hz},
               {"sample_dt", fc.sample_dt},
               {"discard_seconds", fc.discard_seconds},
               {"threshold", fc.threshold}};
    j["seed"] = seed;
    // out_dir is intentionally omitted: run artifacts must not depend on
    // where the run directory lives
    return j;
}

std::uint64_t PipelineConfig::hash() const { return fnv1a64(to_json().dump()); }

Vector load_frequencies(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::vector<double> values;
    std::string tok;
    while (std::getline(in, tok)) {
        std::stringstream ss(tok);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            if (cell.find_first_not_of(" \t\r") == std::string::npos) continue;
            values.push_back(std::stod(cell));
        }
    }
    if (static_cast<int>(values.size()) != n)
        throw ValidationError(path + ": expected " + std::to_string(n) + " frequencies, got " +
                              std::to_string(values.size()));
    Vector v(n);
    for (int i = 0; i < n; ++i) {
        if (values[i] < 0.0) throw ValidationError(path + ": frequencies must be nonnegative");
        v(i) = values[i];
    }
    return v;
}

void save_vector_csv(const Vector& v, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    for (int i = 0; i < v.size(); ++i) out << format_double(v(i)) << '\n';
}

Vector draw_frequencies(int n, double lo_hz, double hi_hz, std::uint64_t seed) {
    if (lo_hz < 0.0 || hi_hz <= lo_hz) throw ValidationError("invalid frequency band");
    std::mt19937_64 rng(seed);
    Vector v(n);
    for (int i = 0; i < n; ++i)
        v(i) = kTwoPi * (lo_hz + (hi_hz - lo_hz) * uniform01(rng));
    return v;
}

WeightedNetwork damage_network(const WeightedNetwork& net, const Partition& part,
                               const DamageSpec& spec) {
    if (spec.cluster == 0) return net;
    if (spec.cluster < 1 || spec.cluster > part.num_clusters())
        throw ValidationError("damage cluster index out of range");
    if (spec.scale < 0.0) throw ValidationError("damage scale must be nonnegative");
    WeightedNetwork out = net;
    const auto& c = part.clusters[spec.cluster - 1];
    for (int i : c)
        for (int j : c) out.adjacency(i, j) *= spec.scale;
    return out;
}

EditMask resolve_mask(const SolverSpec& spec, const WeightedNetwork& net, const Partition& part,
                      std::uint64_t seed) {
    if (spec.mask == "auto") return augment_mask(net, part, seed);
    if (spec.mask == "full") return full_inter_cluster_mask(part, net.n);
    WeightedNetwork raw = load_network(spec.mask, NetworkFormat::DenseCsv);
    if (raw.n != net.n) throw ValidationError("mask size does not match the network");
    EditMask mask;
    mask.H = Matrix::Zero(net.n, net.n);
    for (int i = 0; i < net.n; ++i) {
        const int oi = part.perm.empty() ? i : part.perm[i];
        for (int j = 0; j < net.n; ++j) {
            const int oj = part.perm.empty() ? j : part.perm[j];
            mask.H(i, j) = raw.adjacency(oi, oj); // mask file uses the input node order
        }
    }
    mask.validate(part);
    return mask;
}

Matrix to_input_order(const Matrix& M, const std::vector<int>& perm) {
    if (perm.empty()) return M;
    Matrix out(M.rows(), M.cols());
    for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j) out(perm[i], perm[j]) = M(i, j);
    return out;
}

Vector to_input_order(const Vector& v, const std::vector<int>& perm) {
    if (perm.empty()) return v;
    Vector out(v.size());
    for (int i = 0; i < v.size(); ++i) out(perm[i]) = v(i);
    return out;
}

void save_matrix_csv(const Matrix& M, const std::string& path) {
    WeightedNetwork tmp;
    tmp.n = static_cast<int>(M.rows());
    tmp.adjacency = M;
    save_network(tmp, path);
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    namespace fs = std::filesystem;
    const fs::path dir(config.out_dir);
    fs::create_directories(dir);
    auto at = [&](const char* name) { return (dir / name).string(); };

    // manifest first, so partial runs are attributable
    {
        nlohmann::json manifest;
        manifest["config_hash"] = config.hash();
        manifest["tool_version"] = kToolVersion;
        manifest["seed"] = config.seed;
        std::ofstream out(at("manifest.json"), std::ios::binary);
        out << manifest.dump(2) << '\n';
        std::ofstream cfg(at("config.json"), std::ios::binary);
        cfg << config.to_json().dump(2) << '\n';
    }

    const NetworkFormat format = config.network_format == "edge-list"
                                     ? NetworkFormat::EdgeList
                                     : NetworkFormat::DenseCsv;
    WeightedNetwork raw_net = load_network(config.network, format);
    Partition raw_part = load_partition(config.partition, raw_net.n);
    auto [net, part] = make_contiguous(raw_net, raw_part);
    const auto& perm = part.perm;

    Vector omega_input = config.frequencies.empty()
                             ? draw_frequencies(raw_net.n, config.frequency_range_hz[0],
                                                config.frequency_range_hz[1], config.seed)
                             : load_frequencies(config.frequencies, raw_net.n);
    Vector omega(net.n);
    for (int i = 0; i < net.n; ++i) omega(i) = omega_input(perm[i]);

    PipelineResult res;
    res.part = part;
    res.omega_initial = omega;

    res.damaged = damage_network(net, part, config.damage);
    save_matrix_csv(to_input_order(res.damaged.adjacency, perm), at("damaged.csv"));

    res.invariance_before = check_c2(res.damaged, part);
    InvarianceReport c1_before = check_c1(omega, res.damaged, part);
    res.invariance_before.c1_residual = c1_before.c1_residual;
    res.invariance_before.c1_satisfied = c1_before.c1_satisfied;

    EditMask mask = resolve_mask(config.solver, res.damaged, part, config.seed);
    CharacteristicMatrices mats = characteristic_matrices(res.damaged, part);
    res.correction =
        dykstra_correct(res.damaged, part, mats, mask, config.solver.tol, config.solver.max_iter);
    if (!res.correction.converged)
        throw SolverError("weight correction did not converge within " +
                          std::to_string(config.solver.max_iter) + " iterations");

    res.corrected = res.damaged;
    res.corrected.adjacency += res.correction.Delta;
    // clip projection round-off so downstream validation sees exact zeros
    res.corrected.adjacency = res.corrected.adjacency.cwiseMax(0.0);
    save_matrix_csv(to_input_order(res.correction.Delta, perm), at("delta.csv"));
    save_matrix_csv(to_input_order(res.corrected.adjacency, perm), at("corrected.csv"));

    res.tuning = tune_frequencies(res.corrected, omega, part);
    res.omega_final = omega + res.tuning.mu;
    save_vector_csv(to_input_order(res.tuning.mu, perm), at("mu.csv"));
    save_vector_csv(to_input_order(res.omega_final, perm), at("omega_final.csv"));
    {
        std::ofstream scan(at("alpha_scan.csv"), std::ios::binary);
        scan << "alpha,lambda_max\n";
        auto sorted = res.tuning.alpha_scan;
        std::sort(sorted.begin(), sorted.end());
        for (const auto& [alpha, lam] : sorted)
            scan << format_double(alpha) << ',' << format_double(lam) << '\n';
    }

    res.invariance_after = check_c2(res.corrected, part);
    InvarianceReport c1_after = check_c1(res.omega_final, res.corrected, part);
    res.invariance_after.c1_residual = c1_after.c1_residual;
    res.invariance_after.c1_satisfied = c1_after.c1_satisfied;
    res.lambda_max_final = res.tuning.lambda_max;

    auto jacobians = all_jacobians(res.corrected, part);
    res.robustness = m_matrix_certificate(res.corrected, part, jacobians);
    if (res.robustness.is_M_matrix) {
        try {
            robustness_constants(res.robustness, jacobians);
        } catch (const SolverError&) {
            // certificate stays marked unavailable
        }
    }

    std::mt19937_64 rng(config.seed + 0x5eedULL);
    Vector theta0(net.n);
    for (int i = 0; i < net.n; ++i)
        theta0(i) = config.simulation.theta0_max * uniform01(rng);
    PhaseTrajectory traj = integrate(res.corrected, res.omega_final, theta0,
                                     config.simulation.dt, config.simulation.duration);
    traj.seed = config.seed;
    traj.noise_variance = config.simulation.noise_variance;
    save_trajectory_bin(traj, at("trajectory.bin"));

    res.metrics = sync_metrics(traj, part, 1.0 / 3.0);

    Timeseries z = neural_drive(traj, config.simulation.noise_variance, config.seed);
    Timeseries bold = balloon_windkessel(z, config.hemodynamics);

    Timeseries sampled = downsample(bold, config.fc.sample_dt);
    save_timeseries_csv(sampled, at("bold.csv"), "y");
    Timeseries filtered = lowpass(sampled, config.fc.cutoff_hz);
    GsrResult gsr = global_signal_regression(filtered);
    res.fc = pearson_fc(gsr.residuals, config.fc.discard_seconds);
    res.fc_thresholded = threshold(res.fc, config.fc.threshold);
    save_fc_csv(res.fc, at("fc.csv"));
    save_fc_csv(res.fc_thresholded, at("fc_thresholded.csv"));
    save_fc_pgm(res.fc, at("fc.pgm"));

    // block means for the report
    {
        double contrast = block_contrast(res.fc, part);
        double within = 0.0;
        int n_within = 0;
        for (int k = 0; k < part.num_clusters(); ++k) {
            const auto& c = part.clusters[k];
            for (std::size_t a = 0; a < c.size(); ++a)
                for (std::size_t b = a + 1; b < c.size(); ++b) {
                    within += res.fc.values(c[a], c[b]);
                    ++n_within;
                }
        }
        res.within_mean = within / n_within;
        res.between_mean = res.within_mean - contrast;
    }

    nlohmann::json report;
    report["seed"] = config.seed;
    report["invariance_before"] = res.invariance_before.to_json();
    report["invariance_after"] = res.invariance_after.to_json();
    report["correction"] = {{"iterations", res.correction.iterations},
                            {"converged", res.correction.converged},
                            {"c2_residual", res.correction.c2_residual},
                            {"frobenius_change_ratio", res.correction.frobenius_change_ratio},
                            {"mask_added_edges", mask.added_edges.size()}};
    report["tuning"] = {{"alpha_star", res.tuning.alpha_star},
                        {"lambda_max", res.tuning.lambda_max},
                        {"step1_exit", res.tuning.step1_exit}};
    report["robustness"] = res.robustness.to_json();
    report["simulation"] = {
        {"steady_spread", res.metrics.steady_spread},
        {"steady_order_parameter",
         std::vector<double>(res.metrics.steady_order_per_cluster.data(),
                             res.metrics.steady_order_per_cluster.data() +
                                 res.metrics.steady_order_per_cluster.size())}};
    report["fc"] = {{"within_cluster_mean", res.within_mean},
                    {"between_cluster_mean", res.between_mean},
                    {"gsr_skipped", gsr.skipped}};
    report["quotient"] = json_matrix(quotient_graph(res.corrected, part));
    res.report = report;
    {
        std::ofstream out(at("report.json"), std::ios::binary);
        out << report.dump(2) << '\n';
    }
    return res;
}

} // namespace csync
