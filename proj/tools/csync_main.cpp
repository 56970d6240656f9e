#include "csync/pipeline.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

using namespace csync;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string network;
    std::string network_format;
    std::string partition;
    std::string omega_path;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool out_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_network) {
    cmd->add_option("--config", args.config_path, "Pipeline config JSON; flags override it");
    auto* net = cmd->add_option("--network", args.network, "Adjacency matrix file");
    cmd->add_option("--format", args.network_format, "Network format: dense-csv or edge-list");
    auto* part = cmd->add_option("--partition", args.partition, "Partition JSON file");
    cmd->add_option("--omega", args.omega_path, "Natural frequencies CSV, rad/s");
    cmd->add_option("--seed", args.seed, "RNG seed")->each([&](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--out", args.out, "Output directory or file")->each([&](const std::string&) {
        args.out_set = true;
    });
    if (needs_network) {
        net->check(CLI::ExistingFile);
        part->check(CLI::ExistingFile);
    }
}

PipelineConfig build_config(const CommonArgs& args) {
    PipelineConfig config;
    if (!args.config_path.empty()) config = PipelineConfig::from_file(args.config_path);
    if (!args.network.empty()) config.network = args.network;
    if (!args.network_format.empty()) config.network_format = args.network_format;
    if (!args.partition.empty()) config.partition = args.partition;
    if (!args.omega_path.empty()) config.frequencies = args.omega_path;
    if (args.seed_set) config.seed = args.seed;
    if (args.out_set) config.out_dir = args.out;
    if (config.network.empty()) throw ValidationError("no network given (--network or --config)");
    if (config.partition.empty())
        throw ValidationError("no partition given (--partition or --config)");
    return config;
}

struct LoadedProblem {
    WeightedNetwork net; // contiguous labeling
    Partition part;
    Vector omega; // rad/s, contiguous order
};

LoadedProblem load_problem(const PipelineConfig& config, bool need_omega) {
    const NetworkFormat format = config.network_format == "edge-list"
                                     ? NetworkFormat::EdgeList
                                     : NetworkFormat::DenseCsv;
    WeightedNetwork raw_net = load_network(config.network, format);
    Partition raw_part = load_partition(config.partition, raw_net.n);
    auto [net, part] = make_contiguous(raw_net, raw_part);

    LoadedProblem p{std::move(net), std::move(part), Vector()};
    if (need_omega || !config.frequencies.empty()) {
        Vector omega_input = config.frequencies.empty()
                                 ? draw_frequencies(raw_net.n, config.frequency_range_hz[0],
                                                    config.frequency_range_hz[1], config.seed)
                                 : load_frequencies(config.frequencies, raw_net.n);
        p.omega.resize(p.net.n);
        for (int i = 0; i < p.net.n; ++i) p.omega(i) = omega_input(p.part.perm[i]);
    }
    return p;
}

std::filesystem::path out_dir(const PipelineConfig& config) {
    std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

int cmd_damage(const CommonArgs& args, int cluster, double scale, bool cluster_set,
               bool scale_set) {
    PipelineConfig config = build_config(args);
    if (cluster_set) config.damage.cluster = cluster;
    if (scale_set) config.damage.scale = scale;
    const NetworkFormat format = config.network_format == "edge-list"
                                     ? NetworkFormat::EdgeList
                                     : NetworkFormat::DenseCsv;
    WeightedNetwork net = load_network(config.network, format);
    Partition part = load_partition(config.partition, net.n);
    WeightedNetwork damaged = damage_network(net, part, config.damage);
    const auto path = out_dir(config) / "damaged.csv";
    save_network(damaged, path.string());
    std::cout << path.string() << '\n';
    return 0;
}

int cmd_check(const CommonArgs& args) {
    PipelineConfig config = build_config(args);
    LoadedProblem p = load_problem(config, false);

    nlohmann::json out;
    InvarianceReport c2 = check_c2(p.net, p.part);
    out["c2"] = c2.to_json();
    bool ok = c2.c2_satisfied;
    if (p.omega.size() > 0) {
        InvarianceReport c1 = check_c1(p.omega, p.net, p.part);
        out["c1"] = c1.to_json();
        ok = ok && c1.c1_satisfied;
        if (c1.c1_satisfied) {
            GainMatrix gain = xi_matrix(p.net, p.omega, p.part);
            out["lambda_max"] = gain.spectral_radius;
            out["c3_satisfied"] = gain.spectral_radius < 1.0;
        }
    }
    auto jacobians = all_jacobians(p.net, p.part);
    RobustnessCertificate cert = m_matrix_certificate(p.net, p.part, jacobians);
    if (cert.is_M_matrix) {
        try {
            robustness_constants(cert, jacobians);
        } catch (const SolverError&) {
        }
    }
    out["robustness"] = cert.to_json();
    std::cout << out.dump(2) << '\n';
    return ok ? 0 : 2;
}

int cmd_correct_weights(const CommonArgs& args, const std::string& mask_spec, double tol,
                        int max_iter) {
    PipelineConfig config = build_config(args);
    if (!mask_spec.empty()) config.solver.mask = mask_spec;
    if (tol > 0.0) config.solver.tol = tol;
    if (max_iter > 0) config.solver.max_iter = max_iter;

    LoadedProblem p = load_problem(config, false);
    EditMask mask = resolve_mask(config.solver, p.net, p.part, config.seed);
    CharacteristicMatrices mats = characteristic_matrices(p.net, p.part);
    CorrectionResult corr =
        dykstra_correct(p.net, p.part, mats, mask, config.solver.tol, config.solver.max_iter);
    if (!corr.converged)
        throw SolverError("weight correction did not converge within " +
                          std::to_string(config.solver.max_iter) + " iterations");

    const auto dir = out_dir(config);
    save_matrix_csv(to_input_order(corr.Delta, p.part.perm), (dir / "Delta.csv").string());
    nlohmann::json report = {{"iterations", corr.iterations},
                             {"converged", corr.converged},
                             {"final_step", corr.final_step},
                             {"c2_residual", corr.c2_residual},
                             {"frobenius_change_ratio", corr.frobenius_change_ratio},
                             {"mask_added_edges", mask.added_edges.size()}};
    std::ofstream rep(dir / "report.json", std::ios::binary);
    rep << report.dump(2) << '\n';
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_tune_frequencies(const CommonArgs& args) {
    PipelineConfig config = build_config(args);
    LoadedProblem p = load_problem(config, true);
    TuningResult tuning = tune_frequencies(p.net, p.omega, p.part);

    const auto dir = out_dir(config);
    save_vector_csv(to_input_order(tuning.mu, p.part.perm), (dir / "mu.csv").string());
    {
        std::ofstream scan(dir / "alpha_scan.csv", std::ios::binary);
        scan << "alpha,lambda_max\n";
        auto sorted = tuning.alpha_scan;
        std::sort(sorted.begin(), sorted.end());
        for (const auto& [alpha, lam] : sorted)
            scan << format_double(alpha) << ',' << format_double(lam) << '\n';
    }
    nlohmann::json report = {{"alpha_star", tuning.alpha_star},
                             {"lambda_max", tuning.lambda_max},
                             {"step1_exit", tuning.step1_exit}};
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_simulate(const CommonArgs& args, double dt, double duration) {
    PipelineConfig config = build_config(args);
    if (dt > 0.0) config.simulation.dt = dt;
    if (duration > 0.0) config.simulation.duration = duration;
    LoadedProblem p = load_problem(config, true);

    std::mt19937_64 rng(config.seed + 0x5eedULL);
    Vector theta0(p.net.n);
    for (int i = 0; i < p.net.n; ++i)
        theta0(i) = config.simulation.theta0_max *
                    (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    PhaseTrajectory traj =
        integrate(p.net, p.omega, theta0, config.simulation.dt, config.simulation.duration);
    traj.seed = config.seed;
    traj.noise_variance = config.simulation.noise_variance;

    const auto dir = out_dir(config);
    save_trajectory_csv(traj, (dir / "trajectory.csv").string());
    save_trajectory_bin(traj, (dir / "trajectory.bin").string());
    SyncMetrics metrics = sync_metrics(traj, p.part, 1.0 / 3.0);
    nlohmann::json report = {{"steady_spread", metrics.steady_spread}};
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_bold(const CommonArgs& args, const std::string& traj_path, double noise_variance) {
    PipelineConfig config;
    if (!args.config_path.empty()) config = PipelineConfig::from_file(args.config_path);
    if (args.seed_set) config.seed = args.seed;
    if (args.out_set) config.out_dir = args.out;
    if (noise_variance >= 0.0) config.simulation.noise_variance = noise_variance;

    PhaseTrajectory traj = load_trajectory_bin(traj_path);
    Timeseries z = neural_drive(traj, config.simulation.noise_variance, config.seed);
    Timeseries bold = balloon_windkessel(z, config.hemodynamics);
    const auto path = out_dir(config) / "bold.csv";
    save_timeseries_csv(bold, path.string(), "y");
    std::cout << path.string() << '\n';
    return 0;
}

int cmd_fc(const CommonArgs& args, const std::string& bold_path, double cutoff, double sample_dt,
           double discard, double thr) {
    PipelineConfig config;
    if (!args.config_path.empty()) config = PipelineConfig::from_file(args.config_path);
    if (args.out_set) config.out_dir = args.out;
    if (!args.partition.empty()) config.partition = args.partition;
    if (cutoff > 0.0) config.fc.cutoff_hz = cutoff;
    if (sample_dt > 0.0) config.fc.sample_dt = sample_dt;
    if (discard >= 0.0) config.fc.discard_seconds = discard;
    if (thr >= 0.0) config.fc.threshold = thr;

    Timeseries bold = load_timeseries_csv(bold_path);
    Timeseries sampled = downsample(bold, config.fc.sample_dt);
    Timeseries filtered = lowpass(sampled, config.fc.cutoff_hz);
    GsrResult gsr = global_signal_regression(filtered);
    FCMatrix fc = pearson_fc(gsr.residuals, config.fc.discard_seconds);
    FCMatrix fc_thr = threshold(fc, config.fc.threshold);

    const auto dir = out_dir(config);
    save_fc_csv(fc, (dir / "fc.csv").string());
    save_fc_csv(fc_thr, (dir / "fc_thresholded.csv").string());
    save_fc_pgm(fc, (dir / "fc.pgm").string());

    nlohmann::json report = {{"gsr_skipped", gsr.skipped}};
    if (!config.partition.empty()) {
        Partition part = load_partition(config.partition, fc.size());
        double contrast = block_contrast(fc, part);
        report["block_contrast"] = contrast;
    }
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_pipeline(const CommonArgs& args) {
    PipelineConfig config = build_config(args);
    PipelineResult res = run_pipeline(config);
    std::cout << res.report.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cluster-synchronization correction and functional connectivity toolkit"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* damage = app.add_subcommand("damage", "Scale the intra-cluster weights of one cluster");
    int damage_cluster = 1;
    double damage_scale = 0.01;
    add_common(damage, args, true);
    auto* opt_cluster = damage->add_option("--cluster", damage_cluster, "1-based cluster index");
    auto* opt_scale = damage->add_option("--scale", damage_scale, "Weight scaling factor");

    auto* check = app.add_subcommand("check", "Report invariance and stability certificates");
    add_common(check, args, true);

    auto* correct = app.add_subcommand("correct-weights",
                                       "Minimal inter-cluster correction via Dykstra projections");
    std::string mask_spec;
    double tol = -1.0;
    int max_iter = -1;
    add_common(correct, args, true);
    correct->add_option("--mask", mask_spec, "auto, full, or a dense 0-1 CSV path");
    correct->add_option("--tol", tol, "Stopping tolerance on the Frobenius step");
    correct->add_option("--max-iter", max_iter, "Iteration cap");

    auto* tune = app.add_subcommand("tune-frequencies",
                                    "Minimal frequency adjustment satisfying (C1) and (C3)");
    add_common(tune, args, true);

    auto* simulate = app.add_subcommand("simulate", "Integrate the Kuramoto dynamics");
    double dt = -1.0, duration = -1.0;
    add_common(simulate, args, true);
    simulate->add_option("--dt", dt, "Integration step, s");
    simulate->add_option("--duration", duration, "Horizon, s");

    auto* bold = app.add_subcommand("bold", "Balloon-Windkessel BOLD synthesis from a trajectory");
    std::string traj_path;
    double noise_variance = -1.0;
    add_common(bold, args, false);
    bold->add_option("--trajectory", traj_path, "trajectory.bin from the simulate stage")
        ->required()
        ->check(CLI::ExistingFile);
    bold->add_option("--noise", noise_variance, "Neural-drive noise variance");

    auto* fc = app.add_subcommand("fc", "Functional connectivity from BOLD timeseries");
    std::string bold_path;
    double fc_cutoff = -1.0, fc_sample_dt = -1.0, fc_discard = -1.0, fc_threshold = -1.0;
    add_common(fc, args, false);
    fc->add_option("--bold", bold_path, "bold.csv from the bold stage")
        ->required()
        ->check(CLI::ExistingFile);
    fc->add_option("--cutoff", fc_cutoff, "Low-pass cutoff, Hz");
    fc->add_option("--sample-dt", fc_sample_dt, "Decimation grid, s");
    fc->add_option("--discard", fc_discard, "Initial transient discarded, s");
    fc->add_option("--threshold", fc_threshold, "FC threshold in [0, 1]");

    auto* pipeline = app.add_subcommand("pipeline", "Full damage-to-FC pipeline");
    add_common(pipeline, args, true);

    try {
        app.parse(argc, argv);
        if (damage->parsed())
            return cmd_damage(args, damage_cluster, damage_scale, opt_cluster->count() > 0,
                              opt_scale->count() > 0);
        if (check->parsed()) return cmd_check(args);
        if (correct->parsed()) return cmd_correct_weights(args, mask_spec, tol, max_iter);
        if (tune->parsed()) return cmd_tune_frequencies(args);
        if (simulate->parsed()) return cmd_simulate(args, dt, duration);
        if (bold->parsed()) return cmd_bold(args, traj_path, noise_variance);
        if (fc->parsed())
            return cmd_fc(args, bold_path, fc_cutoff, fc_sample_dt, fc_discard, fc_threshold);
        if (pipeline->parsed()) return cmd_pipeline(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 3;
    } catch (const IntegrationError& e) {
        std::cerr << "integration error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
