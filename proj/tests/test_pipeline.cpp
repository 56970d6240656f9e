#include "csync/pipeline.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

using namespace csync;
using testutil::TempDir;
using testutil::make_net;
using testutil::make_part;

namespace {

// 6-node, 2-cluster toy inputs on disk plus a fast config
struct ToyRun {
    TempDir tmp;
    PipelineConfig config;

    ToyRun() {
        Matrix A = Matrix::Zero(6, 6);
        for (int c = 0; c < 2; ++c)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    if (i != j) A(3 * c + i, 3 * c + j) = 40.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 3; j < 6; ++j) {
                A(i, j) = 0.02;
                A(j, i) = 0.03;
            }
        save_network(make_net(A), tmp.file("A.csv"));
        std::ofstream(tmp.file("P.json")) << "[[1,2,3],[4,5,6]]";
        std::ofstream(tmp.file("w.csv")) << "1.5\n1.5\n1.5\n2.1\n2.1\n2.1\n";

        config.network = tmp.file("A.csv");
        config.partition = tmp.file("P.json");
        config.frequencies = tmp.file("w.csv");
        config.simulation.duration = 12.0;
        config.fc.discard_seconds = 4.0;
        config.seed = 5;
        config.out_dir = tmp.file("run");
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config JSON round-trip and defaults") {
    PipelineConfig def;
    CHECK(def.damage.cluster == 1);
    CHECK(def.damage.scale == 0.01);
    CHECK(def.solver.tol == 1e-10);
    CHECK(def.simulation.dt == 1e-3);
    CHECK(def.simulation.duration == 120.0);
    CHECK(def.simulation.theta0_max == 0.5);
    CHECK(def.simulation.noise_variance == 1e-2);
    CHECK(def.fc.cutoff_hz == 0.25);
    CHECK(def.fc.discard_seconds == 40.0);
    CHECK(def.fc.threshold == 0.5);
    CHECK(def.frequency_range_hz[0] == 0.0);
    CHECK(def.frequency_range_hz[1] == 60.0);

    nlohmann::json j = nlohmann::json::parse(R"({
        "network": "A.csv", "partition": "P.json", "seed": 42,
        "damage": {"cluster": 2, "scale": 0.5},
        "simulation": {"duration": 10.0},
        "fc": {"threshold": 0.3}
    })");
    PipelineConfig c = PipelineConfig::from_json(j);
    CHECK(c.network == "A.csv");
    CHECK(c.seed == 42);
    CHECK(c.damage.cluster == 2);
    CHECK(c.damage.scale == 0.5);
    CHECK(c.simulation.duration == 10.0);
    CHECK(c.simulation.dt == 1e-3); // untouched default
    CHECK(c.fc.threshold == 0.3);

    PipelineConfig back = PipelineConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    CHECK(back.hash() == c.hash());
    CHECK(back.hash() != def.hash());
}

TEST_CASE("invalid config file is a validation error") {
    TempDir tmp;
    CHECK_THROWS_AS(PipelineConfig::from_file(tmp.file("missing.json")), ValidationError);
    const auto bad = tmp.write("bad.json", "{not json");
    CHECK_THROWS_AS(PipelineConfig::from_file(bad), ValidationError);
}

TEST_CASE("frequency draw stays in the band and is seed-deterministic") {
    Vector a = draw_frequencies(100, 0.0, 60.0, 7);
    Vector b = draw_frequencies(100, 0.0, 60.0, 7);
    Vector c = draw_frequencies(100, 0.0, 60.0, 8);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.minCoeff() >= 0.0);
    CHECK(a.maxCoeff() <= kTwoPi * 60.0);
    CHECK(a.maxCoeff() > 60.0); // rad/s scale, not Hz
    CHECK_THROWS_AS(draw_frequencies(5, 10.0, 5.0, 1), ValidationError);
}

TEST_CASE("frequencies file validation") {
    TempDir tmp;
    const auto good = tmp.write("w.csv", "1.0\n2.0\n3.0\n");
    Vector w = load_frequencies(good, 3);
    CHECK(w(2) == 3.0);
    CHECK_THROWS_AS(load_frequencies(good, 4), ValidationError);
    const auto neg = tmp.write("neg.csv", "1.0\n-2.0\n3.0\n");
    CHECK_THROWS_AS(load_frequencies(neg, 3), ValidationError);
}

TEST_CASE("damage scales exactly one intra-cluster block") {
    std::mt19937_64 rng(3);
    Partition part = make_part({{0, 1}, {2, 3}});
    WeightedNetwork net = testutil::random_clustered(part, 1.0, 2.0, 0.1, 0.2, rng);

    SUBCASE("scale 1 is the identity") {
        WeightedNetwork out = damage_network(net, part, DamageSpec{1, 1.0});
        CHECK(out.adjacency == net.adjacency);
    }
    SUBCASE("scale 0 zeroes the block") {
        WeightedNetwork out = damage_network(net, part, DamageSpec{1, 0.0});
        CHECK(out.adjacency(0, 1) == 0.0);
        CHECK(out.adjacency(1, 0) == 0.0);
        CHECK(out.adjacency(2, 3) == net.adjacency(2, 3));
        CHECK(out.adjacency(0, 2) == net.adjacency(0, 2));
    }
    SUBCASE("scale 0.01 multiplies the block") {
        WeightedNetwork out = damage_network(net, part, DamageSpec{2, 0.01});
        CHECK(out.adjacency(2, 3) == doctest::Approx(0.01 * net.adjacency(2, 3)));
        CHECK(out.adjacency(0, 1) == net.adjacency(0, 1));
    }
    SUBCASE("cluster 0 disables damage") {
        CHECK(damage_network(net, part, DamageSpec{0, 0.01}).adjacency == net.adjacency);
    }
    SUBCASE("out-of-range cluster") {
        CHECK_THROWS_AS(damage_network(net, part, DamageSpec{3, 0.5}), ValidationError);
    }
}

TEST_CASE("full pipeline run produces a complete, certified run directory") {
    ToyRun toy;
    PipelineResult res = run_pipeline(toy.config);

    // stage certificates (input frequencies are cluster-constant, so C1
    // already holds before tuning)
    CHECK(res.invariance_before.c1_satisfied);
    CHECK(res.invariance_after.c1_satisfied);
    CHECK(res.invariance_after.c2_satisfied);
    CHECK(res.lambda_max_final < 1.0);
    CHECK(res.correction.converged);
    CHECK(res.metrics.steady_spread < 1e-3); // phases lock after correction

    namespace fs = std::filesystem;
    for (const char* name :
         {"manifest.json", "config.json", "damaged.csv", "delta.csv", "corrected.csv",
          "mu.csv", "omega_final.csv", "alpha_scan.csv", "trajectory.bin", "bold.csv",
          "fc.csv", "fc_thresholded.csv", "fc.pgm", "report.json"})
        CHECK(fs::exists(fs::path(toy.config.out_dir) / name));

    nlohmann::json manifest = nlohmann::json::parse(slurp(toy.config.out_dir + "/manifest.json"));
    CHECK(manifest["seed"] == 5);
    CHECK(manifest["config_hash"] == toy.config.hash());
    CHECK(manifest["tool_version"] == kToolVersion);

    nlohmann::json report = nlohmann::json::parse(slurp(toy.config.out_dir + "/report.json"));
    for (const char* key :
         {"invariance_before", "invariance_after", "correction", "tuning", "robustness",
          "simulation", "fc"})
        CHECK(report.contains(key));
    CHECK(report["correction"].contains("frobenius_change_ratio"));
    CHECK(report["tuning"].contains("lambda_max"));
    CHECK(report["robustness"].contains("is_M_matrix"));
    CHECK(report["fc"].contains("within_cluster_mean"));
    CHECK(report["fc"].contains("between_cluster_mean"));
}

TEST_CASE("fixed seed reproduces the run directory bit-for-bit") {
    ToyRun toy;
    run_pipeline(toy.config);
    PipelineConfig second = toy.config;
    second.out_dir = toy.tmp.file("run2");
    run_pipeline(second);

    namespace fs = std::filesystem;
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(toy.config.out_dir)) {
        const auto name = entry.path().filename().string();
        CHECK(slurp(entry.path().string()) == slurp(second.out_dir + "/" + name));
        ++compared;
    }
    CHECK(compared >= 14);
}

TEST_CASE("decoupled toy network: pipeline completes with near-zero between-cluster FC") {
    TempDir tmp;
    const int m = 5;
    Matrix A = Matrix::Zero(2 * m, 2 * m);
    std::string pjson = "[", wcsv;
    for (int c = 0; c < m; ++c) {
        A(2 * c, 2 * c + 1) = A(2 * c + 1, 2 * c) = 30.0;
        pjson += (c ? ",[" : "[") + std::to_string(2 * c + 1) + "," +
                 std::to_string(2 * c + 2) + "]";
        // fast carriers: the hemodynamic response suppresses them, so the
        // BOLD residuals are driven by independent noise and decorrelate
        const std::string w = std::to_string(60 + 10 * c);
        wcsv += w + "\n" + w + "\n";
    }
    pjson += "]";
    save_network(make_net(A), tmp.file("A.csv"));
    std::ofstream(tmp.file("P.json")) << pjson;
    std::ofstream(tmp.file("w.csv")) << wcsv;

    PipelineConfig config;
    config.network = tmp.file("A.csv");
    config.partition = tmp.file("P.json");
    config.frequencies = tmp.file("w.csv");
    config.seed = 11;
    config.out_dir = tmp.file("run");
    PipelineResult res = run_pipeline(config);
    CHECK(res.correction.Delta.norm() < 1e-9); // nothing to correct
    CHECK(std::fabs(res.between_mean) < 0.25); // no consistent coupling path
}

TEST_CASE("missing input surfaces as a validation error") {
    PipelineConfig config;
    config.network = "/nonexistent/A.csv";
    config.partition = "/nonexistent/P.json";
    TempDir tmp;
    config.out_dir = tmp.file("run");
    CHECK_THROWS_AS(run_pipeline(config), ValidationError);
}

} // TEST_SUITE
