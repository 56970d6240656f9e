#include "csync/netmodel.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <fstream>

using namespace csync;
using testutil::TempDir;
using testutil::make_net;
using testutil::make_part;

TEST_SUITE("netmodel") {

TEST_CASE("dense CSV load: minimal symmetric network") {
    TempDir tmp;
    const auto path = tmp.write("a.csv", "0,1;1,0");
    WeightedNetwork net = load_network(path, NetworkFormat::DenseCsv);
    CHECK(net.n == 2);
    CHECK(net.adjacency(0, 1) == 1.0);
    CHECK(net.adjacency(1, 0) == 1.0);
    CHECK(net.adjacency(0, 0) == 0.0);
}

TEST_CASE("dense CSV load: newline row separator") {
    TempDir tmp;
    const auto path = tmp.write("a.csv", "0,2,0\n0.5,0,1\n0,3,0\n");
    WeightedNetwork net = load_network(path, NetworkFormat::DenseCsv);
    CHECK(net.n == 3);
    CHECK(net.adjacency(1, 0) == 0.5);
    CHECK(net.adjacency(2, 1) == 3.0);
}

TEST_CASE("edge list: duplicates summed into the (dst, src) position") {
    TempDir tmp;
    const auto path = tmp.write("a.txt", "1 2 0.5\n1 2 0.5\n2 1 0.25\n");
    WeightedNetwork net = load_network(path, NetworkFormat::EdgeList);
    CHECK(net.n == 2);
    CHECK(net.adjacency(1, 0) == 1.0); // a_21 position: edge 1 -> 2
    CHECK(net.adjacency(0, 1) == 0.25);
}

TEST_CASE("load errors carry context") {
    TempDir tmp;
    CHECK_THROWS_AS(load_network(tmp.file("missing.csv"), NetworkFormat::DenseCsv),
                    ValidationError);
    const auto neg = tmp.write("neg.csv", "0,-1;1,0");
    CHECK_THROWS_AS(load_network(neg, NetworkFormat::DenseCsv), ValidationError);
    const auto ragged = tmp.write("ragged.csv", "0,1;1");
    CHECK_THROWS_AS(load_network(ragged, NetworkFormat::DenseCsv), ValidationError);
    const auto junk = tmp.write("junk.csv", "0,x;1,0");
    CHECK_THROWS_AS(load_network(junk, NetworkFormat::DenseCsv), ValidationError);
}

TEST_CASE("dense CSV round-trips bit-identically") {
    TempDir tmp;
    Matrix A(3, 3);
    A << 0, 0.1, 1.0 / 3.0, 0.25, 0, 7e-13, 2, 3.5, 0;
    WeightedNetwork net = make_net(A);
    const auto p1 = tmp.file("a.csv");
    save_network(net, p1);
    WeightedNetwork back = load_network(p1, NetworkFormat::DenseCsv);
    CHECK(back.adjacency == net.adjacency);
    const auto p2 = tmp.file("b.csv");
    save_network(back, p2);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
}

TEST_CASE("network validation rejects invariant violations") {
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = 1.0;
    WeightedNetwork net;
    net.n = 2;
    net.adjacency = A;
    CHECK_THROWS_AS(net.validate(), ValidationError); // nonzero diagonal
    A(0, 0) = 0.0;
    A(0, 1) = -2.0;
    net.adjacency = A;
    CHECK_THROWS_AS(net.validate(), ValidationError); // negative weight
}

TEST_CASE("partition validation") {
    Partition p = make_part({{0, 1}, {2, 3}});
    CHECK_NOTHROW(p.validate(4));
    CHECK(p.num_clusters() == 2);
    CHECK(p.num_nodes() == 4);
    CHECK(p.cluster_of(2) == 1);
    CHECK(p.is_contiguous());

    CHECK_THROWS_AS(make_part({{0}, {1, 2, 3}}).validate(4), ValidationError); // singleton
    CHECK_THROWS_AS(make_part({{0, 1}, {1, 2, 3}}).validate(4), ValidationError); // overlap
    CHECK_THROWS_AS(make_part({{0, 1}}).validate(4), ValidationError); // not covering
    CHECK(!make_part({{0, 2}, {1, 3}}).is_contiguous());
}

TEST_CASE("partition JSON round-trip with 1-based indices") {
    TempDir tmp;
    const auto path = tmp.write("p.json", "[[1,2],[3,4,5]]");
    Partition part = load_partition(path, 5);
    CHECK(part.clusters == std::vector<std::vector<int>>{{0, 1}, {2, 3, 4}});
    const auto out = tmp.file("q.json");
    save_partition(part, out);
    Partition back = load_partition(out, 5);
    CHECK(back.clusters == part.clusters);
}

TEST_CASE("make_contiguous permutes interleaved clusters") {
    // clusters {0,2} and {1,3}; ring weights distinguish positions
    Matrix A = Matrix::Zero(4, 4);
    A(0, 2) = A(2, 0) = 5.0;
    A(1, 3) = A(3, 1) = 7.0;
    A(0, 1) = 0.5;
    WeightedNetwork net = make_net(A);
    Partition part = make_part({{0, 2}, {1, 3}});
    auto [cnet, cpart] = make_contiguous(net, part);
    CHECK(cpart.is_contiguous());
    CHECK(cpart.clusters == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
    CHECK(cpart.perm == std::vector<int>{0, 2, 1, 3});
    CHECK(cnet.adjacency(0, 1) == 5.0); // old (0,2)
    CHECK(cnet.adjacency(2, 3) == 7.0); // old (1,3)
    CHECK(cnet.adjacency(0, 2) == 0.5); // old (0,1)
}

TEST_CASE("characteristic matrices: definition unrolled for n=4") {
    Matrix A = Matrix::Zero(4, 4);
    A(0, 1) = A(1, 0) = 1.0;
    A(2, 3) = A(3, 2) = 1.0;
    A(0, 2) = 0.3;
    WeightedNetwork net = make_net(A);
    Partition part = make_part({{0, 1}, {2, 3}});
    CharacteristicMatrices mats = characteristic_matrices(net, part);

    const double r = 1.0 / std::sqrt(2.0);
    Matrix Vexp(4, 2);
    Vexp << r, 0, r, 0, 0, r, 0, r;
    CHECK((mats.V - Vexp).norm() < 1e-15);
    CHECK((mats.V.transpose() * mats.V - Matrix::Identity(2, 2)).norm() < 1e-12);
    CHECK((mats.Vbar.transpose() * mats.Vbar - Matrix::Identity(2, 2)).norm() < 1e-12);
    CHECK((mats.Vbar.transpose() * mats.V).norm() < 1e-12);

    // A_bar keeps only the inter-cluster entry
    CHECK(mats.A_bar(0, 2) == 0.3);
    CHECK(mats.A_bar(0, 1) == 0.0);
    // reconstruction A_bar + A o intra_mask == A, exactly
    Matrix recon = mats.A_bar + net.adjacency.cwiseProduct(mats.intra_mask);
    CHECK(recon == net.adjacency);
}

TEST_CASE("characteristic matrices: 66 nodes in 3 clusters of 22") {
    std::vector<std::vector<int>> clusters(3);
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 22; ++i) clusters[k].push_back(22 * k + i);
    Partition part = make_part(clusters);
    Matrix A = Matrix::Zero(66, 66);
    for (const auto& c : part.clusters)
        for (std::size_t i = 1; i < c.size(); ++i) {
            A(c[i], c[i - 1]) = 1.0;
            A(c[i - 1], c[i]) = 1.0;
        }
    WeightedNetwork net = make_net(A);
    CharacteristicMatrices mats = characteristic_matrices(net, part);
    CHECK(mats.V.rows() == 66);
    CHECK(mats.V.cols() == 3);
    const double e = 1.0 / std::sqrt(22.0);
    for (int i = 0; i < 22; ++i) CHECK(mats.V(i, 0) == doctest::Approx(e).epsilon(1e-14));
    CHECK(mats.V.cwiseAbs().maxCoeff() == doctest::Approx(e).epsilon(1e-14));
}

TEST_CASE("spanning tree incidence") {
    SUBCASE("2-node cluster, single edge") {
        Matrix A = Matrix::Zero(2, 2);
        A(0, 1) = A(1, 0) = 1.0;
        Matrix B = spanning_tree_incidence(make_net(A), make_part({{0, 1}}));
        CHECK(B.rows() == 2);
        CHECK(B.cols() == 1);
        CHECK(B(0, 0) == -1.0);
        CHECK(B(1, 0) == 1.0);
    }
    SUBCASE("3 clusters of 22 give 63 columns") {
        std::vector<std::vector<int>> clusters(3);
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 22; ++i) clusters[k].push_back(22 * k + i);
        Matrix A = Matrix::Zero(66, 66);
        for (const auto& c : clusters)
            for (std::size_t i = 1; i < c.size(); ++i) {
                A(c[i], c[i - 1]) = 1.0;
                A(c[i - 1], c[i]) = 1.0;
            }
        Matrix B = spanning_tree_incidence(make_net(A), make_part(clusters));
        CHECK(B.cols() == 63);
    }
    SUBCASE("cluster-constant frequencies are annihilated") {
        std::mt19937_64 rng(7);
        Partition part = make_part({{0, 1, 2}, {3, 4}});
        WeightedNetwork net = testutil::random_clustered(part, 0.5, 1.5, 0.1, 0.2, rng);
        Matrix B = spanning_tree_incidence(net, part);
        Vector omega(5);
        omega << 3.2, 3.2, 3.2, -1.4, -1.4;
        CHECK((B.transpose() * omega).norm() < 1e-12);
    }
    SUBCASE("disconnected cluster subgraph is a structural error") {
        Matrix A = Matrix::Zero(3, 3);
        A(0, 1) = A(1, 0) = 1.0; // node 2 isolated within the cluster
        CHECK_THROWS_AS(spanning_tree_incidence(make_net(A), make_part({{0, 1, 2}})),
                        ValidationError);
    }
}

TEST_CASE("quotient graph shapes") {
    SUBCASE("block-diagonal network has an empty quotient") {
        Matrix A = Matrix::Zero(4, 4);
        A(0, 1) = A(1, 0) = 1.0;
        A(2, 3) = A(3, 2) = 1.0;
        Matrix Q = quotient_graph(make_net(A), make_part({{0, 1}, {2, 3}}));
        CHECK(Q.norm() == 0.0);
        CHECK(!quotient_connected(Q));
    }
    SUBCASE("all-coupled clusters give the complete quotient") {
        std::mt19937_64 rng(3);
        Partition part = make_part({{0, 1}, {2, 3}, {4, 5}});
        WeightedNetwork net = testutil::random_clustered(part, 1.0, 2.0, 0.1, 0.2, rng);
        Matrix Q = quotient_graph(net, part);
        CHECK(Q == Matrix::Ones(3, 3) - Matrix::Identity(3, 3));
        CHECK(quotient_connected(Q));
    }
    SUBCASE("chain coupling gives the path quotient") {
        Matrix A = Matrix::Zero(6, 6);
        auto link = [&](int i, int j) { A(i, j) = A(j, i) = 1.0; };
        link(0, 1);
        link(2, 3);
        link(4, 5);
        A(2, 0) = 0.1; // P1 -> P2
        A(4, 3) = 0.1; // P2 -> P3
        Matrix Q = quotient_graph(make_net(A), make_part({{0, 1}, {2, 3}, {4, 5}}));
        Matrix Qexp = Matrix::Zero(3, 3);
        Qexp(0, 1) = Qexp(1, 0) = 1.0;
        Qexp(1, 2) = Qexp(2, 1) = 1.0;
        CHECK(Q == Qexp);
        CHECK(quotient_connected(Q));
    }
}

TEST_CASE("property: characteristic matrices on random partitions") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 25; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 3);
        std::vector<std::vector<int>> clusters(m);
        int node = 0;
        for (int k = 0; k < m; ++k) {
            const int size = 2 + static_cast<int>(rng() % 4);
            for (int s = 0; s < size; ++s) clusters[k].push_back(node++);
        }
        Partition part = make_part(clusters);
        WeightedNetwork net = testutil::random_clustered(part, 0.5, 2.0, 0.0, 0.5, rng);

        CharacteristicMatrices mats = characteristic_matrices(net, part);
        const int n = net.n;
        CHECK((mats.V.transpose() * mats.V - Matrix::Identity(m, m)).norm() < 1e-12);
        CHECK((mats.Vbar.transpose() * mats.Vbar - Matrix::Identity(n - m, n - m)).norm() <
              1e-12);
        CHECK((mats.Vbar.transpose() * mats.V).norm() < 1e-12);
        CHECK(mats.A_bar + net.adjacency.cwiseProduct(mats.intra_mask) == net.adjacency);

        Matrix B = spanning_tree_incidence(net, part);
        CHECK(B.cols() == n - m);
    }
}

} // TEST_SUITE
