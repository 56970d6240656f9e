#pragma once

#include "csync/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace csync {

/// Weighted digraph. adjacency(i, j) is the weight of edge (j, i), i.e.
/// row i collects the weights of edges incoming to node i.
struct WeightedNetwork {
    int n = 0;
    Matrix adjacency;
    std::vector<std::string> labels; // empty when unnamed

    void validate() const;
};

enum class NetworkFormat { DenseCsv, EdgeList };

/// Ordered node clusters P_1..P_m, 0-based indices. `perm` maps the current
/// (possibly relabeled) node index back to the index used in the input files;
/// it is the identity for networks that were already contiguously labeled.
struct Partition {
    std::vector<std::vector<int>> clusters;
    std::vector<int> perm;

    int num_clusters() const { return static_cast<int>(clusters.size()); }
    int num_nodes() const;
    int cluster_of(int node) const;
    bool is_contiguous() const;
    void validate(int n) const;
};

struct CharacteristicMatrices {
    Matrix V;        // n x m, normalized cluster indicators
    Matrix Vbar;     // n x (n-m), orthonormal complement of range(V)
    Matrix B_span;   // n x (n-m), incidence of the union of intra-cluster spanning trees
    Matrix A_bar;    // n x n, inter-cluster weights only
    Matrix intra_mask; // n x n 0-1 indicator of intra-cluster positions (diagonal included)
};

WeightedNetwork load_network(const std::string& path, NetworkFormat format);
void save_network(const WeightedNetwork& net, const std::string& path);

Partition load_partition(const std::string& path, int n);
void save_partition(const Partition& part, const std::string& path);

/// Permutes nodes so that each cluster occupies consecutive indices.
/// Returns the relabeled network and partition; the applied permutation is
/// stored in Partition::perm (new index -> original index).
std::pair<WeightedNetwork, Partition> make_contiguous(const WeightedNetwork& net,
                                                      const Partition& part);

CharacteristicMatrices characteristic_matrices(const WeightedNetwork& net,
                                               const Partition& part);

/// Incidence matrix of BFS spanning trees of every intra-cluster subgraph,
/// one column per tree edge (+1 at head, -1 at tail). Throws when a cluster
/// subgraph is not strongly connected.
Matrix spanning_tree_incidence(const WeightedNetwork& net, const Partition& part);

/// m x m 0-1 adjacency of the quotient graph: edge (k, l) present iff any
/// inter-cluster weight between P_k and P_l is nonzero in either direction.
Matrix quotient_graph(const WeightedNetwork& net, const Partition& part);

bool quotient_connected(const Matrix& quotient);

} // namespace csync
