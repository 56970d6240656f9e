#include "csync/netmodel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

namespace csync {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

WeightedNetwork parse_dense_csv(const std::string& text, const std::string& path) {
    std::vector<std::vector<double>> rows;
    std::string row_buf;
    int line_no = 1;
    auto flush_row = [&](int at_line) {
        // skip blank rows (trailing newline etc.)
        if (row_buf.find_first_not_of(" \t\r") == std::string::npos) {
            row_buf.clear();
            return;
        }
        std::vector<double> row;
        std::stringstream ss(row_buf);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                double v = std::stod(cell, &pos);
                while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
                if (pos != cell.size()) throw std::invalid_argument(cell);
                row.push_back(v);
            } catch (const std::exception&) {
                throw ValidationError(path + ":" + std::to_string(at_line) +
                                      ": cannot parse '" + cell + "' as a number");
            }
        }
        rows.push_back(std::move(row));
        row_buf.clear();
    };
    for (char c : text) {
        if (c == '\n' || c == ';') {
            flush_row(line_no);
            if (c == '\n') ++line_no;
        } else {
            row_buf.push_back(c);
        }
    }
    flush_row(line_no);

    if (rows.empty()) throw ValidationError(path + ": empty matrix");
    const int n = static_cast<int>(rows.size());
    WeightedNetwork net;
    net.n = n;
    net.adjacency = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n)
            throw ValidationError(path + ": row " + std::to_string(i + 1) + " has " +
                                  std::to_string(rows[i].size()) + " columns, expected " +
                                  std::to_string(n));
        for (int j = 0; j < n; ++j) net.adjacency(i, j) = rows[i][j];
    }
    return net;
}

WeightedNetwork parse_edge_list(const std::string& text, const std::string& path) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    struct Edge { int src, dst; double w; };
    std::vector<Edge> edges;
    int max_node = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[line.find_first_not_of(" \t")] == '#') continue;
        std::istringstream ls(line);
        int src = 0, dst = 0;
        double w = 0.0;
        if (!(ls >> src >> dst >> w))
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": expected 'src dst weight'");
        if (src < 1 || dst < 1)
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": node indices are 1-based positive integers");
        edges.push_back({src, dst, w});
        max_node = std::max({max_node, src, dst});
    }
    if (edges.empty()) throw ValidationError(path + ": no edges");
    WeightedNetwork net;
    net.n = max_node;
    net.adjacency = Matrix::Zero(max_node, max_node);
    for (const auto& e : edges) {
        // edge (src, dst): incoming to dst, duplicates are summed
        net.adjacency(e.dst - 1, e.src - 1) += e.w;
    }
    return net;
}

} // namespace

void WeightedNetwork::validate() const {
    if (n <= 0 || adjacency.rows() != n || adjacency.cols() != n)
        throw ValidationError("adjacency matrix is not square of size n");
    for (int i = 0; i < n; ++i) {
        if (adjacency(i, i) != 0.0)
            throw ValidationError("nonzero diagonal entry at node " + std::to_string(i + 1));
        for (int j = 0; j < n; ++j) {
            double a = adjacency(i, j);
            if (!std::isfinite(a) || a < 0.0)
                throw ValidationError("negative or non-finite weight at (" +
                                      std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")");
        }
    }
    if (!labels.empty() && static_cast<int>(labels.size()) != n)
        throw ValidationError("label count does not match node count");
}

WeightedNetwork load_network(const std::string& path, NetworkFormat format) {
    std::string text = read_file(path);
    WeightedNetwork net = format == NetworkFormat::DenseCsv ? parse_dense_csv(text, path)
                                                            : parse_edge_list(text, path);
    net.validate();
    return net;
}

void save_network(const WeightedNetwork& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    for (int i = 0; i < net.n; ++i) {
        for (int j = 0; j < net.n; ++j) {
            if (j) out << ',';
            out << format_double(net.adjacency(i, j));
        }
        out << '\n';
    }
}

int Partition::num_nodes() const {
    int total = 0;
    for (const auto& c : clusters) total += static_cast<int>(c.size());
    return total;
}

int Partition::cluster_of(int node) const {
    for (int k = 0; k < num_clusters(); ++k)
        for (int i : clusters[k])
            if (i == node) return k;
    throw ValidationError("node " + std::to_string(node + 1) + " not in any cluster");
}

bool Partition::is_contiguous() const {
    int next = 0;
    for (const auto& c : clusters) {
        for (int i : c)
            if (i != next++) return false;
    }
    return true;
}

void Partition::validate(int n) const {
    if (clusters.empty()) throw ValidationError("empty partition");
    std::vector<bool> seen(n, false);
    for (std::size_t k = 0; k < clusters.size(); ++k) {
        if (clusters[k].size() < 2)
            throw ValidationError("cluster " + std::to_string(k + 1) +
                                  " has fewer than two nodes");
        for (int i : clusters[k]) {
            if (i < 0 || i >= n)
                throw ValidationError("node index out of range in cluster " +
                                      std::to_string(k + 1));
            if (seen[i])
                throw ValidationError("node " + std::to_string(i + 1) +
                                      " appears in more than one cluster");
            seen[i] = true;
        }
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
        throw ValidationError("partition does not cover all nodes");
}

Partition load_partition(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError(path + ": invalid JSON: " + e.what());
    }
    if (!j.is_array()) throw ValidationError(path + ": expected an array of arrays");
    Partition part;
    for (const auto& arr : j) {
        if (!arr.is_array()) throw ValidationError(path + ": expected an array of arrays");
        std::vector<int> cluster;
        for (const auto& v : arr) {
            if (!v.is_number_integer())
                throw ValidationError(path + ": node indices must be integers");
            cluster.push_back(v.get<int>() - 1); // file is 1-based
        }
        part.clusters.push_back(std::move(cluster));
    }
    part.validate(n);
    return part;
}

void save_partition(const Partition& part, const std::string& path) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : part.clusters) {
        nlohmann::json arr = nlohmann::json::array();
        for (int i : c) arr.push_back(i + 1);
        j.push_back(arr);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << j.dump(2) << '\n';
}

std::pair<WeightedNetwork, Partition> make_contiguous(const WeightedNetwork& net,
                                                      const Partition& part) {
    part.validate(net.n);
    std::vector<int> perm; // new index -> old index
    perm.reserve(net.n);
    for (const auto& c : part.clusters) perm.insert(perm.end(), c.begin(), c.end());

    WeightedNetwork out;
    out.n = net.n;
    out.adjacency = Matrix::Zero(net.n, net.n);
    for (int i = 0; i < net.n; ++i)
        for (int j = 0; j < net.n; ++j)
            out.adjacency(i, j) = net.adjacency(perm[i], perm[j]);
    if (!net.labels.empty()) {
        out.labels.resize(net.n);
        for (int i = 0; i < net.n; ++i) out.labels[i] = net.labels[perm[i]];
    }

    Partition new_part;
    new_part.perm = perm;
    int next = 0;
    for (const auto& c : part.clusters) {
        std::vector<int> cluster(c.size());
        std::iota(cluster.begin(), cluster.end(), next);
        next += static_cast<int>(c.size());
        new_part.clusters.push_back(std::move(cluster));
    }
    return {std::move(out), std::move(new_part)};
}

CharacteristicMatrices characteristic_matrices(const WeightedNetwork& net,
                                               const Partition& part) {
    net.validate();
    part.validate(net.n);
    const int n = net.n;
    const int m = part.num_clusters();

    CharacteristicMatrices mats;
    mats.V = Matrix::Zero(n, m);
    mats.intra_mask = Matrix::Zero(n, n);
    for (int k = 0; k < m; ++k) {
        const auto& c = part.clusters[k];
        const double inv_norm = 1.0 / std::sqrt(static_cast<double>(c.size()));
        for (int i : c) {
            mats.V(i, k) = inv_norm;
            for (int j : c) mats.intra_mask(i, j) = 1.0;
        }
    }

    // Complete V to an orthonormal basis; the complement columns form Vbar.
    Eigen::HouseholderQR<Matrix> qr(mats.V);
    Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
    mats.Vbar = Q.rightCols(n - m);

    mats.A_bar = net.adjacency.cwiseProduct(Matrix::Ones(n, n) - mats.intra_mask);
    mats.B_span = spanning_tree_incidence(net, part);
    return mats;
}

namespace {

// Nodes of `cluster` reachable from cluster[0] following directed edges,
// restricted to the cluster subgraph. `reverse` flips edge direction.
std::vector<bool> reachable(const Matrix& adj, const std::vector<int>& cluster, bool reverse) {
    std::vector<int> local(adj.rows(), -1);
    for (std::size_t i = 0; i < cluster.size(); ++i) local[cluster[i]] = static_cast<int>(i);
    std::vector<bool> seen(cluster.size(), false);
    std::deque<int> queue{cluster[0]};
    seen[0] = true;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : cluster) {
            if (seen[local[v]]) continue;
            // edge (u, v) exists iff adj(v, u) != 0
            double w = reverse ? adj(u, v) : adj(v, u);
            if (w != 0.0) {
                seen[local[v]] = true;
                queue.push_back(v);
            }
        }
    }
    return seen;
}

} // namespace

Matrix spanning_tree_incidence(const WeightedNetwork& net, const Partition& part) {
    const int n = net.n;
    const int m = part.num_clusters();
    Matrix B = Matrix::Zero(n, n - m);
    int col = 0;
    for (int k = 0; k < m; ++k) {
        std::vector<int> cluster = part.clusters[k];
        std::sort(cluster.begin(), cluster.end());
        for (bool reverse : {false, true}) {
            auto seen = reachable(net.adjacency, cluster, reverse);
            if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
                throw ValidationError("cluster " + std::to_string(k + 1) +
                                      " subgraph is not strongly connected");
        }
        // BFS tree from the lowest-index node, following directed edges (u, v).
        std::vector<int> local(n, -1);
        for (std::size_t i = 0; i < cluster.size(); ++i) local[cluster[i]] = static_cast<int>(i);
        std::vector<bool> visited(cluster.size(), false);
        std::deque<int> queue{cluster[0]};
        visited[0] = true;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int v : cluster) {
                if (visited[local[v]] || net.adjacency(v, u) == 0.0) continue;
                visited[local[v]] = true;
                B(u, col) = -1.0;
                B(v, col) = 1.0;
                ++col;
                queue.push_back(v);
            }
        }
    }
    return B;
}

Matrix quotient_graph(const WeightedNetwork& net, const Partition& part) {
    const int m = part.num_clusters();
    Matrix Q = Matrix::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        for (int l = k + 1; l < m; ++l) {
            bool coupled = false;
            for (int i : part.clusters[k]) {
                for (int j : part.clusters[l]) {
                    if (net.adjacency(i, j) != 0.0 || net.adjacency(j, i) != 0.0) {
                        coupled = true;
                        break;
                    }
                }
                if (coupled) break;
            }
            if (coupled) Q(k, l) = Q(l, k) = 1.0;
        }
    }
    return Q;
}

bool quotient_connected(const Matrix& quotient) {
    const int m = static_cast<int>(quotient.rows());
    std::vector<bool> seen(m, false);
    std::deque<int> queue{0};
    seen[0] = true;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v = 0; v < m; ++v) {
            if (!seen[v] && quotient(u, v) != 0.0) {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

} // namespace csync
