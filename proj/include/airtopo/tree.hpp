#pragma once
// Generic airway tree model: named nodes, undirected edges, hop distances,
// and the node-transition prior built from them.
//
// Tree spec file grammar (line oriented, UTF-8, '#' starts a comment):
//   node <label>
//   edge <labelA> <labelB>
//   root <label>
// Labels must be declared with `node` before use. The root must be TRA
// (procedures start in the trachea) and the edge set must form a tree.

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "airtopo/error.hpp"
#include "airtopo/format.hpp"

namespace airtopo {

inline constexpr const char* kRootLabel = "TRA";

class TreeModel {
public:
    TreeModel(std::vector<std::string> nodes, std::vector<std::pair<int, int>> edges,
              int root_index)
        : nodes_(std::move(nodes)), edges_(std::move(edges)), root_index_(root_index) {
        validate_();
        build_adjacency_();
    }

    static TreeModel parse(std::string_view text);
    static TreeModel load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open tree spec: " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    int size() const { return static_cast<int>(nodes_.size()); }
    const std::vector<std::string>& nodes() const { return nodes_; }
    const std::string& label(int i) const { return nodes_.at(i); }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    int root_index() const { return root_index_; }
    const std::vector<int>& neighbors(int i) const { return adjacency_.at(i); }

    int index_of(std::string_view label) const {
        auto it = index_.find(std::string(label));
        if (it == index_.end()) throw ValidationError("unknown node label: " + std::string(label));
        return it->second;
    }
    bool has_label(std::string_view label) const {
        return index_.count(std::string(label)) != 0;
    }

    // Canonical serialization: node lines in index order, edge lines in
    // declaration order, root last. parse(to_text()) round-trips exactly.
    std::string to_text() const {
        std::string out;
        for (const auto& n : nodes_) out += "node " + n + "\n";
        for (const auto& [a, b] : edges_) out += "edge " + nodes_[a] + " " + nodes_[b] + "\n";
        out += "root " + nodes_[root_index_] + "\n";
        return out;
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write tree spec: " + path.string());
        out << to_text();
    }

private:
    void validate_();
    void build_adjacency_() {
        adjacency_.assign(nodes_.size(), {});
        for (const auto& [a, b] : edges_) {
            adjacency_[a].push_back(b);
            adjacency_[b].push_back(a);
        }
    }

    std::vector<std::string> nodes_;
    std::vector<std::pair<int, int>> edges_;
    int root_index_ = 0;
    std::vector<std::vector<int>> adjacency_;
    std::unordered_map<std::string, int> index_;
};

inline void TreeModel::validate_() {
    const int n = static_cast<int>(nodes_.size());
    if (n < 2) throw ValidationError("tree needs at least 2 nodes");
    for (int i = 0; i < n; ++i) {
        if (nodes_[i].empty()) throw ValidationError("empty node label");
        if (!index_.emplace(nodes_[i], i).second) {
            throw ValidationError("duplicate node label: " + nodes_[i]);
        }
    }
    if (root_index_ < 0 || root_index_ >= n) throw ValidationError("root index out of range");
    if (nodes_[root_index_] != kRootLabel) {
        throw ValidationError(std::string("root must be ") + kRootLabel);
    }
    if (static_cast<int>(edges_.size()) != n - 1) {
        throw ValidationError("edge count must be node count - 1 for a tree");
    }
    std::vector<std::vector<int>> adj(n);
    for (const auto& [a, b] : edges_) {
        if (a < 0 || a >= n || b < 0 || b >= n) throw ValidationError("edge endpoint out of range");
        if (a == b) throw ValidationError("self-loop on node " + nodes_[a]);
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    // n-1 edges + connected => acyclic.
    std::vector<char> seen(n, 0);
    std::deque<int> queue{root_index_};
    seen[root_index_] = 1;
    int reached = 1;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                queue.push_back(v);
            }
        }
    }
    if (reached != n) throw ValidationError("graph is not connected");
}

inline TreeModel TreeModel::parse(std::string_view text) {
    std::vector<std::string> nodes;
    std::vector<std::pair<int, int>> edges;
    std::unordered_map<std::string, int> index;
    int root = -1;
    int lineno = 0;

    auto lookup = [&](std::string_view label, int line) {
        auto it = index.find(std::string(label));
        if (it == index.end()) {
            throw ValidationError("line " + std::to_string(line) +
                                  ": undeclared node label: " + std::string(label));
        }
        return it->second;
    };

    for (std::string_view raw : split_lines(text)) {
        ++lineno;
        std::string_view line = trim(raw);
        if (auto pos = line.find('#'); pos != std::string_view::npos) {
            line = trim(line.substr(0, pos));
        }
        if (line.empty()) continue;

        std::vector<std::string_view> tok;
        for (auto part : split(line, ' ')) {
            part = trim(part);
            if (!part.empty()) tok.push_back(part);
        }
        if (tok[0] == "node") {
            if (tok.size() != 2) throw ParseError("line " + std::to_string(lineno) + ": expected 'node <label>'");
            if (!index.emplace(std::string(tok[1]), static_cast<int>(nodes.size())).second) {
                throw ValidationError("line " + std::to_string(lineno) +
                                      ": duplicate node label: " + std::string(tok[1]));
            }
            nodes.emplace_back(tok[1]);
        } else if (tok[0] == "edge") {
            if (tok.size() != 3) throw ParseError("line " + std::to_string(lineno) + ": expected 'edge <a> <b>'");
            edges.emplace_back(lookup(tok[1], lineno), lookup(tok[2], lineno));
        } else if (tok[0] == "root") {
            if (tok.size() != 2) throw ParseError("line " + std::to_string(lineno) + ": expected 'root <label>'");
            if (root != -1) throw ParseError("line " + std::to_string(lineno) + ": duplicate root directive");
            root = lookup(tok[1], lineno);
        } else {
            throw ParseError("line " + std::to_string(lineno) +
                             ": unknown directive: " + std::string(tok[0]));
        }
    }
    if (root == -1) throw ValidationError("tree spec declares no root");
    return TreeModel(std::move(nodes), std::move(edges), root);
}

// Hop count along the unique tree path (BFS from i).
inline int node_distance(const TreeModel& tree, int i, int j) {
    const int n = tree.size();
    if (i < 0 || i >= n || j < 0 || j >= n) throw ValidationError("node index out of range");
    if (i == j) return 0;
    std::vector<int> dist(n, -1);
    std::deque<int> queue{i};
    dist[i] = 0;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : tree.neighbors(u)) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                if (v == j) return dist[v];
                queue.push_back(v);
            }
        }
    }
    throw ValidationError("nodes are not connected");  // unreachable on a valid tree
}

inline std::vector<std::vector<int>> all_pairs_distances(const TreeModel& tree) {
    const int n = tree.size();
    std::vector<std::vector<int>> d(n);
    for (int i = 0; i < n; ++i) {
        d[i].assign(n, -1);
        std::deque<int> queue{i};
        d[i][i] = 0;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int v : tree.neighbors(u)) {
                if (d[i][v] < 0) {
                    d[i][v] = d[i][u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    return d;
}

inline int tree_diameter(const TreeModel& tree) {
    auto d = all_pairs_distances(tree);
    int best = 0;
    for (const auto& row : d) best = std::max(best, *std::max_element(row.begin(), row.end()));
    return best;
}

// Row-stochastic prior over node transitions. The unnormalized weight of
// moving from j to i is 1 - alpha*(d+1) when the hop distance d is at most
// max_hops, and alpha*(d+1) otherwise; rows are then normalized. All entries
// stay strictly positive, so no node is ever ruled out permanently.
class TransitionModel {
public:
    TransitionModel(int n, std::vector<double> row_major, double alpha, int max_hops)
        : n_(n), matrix_(std::move(row_major)), alpha_(alpha), max_hops_(max_hops) {}

    int size() const { return n_; }
    double alpha() const { return alpha_; }
    int max_hops() const { return max_hops_; }

    // probability of moving from node `from` to node `to`
    double at(int from, int to) const { return matrix_[static_cast<size_t>(from) * n_ + to]; }
    const double* row(int from) const { return matrix_.data() + static_cast<size_t>(from) * n_; }

private:
    int n_;
    std::vector<double> matrix_;
    double alpha_;
    int max_hops_;
};

inline TransitionModel transition_matrix(const TreeModel& tree, double alpha, int max_hops) {
    if (max_hops < 0) throw ValidationError("max_hops must be non-negative");
    const int diameter = tree_diameter(tree);
    if (!(alpha > 0.0) || !(alpha * (diameter + 1) < 1.0)) {
        throw ValidationError("alpha must lie in (0, 1/(diameter+1)) to keep entries positive");
    }
    const int n = tree.size();
    const auto dist = all_pairs_distances(tree);
    std::vector<double> m(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const int d = dist[i][j];
            const double w = (d <= max_hops) ? 1.0 - alpha * (d + 1) : alpha * (d + 1);
            m[static_cast<size_t>(i) * n + j] = w;
            sum += w;
        }
        for (int j = 0; j < n; ++j) m[static_cast<size_t>(i) * n + j] /= sum;
    }
    return TransitionModel(n, std::move(m), alpha, max_hops);
}

}  // namespace airtopo
