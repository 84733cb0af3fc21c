// Hierarchical density clustering: k-th nearest-neighbor core distances,
// mutual reachability, an O(n^2) Prim spanning tree, the single-linkage
// dendrogram, condensation against a minimum cluster size, and
// excess-of-mass cluster selection. Everything runs in index order with
// fixed tie-breaks, so results are deterministic.

#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "qepi/clustering.hpp"
#include "qepi/distance.hpp"

namespace qepi {

struct CondensedNode {
    int id = 0;
    int parent = -1;
    double lambda_birth = 0.0;
    double lambda_split = 0.0;            // meaningful when children.size() == 2
    std::vector<int> children;            // condensed cluster ids (0 or 2)
    std::vector<std::pair<std::size_t, double>> fallouts;  // (point, departure lambda)
    std::size_t points_at_split = 0;      // points handed to children, if any
    double stability = 0.0;
    bool selected = false;
};

struct MstEdge {
    std::size_t a = 0, b = 0;
    double weight = 0.0;
};

struct HdbscanResult {
    ClusterAssignment labels;
    std::vector<CondensedNode> tree;
    std::vector<MstEdge> mst;
    std::vector<double> core_distances;

    double mst_total_weight() const {
        std::vector<double> w;
        w.reserve(mst.size());
        for (const auto& e : mst) w.push_back(e.weight);
        std::sort(w.begin(), w.end());
        double total = 0.0;
        for (double x : w) total += x;
        return total;
    }
};

namespace detail {

// lambda = 1/distance; zero-distance merges are capped instead of
// producing infinities.
inline double level_of(double weight) { return 1.0 / std::max(weight, 1e-12); }

}  // namespace detail

inline HdbscanResult hdbscan(const DistanceMatrix& dm, std::size_t min_cluster_size, std::size_t min_samples) {
    if (min_cluster_size < 2) throw std::invalid_argument("hdbscan: min_cluster_size must be >= 2");
    if (min_samples < 1) throw std::invalid_argument("hdbscan: min_samples must be >= 1");
    const std::size_t n = dm.n;
    if (n < min_cluster_size) throw std::invalid_argument("hdbscan: need at least min_cluster_size points");

    HdbscanResult res;

    // core distance: the min_samples-th nearest neighbor, self included
    res.core_distances.resize(n);
    {
        std::vector<double> row(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) row[j] = dm.at(i, j);
            std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(min_samples - 1), row.end());
            res.core_distances[i] = row[min_samples - 1];
        }
    }
    auto mutual_reach = [&](std::size_t i, std::size_t j) {
        return std::max({res.core_distances[i], res.core_distances[j], dm.at(i, j)});
    };

    // Prim over the complete mutual-reachability graph; next vertex chosen
    // by (key, index), updates on strict improvement only
    {
        std::vector<bool> in_tree(n, false);
        std::vector<double> key(n, std::numeric_limits<double>::infinity());
        std::vector<std::size_t> parent(n, 0);
        key[0] = 0.0;
        for (std::size_t step = 0; step < n; ++step) {
            std::size_t u = n;
            for (std::size_t v = 0; v < n; ++v) {
                if (in_tree[v]) continue;
                if (u == n || key[v] < key[u]) u = v;
            }
            in_tree[u] = true;
            if (u != 0) res.mst.push_back({std::min(parent[u], u), std::max(parent[u], u), key[u]});
            for (std::size_t v = 0; v < n; ++v) {
                if (in_tree[v]) continue;
                const double w = mutual_reach(u, v);
                if (w < key[v]) {
                    key[v] = w;
                    parent[v] = u;
                }
            }
        }
    }

    // single-linkage dendrogram: leaves 0..n-1, internal nodes n..2n-2
    struct DendroNode {
        std::size_t left = 0, right = 0;
        double weight = 0.0;
        std::size_t size = 0;
    };
    std::vector<MstEdge> edges = res.mst;
    std::sort(edges.begin(), edges.end(), [](const MstEdge& x, const MstEdge& y) {
        return std::tie(x.weight, x.a, x.b) < std::tie(y.weight, y.a, y.b);
    });
    std::vector<DendroNode> dendro(n - 1);
    std::vector<std::size_t> top(2 * n - 1);  // current dendrogram node of each set
    std::vector<std::size_t> uf(2 * n - 1);
    for (std::size_t i = 0; i < 2 * n - 1; ++i) {
        top[i] = i;
        uf[i] = i;
    }
    auto find = [&](std::size_t x) {
        while (uf[x] != x) x = uf[x] = uf[uf[x]];
        return x;
    };
    auto node_size = [&](std::size_t node) { return node < n ? std::size_t{1} : dendro[node - n].size; };
    std::size_t next_internal = n;
    for (const auto& e : edges) {
        std::size_t ra = find(e.a), rb = find(e.b);
        std::size_t na = top[ra], nb = top[rb];
        dendro[next_internal - n] = {na, nb, e.weight, node_size(na) + node_size(nb)};
        uf[ra] = next_internal;
        uf[rb] = next_internal;
        top[next_internal] = next_internal;
        ++next_internal;
    }
    const std::size_t dendro_root = next_internal - 1;

    auto subtree_points = [&](std::size_t node) {
        std::vector<std::size_t> pts;
        std::vector<std::size_t> stack = {node};
        while (!stack.empty()) {
            std::size_t cur = stack.back();
            stack.pop_back();
            if (cur < n) {
                pts.push_back(cur);
            } else {
                stack.push_back(dendro[cur - n].left);
                stack.push_back(dendro[cur - n].right);
            }
        }
        std::sort(pts.begin(), pts.end());
        return pts;
    };

    // condense: walk down; sides smaller than min_cluster_size fall out of
    // the running cluster at the split level, true splits open two children
    std::vector<CondensedNode>& tree = res.tree;
    tree.push_back({0, -1, 0.0, 0.0, {}, {}, 0, 0.0, false});
    std::vector<std::pair<std::size_t, int>> work = {{dendro_root, 0}};  // (dendro node, cluster id)
    while (!work.empty()) {
        auto [node, cid] = work.back();
        work.pop_back();
        std::size_t current = node;
        while (true) {
            const DendroNode& d = dendro[current - n];
            const double lambda = detail::level_of(d.weight);
            const std::size_t sl = node_size(d.left);
            const std::size_t sr = node_size(d.right);
            const bool keep_left = sl >= min_cluster_size;
            const bool keep_right = sr >= min_cluster_size;
            if (keep_left && keep_right) {
                tree[cid].lambda_split = lambda;
                tree[cid].points_at_split = sl + sr;
                for (std::size_t side = 0; side < 2; ++side) {
                    const int child_id = static_cast<int>(tree.size());
                    tree[cid].children.push_back(child_id);
                    tree.push_back({child_id, cid, lambda, 0.0, {}, {}, 0, 0.0, false});
                    work.emplace_back(side == 0 ? d.left : d.right, child_id);
                }
                break;
            }
            if (keep_left || keep_right) {
                const std::size_t falling = keep_left ? d.right : d.left;
                for (std::size_t p : subtree_points(falling)) tree[cid].fallouts.emplace_back(p, lambda);
                current = keep_left ? d.left : d.right;
                continue;
            }
            for (std::size_t p : subtree_points(d.left)) tree[cid].fallouts.emplace_back(p, lambda);
            for (std::size_t p : subtree_points(d.right)) tree[cid].fallouts.emplace_back(p, lambda);
            break;
        }
    }

    // stability = sum over points of (departure lambda - birth lambda);
    // points passed to children depart at the split level
    for (auto& c : tree) {
        double s = 0.0;
        for (const auto& [p, lam] : c.fallouts) s += lam - c.lambda_birth;
        if (!c.children.empty()) s += (c.lambda_split - c.lambda_birth) * static_cast<double>(c.points_at_split);
        c.stability = s;
    }

    // excess-of-mass selection, children before parents (reverse creation order)
    std::vector<double> subtree_score(tree.size(), 0.0);
    for (std::size_t idx = tree.size(); idx-- > 0;) {
        CondensedNode& c = tree[idx];
        double child_sum = 0.0;
        for (int ch : c.children) child_sum += subtree_score[static_cast<std::size_t>(ch)];
        if (c.children.empty() || c.stability > child_sum) {
            c.selected = true;
            subtree_score[idx] = c.stability;
            std::vector<int> stack = c.children;
            while (!stack.empty()) {
                int ch = stack.back();
                stack.pop_back();
                tree[static_cast<std::size_t>(ch)].selected = false;
                for (int g : tree[static_cast<std::size_t>(ch)].children) stack.push_back(g);
            }
        } else {
            subtree_score[idx] = child_sum;
        }
    }

    // label each point with its nearest selected ancestor (or noise)
    std::vector<int> fell_from(n, -1);
    for (const auto& c : tree)
        for (const auto& [p, lam] : c.fallouts) fell_from[p] = c.id;
    res.labels.labels.assign(n, -1);
    for (std::size_t p = 0; p < n; ++p) {
        int cur = fell_from[p];
        while (cur >= 0) {
            if (tree[static_cast<std::size_t>(cur)].selected) {
                res.labels.labels[p] = cur;
                break;
            }
            cur = tree[static_cast<std::size_t>(cur)].parent;
        }
    }
    res.labels = canonical_labels(res.labels);
    return res;
}

inline nlohmann::json condensed_tree_json(const HdbscanResult& res) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& c : res.tree) {
        nlohmann::json fallouts = nlohmann::json::array();
        for (const auto& [p, lam] : c.fallouts) fallouts.push_back({{"point", p}, {"lambda", lam}});
        nlohmann::json node = {{"id", c.id},           {"parent", c.parent},
                               {"lambda_birth", c.lambda_birth}, {"stability", c.stability},
                               {"selected", c.selected},         {"children", c.children},
                               {"fallouts", fallouts}};
        if (!c.children.empty()) node["lambda_split"] = c.lambda_split;
        nodes.push_back(node);
    }
    return {{"nodes", nodes}};
}

}  // namespace qepi
