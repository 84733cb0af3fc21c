// Independent reference implementations used only by tests. Each one is a
// direct transcription of a definition, kept free of the library's
// production code paths so it can serve as an oracle.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <vector>

namespace oracle {

// Spherical law of cosines; an independent route to great-circle distance.
inline double law_of_cosines_km(double lat1, double lon1, double lat2, double lon2) {
    constexpr double deg = std::numbers::pi / 180.0;
    double phi1 = lat1 * deg, phi2 = lat2 * deg;
    double cosd = std::sin(phi1) * std::sin(phi2) + std::cos(phi1) * std::cos(phi2) * std::cos((lon2 - lon1) * deg);
    cosd = std::clamp(cosd, -1.0, 1.0);
    return 6371.0 * std::acos(cosd);
}

// Plain Lloyd iterations on 2-D points from explicit starting centroids.
inline std::vector<int> lloyd_kmeans_2d(const std::vector<std::pair<double, double>>& pts,
                                        std::vector<std::pair<double, double>> centroids, int iters = 50) {
    std::vector<int> labels(pts.size(), 0);
    const std::size_t k = centroids.size();
    for (int it = 0; it < iters; ++it) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                double dx = pts[i].first - centroids[c].first;
                double dy = pts[i].second - centroids[c].second;
                double d = dx * dx + dy * dy;
                if (d < best) {
                    best = d;
                    labels[i] = static_cast<int>(c);
                }
            }
        }
        std::vector<std::pair<double, double>> sums(k, {0.0, 0.0});
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            sums[labels[i]].first += pts[i].first;
            sums[labels[i]].second += pts[i].second;
            ++counts[labels[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0)
                centroids[c] = {sums[c].first / counts[c], sums[c].second / counts[c]};
        }
    }
    return labels;
}

// Best-permutation agreement for two binary labelings.
inline double binary_best_permutation_accuracy(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] == b[i]) ++same;
    return static_cast<double>(std::max(same, a.size() - same)) / static_cast<double>(a.size());
}

// Direct-definition DBSCAN: core points, connected components of cores
// under eps-reachability (component ids ordered by their smallest core
// index), then border points attach to the lowest-id reachable cluster.
inline std::vector<int> naive_dbscan(const std::vector<double>& d, std::size_t n, double eps,
                                     std::size_t min_pts) {
    auto at = [&](std::size_t i, std::size_t j) { return d[i * n + j]; };
    std::vector<bool> core(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t cnt = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (at(i, j) <= eps) ++cnt;
        core[i] = cnt >= min_pts;
    }
    std::vector<int> comp(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i] || comp[i] >= 0) continue;
        // flood fill over cores
        std::vector<std::size_t> stack = {i};
        comp[i] = next;
        while (!stack.empty()) {
            std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < n; ++v) {
                if (core[v] && comp[v] < 0 && at(u, v) <= eps) {
                    comp[v] = next;
                    stack.push_back(v);
                }
            }
        }
        ++next;
    }
    std::vector<int> labels(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) {
            labels[i] = comp[i];
            continue;
        }
        int best = std::numeric_limits<int>::max();
        for (std::size_t c = 0; c < n; ++c)
            if (core[c] && at(i, c) <= eps) best = std::min(best, comp[c]);
        labels[i] = best == std::numeric_limits<int>::max() ? -1 : best;
    }
    return labels;
}

// Kruskal MST total weight with a plain union-find.
inline double kruskal_mst_weight(const std::vector<double>& w, std::size_t n) {
    struct Edge {
        double weight;
        std::size_t a, b;
    };
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.push_back({w[i * n + j], i, j});
    std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
        if (x.weight != y.weight) return x.weight < y.weight;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<double> chosen;
    for (const auto& e : edges) {
        std::size_t ra = find(e.a), rb = find(e.b);
        if (ra == rb) continue;
        parent[ra] = rb;
        chosen.push_back(e.weight);
    }
    std::sort(chosen.begin(), chosen.end());
    double total = 0.0;
    for (double c : chosen) total += c;
    return total;
}

}  // namespace oracle
