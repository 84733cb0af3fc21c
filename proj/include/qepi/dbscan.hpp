// Density-based clustering over a precomputed distance matrix. Neighborhoods
// include the point itself; points are scanned in index order and clusters
// expand through a FIFO queue, so the labeling is fully deterministic and a
// border point joins the first cluster whose expansion reaches it.

#pragma once

#include <cstddef>
#include <deque>
#include <stdexcept>
#include <vector>

#include "qepi/clustering.hpp"
#include "qepi/distance.hpp"

namespace qepi {

inline ClusterAssignment dbscan(const DistanceMatrix& dm, double eps, std::size_t min_pts) {
    if (eps <= 0.0) throw std::invalid_argument("dbscan: eps must be > 0");
    if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");
    const std::size_t n = dm.n;
    constexpr int kUnvisited = -2;

    auto neighbors = [&](std::size_t i) {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n; ++j)
            if (dm.at(i, j) <= eps) out.push_back(j);
        return out;
    };

    ClusterAssignment res;
    res.labels.assign(n, kUnvisited);
    int cid = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (res.labels[i] != kUnvisited) continue;
        std::vector<std::size_t> nb = neighbors(i);
        if (nb.size() < min_pts) {
            res.labels[i] = -1;
            continue;
        }
        res.labels[i] = cid;
        std::deque<std::size_t> queue(nb.begin(), nb.end());
        while (!queue.empty()) {
            std::size_t j = queue.front();
            queue.pop_front();
            if (res.labels[j] == -1) res.labels[j] = cid;  // border point, claimed once
            if (res.labels[j] != kUnvisited) continue;
            res.labels[j] = cid;
            std::vector<std::size_t> nj = neighbors(j);
            if (nj.size() >= min_pts) queue.insert(queue.end(), nj.begin(), nj.end());
        }
        ++cid;
    }
    return res;
}

}  // namespace qepi
