#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

namespace qepi {

// Per-point integer labels; -1 marks noise. Non-noise ids are contiguous
// from 0 in order of first appearance.
struct ClusterAssignment {
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }

    int num_clusters() const {
        int top = -1;
        for (int l : labels) top = std::max(top, l);
        return top + 1;
    }

    bool has_noise() const {
        for (int l : labels)
            if (l < 0) return true;
        return false;
    }
};

// Remaps non-noise ids to 0..c-1 in order of first appearance; noise stays -1.
inline ClusterAssignment canonical_labels(const ClusterAssignment& a) {
    ClusterAssignment out;
    out.labels.reserve(a.labels.size());
    std::map<int, int> remap;
    for (int l : a.labels) {
        if (l < 0) {
            out.labels.push_back(-1);
            continue;
        }
        auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
        out.labels.push_back(it->second);
    }
    return out;
}

inline std::vector<std::size_t> cluster_sizes(const ClusterAssignment& a) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(std::max(0, a.num_clusters())), 0);
    for (int l : a.labels)
        if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
}

}  // namespace qepi
