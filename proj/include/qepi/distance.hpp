// Pairwise distance structure consumed by the clustering QUBO and the
// density baselines: a convex combination of normalized great-circle
// distance and normalized feature-space distance.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qepi/dataset.hpp"
#include "qepi/geo.hpp"
#include "qepi/parallel.hpp"

namespace qepi {

struct DistanceMatrix {
    std::size_t n = 0;
    std::vector<double> d;  // row-major n*n, symmetric, zero diagonal
    double geo_weight = 0.5;
    double feat_weight = 0.5;

    double at(std::size_t i, std::size_t j) const { return d[i * n + j]; }
    double& at(std::size_t i, std::size_t j) { return d[i * n + j]; }

    std::vector<double> off_diagonal() const {
        std::vector<double> out;
        out.reserve(n * (n - 1) / 2);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) out.push_back(at(i, j));
        return out;
    }
};

// d[i][j] = geo_weight * haversine(i,j)/max_haversine
//         + feat_weight * euclidean(features_i, features_j)/sqrt(#features).
// Both terms lie in [0, 1]; co-located datasets get a zero geo term. The mix
// is not guaranteed to satisfy the triangle inequality and consumers must
// not assume it.
inline DistanceMatrix combined_distance(const Dataset& data, double geo_weight = 0.5,
                                        double feat_weight = 0.5, unsigned threads = 1) {
    if (data.normalization_state != NormState::normalized)
        throw std::invalid_argument("combined_distance: dataset must be normalized");
    if (data.size() < 2) throw std::invalid_argument("combined_distance: need at least 2 records");
    if (std::abs(geo_weight + feat_weight - 1.0) > 1e-9)
        throw std::invalid_argument("combined_distance: weights must sum to 1");
    if (geo_weight < 0.0 || feat_weight < 0.0)
        throw std::invalid_argument("combined_distance: weights must be non-negative");
    for (const auto& rec : data.records)
        if (!rec.lat || !rec.lon)
            throw std::invalid_argument("combined_distance: records must have coordinates");

    const std::size_t n = data.size();
    const std::size_t nf = data.num_features();
    DistanceMatrix dm;
    dm.n = n;
    dm.geo_weight = geo_weight;
    dm.feat_weight = feat_weight;
    dm.d.assign(n * n, 0.0);

    std::vector<double> geo(n * n, 0.0);
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& a = data.records[i];
            for (std::size_t j = i + 1; j < n; ++j) {
                const auto& b = data.records[j];
                geo[i * n + j] = haversine_km(*a.lat, *a.lon, *b.lat, *b.lon);
            }
        }
    });
    double geo_max = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) geo_max = std::max(geo_max, geo[i * n + j]);

    const double feat_scale = 1.0 / std::sqrt(static_cast<double>(nf));
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double feat = 0.0;
                for (std::size_t f = 0; f < nf; ++f) {
                    double diff = *data.feature(i, f) - *data.feature(j, f);
                    feat += diff * diff;
                }
                feat = std::sqrt(feat) * feat_scale;
                double g = geo_max > 0.0 ? geo[i * n + j] / geo_max : 0.0;
                dm.d[i * n + j] = geo_weight * g + feat_weight * feat;
            }
        }
    });
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) dm.d[j * n + i] = dm.d[i * n + j];
    return dm;
}

// Debug dump used by the CLI's --dump-dist flag.
inline std::string distance_matrix_csv(const DistanceMatrix& dm) {
    std::string out;
    for (std::size_t i = 0; i < dm.n; ++i) {
        for (std::size_t j = 0; j < dm.n; ++j) {
            if (j) out += ',';
            out += fmt_double(dm.at(i, j));
        }
        out += '\n';
    }
    return out;
}

}  // namespace qepi
