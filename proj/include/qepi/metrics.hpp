// Cluster scoring and the method-comparison report: best-permutation point
// accuracy (optimal assignment over the contingency table), adjusted Rand
// index, silhouette, and a benchmark harness that times each method and
// renders the comparison as JSON or a markdown table.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qepi/clustering.hpp"
#include "qepi/common.hpp"
#include "qepi/distance.hpp"

namespace qepi {

namespace detail {

// Hungarian method with potentials on an n x m cost matrix (n <= m);
// returns the column matched to each row, minimizing total cost.
inline std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const int m = n == 0 ? 0 : static_cast<int>(cost[0].size());
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            int i0 = p[j0], j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

struct Contingency {
    std::vector<std::vector<double>> counts;  // pred id x truth id, noise excluded
    std::size_t n = 0;
};

inline Contingency contingency_table(const ClusterAssignment& pred, const ClusterAssignment& truth,
                                     bool pred_noise_as_label) {
    if (pred.labels.size() != truth.labels.size())
        throw std::invalid_argument("cluster metrics: label length mismatch");
    std::map<int, std::size_t> pred_ids, truth_ids;
    for (int l : pred.labels) {
        if (l < 0 && !pred_noise_as_label) continue;
        pred_ids.try_emplace(l, pred_ids.size());
    }
    for (int l : truth.labels) truth_ids.try_emplace(l, truth_ids.size());
    Contingency c;
    c.n = pred.labels.size();
    c.counts.assign(std::max<std::size_t>(pred_ids.size(), 1),
                    std::vector<double>(std::max<std::size_t>(truth_ids.size(), 1), 0.0));
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        if (pred.labels[i] < 0 && !pred_noise_as_label) continue;
        c.counts[pred_ids.at(pred.labels[i])][truth_ids.at(truth.labels[i])] += 1.0;
    }
    return c;
}

}  // namespace detail

// Fraction of points whose label agrees with truth under the best one-to-one
// mapping of predicted ids onto truth ids. Noise never matches anything and
// unmatched ids map to nothing.
inline double permutation_accuracy(const ClusterAssignment& pred, const ClusterAssignment& truth) {
    if (pred.labels.size() != truth.labels.size())
        throw std::invalid_argument("permutation_accuracy: label length mismatch");
    if (pred.labels.empty()) throw std::invalid_argument("permutation_accuracy: empty labels");
    for (int l : truth.labels)
        if (l < 0) throw std::invalid_argument("permutation_accuracy: truth must not contain noise");
    detail::Contingency c = detail::contingency_table(pred, truth, /*pred_noise_as_label=*/false);

    // maximize matched mass = minimize negated counts; keep rows <= cols
    const bool transpose = c.counts.size() > c.counts[0].size();
    const std::size_t rows = transpose ? c.counts[0].size() : c.counts.size();
    const std::size_t cols = transpose ? c.counts.size() : c.counts[0].size();
    std::vector<std::vector<double>> cost(rows, std::vector<double>(cols, 0.0));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t col = 0; col < cols; ++col)
            cost[r][col] = -(transpose ? c.counts[col][r] : c.counts[r][col]);
    std::vector<int> match = detail::min_cost_assignment(cost);
    double matched = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        if (match[r] >= 0) matched += -cost[r][static_cast<std::size_t>(match[r])];
    return matched / static_cast<double>(c.n);
}

// Standard pair-counting adjusted Rand index; predicted noise counts as its
// own label. Degenerate identical-trivial partitions score 1.
inline double adjusted_rand_index(const ClusterAssignment& pred, const ClusterAssignment& truth) {
    if (pred.labels.size() != truth.labels.size())
        throw std::invalid_argument("adjusted_rand_index: label length mismatch");
    const std::size_t n = pred.labels.size();
    if (n < 2) throw std::invalid_argument("adjusted_rand_index: need at least 2 points");
    detail::Contingency c = detail::contingency_table(pred, truth, /*pred_noise_as_label=*/true);
    auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double index = 0.0, row_sum = 0.0, col_sum = 0.0;
    std::vector<double> col_totals(c.counts[0].size(), 0.0);
    for (const auto& row : c.counts) {
        double total = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            index += choose2(row[j]);
            total += row[j];
            col_totals[j] += row[j];
        }
        row_sum += choose2(total);
    }
    for (double t : col_totals) col_sum += choose2(t);
    const double expected = row_sum * col_sum / choose2(static_cast<double>(n));
    const double max_index = 0.5 * (row_sum + col_sum);
    const double denom = max_index - expected;
    if (std::abs(denom) < 1e-12) return 1.0;
    return (index - expected) / denom;
}

// Mean silhouette over non-noise points; singleton-cluster points score 0,
// and identical points (a = b = 0) score 0 as well.
inline double silhouette(const DistanceMatrix& dm, const ClusterAssignment& a) {
    if (a.labels.size() != dm.n) throw std::invalid_argument("silhouette: label length mismatch");
    const int k = a.num_clusters();
    if (k < 2) throw std::invalid_argument("silhouette: need at least 2 clusters");
    std::vector<std::size_t> sizes = cluster_sizes(a);
    double acc = 0.0;
    std::size_t scored = 0;
    for (std::size_t i = 0; i < dm.n; ++i) {
        const int ci = a.labels[i];
        if (ci < 0) continue;
        ++scored;
        if (sizes[static_cast<std::size_t>(ci)] <= 1) continue;  // scores 0
        std::vector<double> mean_to(static_cast<std::size_t>(k), 0.0);
        for (std::size_t j = 0; j < dm.n; ++j) {
            if (j == i || a.labels[j] < 0) continue;
            mean_to[static_cast<std::size_t>(a.labels[j])] += dm.at(i, j);
        }
        double ai = mean_to[static_cast<std::size_t>(ci)] /
                    static_cast<double>(sizes[static_cast<std::size_t>(ci)] - 1);
        double bi = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == ci || sizes[static_cast<std::size_t>(c)] == 0) continue;
            bi = std::min(bi, mean_to[static_cast<std::size_t>(c)] / static_cast<double>(sizes[static_cast<std::size_t>(c)]));
        }
        double denom = std::max(ai, bi);
        if (denom > 0.0 && std::isfinite(bi)) acc += (bi - ai) / denom;
    }
    return scored > 0 ? acc / static_cast<double>(scored) : 0.0;
}

enum class Granularity { Low, Medium, High };

inline const char* granularity_name(Granularity g) {
    switch (g) {
        case Granularity::Low: return "Low";
        case Granularity::Medium: return "Medium";
        default: return "High";
    }
}

struct BenchmarkRow {
    std::string method;
    std::optional<double> accuracy;          // absent without ground truth
    std::optional<double> ari;
    std::optional<double> silhouette_score;  // absent with < 2 clusters
    double wall_time_seconds = 0.0;
    std::size_t n_clusters = 0;
    double median_cluster_size = 0.0;
    Granularity granularity = Granularity::Low;
    std::string error;                       // non-empty when the method failed
    ClusterAssignment labels;
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;
};

struct BenchMethod {
    std::string name;
    std::function<ClusterAssignment(const DistanceMatrix&)> run;
};

inline double median_of_sizes(const std::vector<std::size_t>& sizes) {
    if (sizes.empty()) return 0.0;
    std::vector<std::size_t> s = sizes;
    std::sort(s.begin(), s.end());
    const std::size_t mid = s.size() / 2;
    if (s.size() % 2 == 1) return static_cast<double>(s[mid]);
    return (static_cast<double>(s[mid - 1]) + static_cast<double>(s[mid])) / 2.0;
}

// Bucketing heuristic for the granularity column: two or fewer clusters is
// Low; a median cluster holding over a quarter of the data is Medium;
// anything finer is High.
inline Granularity granularity_of(std::size_t n_clusters, double median_size, std::size_t n_points) {
    if (n_clusters <= 2) return Granularity::Low;
    if (median_size > static_cast<double>(n_points) / 4.0) return Granularity::Medium;
    return Granularity::High;
}

// Runs each method over the matrix (one untimed warm-up, then one timed
// run), scores it against the optional ground truth, and fills a row per
// method. Method failures are recorded in-row and do not abort the report.
inline BenchmarkReport benchmark(const DistanceMatrix& dm, const std::optional<ClusterAssignment>& truth,
                                 const std::vector<BenchMethod>& methods) {
    BenchmarkReport report;
    for (const auto& method : methods) {
        BenchmarkRow row;
        row.method = method.name;
        try {
            method.run(dm);  // warm-up, excluded from timing
            const auto t0 = std::chrono::steady_clock::now();
            row.labels = method.run(dm);
            row.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            row.n_clusters = static_cast<std::size_t>(std::max(0, row.labels.num_clusters()));
            row.median_cluster_size = median_of_sizes(cluster_sizes(row.labels));
            row.granularity = granularity_of(row.n_clusters, row.median_cluster_size, dm.n);
            if (truth) {
                row.accuracy = permutation_accuracy(row.labels, *truth);
                row.ari = adjusted_rand_index(row.labels, *truth);
            }
            if (row.n_clusters >= 2) row.silhouette_score = silhouette(dm, row.labels);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

struct BenchmarkDisplayRow {
    std::string method;
    std::string accuracy;     // e.g. "85%" or "n/a"
    std::string time;         // e.g. "3.2 s"
    std::string granularity;  // Low / Medium / High
};

inline BenchmarkDisplayRow display_row(const BenchmarkRow& row) {
    BenchmarkDisplayRow d;
    d.method = row.method;
    if (!row.error.empty()) {
        d.accuracy = d.time = d.granularity = "n/a";
        return d;
    }
    d.accuracy = row.accuracy ? std::to_string(static_cast<long long>(std::llround(*row.accuracy * 100.0))) + "%"
                              : std::string("n/a");
    d.time = fmt_fixed(row.wall_time_seconds, 1) + " s";
    d.granularity = granularity_name(row.granularity);
    return d;
}

// Markdown comparison table (metrics as rows, one column per method).
inline std::string benchmark_markdown(const std::vector<BenchmarkDisplayRow>& rows) {
    std::string out = "| Metric |";
    for (const auto& r : rows) out += " " + r.method + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < rows.size(); ++i) out += "---|";
    out += "\n| Clustering Accuracy |";
    for (const auto& r : rows) out += " " + r.accuracy + " |";
    out += "\n| Time Efficiency |";
    for (const auto& r : rows) out += " " + r.time + " |";
    out += "\n| Cluster Granularity |";
    for (const auto& r : rows) out += " " + r.granularity + " |";
    out += "\n";
    return out;
}

inline std::string benchmark_markdown(const BenchmarkReport& report) {
    std::vector<BenchmarkDisplayRow> rows;
    rows.reserve(report.rows.size());
    for (const auto& r : report.rows) rows.push_back(display_row(r));
    return benchmark_markdown(rows);
}

inline nlohmann::json benchmark_json(const BenchmarkReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json row = {{"method", r.method},
                              {"wall_time_seconds", r.wall_time_seconds},
                              {"n_clusters", r.n_clusters},
                              {"median_cluster_size", r.median_cluster_size},
                              {"granularity", granularity_name(r.granularity)}};
        row["accuracy"] = r.accuracy ? nlohmann::json(*r.accuracy) : nlohmann::json();
        row["ari"] = r.ari ? nlohmann::json(*r.ari) : nlohmann::json();
        row["silhouette"] = r.silhouette_score ? nlohmann::json(*r.silhouette_score) : nlohmann::json();
        if (!r.error.empty()) row["error"] = r.error;
        rows.push_back(row);
    }
    return {{"rows", rows}};
}

}  // namespace qepi
