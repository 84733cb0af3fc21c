// Causal analysis over discretized SDoH/HIV variables: quantile
// discretization, BIC-scored greedy structure search with restarts,
// Laplace parameter fitting, observational influence scoring against a
// target, and inference by amplitude-amplified rejection sampling over the
// exactly simulated joint state.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "qepi/bayesnet.hpp"
#include "qepi/common.hpp"
#include "qepi/dataset.hpp"
#include "qepi/parallel.hpp"

namespace qepi {

struct DiscretizedDataset {
    std::vector<std::string> names;
    std::vector<std::size_t> cards;
    std::vector<std::vector<double>> bin_edges;       // per variable, ascending
    std::vector<std::vector<std::size_t>> rows;       // row-major level indices
    std::vector<std::string> warnings;

    std::size_t num_vars() const { return names.size(); }
    std::size_t num_rows() const { return rows.size(); }
};

// Quantile binning into `bins` levels per feature; a value tied with an edge
// goes to the lower bin. Columns with fewer distinct values than bins
// degrade to distinct-value bins with a warning.
inline DiscretizedDataset discretize(const Dataset& data, std::size_t bins = 3) {
    if (data.normalization_state != NormState::normalized)
        throw std::invalid_argument("discretize: dataset must be normalized");
    if (bins < 2) throw std::invalid_argument("discretize: bins must be >= 2");
    if (data.any_feature_missing()) throw std::invalid_argument("discretize: missing values present");

    DiscretizedDataset out;
    out.names = data.feature_names();
    const std::size_t nf = out.names.size();
    const std::size_t n = data.size();
    out.rows.assign(n, std::vector<std::size_t>(nf, 0));

    for (std::size_t f = 0; f < nf; ++f) {
        std::vector<double> values(n);
        for (std::size_t r = 0; r < n; ++r) values[r] = *data.feature(r, f);
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> distinct = sorted;
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

        std::vector<double> edges;
        if (distinct.size() < bins) {
            out.warnings.push_back("feature " + out.names[f] + " has only " + std::to_string(distinct.size()) +
                                   " distinct values; using distinct-value bins");
            edges.assign(distinct.begin(), distinct.size() > 1 ? distinct.end() - 1 : distinct.begin());
        } else {
            for (std::size_t j = 1; j < bins; ++j) {
                const std::size_t rank =
                    static_cast<std::size_t>(std::ceil(static_cast<double>(n * j) / static_cast<double>(bins)));
                edges.push_back(sorted[std::max<std::size_t>(rank, 1) - 1]);
            }
            edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        }
        out.bin_edges.push_back(edges);
        out.cards.push_back(edges.size() + 1);
        for (std::size_t r = 0; r < n; ++r) {
            std::size_t level = 0;
            for (double e : edges)
                if (values[r] > e) ++level;
            out.rows[r][f] = level;
        }
    }
    return out;
}

namespace detail {

// Maximum log-likelihood of one node given a parent set, plus the local BIC
// penalty. Decomposable across nodes.
inline double family_score(const DiscretizedDataset& data, std::size_t node,
                           const std::vector<std::size_t>& parents) {
    const std::size_t card = data.cards[node];
    std::size_t configs = 1;
    for (std::size_t p : parents) configs *= data.cards[p];
    std::vector<double> counts(configs * card, 0.0);
    std::vector<double> totals(configs, 0.0);
    for (const auto& row : data.rows) {
        std::size_t cfg = 0;
        for (std::size_t p : parents) cfg = cfg * data.cards[p] + row[p];
        counts[cfg * card + row[node]] += 1.0;
        totals[cfg] += 1.0;
    }
    double ll = 0.0;
    for (std::size_t cfg = 0; cfg < configs; ++cfg) {
        if (totals[cfg] == 0.0) continue;
        for (std::size_t l = 0; l < card; ++l) {
            const double c = counts[cfg * card + l];
            if (c > 0.0) ll += c * std::log(c / totals[cfg]);
        }
    }
    const double free_params = static_cast<double>((card - 1) * configs);
    const double n = static_cast<double>(data.num_rows());
    return ll - 0.5 * free_params * (n > 0.0 ? std::log(n) : 0.0);
}

}  // namespace detail

// Decomposable BIC of a structure: sum of per-node family scores. Larger is
// better.
inline double bic_score(const Dag& dag, const DiscretizedDataset& data) {
    if (dag.n != data.num_vars()) throw std::invalid_argument("bic_score: node count mismatch");
    double total = 0.0;
    for (std::size_t v = 0; v < dag.n; ++v) total += detail::family_score(data, v, dag.parents_of(v));
    return total;
}

struct HillClimbConfig {
    std::size_t max_parents = 2;
    std::size_t restarts = 8;
    unsigned threads = 1;
};

namespace detail {

struct FamilyCache {
    const DiscretizedDataset* data;
    std::map<std::pair<std::size_t, std::vector<std::size_t>>, double> cache;

    double get(std::size_t node, std::vector<std::size_t> parents) {
        std::sort(parents.begin(), parents.end());
        auto key = std::make_pair(node, parents);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        double score = family_score(*data, node, key.second);
        cache.emplace(std::move(key), score);
        return score;
    }
};

// Greedy best-improvement climb over add/remove/reverse moves, enumerated
// in a fixed lexicographic order so runs are reproducible.
inline std::pair<Dag, double> climb_from(Dag dag, FamilyCache& cache, std::size_t max_parents) {
    const std::size_t n = dag.n;
    std::vector<double> node_score(n);
    for (std::size_t v = 0; v < n; ++v) node_score[v] = cache.get(v, dag.parents_of(v));

    auto with = [&](std::vector<std::size_t> parents, std::size_t add_var) {
        parents.push_back(add_var);
        return parents;
    };
    auto without = [&](const std::vector<std::size_t>& parents, std::size_t drop_var) {
        std::vector<std::size_t> out;
        for (std::size_t p : parents)
            if (p != drop_var) out.push_back(p);
        return out;
    };

    while (true) {
        double best_delta = 1e-12;
        int best_kind = -1;  // 0 add, 1 remove, 2 reverse
        std::size_t best_u = 0, best_v = 0;
        for (std::size_t u = 0; u < n; ++u) {
            for (std::size_t v = 0; v < n; ++v) {
                if (u == v) continue;
                const std::vector<std::size_t> pv = dag.parents_of(v);
                if (!dag.has_edge(u, v)) {
                    if (dag.has_edge(v, u) || pv.size() >= max_parents) continue;
                    dag.add_edge(u, v);
                    const bool ok = dag.is_acyclic();
                    dag.remove_edge(u, v);
                    if (!ok) continue;
                    const double delta = cache.get(v, with(pv, u)) - node_score[v];
                    if (delta > best_delta) {
                        best_delta = delta;
                        best_kind = 0;
                        best_u = u;
                        best_v = v;
                    }
                } else {
                    // remove u -> v
                    double delta = cache.get(v, without(pv, u)) - node_score[v];
                    if (delta > best_delta) {
                        best_delta = delta;
                        best_kind = 1;
                        best_u = u;
                        best_v = v;
                    }
                    // reverse u -> v
                    const std::vector<std::size_t> pu = dag.parents_of(u);
                    if (pu.size() >= max_parents) continue;
                    dag.remove_edge(u, v);
                    dag.add_edge(v, u);
                    const bool ok = dag.is_acyclic();
                    dag.remove_edge(v, u);
                    dag.add_edge(u, v);
                    if (!ok) continue;
                    delta = (cache.get(v, without(pv, u)) - node_score[v]) +
                            (cache.get(u, with(pu, v)) - node_score[u]);
                    if (delta > best_delta) {
                        best_delta = delta;
                        best_kind = 2;
                        best_u = u;
                        best_v = v;
                    }
                }
            }
        }
        if (best_kind < 0) break;
        if (best_kind == 0) {
            dag.add_edge(best_u, best_v);
        } else if (best_kind == 1) {
            dag.remove_edge(best_u, best_v);
        } else {
            dag.remove_edge(best_u, best_v);
            dag.add_edge(best_v, best_u);
            node_score[best_u] = cache.get(best_u, dag.parents_of(best_u));
        }
        node_score[best_v] = cache.get(best_v, dag.parents_of(best_v));
    }
    double total = 0.0;
    for (std::size_t v = 0; v < n; ++v) total += node_score[v];
    return {dag, total};
}

inline Dag random_dag(std::size_t n, std::size_t max_parents, Rng& rng) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    Dag dag(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (rng.uniform() < 0.25 && dag.parents_of(order[j]).size() < max_parents)
                dag.add_edge(order[i], order[j]);
        }
    }
    return dag;
}

}  // namespace detail

// Restart 0 climbs from the empty graph; the rest climb from seeded random
// DAGs. The best result wins, ties toward the lower restart index.
inline Dag hill_climb_structure(const DiscretizedDataset& data, const HillClimbConfig& cfg, std::uint64_t seed) {
    if (cfg.max_parents < 1) throw std::invalid_argument("hill_climb_structure: max_parents must be >= 1");
    const std::size_t n = data.num_vars();
    const std::size_t restarts = std::max<std::size_t>(1, cfg.restarts);

    std::vector<Dag> starts;
    starts.emplace_back(n);
    for (std::size_t r = 1; r < restarts; ++r) {
        Rng rng(seed + r);
        starts.push_back(detail::random_dag(n, cfg.max_parents, rng));
    }

    std::vector<std::pair<Dag, double>> results(restarts, {Dag(n), 0.0});
    parallel_for(restarts, cfg.threads, [&](std::size_t lo, std::size_t hi) {
        detail::FamilyCache cache{&data, {}};
        for (std::size_t r = lo; r < hi; ++r) results[r] = detail::climb_from(starts[r], cache, cfg.max_parents);
    });
    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r)
        if (results[r].second > results[best].second) best = r;
    return results[best].first;
}

// CPT entries (count + alpha) / (row total + alpha * cardinality); unseen
// parent configurations become uniform rows.
inline BayesNet fit_parameters(const Dag& dag, const DiscretizedDataset& data, double alpha = 1.0) {
    if (alpha <= 0.0) throw std::invalid_argument("fit_parameters: alpha must be > 0");
    BayesNet net;
    net.names = data.names;
    net.cards = data.cards;
    net.dag = dag;
    for (std::size_t v = 0; v < data.num_vars(); ++v) {
        const std::size_t card = data.cards[v];
        const std::vector<std::size_t> parents = dag.parents_of(v);
        std::size_t configs = 1;
        for (std::size_t p : parents) configs *= data.cards[p];
        std::vector<double> counts(configs * card, 0.0);
        std::vector<double> totals(configs, 0.0);
        for (const auto& row : data.rows) {
            std::size_t cfg = 0;
            for (std::size_t p : parents) cfg = cfg * data.cards[p] + row[p];
            counts[cfg * card + row[v]] += 1.0;
            totals[cfg] += 1.0;
        }
        std::vector<double> table(configs * card, 0.0);
        for (std::size_t cfg = 0; cfg < configs; ++cfg)
            for (std::size_t l = 0; l < card; ++l)
                table[cfg * card + l] =
                    (counts[cfg * card + l] + alpha) / (totals[cfg] + alpha * static_cast<double>(card));
        net.cpt.push_back(std::move(table));
    }
    return net;
}

using InferenceFn =
    std::function<std::vector<double>(std::size_t query, const std::map<std::size_t, std::size_t>& evidence)>;

// Observational max-contrast influence: for each factor, the widest spread
// of P(target at its top level | factor level) over the factor's levels.
inline std::vector<std::pair<std::string, double>> influence_scores(const BayesNet& net, std::size_t target,
                                                                    const InferenceFn& infer) {
    if (target >= net.num_vars()) throw std::invalid_argument("influence_scores: target out of range");
    const std::size_t top = net.cards[target] - 1;
    std::vector<std::pair<std::string, double>> scores;
    for (std::size_t f = 0; f < net.num_vars(); ++f) {
        if (f == target) continue;
        double lo = 1.0, hi = 0.0;
        for (std::size_t level = 0; level < net.cards[f]; ++level) {
            const std::vector<double> dist = infer(target, {{f, level}});
            lo = std::min(lo, dist[top]);
            hi = std::max(hi, dist[top]);
        }
        scores.emplace_back(net.names[f], std::max(0.0, hi - lo));
    }
    std::stable_sort(scores.begin(), scores.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return scores;
}

inline std::vector<std::pair<std::string, double>> influence_scores(const BayesNet& net, std::size_t target) {
    return influence_scores(net, target, [&](std::size_t query, const std::map<std::size_t, std::size_t>& ev) {
        return variable_elimination(net, query, ev);
    });
}

inline constexpr std::size_t kMaxJointConfigs = 4096;

// One Grover step: flip the sign of the good (evidence-consistent)
// amplitudes, then reflect about the initial state.
inline void grover_iterate(std::vector<double>& amps, const std::vector<double>& initial,
                           const std::vector<bool>& good) {
    for (std::size_t i = 0; i < amps.size(); ++i)
        if (good[i]) amps[i] = -amps[i];
    double dot = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) dot += initial[i] * amps[i];
    for (std::size_t i = 0; i < amps.size(); ++i) amps[i] = 2.0 * dot * initial[i] - amps[i];
}

struct QuantumInferenceResult {
    std::vector<double> distribution;   // estimated P(query | evidence)
    double acceptance_rate = 0.0;       // empirical fraction of kept samples
    double exact_acceptance = 0.0;      // sin^2((2r+1) * theta), exactly
    std::size_t iterations = 0;         // Grover iterations r
    double evidence_probability = 0.0;  // P(evidence)
};

// Rejection sampling over the exactly simulated joint state sqrt(P(x)),
// boosted by r = floor(pi/(4 theta) - 1/2) amplitude-amplification rounds
// with theta = arcsin(sqrt(P(evidence))). Amplification rotates the good
// and bad components rigidly, so the post-selected conditional is unbiased
// for any r.
inline QuantumInferenceResult quantum_rejection_sample(const BayesNet& net, std::size_t query,
                                                       const std::map<std::size_t, std::size_t>& evidence,
                                                       std::size_t shots, std::uint64_t seed) {
    if (evidence.count(query)) throw std::invalid_argument("quantum_rejection_sample: query is in the evidence");
    if (shots < 1) throw std::invalid_argument("quantum_rejection_sample: shots must be >= 1");
    const std::size_t total = joint_size(net);
    if (total > kMaxJointConfigs)
        throw infeasible_error("quantum_rejection_sample: joint state space " + std::to_string(total) +
                               " exceeds the cap of " + std::to_string(kMaxJointConfigs));

    const std::vector<double> joint = joint_distribution(net);
    std::vector<bool> good(total, false);
    double p_evidence = 0.0;
    std::vector<std::size_t> query_level(total, 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
        const std::vector<std::size_t> a = joint_unrank(net, idx);
        bool ok = true;
        for (const auto& [var, level] : evidence)
            if (a[var] != level) {
                ok = false;
                break;
            }
        good[idx] = ok;
        query_level[idx] = a[query];
        if (ok) p_evidence += joint[idx];
    }
    if (p_evidence <= 0.0) throw std::runtime_error("quantum_rejection_sample: evidence has zero probability");

    QuantumInferenceResult res;
    res.evidence_probability = p_evidence;
    const double theta = std::asin(std::min(1.0, std::sqrt(p_evidence)));
    // the 1e-9 nudge keeps exact integer boundaries (e.g. P(e) = 1/4) from
    // rounding down through floating-point error
    const double raw = std::numbers::pi / (4.0 * theta) - 0.5 + 1e-9;
    res.iterations = raw > 0.0 ? static_cast<std::size_t>(std::floor(raw)) : 0;
    res.exact_acceptance = std::pow(std::sin((2.0 * static_cast<double>(res.iterations) + 1.0) * theta), 2.0);

    std::vector<double> amps(total);
    for (std::size_t i = 0; i < total; ++i) amps[i] = std::sqrt(joint[i]);
    const std::vector<double> initial = amps;
    for (std::size_t it = 0; it < res.iterations; ++it) grover_iterate(amps, initial, good);

    std::vector<double> cdf(total);
    double acc = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        acc += amps[i] * amps[i];
        cdf[i] = acc;
    }
    Rng rng(seed);
    std::vector<double> hist(net.cards[query], 0.0);
    std::size_t accepted = 0;
    for (std::size_t s = 0; s < shots; ++s) {
        const double u = rng.uniform() * acc;
        const std::size_t idx = std::min<std::size_t>(
            static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()), total - 1);
        if (!good[idx]) continue;
        ++accepted;
        hist[query_level[idx]] += 1.0;
    }
    res.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(shots);
    res.distribution.assign(net.cards[query], 0.0);
    if (accepted > 0)
        for (std::size_t l = 0; l < hist.size(); ++l) res.distribution[l] = hist[l] / static_cast<double>(accepted);
    return res;
}

inline nlohmann::json influence_json(const std::vector<std::pair<std::string, double>>& scores) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [name, score] : scores) arr.push_back({{"factor", name}, {"score", score}});
    return arr;
}

}  // namespace qepi
