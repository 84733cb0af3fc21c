// Discrete Bayesian networks: DAG bookkeeping, Laplace-smoothed conditional
// probability tables, exact inference by variable elimination with a
// min-degree ordering, ancestral sampling, and JSON serialization.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "qepi/common.hpp"
#include "qepi/rng.hpp"

namespace qepi {

struct Dag {
    std::size_t n = 0;
    std::vector<std::vector<bool>> adj;  // adj[u][v]: edge u -> v

    explicit Dag(std::size_t nodes = 0) : n(nodes), adj(nodes, std::vector<bool>(nodes, false)) {}

    bool has_edge(std::size_t u, std::size_t v) const { return adj[u][v]; }
    void add_edge(std::size_t u, std::size_t v) { adj[u][v] = true; }
    void remove_edge(std::size_t u, std::size_t v) { adj[u][v] = false; }

    std::vector<std::size_t> parents_of(std::size_t v) const {
        std::vector<std::size_t> out;
        for (std::size_t u = 0; u < n; ++u)
            if (adj[u][v]) out.push_back(u);
        return out;
    }

    std::size_t edge_count() const {
        std::size_t c = 0;
        for (const auto& row : adj)
            for (bool b : row) c += b ? 1 : 0;
        return c;
    }

    // Kahn topological sort; empty result means a cycle.
    std::vector<std::size_t> topological_order() const {
        std::vector<std::size_t> indeg(n, 0);
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = 0; v < n; ++v)
                if (adj[u][v]) ++indeg[v];
        std::vector<std::size_t> order, ready;
        for (std::size_t v = 0; v < n; ++v)
            if (indeg[v] == 0) ready.push_back(v);
        while (!ready.empty()) {
            std::size_t u = ready.front();
            ready.erase(ready.begin());
            order.push_back(u);
            for (std::size_t v = 0; v < n; ++v) {
                if (!adj[u][v]) continue;
                if (--indeg[v] == 0) ready.push_back(v);
            }
        }
        if (order.size() != n) order.clear();
        return order;
    }

    bool is_acyclic() const { return n == 0 || !topological_order().empty(); }
};

// Parent configurations index CPT rows in mixed radix with the first
// (lowest-index) parent varying slowest; each row stores `card` entries.
struct BayesNet {
    std::vector<std::string> names;
    std::vector<std::size_t> cards;
    Dag dag;
    std::vector<std::vector<double>> cpt;  // per node: row-major [parent_config][level]

    std::size_t num_vars() const { return names.size(); }

    std::size_t parent_configs(std::size_t v) const {
        std::size_t c = 1;
        for (std::size_t p : dag.parents_of(v)) c *= cards[p];
        return c;
    }

    std::size_t parent_config_index(std::size_t v, const std::vector<std::size_t>& assignment) const {
        std::size_t idx = 0;
        for (std::size_t p : dag.parents_of(v)) idx = idx * cards[p] + assignment[p];
        return idx;
    }

    double prob(std::size_t v, const std::vector<std::size_t>& assignment) const {
        return cpt[v][parent_config_index(v, assignment) * cards[v] + assignment[v]];
    }
};

// Joint probability table over all configurations, indexed in mixed radix
// with variable 0 varying slowest.
inline std::size_t joint_size(const BayesNet& net) {
    std::size_t s = 1;
    for (std::size_t c : net.cards) s *= c;
    return s;
}

inline std::vector<std::size_t> joint_unrank(const BayesNet& net, std::size_t index) {
    std::vector<std::size_t> assignment(net.num_vars(), 0);
    for (std::size_t v = net.num_vars(); v-- > 0;) {
        assignment[v] = index % net.cards[v];
        index /= net.cards[v];
    }
    return assignment;
}

inline std::vector<double> joint_distribution(const BayesNet& net) {
    const std::size_t total = joint_size(net);
    std::vector<double> joint(total, 0.0);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::vector<std::size_t> a = joint_unrank(net, idx);
        double p = 1.0;
        for (std::size_t v = 0; v < net.num_vars(); ++v) p *= net.prob(v, a);
        joint[idx] = p;
    }
    return joint;
}

namespace detail {

struct Factor {
    std::vector<std::size_t> vars;  // ascending variable ids; last varies fastest
    std::vector<double> table;
};

inline std::size_t factor_size(const BayesNet& net, const std::vector<std::size_t>& vars) {
    std::size_t s = 1;
    for (std::size_t v : vars) s *= net.cards[v];
    return s;
}

inline Factor factor_product(const BayesNet& net, const Factor& a, const Factor& b) {
    Factor out;
    std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(), std::back_inserter(out.vars));
    out.table.assign(factor_size(net, out.vars), 0.0);
    std::vector<std::size_t> levels(out.vars.size(), 0);
    for (std::size_t idx = 0; idx < out.table.size(); ++idx) {
        auto value_in = [&](const Factor& f) {
            std::size_t sub = 0;
            for (std::size_t v : f.vars) {
                const std::size_t pos =
                    static_cast<std::size_t>(std::lower_bound(out.vars.begin(), out.vars.end(), v) - out.vars.begin());
                sub = sub * net.cards[v] + levels[pos];
            }
            return f.table[sub];
        };
        out.table[idx] = value_in(a) * value_in(b);
        for (std::size_t v = out.vars.size(); v-- > 0;) {
            if (++levels[v] < net.cards[out.vars[v]]) break;
            levels[v] = 0;
        }
    }
    return out;
}

inline Factor factor_marginalize(const BayesNet& net, const Factor& f, std::size_t var) {
    Factor out;
    for (std::size_t v : f.vars)
        if (v != var) out.vars.push_back(v);
    out.table.assign(factor_size(net, out.vars), 0.0);
    std::vector<std::size_t> levels(f.vars.size(), 0);
    for (std::size_t idx = 0; idx < f.table.size(); ++idx) {
        std::size_t sub = 0;
        for (std::size_t i = 0; i < f.vars.size(); ++i) {
            if (f.vars[i] == var) continue;
            sub = sub * net.cards[f.vars[i]] + levels[i];
        }
        out.table[sub] += f.table[idx];
        for (std::size_t i = f.vars.size(); i-- > 0;) {
            if (++levels[i] < net.cards[f.vars[i]]) break;
            levels[i] = 0;
        }
    }
    return out;
}

inline Factor factor_restrict(const BayesNet& net, const Factor& f, std::size_t var, std::size_t level) {
    Factor out;
    for (std::size_t v : f.vars)
        if (v != var) out.vars.push_back(v);
    out.table.assign(factor_size(net, out.vars), 0.0);
    std::vector<std::size_t> levels(f.vars.size(), 0);
    for (std::size_t idx = 0; idx < f.table.size(); ++idx) {
        bool match = true;
        std::size_t sub = 0;
        for (std::size_t i = 0; i < f.vars.size(); ++i) {
            if (f.vars[i] == var) {
                match = levels[i] == level;
                if (!match) break;
                continue;
            }
            sub = sub * net.cards[f.vars[i]] + levels[i];
        }
        if (match) out.table[sub] = f.table[idx];
        for (std::size_t i = f.vars.size(); i-- > 0;) {
            if (++levels[i] < net.cards[f.vars[i]]) break;
            levels[i] = 0;
        }
    }
    return out;
}

}  // namespace detail

// Exact P(query | evidence) via factor products and sum-outs, eliminating
// hidden variables in min-degree order (ties toward the lower variable id).
// Zero-probability evidence is reported, never divided by.
inline std::vector<double> variable_elimination(const BayesNet& net, std::size_t query,
                                                const std::map<std::size_t, std::size_t>& evidence) {
    if (evidence.count(query)) throw std::invalid_argument("variable_elimination: query is in the evidence");
    std::vector<detail::Factor> factors;
    for (std::size_t v = 0; v < net.num_vars(); ++v) {
        detail::Factor f;
        f.vars = net.dag.parents_of(v);
        f.vars.push_back(v);
        std::sort(f.vars.begin(), f.vars.end());
        f.table.assign(detail::factor_size(net, f.vars), 0.0);
        std::vector<std::size_t> levels(f.vars.size(), 0);
        std::vector<std::size_t> assignment(net.num_vars(), 0);
        for (std::size_t idx = 0; idx < f.table.size(); ++idx) {
            for (std::size_t i = 0; i < f.vars.size(); ++i) assignment[f.vars[i]] = levels[i];
            f.table[idx] = net.prob(v, assignment);
            for (std::size_t i = f.vars.size(); i-- > 0;) {
                if (++levels[i] < net.cards[f.vars[i]]) break;
                levels[i] = 0;
            }
        }
        factors.push_back(std::move(f));
    }
    for (const auto& [var, level] : evidence) {
        if (level >= net.cards[var]) throw std::invalid_argument("variable_elimination: evidence level out of range");
        for (auto& f : factors)
            if (std::binary_search(f.vars.begin(), f.vars.end(), var)) f = detail::factor_restrict(net, f, var, level);
    }

    std::set<std::size_t> hidden;
    for (std::size_t v = 0; v < net.num_vars(); ++v)
        if (v != query && !evidence.count(v)) hidden.insert(v);

    while (!hidden.empty()) {
        // min-degree: fewest distinct neighbors across factors touching the var
        std::size_t best_var = 0, best_deg = std::numeric_limits<std::size_t>::max();
        for (std::size_t v : hidden) {
            std::set<std::size_t> nb;
            for (const auto& f : factors)
                if (std::binary_search(f.vars.begin(), f.vars.end(), v))
                    nb.insert(f.vars.begin(), f.vars.end());
            nb.erase(v);
            if (nb.size() < best_deg) {
                best_deg = nb.size();
                best_var = v;
            }
        }
        hidden.erase(best_var);
        detail::Factor merged;
        merged.table = {1.0};
        std::vector<detail::Factor> rest;
        for (auto& f : factors) {
            if (std::binary_search(f.vars.begin(), f.vars.end(), best_var))
                merged = detail::factor_product(net, merged, f);
            else
                rest.push_back(std::move(f));
        }
        rest.push_back(detail::factor_marginalize(net, merged, best_var));
        factors = std::move(rest);
    }

    detail::Factor result;
    result.table = {1.0};
    for (const auto& f : factors) result = detail::factor_product(net, result, f);
    if (result.vars != std::vector<std::size_t>{query})
        throw std::logic_error("variable_elimination: unexpected residual scope");
    double total = 0.0;
    for (double v : result.table) total += v;
    if (total <= 0.0) throw std::runtime_error("variable_elimination: evidence has zero probability");
    for (double& v : result.table) v /= total;
    return result.table;
}

// Ancestral sampling in topological order.
inline std::vector<std::vector<std::size_t>> sample_rows(const BayesNet& net, std::size_t count,
                                                         std::uint64_t seed) {
    Rng rng(seed);
    const std::vector<std::size_t> order = net.dag.topological_order();
    if (order.empty() && net.num_vars() > 0) throw std::invalid_argument("sample_rows: graph has a cycle");
    std::vector<std::vector<std::size_t>> rows(count, std::vector<std::size_t>(net.num_vars(), 0));
    for (auto& row : rows) {
        for (std::size_t v : order) {
            const std::size_t base = net.parent_config_index(v, row) * net.cards[v];
            double u = rng.uniform();
            std::size_t level = net.cards[v] - 1;
            double acc = 0.0;
            for (std::size_t l = 0; l < net.cards[v]; ++l) {
                acc += net.cpt[v][base + l];
                if (u < acc) {
                    level = l;
                    break;
                }
            }
            row[v] = level;
        }
    }
    return rows;
}

inline nlohmann::json bayesnet_json(const BayesNet& net) {
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t v = 0; v < net.num_vars(); ++v) {
        std::vector<std::string> parent_names;
        for (std::size_t p : net.dag.parents_of(v)) parent_names.push_back(net.names[p]);
        nodes.push_back({{"name", net.names[v]},
                         {"cardinality", net.cards[v]},
                         {"parents", parent_names},
                         {"cpt", net.cpt[v]}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (std::size_t u = 0; u < net.num_vars(); ++u)
        for (std::size_t v = 0; v < net.num_vars(); ++v)
            if (net.dag.has_edge(u, v)) edges.push_back({net.names[u], net.names[v]});
    return {{"nodes", nodes}, {"edges", edges}};
}

}  // namespace qepi
