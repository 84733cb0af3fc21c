// K-way clustering as a Quadratic Unconstrained Binary Optimization problem:
// construction from a distance matrix, the exact Ising (spin) form, an
// exhaustive solver, a simulated-annealing solver, and decoding of basis
// states back to cluster labels.
//
// Bitstring convention, used everywhere: a basis state is an integer b in
// [0, 2^Q) and variable x_q is bit q of b, little-endian: x_q = (b >> q) & 1.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qepi/clustering.hpp"
#include "qepi/common.hpp"
#include "qepi/distance.hpp"
#include "qepi/parallel.hpp"
#include "qepi/rng.hpp"

namespace qepi {

using Bitstring = std::uint64_t;

// Largest exactly-simulable problem: 2^24 amplitudes is 256 MB of complex
// doubles for the statevector path and a 16M-entry energy table here.
inline constexpr std::size_t kMaxQubits = 24;

struct Qubo {
    std::size_t num_vars = 0;
    double constant = 0.0;
    std::vector<double> linear;                         // length num_vars
    std::map<std::pair<std::size_t, std::size_t>, double> quadratic;  // keys strictly upper-triangular

    void add_linear(std::size_t q, double c) { linear[q] += c; }

    void add_quadratic(std::size_t q1, std::size_t q2, double c) {
        if (q1 == q2) throw std::invalid_argument("Qubo: diagonal quadratic term");
        if (q1 > q2) std::swap(q1, q2);
        quadratic[{q1, q2}] += c;
    }

    static Qubo zeros(std::size_t num_vars) {
        Qubo q;
        q.num_vars = num_vars;
        q.linear.assign(num_vars, 0.0);
        return q;
    }
};

struct IsingModel {
    std::size_t num_spins = 0;
    double offset = 0.0;
    std::vector<double> h;
    std::map<std::pair<std::size_t, std::size_t>, double> j;
};

enum class EncodingScheme { onehot, compact2 };

struct Encoding {
    EncodingScheme scheme = EncodingScheme::compact2;
    std::size_t n = 0;          // points
    std::size_t k = 0;          // clusters
    double penalty_a = 0.0;     // onehot only
    std::vector<std::string> warnings;

    std::size_t num_vars() const { return scheme == EncodingScheme::onehot ? n * k : n; }

    // onehot variable index for (point, cluster)
    std::size_t var(std::size_t point, std::size_t cluster) const { return point * k + cluster; }
};

inline double qubo_energy(const Qubo& q, Bitstring b) {
    if (q.num_vars < 64 && b >= (Bitstring{1} << q.num_vars))
        throw std::out_of_range("qubo_energy: basis index exceeds 2^Q");
    double e = q.constant;
    for (std::size_t v = 0; v < q.num_vars; ++v)
        if ((b >> v) & 1) e += q.linear[v];
    for (const auto& [key, c] : q.quadratic)
        if (((b >> key.first) & 1) && ((b >> key.second) & 1)) e += c;
    return e;
}

// Substitutes x_q = (1 - z_q)/2; energies agree exactly for every assignment
// under the bit-to-spin map z = 1 - 2x.
inline IsingModel qubo_to_ising(const Qubo& q) {
    IsingModel m;
    m.num_spins = q.num_vars;
    m.offset = q.constant;
    m.h.assign(q.num_vars, 0.0);
    for (std::size_t v = 0; v < q.num_vars; ++v) {
        m.offset += q.linear[v] / 2.0;
        m.h[v] -= q.linear[v] / 2.0;
    }
    for (const auto& [key, c] : q.quadratic) {
        m.offset += c / 4.0;
        m.h[key.first] -= c / 4.0;
        m.h[key.second] -= c / 4.0;
        if (c != 0.0) m.j[key] += c / 4.0;
    }
    return m;
}

inline double ising_energy(const IsingModel& m, const std::vector<int>& spins) {
    double e = m.offset;
    for (std::size_t v = 0; v < m.num_spins; ++v) e += m.h[v] * spins[v];
    for (const auto& [key, c] : m.j) e += c * spins[key.first] * spins[key.second];
    return e;
}

inline std::vector<int> spins_from_bits(Bitstring b, std::size_t num_vars) {
    std::vector<int> s(num_vars);
    for (std::size_t v = 0; v < num_vars; ++v) s[v] = ((b >> v) & 1) ? -1 : 1;
    return s;
}

struct ClusterQubo {
    Qubo qubo;
    Encoding encoding;
};

// onehot: E(x) = sum_c sum_{i<j} d_ij x_ic x_jc + A * sum_i (sum_c x_ic - 1)^2
// with A = 2 * max_i sum_{j != i} d_ij, expanded via x^2 = x into linear -A,
// intra-point couplings +2A and constant +A*n.
// compact2: one bit per point; same-label pairs pay d_ij, i.e. the weighted
// max-cut complement. No penalty is needed and every state is feasible.
inline ClusterQubo build_cluster_qubo(const DistanceMatrix& dm, std::size_t k, EncodingScheme scheme) {
    if (k < 2) throw std::invalid_argument("build_cluster_qubo: k must be >= 2");
    if (dm.n < 2) throw std::invalid_argument("build_cluster_qubo: need at least 2 points");
    ClusterQubo out;
    Encoding& enc = out.encoding;
    enc.scheme = scheme;
    enc.n = dm.n;
    enc.k = scheme == EncodingScheme::compact2 ? 2 : k;

    if (scheme == EncodingScheme::compact2) {
        if (k != 2) throw std::invalid_argument("compact2 encoding requires k = 2");
        if (dm.n > kMaxQubits)
            throw infeasible_error("compact2 encoding needs " + std::to_string(dm.n) + " qubits, cap is " +
                                   std::to_string(kMaxQubits));
        Qubo& q = out.qubo = Qubo::zeros(dm.n);
        for (std::size_t i = 0; i < dm.n; ++i) {
            for (std::size_t j = i + 1; j < dm.n; ++j) {
                double d = dm.at(i, j);
                if (d == 0.0) continue;
                q.constant += d;
                q.add_linear(i, -d);
                q.add_linear(j, -d);
                q.add_quadratic(i, j, 2.0 * d);
            }
        }
        return out;
    }

    const std::size_t num_vars = dm.n * k;
    if (num_vars > kMaxQubits)
        throw infeasible_error("onehot encoding needs " + std::to_string(num_vars) + " qubits, cap is " +
                               std::to_string(kMaxQubits));
    if (k > dm.n) enc.warnings.push_back("k exceeds point count; some clusters must stay empty");

    double max_row = 0.0;
    for (std::size_t i = 0; i < dm.n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < dm.n; ++j)
            if (j != i) row += dm.at(i, j);
        max_row = std::max(max_row, row);
    }
    const double a = 2.0 * max_row;
    enc.penalty_a = a;

    Qubo& q = out.qubo = Qubo::zeros(num_vars);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t i = 0; i < dm.n; ++i)
            for (std::size_t j = i + 1; j < dm.n; ++j)
                if (dm.at(i, j) != 0.0) q.add_quadratic(enc.var(i, c), enc.var(j, c), dm.at(i, j));
    for (std::size_t i = 0; i < dm.n; ++i) {
        q.constant += a;
        for (std::size_t c = 0; c < k; ++c) {
            q.add_linear(enc.var(i, c), -a);
            for (std::size_t c2 = c + 1; c2 < k; ++c2) q.add_quadratic(enc.var(i, c), enc.var(i, c2), 2.0 * a);
        }
    }
    return out;
}

// Energy of every basis state, indexed by b. O(terms * 2^Q).
inline std::vector<double> qubo_energy_table(const Qubo& q) {
    if (q.num_vars > kMaxQubits)
        throw infeasible_error("energy table needs 2^" + std::to_string(q.num_vars) + " entries, cap is 2^" +
                               std::to_string(kMaxQubits));
    const std::size_t dim = std::size_t{1} << q.num_vars;
    std::vector<double> table(dim, q.constant);
    for (std::size_t v = 0; v < q.num_vars; ++v) {
        if (q.linear[v] == 0.0) continue;
        const std::size_t mask = std::size_t{1} << v;
        for (std::size_t b = 0; b < dim; ++b)
            if (b & mask) table[b] += q.linear[v];
    }
    for (const auto& [key, c] : q.quadratic) {
        if (c == 0.0) continue;
        const std::size_t mask = (std::size_t{1} << key.first) | (std::size_t{1} << key.second);
        for (std::size_t b = 0; b < dim; ++b)
            if ((b & mask) == mask) table[b] += c;
    }
    return table;
}

struct SolveResult {
    Bitstring best = 0;
    double energy = 0.0;
};

// Global minimum by exhaustive scan; ties break toward the lowest basis index.
inline SolveResult brute_force_solve(const Qubo& q) {
    std::vector<double> table = qubo_energy_table(q);
    SolveResult res{0, table[0]};
    for (std::size_t b = 1; b < table.size(); ++b) {
        if (table[b] < res.energy) {
            res.energy = table[b];
            res.best = b;
        }
    }
    return res;
}

struct AnnealConfig {
    std::size_t sweeps = 2000;
    std::size_t restarts = 8;
    double t_initial = 0.0;  // 0 -> 10 * max |coefficient|
    double t_final = 1e-3;
    unsigned threads = 1;
};

namespace detail {

inline SolveResult anneal_once(const Qubo& q, const AnnealConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t nv = q.num_vars;

    // adjacency list of quadratic couplings for O(degree) flip deltas
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(nv);
    for (const auto& [key, c] : q.quadratic) {
        adj[key.first].emplace_back(key.second, c);
        adj[key.second].emplace_back(key.first, c);
    }

    double max_coeff = 0.0;
    for (double c : q.linear) max_coeff = std::max(max_coeff, std::abs(c));
    for (const auto& [key, c] : q.quadratic) max_coeff = std::max(max_coeff, std::abs(c));
    double t0 = cfg.t_initial > 0.0 ? cfg.t_initial : 10.0 * max_coeff;
    if (t0 <= 0.0) t0 = 1.0;
    const double tf = std::min(cfg.t_final, t0);

    std::vector<std::uint8_t> bits(nv);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform_int(2));
    auto energy_of_bits = [&] {
        Bitstring b = 0;
        for (std::size_t v = 0; v < nv; ++v)
            if (bits[v]) b |= Bitstring{1} << v;
        return std::pair{b, qubo_energy(q, b)};
    };
    auto [cur_b, cur_e] = energy_of_bits();
    SolveResult best{cur_b, cur_e};

    std::vector<std::size_t> order(nv);
    for (std::size_t v = 0; v < nv; ++v) order[v] = v;

    for (std::size_t t = 0; t < cfg.sweeps; ++t) {
        const double temp = t0 * std::pow(tf / t0, static_cast<double>(t) / static_cast<double>(cfg.sweeps));
        rng.shuffle(order);
        for (std::size_t v : order) {
            double field = q.linear[v];
            for (const auto& [o, c] : adj[v])
                if (bits[o]) field += c;
            const double delta = bits[v] ? -field : field;
            if (delta <= 0.0 || rng.uniform() < std::exp(-delta / temp)) {
                bits[v] ^= 1;
                cur_e += delta;
            }
        }
        if (cur_e < best.energy) {
            auto [b, e] = energy_of_bits();
            cur_e = e;  // refresh against accumulated drift
            if (e < best.energy || (e == best.energy && b < best.best)) best = {b, e};
        }
    }
    auto [b, e] = energy_of_bits();
    if (e < best.energy || (e == best.energy && b < best.best)) best = {b, e};
    return best;
}

}  // namespace detail

// Simulated annealing with a geometric temperature schedule and single-bit
// Metropolis flips in a per-sweep random scan order. Restart r uses seed + r;
// results merge by (energy, basis index), so the thread count never changes
// the answer.
inline SolveResult anneal_solve(const Qubo& q, const AnnealConfig& cfg, std::uint64_t seed) {
    if (cfg.sweeps < 1 || cfg.restarts < 1)
        throw std::invalid_argument("anneal_solve: sweeps and restarts must be >= 1");
    if (q.num_vars == 0) return {0, q.constant};
    if (q.num_vars > 63) throw std::invalid_argument("anneal_solve: at most 63 variables");
    std::vector<SolveResult> results(cfg.restarts);
    parallel_for(cfg.restarts, cfg.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) results[r] = detail::anneal_once(q, cfg, seed + r);
    });
    SolveResult best = results[0];
    for (const auto& r : results)
        if (r.energy < best.energy || (r.energy == best.energy && r.best < best.best)) best = r;
    return best;
}

// Maps an optimizer basis state back to labels. compact2 reads bit i as the
// label of point i. onehot keeps exactly-one-hot points as-is and repairs the
// rest in index order, placing each point in the cluster that adds the least
// intra-cluster distance against the points assigned so far (ties toward the
// lower cluster index). Never emits noise.
inline ClusterAssignment decode_assignment(Bitstring b, const Encoding& enc, const DistanceMatrix& dm) {
    ClusterAssignment out;
    out.labels.assign(enc.n, -1);
    if (enc.scheme == EncodingScheme::compact2) {
        for (std::size_t i = 0; i < enc.n; ++i) out.labels[i] = static_cast<int>((b >> i) & 1);
        return out;
    }
    for (std::size_t i = 0; i < enc.n; ++i) {
        int chosen = -1;
        int set_bits = 0;
        for (std::size_t c = 0; c < enc.k; ++c) {
            if ((b >> enc.var(i, c)) & 1) {
                ++set_bits;
                chosen = static_cast<int>(c);
            }
        }
        if (set_bits == 1) out.labels[i] = chosen;
    }
    for (std::size_t i = 0; i < enc.n; ++i) {
        if (out.labels[i] >= 0) continue;
        double best_cost = std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (std::size_t c = 0; c < enc.k; ++c) {
            double cost = 0.0;
            for (std::size_t j = 0; j < enc.n; ++j)
                if (j != i && out.labels[j] == static_cast<int>(c)) cost += dm.at(i, j);
            if (cost < best_cost) {
                best_cost = cost;
                best_c = static_cast<int>(c);
            }
        }
        out.labels[i] = best_c;
    }
    return out;
}

inline nlohmann::json qubo_to_json(const Qubo& q) {
    nlohmann::json quad = nlohmann::json::array();
    for (const auto& [key, c] : q.quadratic) quad.push_back({key.first, key.second, c});
    return {{"num_vars", q.num_vars}, {"constant", q.constant}, {"linear", q.linear}, {"quadratic", quad}};
}

inline Qubo qubo_from_json(const nlohmann::json& j) {
    Qubo q = Qubo::zeros(j.at("num_vars").get<std::size_t>());
    q.constant = j.at("constant").get<double>();
    auto lin = j.at("linear").get<std::vector<double>>();
    if (lin.size() != q.num_vars) throw std::runtime_error("qubo_from_json: linear length mismatch");
    q.linear = std::move(lin);
    for (const auto& row : j.at("quadratic")) {
        q.add_quadratic(row.at(0).get<std::size_t>(), row.at(1).get<std::size_t>(), row.at(2).get<double>());
    }
    return q;
}

}  // namespace qepi
