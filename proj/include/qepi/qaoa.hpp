// Exact statevector simulation of the QAOA ansatz over a diagonal cost
// Hamiltonian: alternating cost-phase and transverse-field mixer layers
// applied to the uniform superposition, expectation values, measurement
// sampling, variational angle optimization with warm-started depth
// extension, and the end-to-end clustering driver.

#pragma once

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

#include "qepi/nelder_mead.hpp"
#include "qepi/parallel.hpp"
#include "qepi/qubo.hpp"
#include "qepi/rng.hpp"

namespace qepi {

// Diagonal of the cost Hamiltonian: one energy per computational basis
// state. Entries may carry an affine rescaling; the original energy of
// basis state b is energies[b] * scale + offset, exactly.
struct CostSpectrum {
    std::size_t num_qubits = 0;
    std::vector<double> energies;
    double scale = 1.0;
    double offset = 0.0;

    static CostSpectrum from_qubo(const Qubo& q) {
        CostSpectrum cs;
        cs.num_qubits = q.num_vars;
        cs.energies = qubo_energy_table(q);
        return cs;
    }

    // Centers energies on the midpoint of their range and rescales so
    // max |energy| = 1, composing with any rescaling already applied.
    // Keeps the variational angle box meaningful for arbitrary distance
    // scales; expectations are always reported in original units.
    CostSpectrum normalized() const {
        CostSpectrum out = *this;
        double lo = energies[0], hi = energies[0];
        for (double e : energies) {
            lo = std::min(lo, e);
            hi = std::max(hi, e);
        }
        const double mid = (lo + hi) / 2.0;
        const double amp = (hi - lo) / 2.0;
        if (amp == 0.0) {
            for (double& e : out.energies) e = 0.0;
            out.offset = offset + mid * scale;
            return out;
        }
        for (double& e : out.energies) e = (e - mid) / amp;
        out.scale = scale * amp;
        out.offset = offset + mid * scale;
        return out;
    }

    double original_energy(std::size_t b) const { return energies[b] * scale + offset; }
};

struct QaoaParams {
    std::vector<double> gammas;
    std::vector<double> betas;

    std::size_t depth() const {
        if (gammas.size() != betas.size()) throw std::invalid_argument("QaoaParams: gamma/beta length mismatch");
        return gammas.size();
    }
};

struct QuantumState {
    std::size_t num_qubits = 0;
    std::vector<std::complex<double>> amplitudes;

    double norm() const {
        double s = 0.0;
        for (const auto& a : amplitudes) s += std::norm(a);
        return std::sqrt(s);
    }
};

inline QuantumState uniform_state(std::size_t num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits)
        throw std::invalid_argument("uniform_state: qubit count outside [1, " + std::to_string(kMaxQubits) + "]");
    QuantumState st;
    st.num_qubits = num_qubits;
    const std::size_t dim = std::size_t{1} << num_qubits;
    st.amplitudes.assign(dim, std::complex<double>(std::pow(2.0, -0.5 * static_cast<double>(num_qubits)), 0.0));
    return st;
}

namespace detail {

inline void apply_cost_phase(QuantumState& st, const CostSpectrum& cs, double gamma, unsigned threads) {
    parallel_for(st.amplitudes.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t b = lo; b < hi; ++b) {
            const double angle = gamma * cs.energies[b];
            st.amplitudes[b] *= std::complex<double>(std::cos(angle), -std::sin(angle));
        }
    });
}

// exp(-i beta X) on every qubit: (u, v) -> (u cosb - i v sinb, -i u sinb + v cosb)
// on each amplitude pair differing in that qubit's bit.
inline void apply_mixer(QuantumState& st, double beta, unsigned threads) {
    const double c = std::cos(beta);
    const double s = std::sin(beta);
    const std::size_t dim = st.amplitudes.size();
    for (std::size_t q = 0; q < st.num_qubits; ++q) {
        const std::size_t mask = std::size_t{1} << q;
        parallel_for(dim, threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t b = lo; b < hi; ++b) {
                if (b & mask) continue;
                const std::complex<double> u = st.amplitudes[b];
                const std::complex<double> v = st.amplitudes[b | mask];
                st.amplitudes[b] = u * c - std::complex<double>(0.0, 1.0) * v * s;
                st.amplitudes[b | mask] = -std::complex<double>(0.0, 1.0) * u * s + v * c;
            }
        });
    }
}

}  // namespace detail

// |psi(gamma, beta)> built layer by layer from the uniform superposition:
// for k = 1..p, the cost phase with angle gamma_k, then the mixer with
// angle beta_k. p = 0 returns the uniform state unchanged.
inline QuantumState qaoa_state(const CostSpectrum& cs, const QaoaParams& params, unsigned threads = 1) {
    const std::size_t p = params.depth();
    QuantumState st = uniform_state(cs.num_qubits);
    if (st.amplitudes.size() != cs.energies.size())
        throw std::invalid_argument("qaoa_state: spectrum/state dimension mismatch");
    for (std::size_t k = 0; k < p; ++k) {
        detail::apply_cost_phase(st, cs, params.gammas[k], threads);
        detail::apply_mixer(st, params.betas[k], threads);
    }
    return st;
}

// <H_C> in original (de-rescaled) energy units.
inline double expectation(const QuantumState& st, const CostSpectrum& cs) {
    if (st.amplitudes.size() != cs.energies.size())
        throw std::invalid_argument("expectation: spectrum/state dimension mismatch");
    double acc = 0.0;
    for (std::size_t b = 0; b < st.amplitudes.size(); ++b) acc += std::norm(st.amplitudes[b]) * cs.energies[b];
    return acc * cs.scale + cs.offset;
}

// Seeded i.i.d. measurement draws via inverse CDF; the histogram keys are
// basis states in ascending order and counts sum to shots.
inline std::map<Bitstring, std::uint64_t> sample_bitstrings(const QuantumState& st, std::size_t shots,
                                                            std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("sample_bitstrings: shots must be >= 1");
    std::vector<double> cdf(st.amplitudes.size());
    double acc = 0.0;
    for (std::size_t b = 0; b < st.amplitudes.size(); ++b) {
        acc += std::norm(st.amplitudes[b]);
        cdf[b] = acc;
    }
    Rng rng(seed);
    std::map<Bitstring, std::uint64_t> hist;
    for (std::size_t s = 0; s < shots; ++s) {
        const double u = rng.uniform() * acc;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
        ++hist[b];
    }
    return hist;
}

struct QaoaOptConfig {
    std::size_t restarts = 3;      // seeded perturbations of the warm start per added layer
    std::size_t max_iters = 0;     // per Nelder-Mead run; 0 means 200 * p
    double x_tolerance = 1e-8;
    double perturb_scale = 0.1;    // radians
    unsigned threads = 1;
    // Optional objective-evaluation trace (index, params, de-rescaled energy).
    std::function<void(std::size_t, const QaoaParams&, double)> trace;
};

struct QaoaOptResult {
    QaoaParams params;       // angles valid against `spectrum`
    double expected_energy = 0.0;  // original energy units
    CostSpectrum spectrum;   // the normalized spectrum the angles refer to
};

// Variational optimization of the depth-p schedule. Depth 1 seeds a
// Nelder-Mead refinement from a 16x16 grid over gamma in [0, 2pi) and
// beta in [0, pi); each further layer warm-starts from the previous
// schedule extended with (0, 0) — an exact identity layer, so the
// optimized energy is non-increasing in p — plus seeded perturbed
// restarts merged by (energy, candidate index).
inline QaoaOptResult optimize_qaoa(const Qubo& q, std::size_t p, const QaoaOptConfig& cfg = {},
                                   std::uint64_t seed = 0) {
    if (p < 1) throw std::invalid_argument("optimize_qaoa: p must be >= 1");
    if (q.num_vars < 1 || q.num_vars > kMaxQubits)
        throw infeasible_error("optimize_qaoa: qubit count outside [1, " + std::to_string(kMaxQubits) + "]");

    QaoaOptResult res;
    res.spectrum = CostSpectrum::from_qubo(q).normalized();
    const CostSpectrum& cs = res.spectrum;

    std::size_t eval_index = 0;
    auto pack = [](const std::vector<double>& x) {
        QaoaParams prm;
        const std::size_t depth = x.size() / 2;
        prm.gammas.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(depth));
        prm.betas.assign(x.begin() + static_cast<std::ptrdiff_t>(depth), x.end());
        return prm;
    };
    auto objective = [&](const std::vector<double>& x) {
        const QaoaParams prm = pack(x);
        const double e = expectation(qaoa_state(cs, prm, cfg.threads), cs);
        if (cfg.trace) cfg.trace(eval_index++, prm, e);
        return e;
    };

    std::vector<double> best_x;  // layout: gammas then betas
    double best_e = 0.0;

    for (std::size_t level = 1; level <= p; ++level) {
        const std::size_t max_iters = cfg.max_iters > 0 ? cfg.max_iters : 200 * level;
        NelderMeadOptions nm{max_iters, cfg.x_tolerance, 0.15};

        std::vector<std::vector<double>> starts;
        if (level == 1) {
            double grid_best = std::numeric_limits<double>::infinity();
            std::vector<double> grid_x = {0.0, 0.0};
            for (int gi = 0; gi < 16; ++gi) {
                for (int bi = 0; bi < 16; ++bi) {
                    const std::vector<double> x = {2.0 * std::numbers::pi * gi / 16.0, std::numbers::pi * bi / 16.0};
                    const double e = objective(x);
                    if (e < grid_best) {
                        grid_best = e;
                        grid_x = x;
                    }
                }
            }
            starts.push_back(grid_x);
        } else {
            std::vector<double> base(2 * level, 0.0);
            for (std::size_t i = 0; i < level - 1; ++i) {
                base[i] = best_x[i];
                base[level + i] = best_x[(level - 1) + i];
            }
            starts.push_back(base);
            Rng rng(seed + 1000003 * level);
            for (std::size_t r = 0; r < cfg.restarts; ++r) {
                std::vector<double> x = base;
                for (double& v : x) v += cfg.perturb_scale * rng.normal();
                starts.push_back(x);
            }
        }

        bool have = false;
        std::vector<double> level_x;
        double level_e = 0.0;
        for (const auto& start : starts) {
            NelderMeadResult nmres = nelder_mead(objective, start, nm);
            if (!have || nmres.fval < level_e) {
                have = true;
                level_e = nmres.fval;
                level_x = nmres.x;
            }
        }
        best_x = std::move(level_x);
        best_e = level_e;
    }

    res.params = pack(best_x);
    res.expected_energy = best_e;
    return res;
}

struct QaoaClusterDiagnostics {
    double expected_energy = 0.0;
    double best_sample_energy = 0.0;
    double feasible_sample_fraction = 0.0;
    double wall_time_seconds = 0.0;
};

struct QaoaClusterResult {
    ClusterAssignment labels;
    Encoding encoding;
    Bitstring best_sample = 0;
    QaoaClusterDiagnostics diagnostics;
};

// Full quantum clustering path: encode the distance matrix as a QUBO,
// optimize the schedule, prepare the optimal state, sample it, and decode
// the lowest-energy sample (ties toward the lower basis index).
inline QaoaClusterResult qaoa_cluster(const DistanceMatrix& dm, std::size_t k, std::size_t p, std::size_t shots,
                                      std::uint64_t seed, EncodingScheme scheme = EncodingScheme::compact2,
                                      const QaoaOptConfig& cfg = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    ClusterQubo cq = build_cluster_qubo(dm, k, scheme);
    QaoaOptResult opt = optimize_qaoa(cq.qubo, p, cfg, seed);
    QuantumState st = qaoa_state(opt.spectrum, opt.params, cfg.threads);
    auto hist = sample_bitstrings(st, shots, seed);

    QaoaClusterResult res;
    res.encoding = cq.encoding;
    bool have = false;
    double best_e = 0.0;
    std::uint64_t feasible = 0;
    for (const auto& [b, count] : hist) {
        if (cq.encoding.scheme == EncodingScheme::compact2) {
            feasible += count;
        } else {
            bool ok = true;
            for (std::size_t i = 0; i < cq.encoding.n && ok; ++i) {
                int set_bits = 0;
                for (std::size_t c = 0; c < cq.encoding.k; ++c) set_bits += (b >> cq.encoding.var(i, c)) & 1;
                ok = set_bits == 1;
            }
            if (ok) feasible += count;
        }
        const double e = qubo_energy(cq.qubo, b);
        if (!have || e < best_e) {
            have = true;
            best_e = e;
            res.best_sample = b;
        }
    }
    res.labels = decode_assignment(res.best_sample, cq.encoding, dm);
    res.diagnostics.expected_energy = opt.expected_energy;
    res.diagnostics.best_sample_energy = best_e;
    res.diagnostics.feasible_sample_fraction =
        static_cast<double>(feasible) / static_cast<double>(shots);
    res.diagnostics.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace qepi
