// Variational quantum circuit layer for the hybrid forecaster. Inputs are
// angle-encoded through a logistic squashing (any real maps into [0, pi]);
// each block applies per-qubit Ry and Rz rotations followed by a CZ ring.
// Outputs are the per-qubit Pauli-Z expectations, and all gradients come
// from the parameter-shift rule.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qepi/common.hpp"
#include "qepi/rng.hpp"

namespace qepi {

struct QuantumLayer {
    std::size_t num_qubits = 4;
    std::size_t blocks = 2;
    std::vector<double> thetas;  // per block, per qubit: (ry, rz) -> 2 * q * L angles

    static QuantumLayer init(std::size_t q, std::size_t blocks, Rng& rng) {
        if (q < 1 || q > 12) throw std::invalid_argument("QuantumLayer: qubit count outside [1, 12]");
        QuantumLayer layer;
        layer.num_qubits = q;
        layer.blocks = blocks;
        layer.thetas.resize(2 * q * blocks);
        for (double& t : layer.thetas) t = rng.uniform(-0.1, 0.1);
        return layer;
    }

    std::size_t num_params() const { return thetas.size(); }

    std::size_t theta_index(std::size_t block, std::size_t qubit, bool rz) const {
        return block * 2 * num_qubits + qubit * 2 + (rz ? 1 : 0);
    }
};

namespace detail {

using Amps = std::vector<std::complex<double>>;

inline void apply_ry(Amps& a, std::size_t num_qubits, std::size_t qubit, double theta) {
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    const std::size_t mask = std::size_t{1} << qubit;
    const std::size_t dim = std::size_t{1} << num_qubits;
    for (std::size_t b = 0; b < dim; ++b) {
        if (b & mask) continue;
        const std::complex<double> u = a[b], v = a[b | mask];
        a[b] = c * u - s * v;
        a[b | mask] = s * u + c * v;
    }
}

inline void apply_rz(Amps& a, std::size_t num_qubits, std::size_t qubit, double theta) {
    const std::complex<double> lo(std::cos(theta / 2.0), -std::sin(theta / 2.0));
    const std::complex<double> hi = std::conj(lo);
    const std::size_t mask = std::size_t{1} << qubit;
    const std::size_t dim = std::size_t{1} << num_qubits;
    for (std::size_t b = 0; b < dim; ++b) a[b] *= (b & mask) ? hi : lo;
}

inline void apply_cz(Amps& a, std::size_t q1, std::size_t q2) {
    const std::size_t mask = (std::size_t{1} << q1) | (std::size_t{1} << q2);
    for (std::size_t b = 0; b < a.size(); ++b)
        if ((b & mask) == mask) a[b] = -a[b];
}

}  // namespace detail

// Runs the circuit from |0...0> with explicit encoding angles (bypassing the
// logistic input map) and returns <Z_i> per qubit.
inline std::vector<double> vqc_forward_angles(const QuantumLayer& layer, const std::vector<double>& angles) {
    if (angles.size() != layer.num_qubits) throw std::invalid_argument("vqc_forward: angle count mismatch");
    const std::size_t q = layer.num_qubits;
    const std::size_t dim = std::size_t{1} << q;
    detail::Amps a(dim, {0.0, 0.0});
    a[0] = {1.0, 0.0};
    for (std::size_t i = 0; i < q; ++i) detail::apply_ry(a, q, i, angles[i]);
    for (std::size_t blk = 0; blk < layer.blocks; ++blk) {
        for (std::size_t i = 0; i < q; ++i) detail::apply_ry(a, q, i, layer.thetas[layer.theta_index(blk, i, false)]);
        for (std::size_t i = 0; i < q; ++i) detail::apply_rz(a, q, i, layer.thetas[layer.theta_index(blk, i, true)]);
        if (q >= 2)
            for (std::size_t i = 0; i < q; ++i) detail::apply_cz(a, i, (i + 1) % q);
    }
    std::vector<double> out(q, 0.0);
    for (std::size_t b = 0; b < dim; ++b) {
        const double p = std::norm(a[b]);
        for (std::size_t i = 0; i < q; ++i) out[i] += ((b >> i) & 1) ? -p : p;
    }
    return out;
}

inline std::vector<double> encoding_angles(const std::vector<double>& z) {
    std::vector<double> angles(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) angles[i] = std::numbers::pi * logistic(z[i]);
    return angles;
}

inline std::vector<double> vqc_forward(const QuantumLayer& layer, const std::vector<double>& z) {
    if (z.size() != layer.num_qubits) throw std::invalid_argument("vqc_forward: input size mismatch");
    return vqc_forward_angles(layer, encoding_angles(z));
}

struct VqcJacobians {
    // d_theta[p][o]: d<Z_o>/d theta_p;  d_z[i][o]: d<Z_o>/d z_i
    std::vector<std::vector<double>> d_theta;
    std::vector<std::vector<double>> d_z;
};

// Exact gradients by the parameter-shift rule: every rotation angle a obeys
// df/da = (f(a + pi/2) - f(a - pi/2)) / 2. Input gradients chain the shift
// on the encoding angle with the logistic derivative.
inline VqcJacobians vqc_gradient(const QuantumLayer& layer, const std::vector<double>& z) {
    const std::vector<double> angles = encoding_angles(z);
    VqcJacobians jac;
    jac.d_theta.assign(layer.num_params(), std::vector<double>(layer.num_qubits, 0.0));
    jac.d_z.assign(layer.num_qubits, std::vector<double>(layer.num_qubits, 0.0));

    QuantumLayer shifted = layer;
    for (std::size_t p = 0; p < layer.num_params(); ++p) {
        shifted.thetas[p] = layer.thetas[p] + std::numbers::pi / 2.0;
        std::vector<double> plus = vqc_forward_angles(shifted, angles);
        shifted.thetas[p] = layer.thetas[p] - std::numbers::pi / 2.0;
        std::vector<double> minus = vqc_forward_angles(shifted, angles);
        shifted.thetas[p] = layer.thetas[p];
        for (std::size_t o = 0; o < layer.num_qubits; ++o) jac.d_theta[p][o] = 0.5 * (plus[o] - minus[o]);
    }

    std::vector<double> shifted_angles = angles;
    for (std::size_t i = 0; i < layer.num_qubits; ++i) {
        shifted_angles[i] = angles[i] + std::numbers::pi / 2.0;
        std::vector<double> plus = vqc_forward_angles(layer, shifted_angles);
        shifted_angles[i] = angles[i] - std::numbers::pi / 2.0;
        std::vector<double> minus = vqc_forward_angles(layer, shifted_angles);
        shifted_angles[i] = angles[i];
        const double sig = logistic(z[i]);
        const double da_dz = std::numbers::pi * sig * (1.0 - sig);
        for (std::size_t o = 0; o < layer.num_qubits; ++o)
            jac.d_z[i][o] = 0.5 * (plus[o] - minus[o]) * da_dz;
    }
    return jac;
}

}  // namespace qepi
