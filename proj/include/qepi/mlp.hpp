// Small dense feedforward regressor: tanh hidden layers, logistic output,
// hand-rolled backpropagation. Sized for five-feature rows, so plain
// vectors beat a tensor library here.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qepi/common.hpp"
#include "qepi/rng.hpp"

namespace qepi {

struct MlpModel {
    std::vector<std::size_t> layer_sizes;        // e.g. {5, 16, 8, 1}
    std::vector<std::vector<double>> weights;    // per layer, out x in row-major
    std::vector<std::vector<double>> biases;     // per layer, out

    static MlpModel init(std::vector<std::size_t> sizes, Rng& rng) {
        if (sizes.size() < 2) throw std::invalid_argument("MlpModel: need at least two layers");
        if (sizes.back() != 1) throw std::invalid_argument("MlpModel: scalar output expected");
        MlpModel m;
        m.layer_sizes = std::move(sizes);
        for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
            const std::size_t in = m.layer_sizes[l], out = m.layer_sizes[l + 1];
            const double r = 1.0 / std::sqrt(static_cast<double>(in));
            std::vector<double> w(out * in);
            for (double& v : w) v = rng.uniform(-r, r);
            m.weights.push_back(std::move(w));
            m.biases.emplace_back(out, 0.0);
        }
        return m;
    }

    std::size_t num_layers() const { return weights.size(); }
};

struct MlpActivations {
    std::vector<std::vector<double>> values;  // values[0] = input, values.back() = {output}
};

inline MlpActivations mlp_activations(const MlpModel& m, const std::vector<double>& x) {
    if (x.size() != m.layer_sizes.front()) throw std::invalid_argument("mlp_forward: input size mismatch");
    MlpActivations act;
    act.values.push_back(x);
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
        const std::size_t in = m.layer_sizes[l], out = m.layer_sizes[l + 1];
        const bool last = l + 1 == m.num_layers();
        std::vector<double> next(out, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            double z = m.biases[l][o];
            for (std::size_t i = 0; i < in; ++i) z += m.weights[l][o * in + i] * act.values[l][i];
            next[o] = last ? logistic(z) : std::tanh(z);
        }
        act.values.push_back(std::move(next));
    }
    return act;
}

inline double mlp_forward(const MlpModel& m, const std::vector<double>& x) {
    return mlp_activations(m, x).values.back()[0];
}

struct MlpGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    static MlpGradients zeros_like(const MlpModel& m) {
        MlpGradients g;
        for (std::size_t l = 0; l < m.num_layers(); ++l) {
            g.weights.emplace_back(m.weights[l].size(), 0.0);
            g.biases.emplace_back(m.biases[l].size(), 0.0);
        }
        return g;
    }
};

// Mean-squared-error loss over a batch plus its exact gradient by
// backpropagation. tanh' = 1 - t^2, logistic' = y(1 - y).
inline double mlp_loss_gradients(const MlpModel& m, const std::vector<std::vector<double>>& xs,
                                 const std::vector<double>& ys, MlpGradients& grads) {
    if (xs.size() != ys.size() || xs.empty()) throw std::invalid_argument("mlp_loss_gradients: bad batch");
    const double inv_b = 1.0 / static_cast<double>(xs.size());
    double loss = 0.0;
    for (std::size_t s = 0; s < xs.size(); ++s) {
        MlpActivations act = mlp_activations(m, xs[s]);
        const double y_hat = act.values.back()[0];
        const double err = y_hat - ys[s];
        loss += err * err * inv_b;

        std::vector<double> delta = {2.0 * err * inv_b * y_hat * (1.0 - y_hat)};
        for (std::size_t l = m.num_layers(); l-- > 0;) {
            const std::size_t in = m.layer_sizes[l], out = m.layer_sizes[l + 1];
            for (std::size_t o = 0; o < out; ++o) {
                grads.biases[l][o] += delta[o];
                for (std::size_t i = 0; i < in; ++i) grads.weights[l][o * in + i] += delta[o] * act.values[l][i];
            }
            if (l == 0) break;
            std::vector<double> prev(in, 0.0);
            for (std::size_t i = 0; i < in; ++i) {
                double acc = 0.0;
                for (std::size_t o = 0; o < out; ++o) acc += m.weights[l][o * in + i] * delta[o];
                const double t = act.values[l][i];
                prev[i] = acc * (1.0 - t * t);
            }
            delta = std::move(prev);
        }
    }
    return loss;
}

inline double mlp_mse(const MlpModel& m, const std::vector<std::vector<double>>& xs,
                      const std::vector<double>& ys) {
    double loss = 0.0;
    for (std::size_t s = 0; s < xs.size(); ++s) {
        const double err = mlp_forward(m, xs[s]) - ys[s];
        loss += err * err;
    }
    return xs.empty() ? 0.0 : loss / static_cast<double>(xs.size());
}

}  // namespace qepi
