// Next-year HIV-rate prediction. Builds consecutive-year supervised pairs
// with a chronological train/validation/test split, then trains either a
// plain feedforward regressor or the hybrid model (dense front end, a
// variational quantum layer, logistic read-out) with momentum gradient
// descent and early stopping. Fully deterministic for a fixed seed.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "qepi/dataset.hpp"
#include "qepi/mlp.hpp"
#include "qepi/vqc.hpp"

namespace qepi {

enum class Split { train, validation, test };

inline const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        default: return "test";
    }
}

struct SupervisedRow {
    std::string zip;
    int target_year = 0;
    std::vector<double> inputs;  // housing, stigma, hiv(t), lat01, lon01
    double target = 0.0;         // hiv(t+1)
    Split split = Split::train;
};

struct SupervisedSet {
    std::vector<SupervisedRow> rows;

    std::vector<const SupervisedRow*> of(Split s) const {
        std::vector<const SupervisedRow*> out;
        for (const auto& r : rows)
            if (r.split == s) out.push_back(&r);
        return out;
    }

    void batch_of(Split s, std::vector<std::vector<double>>& xs, std::vector<double>& ys) const {
        xs.clear();
        ys.clear();
        for (const auto& r : rows) {
            if (r.split != s) continue;
            xs.push_back(r.inputs);
            ys.push_back(r.target);
        }
    }
};

inline constexpr std::size_t kForecastInputs = 5;

// Pairs each zip's consecutive years into (features at t) -> hiv at t+1.
// The split is chronological on the target year: the last year is test,
// the one before it validation, everything earlier training. Coordinates
// are min-max scaled over the dataset so that all inputs live in [0, 1].
inline SupervisedSet build_supervised(const Dataset& data) {
    if (data.normalization_state != NormState::normalized)
        throw std::invalid_argument("build_supervised: dataset must be normalized");
    std::set<int> years;
    for (const auto& rec : data.records) years.insert(rec.year);
    if (years.size() < 2) throw std::invalid_argument("build_supervised: need at least two distinct years");
    const int test_year = *years.rbegin();
    const int val_year = *std::next(years.rbegin());

    double lat_lo = 90.0, lat_hi = -90.0, lon_lo = 180.0, lon_hi = -180.0;
    for (const auto& rec : data.records) {
        if (!rec.lat || !rec.lon) throw std::invalid_argument("build_supervised: records must have coordinates");
        lat_lo = std::min(lat_lo, *rec.lat);
        lat_hi = std::max(lat_hi, *rec.lat);
        lon_lo = std::min(lon_lo, *rec.lon);
        lon_hi = std::max(lon_hi, *rec.lon);
    }
    auto scale01 = [](double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; };

    std::map<std::string, std::map<int, const ZipRecord*>> by_zip;
    for (const auto& rec : data.records) by_zip[rec.zip][rec.year] = &rec;

    SupervisedSet set;
    for (const auto& [zip, by_year] : by_zip) {
        for (const auto& [year, rec] : by_year) {
            auto next = by_year.find(year + 1);
            if (next == by_year.end()) continue;
            SupervisedRow row;
            row.zip = zip;
            row.target_year = year + 1;
            row.inputs = {*rec->housing_instability, *rec->stigma_index, *rec->hiv_rate,
                          scale01(*rec->lat, lat_lo, lat_hi), scale01(*rec->lon, lon_lo, lon_hi)};
            row.target = *next->second->hiv_rate;
            row.split = row.target_year == test_year    ? Split::test
                        : row.target_year == val_year   ? Split::validation
                                                        : Split::train;
            set.rows.push_back(std::move(row));
        }
    }
    return set;
}

struct TrainConfig {
    double learning_rate = 0.1;
    double momentum = 0.9;
    std::size_t batch_size = 16;
    std::size_t max_epochs = 500;
    std::size_t patience = 20;
    std::uint64_t seed = 0;
};

struct EpochStats {
    std::size_t epoch = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;
    double best_val_mse = 0.0;
    bool stopped_early = false;
};

inline std::string history_csv(const TrainHistory& h) {
    std::string out = "epoch,train_mse,val_mse\n";
    for (const auto& e : h.epochs)
        out += std::to_string(e.epoch) + "," + fmt_double(e.train_mse) + "," + fmt_double(e.val_mse) + "\n";
    return out;
}

namespace detail {

// Shared training loop: shuffled mini-batches, momentum updates, early stop
// on stalled validation MSE, best-validation parameters returned. The model
// itself lives in the caller's closures.
template <typename GradFn, typename EvalFn, typename StepFn>
TrainHistory train_loop(const SupervisedSet& set, const TrainConfig& cfg, GradFn&& grad_step,
                        EvalFn&& eval_mse, StepFn&& snapshot) {
    std::vector<std::vector<double>> train_x, val_x;
    std::vector<double> train_y, val_y;
    set.batch_of(Split::train, train_x, train_y);
    set.batch_of(Split::validation, val_x, val_y);
    if (train_x.empty() || val_x.empty())
        throw std::invalid_argument("training needs non-empty train and validation splits");

    Rng rng(cfg.seed);
    TrainHistory history;
    history.best_val_mse = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;

    std::vector<std::size_t> order(train_x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::vector<std::vector<double>> xs;
            std::vector<double> ys;
            xs.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                xs.push_back(train_x[order[i]]);
                ys.push_back(train_y[order[i]]);
            }
            grad_step(xs, ys);
        }
        EpochStats stats{epoch, eval_mse(train_x, train_y), eval_mse(val_x, val_y)};
        history.epochs.push_back(stats);
        if (stats.val_mse < history.best_val_mse) {
            history.best_val_mse = stats.val_mse;
            history.best_epoch = epoch;
            snapshot();
            stale = 0;
        } else if (++stale >= cfg.patience) {
            history.stopped_early = true;
            break;
        }
    }
    return history;
}

}  // namespace detail

struct MlpTrainResult {
    MlpModel model;
    TrainHistory history;
};

inline MlpTrainResult train_mlp(const SupervisedSet& set, const TrainConfig& cfg,
                                std::vector<std::size_t> layer_sizes = {kForecastInputs, 16, 8, 1}) {
    Rng init_rng(cfg.seed);
    MlpModel model = MlpModel::init(std::move(layer_sizes), init_rng);
    MlpModel best = model;
    MlpGradients velocity = MlpGradients::zeros_like(model);

    auto grad_step = [&](const std::vector<std::vector<double>>& xs, const std::vector<double>& ys) {
        MlpGradients grads = MlpGradients::zeros_like(model);
        mlp_loss_gradients(model, xs, ys, grads);
        for (std::size_t l = 0; l < model.num_layers(); ++l) {
            for (std::size_t i = 0; i < model.weights[l].size(); ++i) {
                velocity.weights[l][i] = cfg.momentum * velocity.weights[l][i] - cfg.learning_rate * grads.weights[l][i];
                model.weights[l][i] += velocity.weights[l][i];
            }
            for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
                velocity.biases[l][i] = cfg.momentum * velocity.biases[l][i] - cfg.learning_rate * grads.biases[l][i];
                model.biases[l][i] += velocity.biases[l][i];
            }
        }
    };
    auto eval = [&](const std::vector<std::vector<double>>& xs, const std::vector<double>& ys) {
        return mlp_mse(model, xs, ys);
    };
    TrainHistory history = detail::train_loop(set, cfg, grad_step, eval, [&] { best = model; });
    return {std::move(best), std::move(history)};
}

struct HybridModel {
    std::vector<double> front_w;  // q x kForecastInputs row-major
    std::vector<double> front_b;  // q
    QuantumLayer qlayer;
    std::vector<double> back_w;   // q
    double back_b = 0.0;

    static HybridModel init(std::size_t qubits, std::size_t blocks, Rng& rng) {
        HybridModel m;
        m.qlayer = QuantumLayer::init(qubits, blocks, rng);
        const double r = 1.0 / std::sqrt(static_cast<double>(kForecastInputs));
        m.front_w.resize(qubits * kForecastInputs);
        for (double& v : m.front_w) v = rng.uniform(-r, r);
        m.front_b.assign(qubits, 0.0);
        m.back_w.resize(qubits);
        for (double& v : m.back_w) v = rng.uniform(-1.0, 1.0);
        return m;
    }

    std::size_t qubits() const { return qlayer.num_qubits; }
};

inline std::vector<double> hybrid_front(const HybridModel& m, const std::vector<double>& x) {
    if (x.size() != kForecastInputs) throw std::invalid_argument("hybrid_forward: input size mismatch");
    std::vector<double> z(m.qubits(), 0.0);
    for (std::size_t o = 0; o < m.qubits(); ++o) {
        double acc = m.front_b[o];
        for (std::size_t i = 0; i < kForecastInputs; ++i) acc += m.front_w[o * kForecastInputs + i] * x[i];
        z[o] = acc;
    }
    return z;
}

inline double hybrid_forward(const HybridModel& m, const std::vector<double>& x) {
    const std::vector<double> expect = vqc_forward(m.qlayer, hybrid_front(m, x));
    double acc = m.back_b;
    for (std::size_t i = 0; i < m.qubits(); ++i) acc += m.back_w[i] * expect[i];
    return logistic(acc);
}

struct HybridGradients {
    std::vector<double> front_w, front_b, thetas, back_w;
    double back_b = 0.0;

    static HybridGradients zeros_like(const HybridModel& m) {
        HybridGradients g;
        g.front_w.assign(m.front_w.size(), 0.0);
        g.front_b.assign(m.front_b.size(), 0.0);
        g.thetas.assign(m.qlayer.thetas.size(), 0.0);
        g.back_w.assign(m.back_w.size(), 0.0);
        return g;
    }
};

// Batch MSE and its gradient; the quantum layer's contribution enters the
// chain rule through the parameter-shift Jacobians.
inline double hybrid_loss_gradients(const HybridModel& m, const std::vector<std::vector<double>>& xs,
                                    const std::vector<double>& ys, HybridGradients& grads) {
    if (xs.size() != ys.size() || xs.empty()) throw std::invalid_argument("hybrid_loss_gradients: bad batch");
    const double inv_b = 1.0 / static_cast<double>(xs.size());
    const std::size_t q = m.qubits();
    double loss = 0.0;
    for (std::size_t s = 0; s < xs.size(); ++s) {
        const std::vector<double> z = hybrid_front(m, xs[s]);
        const std::vector<double> expect = vqc_forward(m.qlayer, z);
        double pre = m.back_b;
        for (std::size_t i = 0; i < q; ++i) pre += m.back_w[i] * expect[i];
        const double y_hat = logistic(pre);
        const double err = y_hat - ys[s];
        loss += err * err * inv_b;

        const double g_pre = 2.0 * err * inv_b * y_hat * (1.0 - y_hat);
        grads.back_b += g_pre;
        std::vector<double> g_expect(q, 0.0);
        for (std::size_t i = 0; i < q; ++i) {
            grads.back_w[i] += g_pre * expect[i];
            g_expect[i] = g_pre * m.back_w[i];
        }
        const VqcJacobians jac = vqc_gradient(m.qlayer, z);
        for (std::size_t p = 0; p < m.qlayer.num_params(); ++p) {
            double acc = 0.0;
            for (std::size_t o = 0; o < q; ++o) acc += g_expect[o] * jac.d_theta[p][o];
            grads.thetas[p] += acc;
        }
        for (std::size_t i = 0; i < q; ++i) {
            double g_z = 0.0;
            for (std::size_t o = 0; o < q; ++o) g_z += g_expect[o] * jac.d_z[i][o];
            grads.front_b[i] += g_z;
            for (std::size_t k = 0; k < kForecastInputs; ++k) grads.front_w[i * kForecastInputs + k] += g_z * xs[s][k];
        }
    }
    return loss;
}

inline double hybrid_mse(const HybridModel& m, const std::vector<std::vector<double>>& xs,
                         const std::vector<double>& ys) {
    double loss = 0.0;
    for (std::size_t s = 0; s < xs.size(); ++s) {
        const double err = hybrid_forward(m, xs[s]) - ys[s];
        loss += err * err;
    }
    return xs.empty() ? 0.0 : loss / static_cast<double>(xs.size());
}

struct HybridTrainResult {
    HybridModel model;
    TrainHistory history;
};

inline HybridTrainResult train_hybrid(const SupervisedSet& set, const TrainConfig& cfg, std::size_t qubits = 4,
                                      std::size_t blocks = 2) {
    Rng init_rng(cfg.seed);
    HybridModel model = HybridModel::init(qubits, blocks, init_rng);
    HybridModel best = model;
    HybridGradients velocity = HybridGradients::zeros_like(model);

    auto axpy = [&](std::vector<double>& vel, std::vector<double>& param, const std::vector<double>& grad) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            vel[i] = cfg.momentum * vel[i] - cfg.learning_rate * grad[i];
            param[i] += vel[i];
        }
    };
    double vel_back_b = 0.0;
    auto grad_step = [&](const std::vector<std::vector<double>>& xs, const std::vector<double>& ys) {
        HybridGradients grads = HybridGradients::zeros_like(model);
        hybrid_loss_gradients(model, xs, ys, grads);
        axpy(velocity.front_w, model.front_w, grads.front_w);
        axpy(velocity.front_b, model.front_b, grads.front_b);
        axpy(velocity.thetas, model.qlayer.thetas, grads.thetas);
        axpy(velocity.back_w, model.back_w, grads.back_w);
        vel_back_b = cfg.momentum * vel_back_b - cfg.learning_rate * grads.back_b;
        model.back_b += vel_back_b;
    };
    auto eval = [&](const std::vector<std::vector<double>>& xs, const std::vector<double>& ys) {
        return hybrid_mse(model, xs, ys);
    };
    TrainHistory history = detail::train_loop(set, cfg, grad_step, eval, [&] { best = model; });
    return {std::move(best), std::move(history)};
}

struct SplitErrors {
    double mae = 0.0;
    double rmse = 0.0;
    std::size_t count = 0;
};

struct ForecastEvaluation {
    std::map<std::string, SplitErrors> by_split;
    std::map<std::string, std::map<int, SplitErrors>> by_split_and_year;
};

inline ForecastEvaluation evaluate_forecast(const std::function<double(const std::vector<double>&)>& predict,
                                            const SupervisedSet& set) {
    ForecastEvaluation ev;
    struct Acc {
        double abs = 0.0, sq = 0.0;
        std::size_t n = 0;
    };
    std::map<std::string, Acc> split_acc;
    std::map<std::string, std::map<int, Acc>> year_acc;
    for (const auto& row : set.rows) {
        const double err = predict(row.inputs) - row.target;
        Acc& a = split_acc[split_name(row.split)];
        a.abs += std::abs(err);
        a.sq += err * err;
        ++a.n;
        Acc& y = year_acc[split_name(row.split)][row.target_year];
        y.abs += std::abs(err);
        y.sq += err * err;
        ++y.n;
    }
    auto finish = [](const Acc& a) {
        SplitErrors e;
        e.count = a.n;
        if (a.n > 0) {
            e.mae = a.abs / static_cast<double>(a.n);
            e.rmse = std::sqrt(a.sq / static_cast<double>(a.n));
        }
        return e;
    };
    for (const auto& [name, acc] : split_acc) ev.by_split[name] = finish(acc);
    for (const auto& [name, years] : year_acc)
        for (const auto& [year, acc] : years) ev.by_split_and_year[name][year] = finish(acc);
    return ev;
}

inline nlohmann::json evaluation_json(const ForecastEvaluation& ev) {
    nlohmann::json out;
    for (const auto& [name, e] : ev.by_split)
        out["splits"][name] = {{"mae", e.mae}, {"rmse", e.rmse}, {"count", e.count}};
    for (const auto& [name, years] : ev.by_split_and_year)
        for (const auto& [year, e] : years)
            out["per_year"][name][std::to_string(year)] = {{"mae", e.mae}, {"rmse", e.rmse}, {"count", e.count}};
    return out;
}

}  // namespace qepi
