#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "qepi/forecast.hpp"
#include "qepi/dataset.hpp"

using namespace qepi;

namespace {

// rows with random inputs in [0,1]^5 and a supplied target function
SupervisedSet synthetic_set(std::size_t n, std::uint64_t seed,
                            const std::function<double(const std::vector<double>&)>& target) {
    Rng rng(seed);
    SupervisedSet set;
    for (std::size_t i = 0; i < n; ++i) {
        SupervisedRow row;
        row.zip = std::to_string(10001 + i);
        row.target_year = 2022;
        row.inputs = {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
        row.target = target(row.inputs);
        const double bucket = rng.uniform();
        row.split = bucket < 0.6 ? Split::train : bucket < 0.8 ? Split::validation : Split::test;
        set.rows.push_back(std::move(row));
    }
    return set;
}

}  // namespace

TEST_CASE("build_supervised pairs consecutive years chronologically", "[forecast]") {
    SynthConfig cfg;
    cfg.n_points = 50;
    cfg.k_planted = 2;
    cfg.year_begin = 2018;
    cfg.year_end = 2022;
    cfg.seed = 5;
    cfg.missing_fraction = 0.0;
    Dataset data = minmax_normalize(generate_synthetic(cfg).data);
    SupervisedSet set = build_supervised(data);

    // five years give four consecutive pairs per zip
    CHECK(set.rows.size() == 50 * 4);
    std::size_t train = 0, val = 0, test = 0;
    for (const auto& row : set.rows) {
        for (double v : row.inputs) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        switch (row.split) {
            case Split::train:
                ++train;
                CHECK(row.target_year <= 2020);
                break;
            case Split::validation:
                ++val;
                CHECK(row.target_year == 2021);
                break;
            case Split::test:
                ++test;
                CHECK(row.target_year == 2022);
                break;
        }
    }
    CHECK(train == 50 * 2);
    CHECK(val == 50);
    CHECK(test == 50);
}

TEST_CASE("build_supervised edge cases", "[forecast]") {
    SECTION("a zip with a single year contributes nothing") {
        Dataset d;
        for (int year : {2021, 2022}) {
            ZipRecord r;
            r.zip = "11111";
            r.year = year;
            r.lat = 33.0;
            r.lon = -84.0;
            r.housing_instability = 0.5;
            r.stigma_index = 0.5;
            r.hiv_rate = 0.5;
            d.records.push_back(r);
        }
        ZipRecord lone;
        lone.zip = "22222";
        lone.year = 2022;
        lone.lat = 34.0;
        lone.lon = -85.0;
        lone.housing_instability = 0.1;
        lone.stigma_index = 0.1;
        lone.hiv_rate = 0.1;
        d.records.push_back(lone);
        d.normalization_state = NormState::normalized;
        SupervisedSet set = build_supervised(d);
        REQUIRE(set.rows.size() == 1);
        CHECK(set.rows[0].zip == "11111");
        CHECK(set.rows[0].target_year == 2022);
        CHECK(set.rows[0].split == Split::test);
    }
    SECTION("fewer than two years is an error") {
        Dataset d;
        ZipRecord r;
        r.zip = "11111";
        r.year = 2022;
        r.lat = 33.0;
        r.lon = -84.0;
        r.housing_instability = 0.5;
        r.stigma_index = 0.5;
        r.hiv_rate = 0.5;
        d.records.push_back(r);
        d.normalization_state = NormState::normalized;
        CHECK_THROWS(build_supervised(d));
    }
}

TEST_CASE("mlp_forward computes the documented network", "[forecast][mlp]") {
    SECTION("all-zero parameters output 0.5") {
        Rng rng(1);
        MlpModel m = MlpModel::init({5, 16, 8, 1}, rng);
        for (auto& w : m.weights) std::fill(w.begin(), w.end(), 0.0);
        for (auto& b : m.biases) std::fill(b.begin(), b.end(), 0.0);
        CHECK(mlp_forward(m, {0.1, 0.2, 0.3, 0.4, 0.5}) == 0.5);
    }
    SECTION("tiny known network") {
        Rng rng(1);
        MlpModel m = MlpModel::init({1, 1, 1}, rng);
        m.weights[0] = {1.0};
        m.weights[1] = {1.0};
        m.biases[0] = {0.0};
        m.biases[1] = {0.0};
        CHECK(mlp_forward(m, {0.0}) == 0.5);  // logistic(tanh(0))
        CHECK_THAT(mlp_forward(m, {1.0}), Catch::Matchers::WithinAbs(logistic(std::tanh(1.0)), 1e-15));
    }
    SECTION("matches an independent matrix evaluation") {
        Rng rng(9);
        MlpModel m = MlpModel::init({3, 4, 2, 1}, rng);
        std::vector<double> x = {0.3, -0.2, 0.9};
        // hand-rolled forward pass
        std::vector<double> h = x;
        for (std::size_t l = 0; l < m.num_layers(); ++l) {
            std::vector<double> next(m.layer_sizes[l + 1]);
            for (std::size_t o = 0; o < next.size(); ++o) {
                double z = m.biases[l][o];
                for (std::size_t i = 0; i < h.size(); ++i) z += m.weights[l][o * h.size() + i] * h[i];
                next[o] = l + 1 == m.num_layers() ? 1.0 / (1.0 + std::exp(-z)) : std::tanh(z);
            }
            h = next;
        }
        CHECK_THAT(mlp_forward(m, x), Catch::Matchers::WithinAbs(h[0], 1e-12));
        CHECK_THROWS(mlp_forward(m, {1.0, 2.0}));
    }
}

TEST_CASE("mlp backprop matches central finite differences", "[forecast][mlp]") {
    Rng rng(31);
    for (int inst = 0; inst < 5; ++inst) {
        MlpModel m = MlpModel::init({5, 6, 4, 1}, rng);
        std::vector<std::vector<double>> xs;
        std::vector<double> ys;
        for (int s = 0; s < 4; ++s) {
            xs.push_back({rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()});
            ys.push_back(rng.uniform());
        }
        MlpGradients grads = MlpGradients::zeros_like(m);
        mlp_loss_gradients(m, xs, ys, grads);
        const double h = 1e-5;
        double max_diff = 0.0;
        for (std::size_t l = 0; l < m.num_layers(); ++l) {
            for (std::size_t i = 0; i < m.weights[l].size(); ++i) {
                MlpModel plus = m, minus = m;
                plus.weights[l][i] += h;
                minus.weights[l][i] -= h;
                double fd = (mlp_mse(plus, xs, ys) - mlp_mse(minus, xs, ys)) / (2.0 * h);
                max_diff = std::max(max_diff, std::abs(fd - grads.weights[l][i]));
            }
            for (std::size_t i = 0; i < m.biases[l].size(); ++i) {
                MlpModel plus = m, minus = m;
                plus.biases[l][i] += h;
                minus.biases[l][i] -= h;
                double fd = (mlp_mse(plus, xs, ys) - mlp_mse(minus, xs, ys)) / (2.0 * h);
                max_diff = std::max(max_diff, std::abs(fd - grads.biases[l][i]));
            }
        }
        CHECK(max_diff < 1e-6);
    }
}

TEST_CASE("train_mlp learns a learnable target and stops early on noise", "[forecast][mlp]") {
    SECTION("XOR-style batch") {
        SupervisedSet set;
        auto add = [&](double a, double b, double y, Split s) {
            SupervisedRow row;
            row.inputs = {a, b, 0.0, 0.0, 0.0};
            row.target = y;
            row.split = s;
            set.rows.push_back(row);
        };
        for (Split s : {Split::train, Split::validation}) {
            add(0, 0, 0, s);
            add(0, 1, 1, s);
            add(1, 0, 1, s);
            add(1, 1, 0, s);
        }
        TrainConfig cfg;
        cfg.max_epochs = 5000;
        cfg.patience = 5000;
        cfg.learning_rate = 0.5;
        cfg.batch_size = 4;
        cfg.seed = 2;
        MlpTrainResult res = train_mlp(set, cfg);
        std::vector<std::vector<double>> xs;
        std::vector<double> ys;
        set.batch_of(Split::train, xs, ys);
        CHECK(mlp_mse(res.model, xs, ys) < 0.01);
    }
    SECTION("noise-only targets trigger early stopping in most seeds") {
        int early = 0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            SupervisedSet set = synthetic_set(120, 100 + seed, [&](const std::vector<double>&) {
                static Rng noise_rng(7777);
                return noise_rng.uniform();
            });
            TrainConfig cfg;
            cfg.max_epochs = 300;
            cfg.patience = 20;
            cfg.seed = seed;
            MlpTrainResult res = train_mlp(set, cfg);
            if (res.history.stopped_early) ++early;
        }
        CHECK(early >= 8);
    }
    SECTION("deterministic for a fixed seed") {
        SupervisedSet set = synthetic_set(60, 9, [](const std::vector<double>& x) { return x[0]; });
        TrainConfig cfg;
        cfg.max_epochs = 30;
        cfg.patience = 30;
        cfg.seed = 4;
        MlpTrainResult a = train_mlp(set, cfg);
        MlpTrainResult b = train_mlp(set, cfg);
        CHECK(a.model.weights == b.model.weights);
        CHECK(a.model.biases == b.model.biases);
        CHECK(a.history.epochs.size() == b.history.epochs.size());
    }
}

TEST_CASE("vqc_forward closed forms", "[forecast][vqc]") {
    Rng rng(3);
    SECTION("zero angles leave |0...0> untouched") {
        QuantumLayer layer = QuantumLayer::init(3, 2, rng);
        std::fill(layer.thetas.begin(), layer.thetas.end(), 0.0);
        std::vector<double> expect = vqc_forward_angles(layer, {0.0, 0.0, 0.0});
        for (double e : expect) CHECK_THAT(e, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
    SECTION("single qubit flips at angle pi") {
        QuantumLayer layer = QuantumLayer::init(1, 1, rng);
        std::fill(layer.thetas.begin(), layer.thetas.end(), 0.0);
        std::vector<double> expect = vqc_forward_angles(layer, {std::numbers::pi});
        CHECK_THAT(expect[0], Catch::Matchers::WithinAbs(-1.0, 1e-12));
    }
    SECTION("single qubit follows cos(angle) on a grid") {
        QuantumLayer layer = QuantumLayer::init(1, 2, rng);
        std::fill(layer.thetas.begin(), layer.thetas.end(), 0.0);
        for (int i = 0; i <= 20; ++i) {
            double a = std::numbers::pi * i / 20.0;
            CHECK_THAT(vqc_forward_angles(layer, {a})[0], Catch::Matchers::WithinAbs(std::cos(a), 1e-12));
        }
    }
    SECTION("outputs stay in [-1, 1]") {
        QuantumLayer layer = QuantumLayer::init(4, 2, rng);
        for (int inst = 0; inst < 10; ++inst) {
            std::vector<double> z = {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
            for (double e : vqc_forward(layer, z)) {
                CHECK(e >= -1.0 - 1e-12);
                CHECK(e <= 1.0 + 1e-12);
            }
        }
    }
}

TEST_CASE("parameter-shift gradients match finite differences", "[forecast][vqc]") {
    Rng rng(41);
    for (int inst = 0; inst < 6; ++inst) {
        const std::size_t q = 1 + rng.uniform_int(4);   // up to 4 qubits
        const std::size_t blocks = 1 + rng.uniform_int(2);
        QuantumLayer layer = QuantumLayer::init(q, blocks, rng);
        for (double& t : layer.thetas) t = rng.uniform(-1.5, 1.5);
        std::vector<double> z(q);
        for (double& v : z) v = rng.uniform(-2.0, 2.0);

        VqcJacobians jac = vqc_gradient(layer, z);
        const double h = 1e-4;
        double max_diff = 0.0;
        for (std::size_t p = 0; p < layer.num_params(); ++p) {
            QuantumLayer plus = layer, minus = layer;
            plus.thetas[p] += h;
            minus.thetas[p] -= h;
            std::vector<double> fp = vqc_forward(plus, z), fm = vqc_forward(minus, z);
            for (std::size_t o = 0; o < q; ++o)
                max_diff = std::max(max_diff, std::abs((fp[o] - fm[o]) / (2 * h) - jac.d_theta[p][o]));
        }
        for (std::size_t i = 0; i < q; ++i) {
            std::vector<double> zp = z, zm = z;
            zp[i] += h;
            zm[i] -= h;
            std::vector<double> fp = vqc_forward(layer, zp), fm = vqc_forward(layer, zm);
            for (std::size_t o = 0; o < q; ++o)
                max_diff = std::max(max_diff, std::abs((fp[o] - fm[o]) / (2 * h) - jac.d_z[i][o]));
        }
        CHECK(max_diff < 1e-6);
    }
}

TEST_CASE("gradient vanishes at symmetry points", "[forecast][vqc]") {
    Rng rng(43);
    QuantumLayer layer = QuantumLayer::init(1, 1, rng);
    std::fill(layer.thetas.begin(), layer.thetas.end(), 0.0);
    SECTION("stationary at theta = 0, angle = 0") {
        VqcJacobians jac = vqc_gradient(layer, {-1e9});  // encoding angle ~ 0
        CHECK_THAT(jac.d_theta[0][0], Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
    SECTION("d<Z>/d theta_ry = -1 at theta = pi/2 with angle 0") {
        layer.thetas[layer.theta_index(0, 0, false)] = std::numbers::pi / 2.0;
        VqcJacobians jac = vqc_gradient(layer, {-1e9});
        CHECK_THAT(jac.d_theta[layer.theta_index(0, 0, false)][0], Catch::Matchers::WithinAbs(-1.0, 1e-10));
    }
}

TEST_CASE("hybrid gradients chain through the quantum layer", "[forecast][hybrid]") {
    Rng rng(47);
    HybridModel m = HybridModel::init(3, 1, rng);
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (int s = 0; s < 3; ++s) {
        xs.push_back({rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()});
        ys.push_back(rng.uniform());
    }
    HybridGradients grads = HybridGradients::zeros_like(m);
    hybrid_loss_gradients(m, xs, ys, grads);
    const double h = 1e-4;
    double max_diff = 0.0;
    auto fd_check = [&](auto getter, double analytic) {
        HybridModel plus = m, minus = m;
        *getter(plus) += h;
        *getter(minus) -= h;
        double fd = (hybrid_mse(plus, xs, ys) - hybrid_mse(minus, xs, ys)) / (2 * h);
        max_diff = std::max(max_diff, std::abs(fd - analytic));
    };
    for (std::size_t i = 0; i < m.front_w.size(); ++i)
        fd_check([i](HybridModel& mm) { return &mm.front_w[i]; }, grads.front_w[i]);
    for (std::size_t i = 0; i < m.front_b.size(); ++i)
        fd_check([i](HybridModel& mm) { return &mm.front_b[i]; }, grads.front_b[i]);
    for (std::size_t i = 0; i < m.qlayer.thetas.size(); ++i)
        fd_check([i](HybridModel& mm) { return &mm.qlayer.thetas[i]; }, grads.thetas[i]);
    for (std::size_t i = 0; i < m.back_w.size(); ++i)
        fd_check([i](HybridModel& mm) { return &mm.back_w[i]; }, grads.back_w[i]);
    fd_check([](HybridModel& mm) { return &mm.back_b; }, grads.back_b);
    CHECK(max_diff < 1e-6);
}

TEST_CASE("train_hybrid learns a smooth target deterministically", "[forecast][hybrid]") {
    SupervisedSet set = synthetic_set(160, 77, [](const std::vector<double>& x) {
        return logistic(2.0 * (x[0] - 0.5));
    });
    TrainConfig cfg;
    cfg.max_epochs = 150;
    cfg.patience = 30;
    cfg.learning_rate = 0.2;
    cfg.seed = 6;
    HybridTrainResult res = train_hybrid(set, cfg, 4, 2);
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    set.batch_of(Split::test, xs, ys);
    CHECK(hybrid_mse(res.model, xs, ys) < 0.01);

    SECTION("bitwise identical rerun") {
        HybridTrainResult again = train_hybrid(set, cfg, 4, 2);
        CHECK(again.model.front_w == res.model.front_w);
        CHECK(again.model.qlayer.thetas == res.model.qlayer.thetas);
        CHECK(again.model.back_w == res.model.back_w);
        CHECK(again.model.back_b == res.model.back_b);
    }
    SECTION("best validation MSE is non-increasing over the history") {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& e : res.history.epochs) {
            best = std::min(best, e.val_mse);
            CHECK(best <= e.val_mse + 1e-15);
        }
        CHECK(res.history.best_val_mse == best);
    }
}

TEST_CASE("hybrid with zero rotations is a fixed smooth function", "[forecast][hybrid]") {
    Rng rng(53);
    HybridModel m = HybridModel::init(4, 2, rng);
    std::fill(m.qlayer.thetas.begin(), m.qlayer.thetas.end(), 0.0);
    const std::vector<double> x = {0.2, 0.4, 0.6, 0.8, 0.1};
    const double first = hybrid_forward(m, x);
    for (int rep = 0; rep < 5; ++rep) CHECK(hybrid_forward(m, x) == first);
    CHECK(first > 0.0);
    CHECK(first < 1.0);
}

TEST_CASE("evaluate_forecast computes MAE and RMSE per split and year", "[forecast]") {
    SECTION("perfect predictor") {
        SupervisedSet set = synthetic_set(30, 13, [](const std::vector<double>& x) { return x[1]; });
        ForecastEvaluation ev = evaluate_forecast([](const std::vector<double>& x) { return x[1]; }, set);
        for (const auto& [name, e] : ev.by_split) {
            CHECK(e.mae == 0.0);
            CHECK(e.rmse == 0.0);
        }
    }
    SECTION("constant 0.5 on balanced 0/1 targets") {
        SupervisedSet set;
        for (int i = 0; i < 10; ++i) {
            SupervisedRow row;
            row.inputs = {0, 0, 0, 0, 0};
            row.target = i % 2 == 0 ? 0.0 : 1.0;
            row.split = Split::test;
            row.target_year = 2022;
            set.rows.push_back(row);
        }
        ForecastEvaluation ev = evaluate_forecast([](const std::vector<double>&) { return 0.5; }, set);
        CHECK_THAT(ev.by_split["test"].mae, Catch::Matchers::WithinAbs(0.5, 1e-15));
        CHECK_THAT(ev.by_split["test"].rmse, Catch::Matchers::WithinAbs(0.5, 1e-15));
    }
    SECTION("matches a direct two-line computation and RMSE >= MAE") {
        Rng rng(17);
        SupervisedSet set = synthetic_set(50, 19, [&](const std::vector<double>&) { return rng.uniform(); });
        auto model = [](const std::vector<double>& x) { return x[2]; };
        ForecastEvaluation ev = evaluate_forecast(model, set);
        for (Split s : {Split::train, Split::validation, Split::test}) {
            double abs = 0.0, sq = 0.0;
            std::size_t n = 0;
            for (const auto& row : set.rows) {
                if (row.split != s) continue;
                double err = model(row.inputs) - row.target;
                abs += std::abs(err);
                sq += err * err;
                ++n;
            }
            const SplitErrors& e = ev.by_split[split_name(s)];
            CHECK_THAT(e.mae, Catch::Matchers::WithinAbs(abs / n, 1e-12));
            CHECK_THAT(e.rmse, Catch::Matchers::WithinAbs(std::sqrt(sq / n), 1e-12));
            CHECK(e.rmse >= e.mae - 1e-15);
        }
    }
    SECTION("RMSE dominates MAE on random predictors", "[property]") {
        Rng rng(23);
        for (int inst = 0; inst < 10; ++inst) {
            SupervisedSet set = synthetic_set(40, 500 + inst, [&](const std::vector<double>&) { return rng.uniform(); });
            double a = rng.uniform();
            ForecastEvaluation ev =
                evaluate_forecast([a](const std::vector<double>& x) { return std::clamp(a * x[0] + 0.1, 0.0, 1.0); }, set);
            for (const auto& [name, e] : ev.by_split) CHECK(e.rmse >= e.mae - 1e-12);
        }
    }
}

TEST_CASE("history CSV has the documented shape", "[forecast]") {
    TrainHistory h;
    h.epochs = {{1, 0.5, 0.6}, {2, 0.25, 0.5}};
    CHECK(history_csv(h) == "epoch,train_mse,val_mse\n1,0.5,0.6\n2,0.25,0.5\n");
}
