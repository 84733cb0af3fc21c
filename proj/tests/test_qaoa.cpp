#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "qepi/qaoa.hpp"

using namespace qepi;

namespace {

Qubo single_qubit_01() {
    // energies [0, 1] over the two basis states
    Qubo q = Qubo::zeros(1);
    q.linear = {1.0};
    return q;
}

// closed form for the single-qubit [0,1] spectrum at depth 1
double closed_form_energy(double gamma, double beta) {
    return 0.5 * (1.0 + std::sin(2.0 * beta) * std::sin(gamma));
}

DistanceMatrix two_pairs() {
    DistanceMatrix dm;
    dm.n = 4;
    dm.d.assign(16, 1.0);
    for (std::size_t i = 0; i < 4; ++i) dm.at(i, i) = 0.0;
    dm.at(0, 1) = dm.at(1, 0) = 0.1;
    dm.at(2, 3) = dm.at(3, 2) = 0.1;
    return dm;
}

Qubo random_qubo(std::size_t nv, Rng& rng) {
    Qubo out = Qubo::zeros(nv);
    for (std::size_t v = 0; v < nv; ++v) out.linear[v] = rng.uniform(-1.0, 1.0);
    for (std::size_t a = 0; a < nv; ++a)
        for (std::size_t b = a + 1; b < nv; ++b)
            if (rng.uniform() < 0.6) out.add_quadratic(a, b, rng.uniform(-1.0, 1.0));
    return out;
}

}  // namespace

TEST_CASE("uniform_state is the equal superposition", "[qaoa]") {
    QuantumState s1 = uniform_state(1);
    CHECK_THAT(s1.amplitudes[0].real(), Catch::Matchers::WithinAbs(0.7071068, 1e-7));
    CHECK_THAT(s1.amplitudes[1].real(), Catch::Matchers::WithinAbs(0.7071068, 1e-7));

    QuantumState s3 = uniform_state(3);
    REQUIRE(s3.amplitudes.size() == 8);
    for (const auto& a : s3.amplitudes) {
        CHECK(a == s3.amplitudes[0]);
        CHECK_THAT(std::norm(a), Catch::Matchers::WithinAbs(1.0 / 8.0, 1e-12));
    }
    CHECK_THAT(s3.norm(), Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THROWS(uniform_state(0));
    CHECK_THROWS(uniform_state(25));
}

TEST_CASE("qaoa_state at depth 0 is the uniform state", "[qaoa]") {
    CostSpectrum cs = CostSpectrum::from_qubo(single_qubit_01());
    QuantumState st = qaoa_state(cs, {});
    QuantumState uni = uniform_state(1);
    CHECK(st.amplitudes == uni.amplitudes);
}

TEST_CASE("single-qubit evolution matches the closed form on a 20x20 grid", "[qaoa]") {
    CostSpectrum cs = CostSpectrum::from_qubo(single_qubit_01());
    for (int gi = 0; gi < 20; ++gi) {
        for (int bi = 0; bi < 20; ++bi) {
            double gamma = 2.0 * std::numbers::pi * gi / 20.0;
            double beta = std::numbers::pi * bi / 20.0;
            QuantumState st = qaoa_state(cs, {{gamma}, {beta}});
            CHECK_THAT(expectation(st, cs), Catch::Matchers::WithinAbs(closed_form_energy(gamma, beta), 1e-10));
        }
    }
}

TEST_CASE("zero gamma keeps measurement probabilities uniform", "[qaoa]") {
    Rng rng(3);
    Qubo q = random_qubo(5, rng);
    CostSpectrum cs = CostSpectrum::from_qubo(q);
    QaoaParams prm{{0.0, 0.0}, {rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0)}};
    QuantumState st = qaoa_state(cs, prm);
    for (const auto& a : st.amplitudes) CHECK_THAT(std::norm(a), Catch::Matchers::WithinAbs(1.0 / 32.0, 1e-12));
}

TEST_CASE("expectation in original units", "[qaoa]") {
    Qubo q = single_qubit_01();
    CostSpectrum cs = CostSpectrum::from_qubo(q);
    SECTION("uniform state gives the mean energy") {
        CHECK_THAT(expectation(uniform_state(1), cs), Catch::Matchers::WithinAbs(0.5, 1e-12));
    }
    SECTION("basis states give their table entry") {
        QuantumState st;
        st.num_qubits = 1;
        st.amplitudes = {{0.0, 0.0}, {1.0, 0.0}};
        CHECK(expectation(st, cs) == 1.0);
    }
    SECTION("the optimum of the closed form is reached at gamma=pi/2, beta=3pi/4") {
        QuantumState st = qaoa_state(cs, {{std::numbers::pi / 2.0}, {3.0 * std::numbers::pi / 4.0}});
        CHECK_THAT(expectation(st, cs), Catch::Matchers::WithinAbs(0.0, 1e-10));
    }
    SECTION("normalized spectrum de-normalizes exactly") {
        CostSpectrum norm = cs.normalized();
        CHECK_THAT(expectation(uniform_state(1), norm), Catch::Matchers::WithinAbs(0.5, 1e-12));
        CHECK(norm.original_energy(0) == 0.0);
        CHECK(norm.original_energy(1) == 1.0);
    }
}

TEST_CASE("adding a constant shifts the expectation and nothing else", "[qaoa][property]") {
    Rng rng(5);
    Qubo q = random_qubo(6, rng);
    CostSpectrum cs = CostSpectrum::from_qubo(q);
    Qubo shifted = q;
    shifted.constant += 2.5;
    CostSpectrum cs2 = CostSpectrum::from_qubo(shifted);
    QaoaParams prm{{0.7, 1.3}, {0.4, 2.1}};
    QuantumState a = qaoa_state(cs, prm);
    QuantumState b = qaoa_state(cs2, prm);
    CHECK_THAT(expectation(b, cs2) - expectation(a, cs), Catch::Matchers::WithinAbs(2.5, 1e-10));
    for (std::size_t i = 0; i < a.amplitudes.size(); ++i)
        CHECK_THAT(std::norm(a.amplitudes[i]), Catch::Matchers::WithinAbs(std::norm(b.amplitudes[i]), 1e-12));
}

TEST_CASE("norm is preserved by random schedules", "[qaoa][property]") {
    Rng rng(9);
    for (int inst = 0; inst < 10; ++inst) {
        std::size_t nv = 2 + rng.uniform_int(7);  // up to 8 qubits
        Qubo q = random_qubo(nv, rng);
        CostSpectrum cs = CostSpectrum::from_qubo(q);
        std::size_t p = 1 + rng.uniform_int(4);
        QaoaParams prm;
        for (std::size_t k = 0; k < p; ++k) {
            prm.gammas.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
            prm.betas.push_back(rng.uniform(0.0, std::numbers::pi));
        }
        QuantumState st = qaoa_state(cs, prm);
        CHECK_THAT(st.norm(), Catch::Matchers::WithinAbs(1.0, 1e-10));
        CHECK_THAT(expectation(qaoa_state(cs, {}), cs),
                   Catch::Matchers::WithinAbs(expectation(uniform_state(nv), cs), 1e-12));
    }
}

TEST_CASE("sample_bitstrings draws from the amplitude distribution", "[qaoa]") {
    SECTION("basis state concentrates all shots") {
        QuantumState st;
        st.num_qubits = 3;
        st.amplitudes.assign(8, {0.0, 0.0});
        st.amplitudes[5] = {1.0, 0.0};
        auto hist = sample_bitstrings(st, 100, 42);
        REQUIRE(hist.size() == 1);
        CHECK(hist.at(5) == 100);
    }
    SECTION("same seed, same histogram") {
        QuantumState st = uniform_state(4);
        auto h1 = sample_bitstrings(st, 500, 7);
        auto h2 = sample_bitstrings(st, 500, 7);
        CHECK(h1 == h2);
    }
    SECTION("single-qubit uniform counts stay within the 3-sigma binomial band") {
        QuantumState st = uniform_state(1);
        auto hist = sample_bitstrings(st, 10000, 11);
        std::uint64_t zeros = hist.count(0) ? hist.at(0) : 0;
        CHECK(zeros >= 5000 - 150);
        CHECK(zeros <= 5000 + 150);
    }
}

TEST_CASE("optimize_qaoa finds the single-qubit optimum", "[qaoa]") {
    QaoaOptResult res = optimize_qaoa(single_qubit_01(), 1, {}, 0);
    CHECK(res.expected_energy <= 1e-6);
    CHECK(res.expected_energy >= -1e-9);
    CHECK(res.params.depth() == 1);
    SECTION("qubit cap and depth validation") {
        CHECK_THROWS_AS(optimize_qaoa(Qubo::zeros(25), 1, {}, 0), infeasible_error);
        CHECK_THROWS(optimize_qaoa(single_qubit_01(), 0, {}, 0));
    }
}

TEST_CASE("optimized energy dominates the exhaustive minimum", "[qaoa][property]") {
    Rng rng(13);
    for (int inst = 0; inst < 5; ++inst) {
        Qubo q = random_qubo(4 + rng.uniform_int(3), rng);
        SolveResult exact = brute_force_solve(q);
        QaoaOptResult res = optimize_qaoa(q, 1, {}, inst);
        CHECK(res.expected_energy >= exact.energy - 1e-9);
    }
}

TEST_CASE("warm-started depth never hurts", "[qaoa][property]") {
    Rng rng(19);
    for (int inst = 0; inst < 6; ++inst) {
        Qubo q = random_qubo(3 + rng.uniform_int(5), rng);
        QaoaOptResult p1 = optimize_qaoa(q, 1, {}, 100 + inst);
        QaoaOptResult p2 = optimize_qaoa(q, 2, {}, 100 + inst);
        CHECK(p2.expected_energy <= p1.expected_energy + 1e-9);
    }
}

TEST_CASE("best sampled energy rarely exceeds the expectation", "[qaoa][property]") {
    Rng rng(29);
    int holds = 0;
    const int runs = 20;
    for (int inst = 0; inst < runs; ++inst) {
        Qubo q = random_qubo(4 + rng.uniform_int(3), rng);
        QaoaOptResult opt = optimize_qaoa(q, 1, {}, 200 + inst);
        QuantumState st = qaoa_state(opt.spectrum, opt.params);
        auto hist = sample_bitstrings(st, 4096, 300 + inst);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [b, cnt] : hist) best = std::min(best, qubo_energy(q, b));
        if (best <= opt.expected_energy + 1e-9) ++holds;
    }
    CHECK(holds >= runs * 95 / 100);
}

TEST_CASE("qaoa_cluster recovers planted structure", "[qaoa]") {
    SECTION("two-pairs instance with the compact encoding") {
        QaoaClusterResult res = qaoa_cluster(two_pairs(), 2, 2, 1024, 1);
        // planted split up to label swap
        std::vector<int> want = {res.labels.labels[0], res.labels.labels[0], 1 - res.labels.labels[0],
                                 1 - res.labels.labels[0]};
        CHECK(res.labels.labels == want);
        CHECK(res.diagnostics.feasible_sample_fraction == 1.0);
        ClusterQubo cq = build_cluster_qubo(two_pairs(), 2, EncodingScheme::compact2);
        CHECK(res.diagnostics.best_sample_energy >= brute_force_solve(cq.qubo).energy - 1e-12);
    }
    SECTION("two points in different clusters under onehot") {
        DistanceMatrix dm;
        dm.n = 2;
        dm.d = {0.0, 0.8, 0.8, 0.0};
        QaoaClusterResult res = qaoa_cluster(dm, 2, 2, 512, 3, EncodingScheme::onehot);
        CHECK(res.labels.labels[0] != res.labels.labels[1]);
    }
}
