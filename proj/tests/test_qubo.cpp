#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qepi/qubo.hpp"

using namespace qepi;

namespace {

DistanceMatrix matrix_from(std::size_t n, const std::vector<double>& upper) {
    DistanceMatrix dm;
    dm.n = n;
    dm.d.assign(n * n, 0.0);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            dm.at(i, j) = upper[idx];
            dm.at(j, i) = upper[idx];
            ++idx;
        }
    return dm;
}

// within-pair distance 0.1 for (0,1) and (2,3), 1.0 across
DistanceMatrix two_pairs() {
    return matrix_from(4, {0.1, 1.0, 1.0, 1.0, 1.0, 0.1});
}

Qubo random_qubo(std::size_t q, Rng& rng, double density = 0.7) {
    Qubo out = Qubo::zeros(q);
    out.constant = rng.uniform(-1.0, 1.0);
    for (std::size_t v = 0; v < q; ++v) out.linear[v] = rng.uniform(-1.0, 1.0);
    for (std::size_t a = 0; a < q; ++a)
        for (std::size_t b = a + 1; b < q; ++b)
            if (rng.uniform() < density) out.add_quadratic(a, b, rng.uniform(-1.0, 1.0));
    return out;
}

}  // namespace

TEST_CASE("qubo_energy evaluates the quadratic form", "[qubo]") {
    Qubo zero = Qubo::zeros(3);
    for (Bitstring b = 0; b < 8; ++b) CHECK(qubo_energy(zero, b) == 0.0);

    Qubo q = Qubo::zeros(2);
    q.linear = {-1.0, -1.0};
    q.add_quadratic(0, 1, 2.0);
    CHECK(qubo_energy(q, 0) == 0.0);
    CHECK(qubo_energy(q, 1) == -1.0);
    CHECK(qubo_energy(q, 2) == -1.0);
    CHECK(qubo_energy(q, 3) == 0.0);
    CHECK_THROWS(qubo_energy(q, 4));
}

TEST_CASE("qubo_to_ising algebra", "[qubo]") {
    SECTION("single linear term") {
        Qubo q = Qubo::zeros(1);
        q.linear = {3.0};
        IsingModel m = qubo_to_ising(q);
        CHECK(m.h[0] == -1.5);
        CHECK(m.offset == 1.5);
        CHECK(ising_energy(m, {1}) == qubo_energy(q, 0));
        CHECK(ising_energy(m, {-1}) == qubo_energy(q, 1));
    }
    SECTION("pure quadratic term") {
        Qubo q = Qubo::zeros(2);
        q.add_quadratic(0, 1, 4.0);
        IsingModel m = qubo_to_ising(q);
        CHECK(m.offset == 1.0);
        CHECK(m.h == std::vector<double>{-1.0, -1.0});
        CHECK(m.j.at({0, 1}) == 1.0);
        for (Bitstring b = 0; b < 4; ++b)
            CHECK(ising_energy(m, spins_from_bits(b, 2)) == qubo_energy(q, b));
    }
    SECTION("zero maps to zero") {
        IsingModel m = qubo_to_ising(Qubo::zeros(3));
        CHECK(m.offset == 0.0);
        for (double h : m.h) CHECK(h == 0.0);
        CHECK(m.j.empty());
    }
}

TEST_CASE("qubo/ising energies agree on random instances", "[qubo][property]") {
    Rng rng(17);
    for (int inst = 0; inst < 30; ++inst) {
        std::size_t q = 2 + rng.uniform_int(11);  // up to 12 vars
        Qubo qb = random_qubo(q, rng);
        IsingModel m = qubo_to_ising(qb);
        for (Bitstring b = 0; b < (Bitstring{1} << q); ++b) {
            CHECK_THAT(ising_energy(m, spins_from_bits(b, q)),
                       Catch::Matchers::WithinAbs(qubo_energy(qb, b), 1e-12));
        }
    }
}

TEST_CASE("random spot checks of the bit/spin identity", "[qubo][property]") {
    Rng rng(23);
    for (int i = 0; i < 1000; ++i) {
        std::size_t q = 1 + rng.uniform_int(10);
        Qubo qb = random_qubo(q, rng, 0.5);
        IsingModel m = qubo_to_ising(qb);
        Bitstring b = rng.uniform_int(std::uint64_t{1} << q);
        CHECK_THAT(ising_energy(m, spins_from_bits(b, q)), Catch::Matchers::WithinAbs(qubo_energy(qb, b), 1e-12));
    }
}

TEST_CASE("compact2 encoding is the weighted max-cut complement", "[qubo]") {
    SECTION("two points") {
        DistanceMatrix dm = matrix_from(2, {1.0});
        ClusterQubo cq = build_cluster_qubo(dm, 2, EncodingScheme::compact2);
        CHECK(cq.qubo.num_vars == 2);
        CHECK(qubo_energy(cq.qubo, 0b00) == 1.0);
        CHECK(qubo_energy(cq.qubo, 0b11) == 1.0);
        CHECK(qubo_energy(cq.qubo, 0b01) == 0.0);
        CHECK(qubo_energy(cq.qubo, 0b10) == 0.0);
    }
    SECTION("intra plus cut equals the total distance for every state") {
        Rng rng(31);
        for (int inst = 0; inst < 10; ++inst) {
            std::size_t n = 3 + rng.uniform_int(4);
            std::vector<double> upper(n * (n - 1) / 2);
            for (auto& u : upper) u = rng.uniform();
            DistanceMatrix dm = matrix_from(n, upper);
            ClusterQubo cq = build_cluster_qubo(dm, 2, EncodingScheme::compact2);
            double total = 0.0;
            for (double u : upper) total += u;
            for (Bitstring b = 0; b < (Bitstring{1} << n); ++b) {
                double intra = qubo_energy(cq.qubo, b);
                double cut = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = i + 1; j < n; ++j)
                        if (((b >> i) & 1) != ((b >> j) & 1)) cut += dm.at(i, j);
                CHECK_THAT(intra + cut, Catch::Matchers::WithinAbs(total, 1e-12));
            }
        }
    }
    SECTION("two-pairs optimum is the planted split") {
        ClusterQubo cq = build_cluster_qubo(two_pairs(), 2, EncodingScheme::compact2);
        SolveResult res = brute_force_solve(cq.qubo);
        CHECK_THAT(res.energy, Catch::Matchers::WithinAbs(0.2, 1e-12));
        CHECK((res.best == 0b0011 || res.best == 0b1100));
    }
}

TEST_CASE("onehot encoding separates points and penalizes infeasibility", "[qubo]") {
    SECTION("two points, two clusters") {
        DistanceMatrix dm = matrix_from(2, {0.3});
        ClusterQubo cq = build_cluster_qubo(dm, 2, EncodingScheme::onehot);
        REQUIRE(cq.qubo.num_vars == 4);
        double min_e = std::numeric_limits<double>::infinity();
        std::vector<Bitstring> argmins;
        for (Bitstring b = 0; b < 16; ++b) {
            double e = qubo_energy(cq.qubo, b);
            if (e < min_e - 1e-12) {
                min_e = e;
                argmins = {b};
            } else if (std::abs(e - min_e) <= 1e-12) {
                argmins.push_back(b);
            }
        }
        CHECK_THAT(min_e, Catch::Matchers::WithinAbs(0.0, 1e-12));
        for (Bitstring b : argmins) {
            // each point exactly one bit, and the two points differ in cluster
            ClusterAssignment a = decode_assignment(b, cq.encoding, dm);
            int bits0 = static_cast<int>((b >> 0) & 1) + static_cast<int>((b >> 1) & 1);
            int bits1 = static_cast<int>((b >> 2) & 1) + static_cast<int>((b >> 3) & 1);
            CHECK(bits0 == 1);
            CHECK(bits1 == 1);
            CHECK(a.labels[0] != a.labels[1]);
        }
    }
    SECTION("infeasible states always exceed the feasible minimum") {
        Rng rng(41);
        for (int inst = 0; inst < 10; ++inst) {
            std::size_t n = 2 + rng.uniform_int(2);  // 2..3 points
            std::size_t k = 2 + rng.uniform_int(2);  // 2..3 clusters
            std::vector<double> upper(n * (n - 1) / 2);
            for (auto& u : upper) u = rng.uniform(0.05, 1.0);
            DistanceMatrix dm = matrix_from(n, upper);
            ClusterQubo cq = build_cluster_qubo(dm, k, EncodingScheme::onehot);
            double feasible_min = std::numeric_limits<double>::infinity();
            double infeasible_min = std::numeric_limits<double>::infinity();
            for (Bitstring b = 0; b < (Bitstring{1} << (n * k)); ++b) {
                bool feasible = true;
                for (std::size_t i = 0; i < n; ++i) {
                    int bits = 0;
                    for (std::size_t c = 0; c < k; ++c) bits += (b >> (i * k + c)) & 1;
                    if (bits != 1) feasible = false;
                }
                double e = qubo_energy(cq.qubo, b);
                (feasible ? feasible_min : infeasible_min) = std::min(feasible ? feasible_min : infeasible_min, e);
            }
            CHECK(infeasible_min > feasible_min);
        }
    }
    SECTION("caps and warnings") {
        DistanceMatrix big = matrix_from(13, std::vector<double>(13 * 12 / 2, 0.5));
        CHECK_THROWS_AS(build_cluster_qubo(big, 2, EncodingScheme::onehot), infeasible_error);
        DistanceMatrix dm = matrix_from(2, {0.5});
        ClusterQubo cq = build_cluster_qubo(dm, 3, EncodingScheme::onehot);
        CHECK_FALSE(cq.encoding.warnings.empty());
        CHECK_THROWS(build_cluster_qubo(dm, 3, EncodingScheme::compact2));
        CHECK_THROWS(build_cluster_qubo(dm, 1, EncodingScheme::compact2));
    }
}

TEST_CASE("brute_force_solve scans exhaustively with low tie-break", "[qubo]") {
    Qubo q = Qubo::zeros(2);
    q.linear = {-1.0, -1.0};
    q.add_quadratic(0, 1, 2.0);
    SolveResult res = brute_force_solve(q);
    CHECK(res.best == 1);  // ties with b=2 break toward the lower index
    CHECK(res.energy == -1.0);

    SolveResult zero = brute_force_solve(Qubo::zeros(3));
    CHECK(zero.best == 0);
    CHECK(zero.energy == 0.0);
}

TEST_CASE("anneal_solve reaches brute-force optima", "[qubo]") {
    SECTION("matches the exhaustive energy on most random instances") {
        Rng rng(51);
        int matches = 0;
        for (int inst = 0; inst < 20; ++inst) {
            Qubo q = random_qubo(16, rng);
            SolveResult exact = brute_force_solve(q);
            SolveResult sa = anneal_solve(q, {}, 1000 + inst);
            if (std::abs(sa.energy - exact.energy) <= 1e-9) ++matches;
            CHECK(sa.energy >= exact.energy - 1e-9);
        }
        CHECK(matches >= 18);
    }
    SECTION("zero qubo and determinism") {
        Qubo q = Qubo::zeros(6);
        SolveResult a = anneal_solve(q, {}, 7);
        CHECK(a.energy == 0.0);
        Rng rng(52);
        Qubo r = random_qubo(10, rng);
        SolveResult s1 = anneal_solve(r, {}, 7);
        SolveResult s2 = anneal_solve(r, {}, 7);
        CHECK(s1.best == s2.best);
        CHECK(s1.energy == s2.energy);
    }
    SECTION("best-of energy is non-increasing in restarts") {
        Rng rng(53);
        Qubo q = random_qubo(12, rng);
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t restarts : {1u, 2u, 4u, 8u}) {
            AnnealConfig cfg;
            cfg.restarts = restarts;
            cfg.sweeps = 300;
            SolveResult res = anneal_solve(q, cfg, 99);
            CHECK(res.energy <= prev + 1e-12);
            prev = res.energy;
        }
    }
    SECTION("thread count does not change the answer") {
        Rng rng(54);
        Qubo q = random_qubo(12, rng);
        AnnealConfig seq;
        seq.sweeps = 500;
        AnnealConfig par = seq;
        par.threads = 4;
        SolveResult a = anneal_solve(q, seq, 5);
        SolveResult b = anneal_solve(q, par, 5);
        CHECK(a.best == b.best);
        CHECK(a.energy == b.energy);
    }
}

TEST_CASE("decode_assignment reads and repairs basis states", "[qubo]") {
    SECTION("compact2 bit readout") {
        DistanceMatrix dm = two_pairs();
        Encoding enc;
        enc.scheme = EncodingScheme::compact2;
        enc.n = 4;
        enc.k = 2;
        ClusterAssignment a = decode_assignment(0b0011, enc, dm);
        CHECK(a.labels == std::vector<int>{1, 1, 0, 0});
    }
    SECTION("onehot feasible passthrough") {
        DistanceMatrix dm = matrix_from(2, {0.3});
        ClusterQubo cq = build_cluster_qubo(dm, 2, EncodingScheme::onehot);
        // x_{0,0} = 1 (var 0), x_{1,1} = 1 (var 3)
        ClusterAssignment a = decode_assignment(0b1001, cq.encoding, dm);
        CHECK(a.labels == std::vector<int>{0, 1});
    }
    SECTION("repair of a zero-bit point matches the optimum") {
        DistanceMatrix dm = two_pairs();
        ClusterQubo cq = build_cluster_qubo(dm, 2, EncodingScheme::onehot);
        SolveResult best = brute_force_solve(cq.qubo);
        ClusterAssignment full = decode_assignment(best.best, cq.encoding, dm);
        // drop point 1's bits entirely
        Bitstring damaged = best.best;
        for (std::size_t c = 0; c < 2; ++c) damaged &= ~(Bitstring{1} << cq.encoding.var(1, c));
        ClusterAssignment repaired = decode_assignment(damaged, cq.encoding, dm);
        CHECK(repaired.labels == full.labels);
        for (int l : repaired.labels) CHECK(l >= 0);
    }
}

TEST_CASE("qubo JSON round-trip", "[qubo]") {
    Rng rng(61);
    Qubo q = random_qubo(6, rng);
    Qubo back = qubo_from_json(qubo_to_json(q));
    CHECK(back.num_vars == q.num_vars);
    CHECK(back.constant == q.constant);
    CHECK(back.linear == q.linear);
    CHECK(back.quadratic == q.quadratic);
}
