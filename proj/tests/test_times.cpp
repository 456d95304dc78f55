#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "lmg/eigen_dense.hpp"
#include "lmg/numeric.hpp"
#include "lmg/times.hpp"

using namespace lmg;

namespace {
const Beta kZeroT = Beta::zero_temperature();
}

TEST_CASE("decoherence time definition and symmetry") {
    const SectorParams s(30, 30, 1.0, 0.7);
    const auto g = sector_generator(s, Beta::finite(2.0), 0.5);

    CHECK_THROWS_AS(decoherence_time(g, 3, 3), std::domain_error);
    CHECK_THROWS_AS(decoherence_time(g, -1, 2), std::domain_error);
    CHECK_THROWS_AS(decoherence_time(g, 0, g.size), std::domain_error);

    for (int m = 0; m < g.size; m += 5)
        for (int n = m + 1; n < g.size; n += 7) {
            CHECK(decoherence_time(g, m, n) == decoherence_time(g, n, m));
            // oracle: half the summed outflow rates of the two states,
            // reassembled from the off-diagonal transition rates
            auto outflow = [&](int k) {
                double w = 0.0;
                if (k + 1 < g.size) w += -g.lower[k];   // k -> k+1
                if (k > 0) w += -g.upper[k - 1];        // k -> k-1
                return w;
            };
            const double rate = 0.5 * (outflow(m) + outflow(n));
            CHECK(decoherence_time(g, m, n) ==
                  Catch::Approx(1.0 / rate).epsilon(1e-12));
        }
}

TEST_CASE("canonical zero-temperature constants") {
    // N = 100, j = N/2, coupling 1, gamma = 1/2, field at the critical value:
    // the slowest emission rate is 2 gamma (2j) (J/N)^3 = 1e-4 and the ground
    // state is dark, so tau_P = 1e4 and tau_Q = tau_{j,j-1} = 2e4 exactly.
    const SectorParams s(100, 100, 1.0, 1.0);
    const auto g = sector_generator(s, kZeroT, 0.5);

    CHECK(spectral_gap(g) == Catch::Approx(1e-4).epsilon(1e-12));
    CHECK(decoherence_time(g, 100, 99) == Catch::Approx(2e4).epsilon(1e-12));

    const auto t = thermalization_times(g);
    CHECK(t.mu2 == Catch::Approx(1e-4).epsilon(1e-12));
    CHECK(t.tau_p == Catch::Approx(1e4).epsilon(1e-12));
    CHECK(t.tau_q == Catch::Approx(2e4).epsilon(1e-12));
    CHECK(t.tau == t.tau_q);
    CHECK(t.argmax_m == 99);
    CHECK(t.argmax_n == 100);
    CHECK(t.tau_q / t.tau_p == Catch::Approx(2.0).epsilon(1e-12));

    // the exact factor 2 persists across sizes at the critical field
    for (int n : {20, 50, 500}) {
        const SectorParams sn(n, n, 1.0, 1.0);
        const auto tn = thermalization_times(sector_generator(sn, kZeroT, 0.5));
        CHECK(tn.tau_q / tn.tau_p == Catch::Approx(2.0).epsilon(1e-12));
        // in units of b = 2 gamma J^3: b tau_P = N^2
        CHECK(tn.tau_p == Catch::Approx(double(n) * n).epsilon(1e-10));
    }
}

TEST_CASE("slowest pair matches brute force") {
    for (double field : {0.4, 1.0, 1.7}) {
        const SectorParams s(30, 30, 1.0, field);
        const auto g = sector_generator(s, Beta::finite(2.0), 0.5);
        const auto t = thermalization_times(g);

        double best = 0.0;
        int bm = -1, bn = -1;
        for (int m = 0; m < g.size; ++m)
            for (int n = m + 1; n < g.size; ++n) {
                const double tau = decoherence_time(g, m, n);
                if (tau > best) {
                    best = tau;
                    bm = m;
                    bn = n;
                }
            }
        CHECK(t.tau_q == Catch::Approx(best).epsilon(1e-12));
        if (!t.degeneracy_flag) {
            CHECK(t.argmax_m == bm);
            CHECK(t.argmax_n == bn);
        }
    }

    // deep paramagnet: the slowest pair sits at the field-aligned edge
    const auto gp = sector_generator(SectorParams(100, 100, 1.0, 2.0),
                                     Beta::finite(1.0), 0.5);
    const auto tp = thermalization_times(gp);
    CHECK(tp.argmax_n == 100); // mz = +j
    CHECK(tp.argmax_m >= 98);
}

TEST_CASE("spectral gap cross-validated against a dense solver") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> field(-1.5, 1.5);
    std::uniform_real_distribution<double> betad(0.3, 5.0);
    for (int trial = 0; trial < 25; ++trial) {
        const int two_j = 2 * (2 + trial % 5); // 4..12
        const SectorParams s(two_j, two_j, 1.0, field(rng));
        const auto g = sector_generator(s, Beta::finite(betad(rng)), 0.5);

        // symmetrized dense copy shares the generator's spectrum
        const int n = g.size;
        const auto c = symmetrized_offdiag(g);
        std::vector<double> dense(n * n, 0.0);
        for (int k = 0; k < n; ++k) {
            dense[k * n + k] = g.diag[k];
            if (k + 1 < n)
                dense[k * n + k + 1] = dense[(k + 1) * n + k] = c[k];
        }
        const auto lam = jacobi_eigensystem(dense, n);
        const double scale = generator_norm_estimate(g);
        REQUIRE(std::abs(lam[0]) < 1e-10 * scale);
        CHECK(spectral_gap(g) == Catch::Approx(lam[1]).margin(1e-9 * scale));
    }
}

TEST_CASE("gibbs vector") {
    const auto p = gibbs_vector({0.0, 1.0}, Beta::finite(1.0));
    CHECK(p[0] == Catch::Approx(0.7310585786300049).epsilon(1e-15));
    CHECK(p[1] == Catch::Approx(0.2689414213699951).epsilon(1e-15));

    const auto pz = gibbs_vector({0.5, 0.2, 0.2}, kZeroT);
    CHECK(pz[0] == 0.0);
    CHECK(pz[1] == 0.5);
    CHECK(pz[2] == 0.5);

    CHECK_THROWS_AS(gibbs_vector({}, Beta::finite(1.0)), std::invalid_argument);

    // large-beta stability: no overflow, still normalized
    const auto ph = gibbs_vector({-1000.0, -999.0, 500.0}, Beta::finite(100.0));
    double sum = 0.0;
    for (double v : ph) sum += v;
    CHECK(sum == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(ph[0] > 0.999);
}

TEST_CASE("gibbs state is stationary under evolution") {
    const SectorParams s(16, 16, 1.0, 0.6);
    const auto g = sector_generator(s, Beta::finite(1.0), 0.5);
    const auto peq = gibbs_vector(g.energy, g.beta);

    const double t0 = 1.0 / generator_norm_estimate(g);
    const auto traj = evolve_pauli(g, peq, {0.0, t0, 10.0 * t0, 100.0 * t0});
    CHECK(traj.method == "spectral");
    for (const auto& p : traj.populations)
        CHECK(l1_distance(p, peq) < 1e-10);
}

TEST_CASE("point mass relaxes to the gibbs state") {
    const SectorParams s(16, 16, 1.0, 0.6);
    const auto g = sector_generator(s, Beta::finite(1.0), 0.5);
    const auto t = thermalization_times(g);
    const auto peq = gibbs_vector(g.energy, g.beta);

    std::vector<double> p0(g.size, 0.0);
    p0[0] = 1.0; // mz = -j, far from equilibrium
    const auto traj = evolve_pauli(g, p0, {50.0 * t.tau});
    CHECK(l1_distance(traj.populations[0], peq) < 1e-6);
}

TEST_CASE("spectral and runge-kutta propagation agree") {
    const SectorParams s(12, 12, 1.0, 0.8);
    const auto g = sector_generator(s, Beta::finite(1.5), 0.5);
    std::vector<double> p0(g.size, 0.0);
    p0[2] = 0.3;
    p0[7] = 0.7;
    const double tb = 1.0 / generator_norm_estimate(g);
    const std::vector<double> times{0.0, 0.5 * tb, 2.0 * tb, 8.0 * tb};

    const auto ps = evolve_spectral(g, p0, times);
    const auto pr = evolve_rk45(g, p0, times, 1e-12);
    for (std::size_t ti = 0; ti < times.size(); ++ti)
        for (int k = 0; k < g.size; ++k)
            CHECK(ps[ti][k] == Catch::Approx(pr[ti][k]).margin(1e-8));
}

TEST_CASE("relative entropy to equilibrium never increases") {
    const SectorParams s(20, 20, 1.0, 0.9);
    const auto g = sector_generator(s, Beta::finite(2.0), 0.5);
    const auto peq = gibbs_vector(g.energy, g.beta);

    std::vector<double> p0(g.size, 0.0);
    p0[g.size - 1] = 1.0;
    const double tb = 1.0 / generator_norm_estimate(g);
    std::vector<double> times;
    for (int i = 0; i <= 40; ++i) times.push_back(i * 0.5 * tb);
    const auto traj = evolve_pauli(g, p0, times);

    double prev = std::numeric_limits<double>::infinity();
    for (const auto& p : traj.populations) {
        double mass = 0.0;
        for (double v : p) {
            CHECK(v >= 0.0);
            mass += v;
        }
        CHECK(mass == Catch::Approx(1.0).epsilon(1e-12));
        const double h = relative_entropy(p, peq);
        CHECK(h <= prev + 1e-10);
        prev = h;
    }
}

TEST_CASE("zero-temperature cascade reaches the ground state") {
    const SectorParams s(20, 20, 1.0, 1.2);
    const auto g = sector_generator(s, kZeroT, 0.5);
    const auto t = thermalization_times(g);
    const auto peq = gibbs_vector(g.energy, kZeroT);

    std::vector<double> p0(g.size, 0.0);
    p0[0] = 1.0; // highest-energy edge in the saturated phase
    const auto traj = evolve_pauli(g, p0, {60.0 * t.tau});
    CHECK(traj.method == "runge-kutta");
    CHECK(l1_distance(traj.populations[0], peq) < 1e-5);
}

TEST_CASE("evolution input validation") {
    const SectorParams s(10, 10, 1.0, 0.5);
    const auto g = sector_generator(s, Beta::finite(1.0), 0.5);
    CHECK_THROWS_AS(evolve_pauli(g, {1.0, 0.0}, {0.0}), std::invalid_argument);
    std::vector<double> bad(g.size, 0.0);
    bad[0] = 0.9; // not normalized
    CHECK_THROWS_AS(evolve_pauli(g, bad, {0.0}), std::domain_error);
    bad[0] = 1.2;
    bad[1] = -0.2;
    CHECK_THROWS_AS(evolve_pauli(g, bad, {0.0}), std::domain_error);
}

TEST_CASE("degenerate cut splits the chain into decoupled blocks") {
    // field tuned so one neighboring pair is exactly degenerate
    const SectorParams s(4, 4, 1.0, 0.25);
    const auto g = sector_generator(s, Beta::finite(1.0), 0.5);
    CHECK(g.degenerate);

    const auto blocks = decoupled_blocks(g);
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0] == std::pair<int, int>(0, 2));
    CHECK(blocks[1] == std::pair<int, int>(3, 4));

    // each block conserves its own probability mass
    std::vector<double> p0(g.size, 0.2);
    const double tb = 1.0 / generator_norm_estimate(g);
    const auto traj = evolve_pauli(g, p0, {0.0, 5.0 * tb});
    for (const auto& p : traj.populations) {
        CHECK(p[0] + p[1] + p[2] == Catch::Approx(0.6).epsilon(1e-10));
        CHECK(p[3] + p[4] == Catch::Approx(0.4).epsilon(1e-10));
    }
    CHECK(thermalization_times(g).degeneracy_flag);
}

TEST_CASE("offdiagonal decay") {
    CHECK(offdiagonal_decay(0.5, 2.0, 0.0) == 0.5);
    CHECK(offdiagonal_decay(0.5, 2.0, 2.0) ==
          Catch::Approx(0.5 * std::exp(-1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(offdiagonal_decay(1.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(offdiagonal_decay(1.0, 1.0, -1.0), std::domain_error);
}

TEST_CASE("ground-state weight shrinks with system size at fixed beta") {
    double prev = 1.0;
    for (int n : {50, 100, 200, 400}) {
        const SectorParams s(n, n, 1.0, 0.5);
        const auto p = gibbs_vector(sector_energies(s), Beta::finite(1.0));
        double pmax = 0.0;
        for (double v : p) pmax = std::max(pmax, v);
        CHECK(pmax < prev);
        prev = pmax;
    }
}

TEST_CASE("thermalization report self-consistency") {
    const auto rep = thermalization_report(SectorParams(100, 100, 1.0, 1.0),
                                           kZeroT, 0.5);
    CHECK(rep.times.tau == Catch::Approx(2e4).epsilon(1e-12));
    CHECK(rep.gap.branch == GapBranch::inner);
}

TEST_CASE("asymptotic estimates carry the right branch and scaling") {
    const auto para = asymptotic_predictions(SectorParams(100, 100, 1.0, 2.0), 0.5);
    CHECK(para.branch == GapBranch::paramagnetic);
    const auto para2 = asymptotic_predictions(SectorParams(100, 100, 1.0, 4.0), 0.5);
    CHECK(para.tau_q_estimate / para2.tau_q_estimate ==
          Catch::Approx(8.0).epsilon(1e-12)); // 1/|Gamma|^3

    const auto crit1 = asymptotic_predictions(SectorParams(100, 100, 1.0, 1.0), 0.5);
    const auto crit2 = asymptotic_predictions(SectorParams(200, 200, 1.0, 1.0), 0.5);
    CHECK(crit2.tau_q_estimate / crit1.tau_q_estimate ==
          Catch::Approx(2.0).epsilon(1e-12)); // linear in N near criticality

    const auto in1 = asymptotic_predictions(SectorParams(100, 100, 1.0, 0.3), 0.5);
    const auto in2 = asymptotic_predictions(SectorParams(400, 400, 1.0, 0.3), 0.5);
    CHECK(in1.tau_q_estimate ==
          Catch::Approx(in2.tau_q_estimate).epsilon(1e-12)); // N-independent

    // order-of-magnitude agreement with the measured slowest pair
    const auto g = sector_generator(SectorParams(100, 100, 1.0, 2.0),
                                    kZeroT, 0.5);
    const double actual = thermalization_times(g).tau_q;
    CHECK(actual / para.tau_q_estimate > 0.1);
    CHECK(actual / para.tau_q_estimate < 10.0);
}
