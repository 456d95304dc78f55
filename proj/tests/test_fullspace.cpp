#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "lmg/fullspace.hpp"
#include "lmg/generator.hpp"
#include "lmg/numeric.hpp"
#include "lmg/regime.hpp"
#include "lmg/sector.hpp"

using namespace lmg;

namespace {

// max |[A, B]| for dense row-major matrices
double commutator_norm(const std::vector<double>& a,
                       const std::vector<double>& b, std::size_t n) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double c = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                c += a[i * n + k] * b[k * n + j] - b[i * n + k] * a[k * n + j];
            worst = std::max(worst, std::abs(c));
        }
    return worst;
}

double matrix_norm(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

} // namespace

TEST_CASE("full-space model validation") {
    CHECK_THROWS_AS(FullSpaceModel(1, 1.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(FullSpaceModel(13, 1.0, 0.0, 1.0), std::length_error);
    CHECK_THROWS_AS(FullSpaceModel(4, 1.0, 0.0, 1.5), std::domain_error);
    CHECK_THROWS_AS(FullSpaceModel(4, 0.0, 0.0, 1.0), std::domain_error);
    CHECK(FullSpaceModel(4, 1.0, 0.3, 0.5).dim() == 16);
}

TEST_CASE("two-spin spectrum by hand") {
    // isotropic, zero field: triplet at -(1/2)(2 - mz^2), singlet at 0
    const FullSpaceModel model(2, 1.0, 0.0, 1.0);
    const auto sys = diagonalize_labeled(model);
    REQUIRE(sys.energy.size() == 4);
    CHECK(sys.energy[0] == Catch::Approx(-1.0).margin(1e-12));
    CHECK(sys.energy[1] == Catch::Approx(-0.5).margin(1e-12));
    CHECK(sys.energy[2] == Catch::Approx(-0.5).margin(1e-12));
    CHECK(sys.energy[3] == Catch::Approx(0.0).margin(1e-12));

    // the degenerate pair: both are j = 1 with parity +1 (the mz = +-1
    // product states have an even number of down spins)
    CHECK(sys.j_label[1] == 1.0);
    CHECK(sys.j_label[2] == 1.0);
    CHECK(sys.parity[1] == 1);
    CHECK(sys.parity[2] == 1);
    CHECK(sys.cluster[1] == sys.cluster[2]);

    CHECK(sys.j_label[0] == 1.0); // mz = 0 triplet state
    CHECK(sys.parity[0] == -1);
    CHECK(sys.j_label[3] == 0.0); // singlet
    CHECK(sys.parity[3] == -1);
}

TEST_CASE("symmetries commute with the hamiltonian") {
    for (double gy : {0.0, 0.3, 1.0}) {
        const FullSpaceModel model(4, 1.0, 0.7, gy);
        const auto h = build_hamiltonian(model);
        const auto j2 = build_j_squared(4);
        const std::size_t dim = model.dim();

        std::vector<double> par_op(dim * dim, 0.0);
        const auto par = parity_diagonal(4);
        for (std::size_t b = 0; b < dim; ++b) par_op[b * dim + b] = par[b];

        const double scale = matrix_norm(h) * matrix_norm(j2);
        CHECK(commutator_norm(h, j2, dim) < 1e-12 * scale);
        CHECK(commutator_norm(h, par_op, dim) < 1e-12 * matrix_norm(h));
        // hermiticity
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                CHECK(h[i * dim + j] == h[j * dim + i]);
    }
}

TEST_CASE("isotropic maximal sector matches the closed form") {
    const FullSpaceModel model(4, 1.3, 0.37, 1.0);
    const auto sys = diagonalize_labeled(model);

    std::vector<double> top;
    for (std::size_t k = 0; k < sys.dim; ++k)
        if (sys.j_label[k] == 2.0) top.push_back(sys.energy[k]);
    REQUIRE(top.size() == 5);
    std::sort(top.begin(), top.end());

    auto expected = sector_energies(SectorParams(4, 4, 1.3, 0.37));
    std::sort(expected.begin(), expected.end());
    for (int k = 0; k < 5; ++k)
        CHECK(top[k] == Catch::Approx(expected[k]).margin(1e-10));
}

TEST_CASE("sector multiplicities") {
    // multiplicity of spin-j in N spin-1/2: C(N, N/2-j) - C(N, N/2-j-1)
    const FullSpaceModel m4(4, 1.0, 0.37, 1.0);
    const auto s4 = diagonalize_labeled(m4);
    int c2 = 0, c1 = 0, c0 = 0;
    for (std::size_t k = 0; k < 16; ++k) {
        if (s4.j_label[k] == 2.0) ++c2;
        if (s4.j_label[k] == 1.0) ++c1;
        if (s4.j_label[k] == 0.0) ++c0;
    }
    CHECK(c2 == 5);  // 1 copy of j = 2
    CHECK(c1 == 9);  // 3 copies of j = 1
    CHECK(c0 == 2);  // 2 copies of j = 0

    const FullSpaceModel m3(3, 1.0, 0.21, 1.0);
    const auto s3 = diagonalize_labeled(m3);
    int c32 = 0, c12 = 0;
    for (std::size_t k = 0; k < 8; ++k) {
        if (s3.j_label[k] == 1.5) ++c32;
        if (s3.j_label[k] == 0.5) ++c12;
    }
    CHECK(c32 == 4); // 1 copy of j = 3/2
    CHECK(c12 == 4); // 2 copies of j = 1/2
}

TEST_CASE("coherent dipoles respect the j selection rule") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> field(-1.2, 1.2);
    for (int n = 2; n <= 6; ++n) {
        const FullSpaceModel model(n, 1.0, field(rng), 0.6);
        const auto sys = diagonalize_labeled(model);
        const auto d = coherent_dipoles(sys, n, 0.5);
        const double dmax = matrix_norm(d);
        REQUIRE(dmax > 0.0);
        bool cross_parity_seen = false;
        for (std::size_t a = 0; a < sys.dim; ++a)
            for (std::size_t b = 0; b < sys.dim; ++b) {
                CHECK(d[a * sys.dim + b] ==
                      Catch::Approx(d[b * sys.dim + a]).margin(1e-10 * dmax));
                if (sys.j_label[a] != sys.j_label[b])
                    CHECK(std::abs(d[a * sys.dim + b]) < 1e-8 * dmax);
                if (sys.parity[a] != sys.parity[b] &&
                    d[a * sys.dim + b] > 1e-6 * dmax)
                    cross_parity_seen = true;
            }
        CHECK(cross_parity_seen); // single flips connect opposite parities
    }
}

TEST_CASE("two-spin dipole elements by hand") {
    const double gamma = 0.5;
    const FullSpaceModel model(2, 1.0, 0.3, 1.0);
    const auto sys = diagonalize_labeled(model);
    // ascending: mz=0 triplet (-1), mz=+1 (-0.8), mz=-1 (-0.2), singlet (0)
    CHECK(sys.energy[1] == Catch::Approx(-0.8).margin(1e-12));
    CHECK(sys.j_label[3] == 0.0);

    const auto dcoh = coherent_dipoles(sys, 2, gamma);
    // triplet mz = 0 <-> mz = 1 equals the sector table: 2 gamma (j-n)(j+n+1)
    const SectorParams s2(2, 2, 1.0, 0.3);
    CHECK(dcoh[0 * 4 + 1] ==
          Catch::Approx(dipole_element(s2, gamma, 1.0, 0.0)).margin(1e-12));
    CHECK(dcoh[0 * 4 + 1] == Catch::Approx(4.0 * gamma).margin(1e-12));
    CHECK(std::abs(dcoh[1 * 4 + 2]) < 1e-12); // |dm| = 2
    CHECK(std::abs(dcoh[1 * 4 + 3]) < 1e-12); // j changes

    // independent radiators do connect singlet and triplet:
    // per site |<s|sigma^x|t,+1>|^2 = |<s|sigma^y|t,+1>|^2 = 1/2, z = 0
    const auto dinc = incoherent_dipoles(sys, 2, gamma);
    CHECK(dinc[1 * 4 + 3] == Catch::Approx(2.0 * gamma).margin(1e-12));
    CHECK(std::abs(detail::site_element(sys, 0, 2, 3, 1)) < 1e-12);
    CHECK(std::abs(detail::site_element(sys, 0, 0, 3, 1)) ==
          Catch::Approx(std::sqrt(0.5)).margin(1e-12));
}

TEST_CASE("label rotation preserves the collective frobenius invariant") {
    // sum over all pairs of gamma(x^2 + k^2 + z^2) equals the basis-free
    // gamma(|X|_F^2 + |K|_F^2 + |Z|_F^2) = gamma (N 2^N + N 2^N + sum_b 4mz^2)
    const int n = 4;
    const double gamma = 0.5;
    const FullSpaceModel model(n, 1.0, 0.0, 1.0); // heavily degenerate
    const auto sys = diagonalize_labeled(model);
    const auto el = detail::collective_elements(sys, n);
    double total = 0.0;
    for (std::size_t a = 0; a < sys.dim * sys.dim; ++a)
        total += gamma * (el.x[a] * el.x[a] + el.k[a] * el.k[a] +
                          el.z[a] * el.z[a]);
    double zfrob = 0.0;
    for (std::uint32_t b = 0; b < sys.dim; ++b) {
        double mz2 = 0.0;
        for (int i = 0; i < n; ++i) mz2 += eta(b, i);
        zfrob += mz2 * mz2;
    }
    const double expected = gamma * (2.0 * n * sys.dim + zfrob);
    CHECK(total == Catch::Approx(expected).epsilon(1e-10));
}

TEST_CASE("coherent dipoles drive a gibbs-stationary generator") {
    const FullSpaceModel model(4, 1.0, 0.37, 1.0);
    const auto sys = diagonalize_labeled(model);
    const auto d = coherent_dipoles(sys, 4, 0.5);
    const double beta = 1.5;
    const auto g = generator_from_spectrum(sys.energy, d, Beta::finite(beta));

    std::vector<double> logw(g.size);
    for (std::size_t k = 0; k < g.size; ++k) logw[k] = -beta * sys.energy[k];
    const auto p = softmax(logw);
    const double norm = matrix_norm(g.a);
    for (std::size_t row = 0; row < g.size; ++row) {
        double r = 0.0;
        for (std::size_t col = 0; col < g.size; ++col)
            r += g.a[row * g.size + col] * p[col];
        CHECK(std::abs(r) < 1e-10 * norm);
    }
}

TEST_CASE("angular tensor limits") {
    const Vec3 origin{0.0, 0.0, 0.0};
    const auto q0 = q_tensor(origin, origin, 0.7, 1.0);
    for (int h = 0; h < 3; ++h)
        for (int l = 0; l < 3; ++l)
            CHECK(q0[h][l] ==
                  Catch::Approx(h == l ? 8.0 * M_PI / 3.0 : 0.0).margin(1e-9));

    // i = j at any separation behaves like zero separation
    const Vec3 far{3.0, -2.0, 5.0};
    const auto qs = q_tensor(far, far, 11.0, 1.0);
    CHECK(qs[0][0] == Catch::Approx(8.0 * M_PI / 3.0).margin(1e-9));

    // large phase: all entries decay well below the coincident value
    const Vec3 r1{0.0, 0.0, 0.0}, r2{50.0, 0.0, 0.0};
    const auto qfar = q_tensor(r1, r2, 1.0, 1.0);
    double trace = 0.0;
    for (int h = 0; h < 3; ++h) {
        trace += qfar[h][h];
        for (int l = 0; l < 3; ++l) {
            CHECK(std::abs(qfar[h][l]) < 0.1 * 8.0 * M_PI / 3.0);
            CHECK(qfar[h][l] == Catch::Approx(qfar[l][h]).margin(1e-8));
        }
    }
    CHECK(std::abs(trace) <= 8.0 * M_PI);

    CHECK_THROWS_AS(q_tensor(r1, r2, -1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(q_tensor(r1, r2, 1.0, 0.0), std::domain_error);
}

TEST_CASE("geometry-resolved table reduces to the coherent limit") {
    FullSpaceModel model(3, 1.0, 0.4, 1.0);
    model.positions = positions_coincident(3);
    const auto sys = diagonalize_labeled(model);
    const double gamma = 0.5;
    const auto dcoh = coherent_dipoles(sys, 3, gamma);
    const auto g = general_dipole_table(sys, model);

    const double dmax = matrix_norm(dcoh);
    for (std::size_t a = 0; a < sys.dim * sys.dim; ++a)
        CHECK(g[a] ==
              Catch::Approx(8.0 * M_PI / 3.0 * dcoh[a] / gamma)
                  .margin(1e-7 * dmax / gamma));
}

TEST_CASE("separated sites revive cross-sector transitions") {
    FullSpaceModel model(2, 1.0, 0.3, 1.0);
    const auto sys = diagonalize_labeled(model);

    // singlet (index 3) <-> triplet mz = +1 (index 1), |dE| = 0.8
    model.positions = positions_coincident(2);
    const auto g_near = general_dipole_table(sys, model);
    model.positions = positions_chain(2, 62.5); // omega r / c = 50
    const auto g_far = general_dipole_table(sys, model);

    const double intra = std::abs(g_near[0 * 4 + 1]);
    CHECK(std::abs(g_near[3 * 4 + 1]) < 1e-10 * intra);
    CHECK(std::abs(g_far[3 * 4 + 1]) > 1e-3 * intra);
}

TEST_CASE("geometry helpers") {
    const auto chain = positions_chain(4, 2.0);
    CHECK(max_pair_distance(chain) == Catch::Approx(6.0));
    CHECK(min_pair_distance(chain) == Catch::Approx(2.0));
    CHECK_THROWS_AS(positions_chain(3, 0.0), std::domain_error);

    const auto cube = positions_cube_random(8, 1.0, 42);
    CHECK(cube == positions_cube_random(8, 1.0, 42)); // deterministic
    for (const auto& r : cube)
        for (double x : r) {
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
        }
    CHECK_THROWS_AS(positions_cube_random(4, -1.0, 1), std::domain_error);
}

TEST_CASE("regime classification") {
    // molecular-magnet scale: extent nm, splittings far below hc / ell
    const auto mol = regime_classify(0.002, 0.001, 6.2e-14, 0.0);
    CHECK(mol.regime == Regime::fully_coherent);
    CHECK(mol.coherent_margin > 1e10);

    // optical splitting across a centimeter-scale array: incoherent
    const auto arr = regime_classify(1e4, 1e4, 2.0, 0.0);
    CHECK(arr.regime == Regime::fully_incoherent);

    // hot-bath sufficient condition trips on its own
    const auto hot = regime_classify(10.0, 10.0, 0.01, 1e-3);
    CHECK(hot.incobeta_margin >= 100.0);
    CHECK(hot.regime == Regime::fully_incoherent);

    const auto mid = regime_classify(1.0, 1.0, 0.1, 0.0);
    CHECK(mid.regime == Regime::intermediate);

    // dipolar coupling estimate: never geometrically incoherent at atomic
    // spacings or above
    const double a0 = constants::bohr_radius_um;
    for (double a : {a0, 10.0 * a0, 1e-3}) {
        const auto dip = regime_classify(10.0 * a, a, 1e-6, 0.0, 100.0, true);
        REQUIRE(dip.geometric_incoherent.has_value());
        CHECK_FALSE(*dip.geometric_incoherent);
        CHECK(*dip.coupling_estimate_ev > 0.0);
    }
    // coupling estimate shrinks as a^-3
    const auto e1 = regime_classify(1.0, 1e-3, 1e-6, 0.0, 100.0, true);
    const auto e2 = regime_classify(1.0, 2e-3, 1e-6, 0.0, 100.0, true);
    CHECK(*e1.coupling_estimate_ev / *e2.coupling_estimate_ev ==
          Catch::Approx(8.0).epsilon(1e-12));

    CHECK_THROWS_AS(regime_classify(1.0, 2.0, 0.1, 0.0), std::domain_error);
    CHECK_THROWS_AS(regime_classify(1.0, 0.0, 0.1, 0.0), std::domain_error);
    CHECK_THROWS_AS(regime_classify(1.0, 1.0, -0.1, 0.0), std::domain_error);
    CHECK_THROWS_AS(regime_classify(1.0, 1.0, 0.1, 0.0, 1.0), std::domain_error);
}
