#ifndef LMG_GENERATOR_HPP
#define LMG_GENERATOR_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lmg/beta.hpp"
#include "lmg/planck.hpp"
#include "lmg/sector.hpp"

namespace lmg {

// Squared dipole matrix element between neighboring sector states,
//   D_{m,n} = 2 gamma [ (j-n)(j+n+1) delta_{m,n+1} + (j+n)(j-n+1) delta_{m,n-1} ],
// with m, n magnetization values. Symmetric and zero beyond |m-n| = 1.
inline double dipole_element(const SectorParams& s, double gamma,
                             double m, double n) {
    const double j = s.j();
    if (std::abs(m - n - 1.0) < 0.25)
        return 2.0 * gamma * (j - n) * (j + n + 1.0);
    if (std::abs(m - n + 1.0) < 0.25)
        return 2.0 * gamma * (j + n) * (j - n + 1.0);
    return 0.0;
}

// Tridiagonal Pauli generator of a fixed-j sector, in magnetization order
// k = 0..2j, m_z = -j + k. The master equation reads dp/dt = -A p with
//   A_{m,n} = -W_{n->m} = -D_{m,n} f(E_m - E_n)   (m != n)
//   A_{m,m} = sum_{n != m} W_{m->n}
// so every column of A sums to zero and all off-diagonals are <= 0.
struct PauliGenerator {
    int size;
    std::vector<double> diag;   // A_{k,k}
    std::vector<double> lower;  // A_{k+1,k} = -W_{k -> k+1}
    std::vector<double> upper;  // A_{k,k+1} = -W_{k+1 -> k}
    std::vector<double> energy; // E_k in the same index order
    std::vector<double> de;     // E_{k+1} - E_k, cancellation-free
    Beta beta;
    double gamma;
    bool degenerate;            // some neighboring pair has E_k == E_{k+1}
};

inline PauliGenerator sector_generator(const SectorParams& s, const Beta& beta,
                                       double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::domain_error("sector_generator: gamma must be positive and finite");
    const int n = s.dim();
    PauliGenerator g{n, std::vector<double>(n, 0.0),
                     std::vector<double>(n - 1, 0.0),
                     std::vector<double>(n - 1, 0.0),
                     sector_energies(s), std::vector<double>(n - 1, 0.0),
                     beta, gamma, false};
    for (int k = 0; k + 1 < n; ++k) {
        const double mlo = s.mz_at(k);
        const double mhi = s.mz_at(k + 1);
        const double d = dipole_element(s, gamma, mhi, mlo); // == D(mlo, mhi)
        // E(m+1) - E(m) = (J (2m+1) - Gamma N) / N; subtracting the raw
        // energies instead would cancel catastrophically near the critical
        // field, where this difference drives every observable
        const double de =
            (s.coupling * (2.0 * mlo + 1.0) - s.field * s.n_spins) / s.n_spins;
        g.de[k] = de;
        if (de == 0.0) g.degenerate = true;
        const double w_up = d * planck_factor(de, beta);   // k -> k+1
        const double w_dn = d * planck_factor(-de, beta);  // k+1 -> k
        g.lower[k] = -w_up;
        g.upper[k] = -w_dn;
        g.diag[k] += w_up;
        g.diag[k + 1] += w_dn;
    }
    return g;
}

struct DenseGenerator {
    std::size_t size;
    std::vector<double> a;      // row-major generator
    std::vector<double> energy;
    Beta beta;
    bool degenerate;            // equal neighboring energies present
};

// Dense generator from an arbitrary ascending spectrum and symmetric
// squared-dipole matrix with zero diagonal (row-major, d[i*n+j]). Used by
// the full-space pipeline where many levels are dipole-connected at once.
// Degenerate energies are accepted (f(0) = 0 decouples them) and flagged.
inline DenseGenerator generator_from_spectrum(const std::vector<double>& energy,
                                              const std::vector<double>& dipole,
                                              const Beta& beta) {
    const std::size_t n = energy.size();
    if (dipole.size() != n * n)
        throw std::invalid_argument(
            "generator_from_spectrum: dipole matrix shape mismatch");
    bool degenerate = false;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (energy[k + 1] < energy[k])
            throw std::domain_error(
                "generator_from_spectrum: energies must be ascending");
        if (energy[k + 1] == energy[k]) degenerate = true;
    }
    double dmax = 0.0;
    for (double v : dipole) dmax = std::max(dmax, std::abs(v));
    for (std::size_t i = 0; i < n; ++i) {
        if (dipole[i * n + i] != 0.0)
            throw std::domain_error(
                "generator_from_spectrum: dipole diagonal must vanish");
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(dipole[i * n + j] - dipole[j * n + i]) >
                1e-12 * std::max(dmax, 1.0))
                throw std::domain_error(
                    "generator_from_spectrum: dipole table not symmetric");
    }
    std::vector<double> a(n * n, 0.0);
    for (std::size_t col = 0; col < n; ++col) {
        double out_rate = 0.0;
        for (std::size_t row = 0; row < n; ++row) {
            if (row == col) continue;
            const double w = dipole[row * n + col] *
                             planck_factor(energy[row] - energy[col], beta);
            a[row * n + col] = -w;
            out_rate += dipole[col * n + row] *
                        planck_factor(energy[row] - energy[col], beta);
        }
        a[col * n + col] = out_rate;
    }
    return {n, std::move(a), energy, beta, degenerate};
}

// Largest |column sum| of the tridiagonal generator; exactly representable
// cancellations aside, this is the probability-conservation defect.
inline double column_sum_defect(const PauliGenerator& g) {
    double worst = 0.0;
    for (int k = 0; k < g.size; ++k) {
        double s = g.diag[k];
        if (k + 1 < g.size) s += g.lower[k]; // A_{k+1,k}
        if (k > 0) s += g.upper[k - 1];      // A_{k-1,k}
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

struct DetailedBalanceCertificate {
    double max_asymmetry; // largest |C_{m,n} - C_{n,m}|
    double c_norm;        // largest |C_{m,n}|
};

// Detailed balance: C_{m,n} = e^{-beta E_m / 2} W_{m->n} e^{beta E_n / 2}
// must be symmetric at finite temperature. Evaluated through energy
// differences only, so large |E| cannot overflow. Undefined at T = 0 (the
// triangular structure carries the statement instead), hence optional.
inline std::optional<DetailedBalanceCertificate> detailed_balance_check(
    const PauliGenerator& g) {
    if (g.beta.is_zero_temperature()) return std::nullopt;
    const double b = g.beta.value();
    DetailedBalanceCertificate cert{0.0, 0.0};
    for (int k = 0; k + 1 < g.size; ++k) {
        const double de = g.de[k];
        // C_{k,k+1} = W_{k->k+1} e^{-b(E_k - E_{k+1})/2}
        const double c_up = -g.lower[k] * std::exp(0.5 * b * de);
        const double c_dn = -g.upper[k] * std::exp(-0.5 * b * de);
        cert.c_norm = std::max({cert.c_norm, c_up, c_dn});
        cert.max_asymmetry = std::max(cert.max_asymmetry, std::abs(c_up - c_dn));
    }
    return cert;
}

// Symmetrized off-diagonals c_k = -sqrt(lower_k * upper_k). The generator is
// similar to the symmetric tridiagonal (diag, c), which is what the Sturm
// bisection consumes. At T = 0 one factor vanishes and c_k = 0; the
// triangular generator's spectrum is its diagonal, and the symmetrized
// matrix reproduces exactly that.
inline std::vector<double> symmetrized_offdiag(const PauliGenerator& g) {
    std::vector<double> c(g.size > 0 ? g.size - 1 : 0);
    for (int k = 0; k + 1 < g.size; ++k) {
        const double prod = g.lower[k] * g.upper[k];
        if (prod < 0.0)
            throw std::logic_error("symmetrized_offdiag: off-diagonal signs inconsistent");
        c[k] = -std::sqrt(prod);
    }
    return c;
}

} // namespace lmg

#endif
