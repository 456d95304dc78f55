#ifndef LMG_TIMES_HPP
#define LMG_TIMES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmg/eigen_tridiag.hpp"
#include "lmg/generator.hpp"

namespace lmg {

// Contiguous index ranges [first, last] of the generator that are decoupled
// from each other (both off-diagonals vanish at the cut). For nondegenerate
// finite-temperature chains this is a single block.
inline std::vector<std::pair<int, int>> decoupled_blocks(const PauliGenerator& g) {
    std::vector<std::pair<int, int>> blocks;
    int first = 0;
    for (int k = 0; k + 1 < g.size; ++k) {
        if (g.lower[k] == 0.0 && g.upper[k] == 0.0) {
            blocks.emplace_back(first, k);
            first = k + 1;
        }
    }
    blocks.emplace_back(first, g.size - 1);
    return blocks;
}

inline double generator_norm_estimate(const PauliGenerator& g) {
    double m = 0.0;
    for (double v : g.diag) m = std::max(m, std::abs(v));
    return std::max(m, 1e-300);
}

// Second-smallest eigenvalue of the generator, i.e. the spectral relaxation
// rate. The generator is similar to a symmetric tridiagonal matrix, so Sturm
// bisection applies. Every decoupled block conserves its own probability and
// contributes one zero eigenvalue, which is excluded; the smallest retained
// eigenvalue across blocks is mu_2. At T = 0 the generator is triangular and
// its eigenvalues are the diagonal entries: mu_2 is the smallest nonzero one.
inline double spectral_gap(const PauliGenerator& g) {
    const double scale = generator_norm_estimate(g);

    if (g.beta.is_zero_temperature()) {
        double mu2 = std::numeric_limits<double>::infinity();
        for (double v : g.diag)
            if (v > 1e-14 * scale) mu2 = std::min(mu2, v);
        if (!std::isfinite(mu2))
            throw std::logic_error("spectral_gap: all rates vanish at T = 0");
        return mu2;
    }

    const auto offdiag = symmetrized_offdiag(g);
    double mu2 = std::numeric_limits<double>::infinity();
    for (const auto& [first, last] : decoupled_blocks(g)) {
        const int nb = last - first + 1;
        std::vector<double> d(g.diag.begin() + first, g.diag.begin() + last + 1);
        std::vector<double> e(offdiag.begin() + first, offdiag.begin() + last);
        const double lam1 = sturm_eigenvalue(d, e, 0);
        if (std::abs(lam1) > 1e-8 * scale)
            throw std::logic_error("spectral_gap: stationary eigenvalue missing from a block");
        if (nb >= 2) mu2 = std::min(mu2, sturm_eigenvalue(d, e, 1));
    }
    if (!std::isfinite(mu2))
        throw std::logic_error("spectral_gap: generator has no relaxing mode");
    return mu2;
}

// tau_{m,n} = 2 / (A_mm + A_nn): relaxation time of the (m, n) off-diagonal
// normal mode. Infinite (flagged by the caller) when both rates vanish.
inline double decoherence_time(const PauliGenerator& g, int m, int n) {
    if (m == n)
        throw std::domain_error("decoherence_time: need two distinct states");
    if (m < 0 || n < 0 || m >= g.size || n >= g.size)
        throw std::domain_error("decoherence_time: index out of range");
    const double rate = g.diag[m] + g.diag[n];
    if (rate == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 / rate;
}

// |rho_{m,n}(t)| = |rho_{m,n}(0)| e^{-t / tau_{m,n}}.
inline double offdiagonal_decay(double initial, double tau_mn, double t) {
    if (!(tau_mn > 0.0) || t < 0.0)
        throw std::domain_error("offdiagonal_decay: need tau > 0 and t >= 0");
    return initial * std::exp(-t / tau_mn);
}

// Boltzmann populations over an energy list; beta = infinity collapses onto
// the ground level (split evenly over exact ties).
inline std::vector<double> gibbs_vector(const std::vector<double>& energy,
                                        const Beta& beta) {
    std::vector<double> p(energy.size());
    if (energy.empty())
        throw std::invalid_argument("gibbs_vector: empty energy list");
    if (beta.is_zero_temperature()) {
        double emin = energy[0];
        for (double e : energy) emin = std::min(emin, e);
        int count = 0;
        for (double e : energy) count += (e == emin);
        for (std::size_t k = 0; k < energy.size(); ++k)
            p[k] = (energy[k] == emin) ? 1.0 / count : 0.0;
        return p;
    }
    std::vector<double> logw(energy.size());
    for (std::size_t k = 0; k < energy.size(); ++k)
        logw[k] = -beta.value() * energy[k];
    return softmax(logw);
}

struct ThermalizationTimes {
    double tau_q;   // quasistationary pair time  2 / (A_mm + A_nn), maximized
    double tau_p;   // spectral time  1 / mu_2
    double tau;     // max of the two
    double mu2;
    int argmax_m;   // indices (magnetization order) of the maximizing pair
    int argmax_n;
    bool degeneracy_flag;
};

// Pairwise time tau_{m,n} = 2/(A_mm + A_nn) is maximized by the two smallest
// diagonal rates. Ties within 1e-9 relative are broken toward the smaller
// index and flagged.
inline ThermalizationTimes thermalization_times(const PauliGenerator& g) {
    if (g.size < 2)
        throw std::domain_error("thermalization_times: need at least two levels");

    std::vector<int> idx(g.size);
    for (int k = 0; k < g.size; ++k) idx[k] = k;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return g.diag[a] < g.diag[b]; });

    const int m = idx[0];
    const int n = idx[1];
    bool tie = false;
    const double scale = generator_norm_estimate(g);
    if (g.size > 2) {
        const double d2 = g.diag[idx[1]];
        const double d3 = g.diag[idx[2]];
        if (std::abs(d3 - d2) <= 1e-9 * scale) tie = true;
    }

    ThermalizationTimes t{};
    t.mu2 = spectral_gap(g);
    t.tau_p = 1.0 / t.mu2;
    const double pair_rate = g.diag[m] + g.diag[n];
    if (pair_rate == 0.0) {
        t.tau_q = std::numeric_limits<double>::infinity();
        tie = true; // both rates vanish: decoupled pair, flag it
    } else {
        t.tau_q = 2.0 / pair_rate;
    }
    t.tau = std::max(t.tau_q, t.tau_p);
    t.argmax_m = std::min(m, n);
    t.argmax_n = std::max(m, n);
    t.degeneracy_flag = tie || g.degenerate;
    return t;
}

// y += -A x for the tridiagonal generator.
inline void apply_neg_generator(const PauliGenerator& g,
                                const std::vector<double>& x,
                                std::vector<double>& y) {
    for (int k = 0; k < g.size; ++k) y[k] = -g.diag[k] * x[k];
    for (int k = 0; k + 1 < g.size; ++k) {
        y[k] -= g.upper[k] * x[k + 1];     // A_{k,k+1} x_{k+1}
        y[k + 1] -= g.lower[k] * x[k];     // A_{k+1,k} x_k
    }
}

// Spectral propagation of dp/dt = -A p through the symmetric similarity
// transform: with s_{k+1} = s_k sqrt(A_{k+1,k} / A_{k,k+1}), T = S^{-1} A S
// is symmetric and p(t) = S V e^{-Lambda t} V^T S^{-1} p(0). Valid whenever
// both one-step rates are nonzero, i.e. finite temperature; applied per
// decoupled block when degenerate levels cut the chain.
inline std::vector<std::vector<double>> evolve_spectral(
    const PauliGenerator& g, const std::vector<double>& p0,
    const std::vector<double>& times) {
    std::vector<std::vector<double>> out(times.size(),
                                         std::vector<double>(g.size, 0.0));
    for (const auto& [first, last] : decoupled_blocks(g)) {
        const int nb = last - first + 1;
        std::vector<double> s(nb);
        s[0] = 1.0;
        double ls = 0.0, ls_min = 0.0, ls_max = 0.0;
        for (int k = 0; k + 1 < nb; ++k) {
            const double lo = g.lower[first + k];
            const double up = g.upper[first + k];
            if (lo == 0.0 || up == 0.0)
                throw std::logic_error("evolve_spectral: chain not similarity-symmetrizable");
            s[k + 1] = s[k] * std::sqrt(lo / up);
            ls += 0.5 * std::log(lo / up);
            ls_min = std::min(ls_min, ls);
            ls_max = std::max(ls_max, ls);
        }
        // the scaling spans e^{beta (E_max - E_min) / 2}; past the double
        // range the reconstruction cancels to garbage, so refuse loudly
        if (ls_max - ls_min > 600.0)
            throw std::domain_error(
                "evolve_spectral: rate ratios exceed double-precision range");
        std::vector<double> d(g.diag.begin() + first, g.diag.begin() + last + 1);
        std::vector<double> e(nb - 1);
        for (int k = 0; k + 1 < nb; ++k)
            e[k] = g.upper[first + k] * s[k + 1] / s[k]; // = -sqrt(lower*upper), symmetric

        std::vector<double> vecs;
        auto lam = tridiag_eigensystem(d, e, vecs);
        // QL eigenvalues carry ~eps * ||T|| absolute error; over many slow
        // relaxation times that inflates lambda * t by eps * (rate spread),
        // so refine each eigenvalue to relative accuracy by bisection
        for (int k = 0; k < nb; ++k) lam[k] = sturm_eigenvalue(d, e, k);
        // each block conserves its probability exactly (columns of the
        // generator sum to zero by construction); the residual stationary
        // eigenvalue is symmetrization rounding, not dynamics
        double dmax = 0.0;
        for (double v : d) dmax = std::max(dmax, std::abs(v));
        if (std::abs(lam[0]) > 1e-8 * std::max(dmax, 1e-300))
            throw std::logic_error("evolve_spectral: stationary eigenvalue missing");
        lam[0] = 0.0;

        // coefficients c = V^T S^{-1} p0
        std::vector<double> c(nb, 0.0);
        for (int k = 0; k < nb; ++k)
            for (int i = 0; i < nb; ++i)
                c[k] += vecs[i * nb + k] * p0[first + i] / s[i];

        for (std::size_t ti = 0; ti < times.size(); ++ti) {
            for (int i = 0; i < nb; ++i) {
                double acc = 0.0;
                for (int k = 0; k < nb; ++k)
                    acc += vecs[i * nb + k] * std::exp(-lam[k] * times[ti]) * c[k];
                out[ti][first + i] = s[i] * acc;
            }
        }
    }
    return out;
}

// Adaptive Runge-Kutta-Fehlberg 4(5) integration of dp/dt = -A p, used where
// the spectral route is unavailable (T = 0 triangular generators).
inline std::vector<std::vector<double>> evolve_rk45(
    const PauliGenerator& g, const std::vector<double>& p0,
    const std::vector<double>& times, double tol = 1e-10) {
    static const double b21 = 0.25;
    static const double b31 = 3.0 / 32.0, b32 = 9.0 / 32.0;
    static const double b41 = 1932.0 / 2197.0, b42 = -7200.0 / 2197.0,
                        b43 = 7296.0 / 2197.0;
    static const double b51 = 439.0 / 216.0, b52 = -8.0, b53 = 3680.0 / 513.0,
                        b54 = -845.0 / 4104.0;
    static const double b61 = -8.0 / 27.0, b62 = 2.0, b63 = -3544.0 / 2565.0,
                        b64 = 1859.0 / 4104.0, b65 = -11.0 / 40.0;
    static const double c1 = 16.0 / 135.0, c3 = 6656.0 / 12825.0,
                        c4 = 28561.0 / 56430.0, c5 = -9.0 / 50.0, c6 = 2.0 / 55.0;
    static const double d1 = 25.0 / 216.0, d3 = 1408.0 / 2565.0,
                        d4 = 2197.0 / 4104.0, d5 = -1.0 / 5.0;

    const int n = g.size;
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), tmp(n), y5(n);
    std::vector<double> y = p0;
    double t = 0.0;
    double h = 0.1 / generator_norm_estimate(g);

    std::vector<std::vector<double>> out;
    out.reserve(times.size());
    for (double target : times) {
        if (target < t)
            throw std::invalid_argument("evolve_rk45: times must be nondecreasing");
        while (t < target) {
            h = std::min(h, target - t);
            apply_neg_generator(g, y, k1);
            for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * b21 * k1[i];
            apply_neg_generator(g, tmp, k2);
            for (int i = 0; i < n; ++i)
                tmp[i] = y[i] + h * (b31 * k1[i] + b32 * k2[i]);
            apply_neg_generator(g, tmp, k3);
            for (int i = 0; i < n; ++i)
                tmp[i] = y[i] + h * (b41 * k1[i] + b42 * k2[i] + b43 * k3[i]);
            apply_neg_generator(g, tmp, k4);
            for (int i = 0; i < n; ++i)
                tmp[i] = y[i] + h * (b51 * k1[i] + b52 * k2[i] + b53 * k3[i] +
                                     b54 * k4[i]);
            apply_neg_generator(g, tmp, k5);
            for (int i = 0; i < n; ++i)
                tmp[i] = y[i] + h * (b61 * k1[i] + b62 * k2[i] + b63 * k3[i] +
                                     b64 * k4[i] + b65 * k5[i]);
            apply_neg_generator(g, tmp, k6);

            double err = 0.0;
            for (int i = 0; i < n; ++i) {
                y5[i] = y[i] + h * (c1 * k1[i] + c3 * k3[i] + c4 * k4[i] +
                                    c5 * k5[i] + c6 * k6[i]);
                const double y4 = y[i] + h * (d1 * k1[i] + d3 * k3[i] +
                                              d4 * k4[i] + d5 * k5[i]);
                err = std::max(err, std::abs(y5[i] - y4));
            }
            if (err <= tol || h <= 1e-15 * std::max(t, 1.0)) {
                t += h;
                y = y5;
            }
            const double ratio = (err > 0.0)
                                     ? 0.9 * std::pow(tol / err, 0.2)
                                     : 4.0;
            h *= std::clamp(ratio, 0.1, 4.0);
        }
        out.push_back(y);
    }
    return out;
}

struct PauliTrajectory {
    std::vector<double> times;                   // ascending
    std::vector<std::vector<double>> populations; // one vector per time
    std::string method;                          // "spectral" | "runge-kutta"
};

// Propagate p(0) to the requested (nondecreasing) times. Spectral where the
// similarity transform exists; RK45 at T = 0 where the rates vanish
// one-sidedly. Populations are certified: entries above -1e-10 are clipped
// to zero and renormalized, anything worse aborts.
inline PauliTrajectory evolve_pauli(const PauliGenerator& g,
                                    const std::vector<double>& p0,
                                    const std::vector<double>& times) {
    if (static_cast<int>(p0.size()) != g.size)
        throw std::invalid_argument("evolve_pauli: state dimension mismatch");
    double mass = 0.0;
    for (double v : p0) {
        if (v < -1e-12)
            throw std::domain_error("evolve_pauli: negative initial probability");
        mass += v;
    }
    if (std::abs(mass - 1.0) > 1e-9)
        throw std::domain_error("evolve_pauli: initial state not normalized");

    PauliTrajectory traj;
    traj.times = times;
    if (g.beta.is_zero_temperature()) {
        traj.populations = evolve_rk45(g, p0, times);
        traj.method = "runge-kutta";
    } else {
        traj.populations = evolve_spectral(g, p0, times);
        traj.method = "spectral";
    }
    for (auto& p : traj.populations) {
        double s = 0.0;
        for (double& v : p) {
            if (v < -1e-10)
                throw std::runtime_error("evolve_pauli: population went negative");
            if (v < 0.0) v = 0.0;
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-8)
            throw std::runtime_error("evolve_pauli: probability mass drifted");
        for (double& v : p) v /= s;
    }
    return traj;
}

struct ThermalizationReport {
    SectorParams sector;
    GapReport gap;
    ThermalizationTimes times;
    Beta beta;
    double gamma;
};

// Assemble generator, times and branch tag for a sector. At T = 0 the
// identity tau_Q = 2 tau_P holds for large sectors at the critical field; it
// is asserted loosely here as a self-check for N >= 20 at Gamma = Gamma_c.
inline ThermalizationReport thermalization_report(const SectorParams& s,
                                                  const Beta& beta,
                                                  double gamma) {
    const auto g = sector_generator(s, beta, gamma);
    ThermalizationReport r{s, gap(s), thermalization_times(g), beta, gamma};
    if (beta.is_zero_temperature() && s.n_spins >= 20 && s.two_j == s.n_spins &&
        std::abs(s.field - critical_field(s)) < 1e-12) {
        const double ratio = r.times.tau_q / r.times.tau_p;
        if (std::abs(ratio - 2.0) > 0.1)
            throw std::logic_error(
                "thermalization_report: tau_Q / tau_P far from 2 at T = 0");
    }
    return r;
}

struct AsymptoticPrediction {
    GapBranch branch;
    double tau_q_estimate; // order of magnitude only
};

// Order-of-magnitude decoherence-time estimates per branch: paramagnetic
// pairs near sgn(Gamma) j relax at field-dominated rates, critical sectors
// slow down linearly in N, inner sectors are N-independent.
inline AsymptoticPrediction asymptotic_predictions(const SectorParams& s,
                                                   double gamma) {
    const auto rep = gap(s);
    const double ag = std::abs(s.field);
    AsymptoticPrediction out{rep.branch, 0.0};
    switch (rep.branch) {
        case GapBranch::paramagnetic:
            out.tau_q_estimate = 1.0 / (gamma * ag * ag * ag * s.j());
            break;
        case GapBranch::transient:
        case GapBranch::inner: {
            const double gc = critical_field(s);
            if (std::abs(ag - gc) < 0.25 * gc)
                out.tau_q_estimate =
                    s.n_spins / (gamma * ag * ag * s.coupling);
            else
                out.tau_q_estimate =
                    1.0 / (gamma * ag * s.coupling * s.coupling);
            break;
        }
    }
    return out;
}

} // namespace lmg

#endif
