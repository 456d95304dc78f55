#ifndef LMG_SECTOR_HPP
#define LMG_SECTOR_HPP

#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmg/numeric.hpp"

namespace lmg {

// Fixed total-spin sector of the isotropic collective-spin model:
// N spin-1/2 constituents, total spin j (stored as 2j to keep half-integers
// exact), coupling J > 0 and transverse field Gamma, in units hbar = 1.
struct SectorParams {
    int n_spins;   // N
    int two_j;     // 2j
    double coupling; // J
    double field;    // Gamma

    SectorParams(int n, int twoj, double j_coupling, double gamma_field)
        : n_spins(n), two_j(twoj), coupling(j_coupling), field(gamma_field) {
        if (n < 2)
            throw std::domain_error("SectorParams: N must be >= 2");
        if (two_j < 2)
            throw std::domain_error("SectorParams: sectors j = 0 and j = 1/2 carry no dynamics");
        if (two_j > n)
            throw std::domain_error("SectorParams: j must not exceed N/2");
        if ((two_j - n) % 2 != 0)
            throw std::domain_error("SectorParams: j must be integer for even N, half-integer for odd N");
        if (!(coupling > 0.0))
            throw std::domain_error("SectorParams: coupling must be positive");
        if (!std::isfinite(field))
            throw std::domain_error("SectorParams: field must be finite");
    }

    double j() const { return 0.5 * two_j; }
    int dim() const { return two_j + 1; }
    bool j_is_integer() const { return two_j % 2 == 0; }
    // Magnetization value of the k-th sector state, k in [0, 2j].
    double mz_at(int k) const { return 0.5 * (2 * k - two_j); }
    int index_of_mz(double mz) const {
        const double t = 2.0 * mz + two_j;
        const long k = std::lround(0.5 * t);
        if (std::abs(0.5 * t - static_cast<double>(k)) > 1e-9 || k < 0 || k > two_j)
            throw std::domain_error("SectorParams: m_z off the sector grid");
        return static_cast<int>(k);
    }
};

// E(j, m_z) = -J j(j+1)/N + m_z (J m_z / N - Gamma).
inline double energy(const SectorParams& s, double mz) {
    (void)s.index_of_mz(mz); // validates the grid
    const double j = s.j();
    return -s.coupling * j * (j + 1.0) / s.n_spins +
           mz * (s.coupling * mz / s.n_spins - s.field);
}

inline std::vector<double> sector_energies(const SectorParams& s) {
    std::vector<double> e(s.dim());
    for (int k = 0; k < s.dim(); ++k) e[k] = energy(s, s.mz_at(k));
    return e;
}

struct SectorSpectrum {
    std::vector<double> mz;     // -j ... j
    std::vector<double> energy; // same order
    bool degeneracy_flag;
};

enum class JParity { integer, half_integer };

struct GridRounding {
    double value;
    bool tied;
};

// Nearest point of the m_z grid (integers or half-integers). A tie is declared
// when x sits within 1e-9 of the midpoint of two grid values; the candidate of
// smaller magnitude is returned so that field sweeps remain total.
inline GridRounding round_to_j_grid(double x, JParity parity) {
    if (!std::isfinite(x))
        throw std::domain_error("round_to_j_grid: x must be finite");
    const double offset = (parity == JParity::half_integer) ? 0.5 : 0.0;
    const double lo = std::floor(x - offset) + offset;
    const double hi = lo + 1.0;
    const double mid = lo + 0.5;
    if (std::abs(x - mid) < 1e-9) {
        const double pick = std::abs(lo) <= std::abs(hi) ? lo : hi;
        return {pick, true};
    }
    return {(x < mid) ? lo : hi, false};
}

inline JParity grid_parity(const SectorParams& s) {
    return s.j_is_integer() ? JParity::integer : JParity::half_integer;
}

// delta = [Gamma N / (2J)]_j - Gamma N / (2J), always in [-1/2, 1/2].
inline double delta_offset(const SectorParams& s) {
    const double x = s.field * s.n_spins / (2.0 * s.coupling);
    return round_to_j_grid(x, grid_parity(s)).value - x;
}

struct GroundAndFirstExcited {
    double mz_ground;
    double e_ground;
    double mz_excited;
    double e_excited;
    bool degeneracy_flag;
};

// Ground state m_z^(1) = sgn(Gamma) min{[|Gamma|N/(2J)]_j, j} and the first
// excited neighbor chosen opposite to the rounding offset, falling back to the
// other neighbor and finally to sgn(Gamma)(j-1) when saturated.
inline GroundAndFirstExcited ground_and_first_excited(const SectorParams& s) {
    const double j = s.j();
    const double x = s.field * s.n_spins / (2.0 * s.coupling);
    const auto rounded = round_to_j_grid(std::abs(x), grid_parity(s));
    const int sign_gamma = (s.field >= 0.0) ? 1 : -1;
    const double m1 = sign_gamma * std::min(rounded.value, j);

    // Signed delta; when it vanishes the two neighbors are degenerate in x and
    // we step toward the field direction.
    double delta = round_to_j_grid(x, grid_parity(s)).value - x;
    double step = (delta != 0.0) ? static_cast<double>(sgn(delta))
                                 : static_cast<double>(-sign_gamma);
    double m2;
    if (std::abs(m1 - step) <= j + 0.25 && std::abs(m1 - step) <= j) {
        m2 = m1 - step;
    } else if (std::abs(m1 + step) <= j) {
        m2 = m1 + step;
    } else {
        m2 = sign_gamma * (j - 1.0);
    }
    return {m1, energy(s, m1), m2, energy(s, m2), rounded.tied};
}

enum class GapBranch { paramagnetic, transient, inner };

inline const char* to_string(GapBranch b) {
    switch (b) {
        case GapBranch::paramagnetic: return "paramagnetic";
        case GapBranch::transient: return "transient";
        case GapBranch::inner: return "inner";
    }
    return "?";
}

// Positive exact critical point Gamma_c = 2 j J / N.
inline double critical_field(const SectorParams& s) {
    return s.two_j * s.coupling / s.n_spins;
}

struct GapReport {
    double delta;          // rounding offset, |delta| <= 1/2
    double mz_ground;
    double mz_excited;
    double gap;
    GapBranch branch;
    double gamma_c;        // positive critical field
    int r_flag;            // 1 iff delta * Gamma < 0
    bool degeneracy_flag;
};

// First gap via the three-branch closed form, cross-checked against the
// explicit level difference (they must agree to 1e-12 relative).
inline GapReport gap(const SectorParams& s) {
    const double j = s.j();
    const auto gs = ground_and_first_excited(s);
    const double x = s.field * s.n_spins / (2.0 * s.coupling);
    const double xa = std::abs(x);
    const auto ra = round_to_j_grid(xa, grid_parity(s));
    const double delta_abs = ra.value - xa;
    const double delta = (x >= 0.0) ? delta_abs : -delta_abs;
    const int r = (delta * s.field < 0.0) ? 1 : 0;

    GapBranch branch;
    double gap_formula;
    if (ra.value > j) {
        branch = GapBranch::paramagnetic;
        gap_formula = std::abs(s.field) - s.coupling * (s.two_j - 1.0) / s.n_spins;
    } else if (ra.value == j && delta_abs < 0.0) {
        branch = GapBranch::transient;
        gap_formula = s.coupling * (1.0 + 2.0 * std::abs(delta_abs)) / s.n_spins;
    } else {
        branch = GapBranch::inner;
        gap_formula = s.coupling * (1.0 - 2.0 * std::abs(delta_abs)) / s.n_spins;
    }

    // E(m2) - E(m1) = (m2 - m1)(J(m2 + m1)/N - Gamma): one subtraction of
    // O(Gamma) terms instead of two O(N) energies, so the check is not
    // drowned by cancellation noise when the gap is ~ J/N
    const double dm = gs.mz_excited - gs.mz_ground;
    const double gap_levels =
        dm * (s.coupling * (gs.mz_excited + gs.mz_ground) / s.n_spins - s.field);
    // absolute floor: near a level crossing the gap itself sinks below the
    // rounding noise of Gamma N / (2J), where a pure relative test cannot hold
    const double scale = std::max({std::abs(gap_levels), std::abs(gap_formula), 1e-300});
    const double tol = 1e-12 * scale +
                       64.0 * std::numeric_limits<double>::epsilon() *
                           (std::abs(s.field) + s.coupling);
    if (!gs.degeneracy_flag && std::abs(gap_levels - gap_formula) > tol)
        throw std::logic_error("gap: branch formula disagrees with the sorted spectrum");

    return {delta, gs.mz_ground, gs.mz_excited, gap_formula,
            branch, critical_field(s), r, gs.degeneracy_flag};
}

struct PartitionFunction {
    double log_exact;      // log Z_j
    double ground_shift;   // -beta * E_min, reported separately
    std::optional<double> log_asymptotic; // interior-saddle closed form
    double exact() const { return std::exp(log_exact); }
    std::optional<double> asymptotic() const {
        if (!log_asymptotic) return std::nullopt;
        return std::exp(*log_asymptotic);
    }
};

// Z_j = sum_mz exp(-beta E(j, mz)), evaluated in the log domain. The large-N
// closed form (Gaussian saddle over the magnetization) is returned only when
// the saddle |Gamma| N / (2J) lies inside the sector, i.e. strictly below j.
inline PartitionFunction partition_function(const SectorParams& s, double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw std::domain_error("partition_function: beta must be finite and >= 0");
    const auto e = sector_energies(s);
    std::vector<double> logw(e.size());
    for (std::size_t k = 0; k < e.size(); ++k) logw[k] = -beta * e[k];
    const double emin = *std::min_element(e.begin(), e.end());

    PartitionFunction out{log_sum_exp(logw), -beta * emin, std::nullopt};

    const double x = std::abs(s.field) * s.n_spins / (2.0 * s.coupling);
    if (x < s.j() && beta > 0.0) {
        const double j = s.j();
        // saddle at m = Gamma N / (2J): exponent beta Gamma^2 N / (4J),
        // Gaussian width gives the sqrt(pi N / (beta J)) prefactor
        out.log_asymptotic =
            0.5 * std::log(M_PI * s.n_spins / (beta * s.coupling)) +
            beta * s.coupling * j * (j + 1.0) / s.n_spins +
            beta * s.field * s.field * s.n_spins / (4.0 * s.coupling);
    }
    return out;
}

inline SectorSpectrum sector_spectrum(const SectorParams& s) {
    SectorSpectrum sp;
    sp.mz.resize(s.dim());
    sp.energy.resize(s.dim());
    for (int k = 0; k < s.dim(); ++k) {
        sp.mz[k] = s.mz_at(k);
        sp.energy[k] = energy(s, sp.mz[k]);
    }
    sp.degeneracy_flag = ground_and_first_excited(s).degeneracy_flag;
    return sp;
}

} // namespace lmg

#endif
