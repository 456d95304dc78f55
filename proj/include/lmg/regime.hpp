#ifndef LMG_REGIME_HPP
#define LMG_REGIME_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace lmg {

// Physical constants used by the regime thresholds. Lengths in micrometers,
// energies in eV.
namespace constants {
inline constexpr double hc_ev_um = 1.23984;          // h c
inline constexpr double fine_structure = 1.0 / 137.035999084;
inline constexpr double bohr_radius_um = 5.29177210903e-5;
} // namespace constants

enum class Regime { fully_coherent, fully_incoherent, intermediate };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::fully_coherent: return "fully_coherent";
        case Regime::fully_incoherent: return "fully_incoherent";
        case Regime::intermediate: return "intermediate";
    }
    return "?";
}

struct RegimeAssessment {
    Regime regime;
    double ell_um;              // max pair distance
    double a_um;                // min pair distance
    double max_delta_e_ev;      // largest relevant |E_n - E_m|
    double margin_factor;       // operational meaning of "much less/greater"
    double coherent_margin;     // (hc/ell) / |dE|      >= factor => coherent
    double incoherent_margin;   // |dE| / (hc/a)        >= factor => incoherent
    double incobeta_margin;     // (a / (beta hc))      >= factor => incoherent
    std::optional<double> coupling_estimate_ev; // J hbar^2 from geometry
    std::optional<bool> geometric_coherent;     // alpha^3 a0^2 << a^3 / ell
    std::optional<bool> geometric_incoherent;   // alpha^3 a0^2 >> a^2
};

// Classify the radiation-coupling regime of an arrangement with extent ell,
// nearest-neighbor distance a and maximal relevant level splitting dE (all
// among dipole-connected pairs). "Much less than" is a factor
// margin_factor (default 100). beta_ev is the inverse temperature in 1/eV;
// pass 0 to skip the thermal sufficient condition.
inline RegimeAssessment regime_classify(double ell_um, double a_um,
                                        double max_delta_e_ev, double beta_ev,
                                        double margin_factor = 100.0,
                                        bool estimate_coupling = false) {
    if (!(a_um > 0.0) || ell_um < a_um)
        throw std::domain_error("regime_classify: need 0 < a <= ell");
    if (max_delta_e_ev < 0.0 || beta_ev < 0.0)
        throw std::domain_error("regime_classify: energies must be >= 0");
    if (!(margin_factor > 1.0))
        throw std::domain_error("regime_classify: margin factor must exceed 1");

    RegimeAssessment out{};
    out.ell_um = ell_um;
    out.a_um = a_um;
    out.max_delta_e_ev = max_delta_e_ev;
    out.margin_factor = margin_factor;

    const double hc = constants::hc_ev_um;
    out.coherent_margin = (max_delta_e_ev > 0.0)
                              ? (hc / ell_um) / max_delta_e_ev
                              : std::numeric_limits<double>::infinity();
    out.incoherent_margin = max_delta_e_ev / (hc / a_um);
    out.incobeta_margin = (beta_ev > 0.0)
                              ? a_um / (beta_ev * hc)
                              : 0.0;

    if (out.coherent_margin >= margin_factor)
        out.regime = Regime::fully_coherent;
    else if (out.incoherent_margin >= margin_factor ||
             out.incobeta_margin >= margin_factor)
        out.regime = Regime::fully_incoherent;
    else
        out.regime = Regime::intermediate;

    if (estimate_coupling) {
        const double alpha = constants::fine_structure;
        const double a0 = constants::bohr_radius_um;
        // dipolar estimate J hbar^2 ~ alpha^3 a0^2 pi hbar c / a^3;
        // hbar c = hc / (2 pi), so pi hbar c = hc / 2
        out.coupling_estimate_ev =
            alpha * alpha * alpha * a0 * a0 * 0.5 * hc /
            (a_um * a_um * a_um);
        const double lhs = alpha * alpha * alpha * a0 * a0;
        out.geometric_coherent =
            lhs <= (a_um * a_um * a_um / ell_um) / margin_factor;
        out.geometric_incoherent = lhs >= (a_um * a_um) * margin_factor;
    }
    return out;
}

} // namespace lmg

#endif
