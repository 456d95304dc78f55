#ifndef LMG_PLANCK_HPP
#define LMG_PLANCK_HPP

#include <cmath>
#include <stdexcept>

#include "lmg/beta.hpp"

namespace lmg {

// Blackbody spectral factor entering the transition rate for an energy
// change dE = E_final - E_initial of the system:
//
//   dE > 0 (absorption):           dE^3 e^{-beta dE} / (1 - e^{-beta dE})
//   dE < 0 (stimulated + spont.):  |dE|^3 / (1 - e^{-beta |dE|})
//   dE = 0:                        0   (no static mode in the field)
//
// At beta = infinity only spontaneous emission survives: |dE|^3 for dE < 0,
// zero otherwise.
inline double planck_factor(double delta_e, const Beta& beta) {
    if (!std::isfinite(delta_e))
        throw std::domain_error("planck_factor: energy difference must be finite");
    if (delta_e == 0.0) return 0.0;

    const double x = std::abs(delta_e);
    if (beta.is_zero_temperature())
        return (delta_e < 0.0) ? x * x * x : 0.0;

    const double b = beta.value();
    const double bx = b * x;
    if (bx < 1e-6) {
        // 1/(e^{bx} - 1) ~ (1/bx)(1 - bx/2 + (bx)^2/12): both signs reduce to
        // x^2/b times a short series, avoiding 0/0 loss near degeneracy.
        const double series = 1.0 - 0.5 * bx + bx * bx / 12.0;
        if (delta_e > 0.0) return x * x / b * series;
        return x * x / b * (1.0 + 0.5 * bx + bx * bx / 12.0);
    }
    const double em = std::exp(-bx);
    if (delta_e > 0.0) return x * x * x * em / (1.0 - em);
    return x * x * x / (1.0 - em);
}

// Detailed balance: f(dE) = f(-dE) e^{-beta dE} for finite beta.
inline double planck_balance_residual(double delta_e, const Beta& beta) {
    if (beta.is_zero_temperature() || delta_e == 0.0) return 0.0;
    const double lhs = planck_factor(delta_e, beta);
    const double rhs = planck_factor(-delta_e, beta) *
                       std::exp(-beta.value() * delta_e);
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
}

} // namespace lmg

#endif
