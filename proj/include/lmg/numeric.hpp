#ifndef LMG_NUMERIC_HPP
#define LMG_NUMERIC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace lmg {

inline int sgn(double x) { return (x > 0.0) - (x < 0.0); }

// log(sum_i exp(args[i])), stable for widely spread exponents.
inline double log_sum_exp(std::span<const double> args) {
    if (args.empty())
        throw std::invalid_argument("log_sum_exp: empty input");
    const double m = *std::max_element(args.begin(), args.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double a : args) s += std::exp(a - m);
    return m + std::log(s);
}

// Normalized probabilities from log-weights.
inline std::vector<double> softmax(std::span<const double> logw) {
    const double lz = log_sum_exp(logw);
    std::vector<double> p(logw.size());
    for (std::size_t i = 0; i < logw.size(); ++i) p[i] = std::exp(logw[i] - lz);
    return p;
}

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

// Relative entropy H(p||q) = sum p log(p/q); p entries with p_i = 0 contribute 0.
inline double relative_entropy(std::span<const double> p, std::span<const double> q) {
    double h = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) h += p[i] * (std::log(p[i]) - std::log(q[i]));
    }
    return h;
}

} // namespace lmg

#endif
