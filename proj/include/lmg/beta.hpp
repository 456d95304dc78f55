#ifndef LMG_BETA_HPP
#define LMG_BETA_HPP

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

namespace lmg {

// Inverse temperature. Zero temperature (beta = infinity) is a first-class
// state rather than a large float: the T = 0 results are structural
// (triangular generators), not numerical limits.
class Beta {
public:
    static Beta finite(double value) {
        if (!(value > 0.0) || !std::isfinite(value))
            throw std::domain_error("Beta::finite: value must be positive and finite");
        return Beta(value, false);
    }
    static Beta zero_temperature() { return Beta(0.0, true); }

    static Beta parse(const std::string& s) {
        if (s == "inf" || s == "Inf" || s == "INF") return zero_temperature();
        return finite(std::stod(s));
    }

    bool is_zero_temperature() const { return infinite_; }
    double value() const {
        if (infinite_)
            throw std::logic_error("Beta::value: beta is infinite");
        return value_;
    }

    std::string str() const {
        if (infinite_) return "inf";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", value_);
        return buf;
    }

    friend bool operator==(const Beta& a, const Beta& b) {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
    }

private:
    Beta(double v, bool inf) : value_(v), infinite_(inf) {}
    double value_;
    bool infinite_;
};

} // namespace lmg

#endif
