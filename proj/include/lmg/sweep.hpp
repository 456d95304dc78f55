#ifndef LMG_SWEEP_HPP
#define LMG_SWEEP_HPP

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lmg/times.hpp"

namespace lmg {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

// b = 2 gamma J^3 makes the reported times dimensionless.
inline double time_unit_b(double gamma, double coupling) {
    return 2.0 * gamma * coupling * coupling * coupling;
}

// 17 significant digits: enough to round-trip any double, and fixed so that
// reruns are byte-identical.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

enum class JRule { fixed, half_n, alpha_n };

struct SweepSpec {
    std::vector<int> n_grid;
    JRule j_rule = JRule::half_n;
    double j_fixed = 0.0;   // used when j_rule == fixed (value of j)
    double j_alpha = 0.5;   // used when j_rule == alpha_n
    std::vector<double> gamma_grid;   // fields, absolute or as Gamma/Gamma_c
    bool gamma_is_ratio = false;
    std::vector<Beta> beta_grid;
    double coupling = 1.0;
    double gamma_coupling = 0.5;
    int parallel = 1;
};

inline int resolve_two_j(const SweepSpec& spec, int n) {
    double j;
    switch (spec.j_rule) {
        case JRule::fixed: j = spec.j_fixed; break;
        case JRule::half_n: j = 0.5 * n; break;
        case JRule::alpha_n: j = spec.j_alpha * n; break;
        default: throw std::logic_error("resolve_two_j: bad rule");
    }
    const auto grid = round_to_j_grid(
        j, n % 2 == 0 ? JParity::integer : JParity::half_integer);
    return static_cast<int>(std::lround(2.0 * grid.value));
}

// One emitted row. Matches the CSV schema field for field.
struct SweepRecord {
    int n;
    int two_j;
    double coupling;
    double field;
    double field_over_critical;
    std::string beta;
    double gamma_coupling;
    double delta;
    double gap;
    std::string branch;
    double mz_ground;
    double tau_q_b;
    double tau_p_b;
    double tau_b;
    double mu2;
    double argmax_m; // magnetization values of the maximizing pair
    double argmax_n;
    int degeneracy_flag;
};

inline SweepRecord evaluate_grid_point(int n, int two_j, double field,
                                       const Beta& beta, double coupling,
                                       double gamma_coupling) {
    const SectorParams s(n, two_j, coupling, field);
    const auto rep = thermalization_report(s, beta, gamma_coupling);
    const double b = time_unit_b(gamma_coupling, coupling);
    SweepRecord rec;
    rec.n = n;
    rec.two_j = two_j;
    rec.coupling = coupling;
    rec.field = field;
    rec.field_over_critical = field / critical_field(s);
    rec.beta = beta.str();
    rec.gamma_coupling = gamma_coupling;
    rec.delta = rep.gap.delta;
    rec.gap = rep.gap.gap;
    rec.branch = to_string(rep.gap.branch);
    rec.mz_ground = rep.gap.mz_ground;
    rec.tau_q_b = b * rep.times.tau_q;
    rec.tau_p_b = b * rep.times.tau_p;
    rec.tau_b = b * rep.times.tau;
    rec.mu2 = rep.times.mu2;
    rec.argmax_m = s.mz_at(rep.times.argmax_m);
    rec.argmax_n = s.mz_at(rep.times.argmax_n);
    rec.degeneracy_flag = rep.times.degeneracy_flag ? 1 : 0;
    return rec;
}

// Validate every grid point up front so a bad spec is rejected as a whole
// with the offending point named; then evaluate with a worker pool into a
// preallocated result vector. Ordering is lexicographic in (N, Gamma, beta)
// regardless of the parallelism degree.
inline std::vector<SweepRecord> run_sweep(const SweepSpec& spec) {
    if (spec.n_grid.empty() || spec.gamma_grid.empty() || spec.beta_grid.empty())
        throw std::invalid_argument("run_sweep: every grid must be nonempty");
    if (spec.parallel < 1)
        throw std::invalid_argument("run_sweep: parallelism must be >= 1");

    struct Point {
        int n;
        int two_j;
        double field;
        Beta beta;
    };
    std::vector<Point> points;
    for (int n : spec.n_grid) {
        int two_j;
        try {
            two_j = resolve_two_j(spec, n);
            (void)SectorParams(n, two_j, spec.coupling, 0.0);
        } catch (const std::exception& err) {
            throw std::invalid_argument("run_sweep: invalid sector at N=" +
                                        std::to_string(n) + ": " + err.what());
        }
        const double gc = two_j * spec.coupling / n;
        for (double gval : spec.gamma_grid) {
            const double field = spec.gamma_is_ratio ? gval * gc : gval;
            if (!std::isfinite(field))
                throw std::invalid_argument(
                    "run_sweep: non-finite field at N=" + std::to_string(n));
            for (const Beta& beta : spec.beta_grid)
                points.push_back({n, two_j, field, beta});
        }
    }

    std::vector<SweepRecord> out(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size()) return;
            const auto& p = points[i];
            try {
                out[i] = evaluate_grid_point(p.n, p.two_j, p.field, p.beta,
                                             spec.coupling,
                                             spec.gamma_coupling);
            } catch (const std::exception&) {
                // a pathological point (for instance an exactly degenerate
                // field) must not poison its neighbors: emit a flagged row
                SweepRecord rec{};
                rec.n = p.n;
                rec.two_j = p.two_j;
                rec.coupling = spec.coupling;
                rec.field = p.field;
                rec.field_over_critical =
                    p.field * p.n / (p.two_j * spec.coupling);
                rec.beta = p.beta.str();
                rec.gamma_coupling = spec.gamma_coupling;
                const double nan = std::nan("");
                rec.delta = rec.gap = rec.mz_ground = nan;
                rec.tau_q_b = rec.tau_p_b = rec.tau_b = rec.mu2 = nan;
                rec.argmax_m = rec.argmax_n = nan;
                rec.branch = "error";
                rec.degeneracy_flag = 1;
                out[i] = rec;
            }
        }
    };
    if (spec.parallel == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < spec.parallel; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return out;
}

inline constexpr const char* kCsvHeader =
    "N,two_j,J_coupling,Gamma,Gamma_over_Gammac,beta,gamma_coupling,delta,"
    "gap,branch,mz_ground,tauQ_b,tauP_b,tau_b,mu2,argmax_m,argmax_n,"
    "degeneracy_flag";

inline std::string to_csv(const std::vector<SweepRecord>& records) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.n);
        out += ',';
        out += std::to_string(r.two_j);
        out += ',';
        out += format_double(r.coupling);
        out += ',';
        out += format_double(r.field);
        out += ',';
        out += format_double(r.field_over_critical);
        out += ',';
        out += r.beta;
        out += ',';
        out += format_double(r.gamma_coupling);
        out += ',';
        out += format_double(r.delta);
        out += ',';
        out += format_double(r.gap);
        out += ',';
        out += r.branch;
        out += ',';
        out += format_double(r.mz_ground);
        out += ',';
        out += format_double(r.tau_q_b);
        out += ',';
        out += format_double(r.tau_p_b);
        out += ',';
        out += format_double(r.tau_b);
        out += ',';
        out += format_double(r.mu2);
        out += ',';
        out += format_double(r.argmax_m);
        out += ',';
        out += format_double(r.argmax_n);
        out += ',';
        out += std::to_string(r.degeneracy_flag);
        out += '\n';
    }
    return out;
}

inline nlohmann::json record_to_json(const SweepRecord& r) {
    return nlohmann::json{{"N", r.n},
                          {"two_j", r.two_j},
                          {"J_coupling", r.coupling},
                          {"Gamma", r.field},
                          {"Gamma_over_Gammac", r.field_over_critical},
                          {"beta", r.beta},
                          {"gamma_coupling", r.gamma_coupling},
                          {"delta", r.delta},
                          {"gap", r.gap},
                          {"branch", r.branch},
                          {"mz_ground", r.mz_ground},
                          {"tauQ_b", r.tau_q_b},
                          {"tauP_b", r.tau_p_b},
                          {"tau_b", r.tau_b},
                          {"mu2", r.mu2},
                          {"argmax_m", r.argmax_m},
                          {"argmax_n", r.argmax_n},
                          {"degeneracy_flag", r.degeneracy_flag}};
}

inline SweepRecord record_from_json(const nlohmann::json& j) {
    SweepRecord r;
    r.n = j.at("N").get<int>();
    r.two_j = j.at("two_j").get<int>();
    r.coupling = j.at("J_coupling").get<double>();
    r.field = j.at("Gamma").get<double>();
    r.field_over_critical = j.at("Gamma_over_Gammac").get<double>();
    r.beta = j.at("beta").get<std::string>();
    r.gamma_coupling = j.at("gamma_coupling").get<double>();
    r.delta = j.at("delta").get<double>();
    r.gap = j.at("gap").get<double>();
    r.branch = j.at("branch").get<std::string>();
    r.mz_ground = j.at("mz_ground").get<double>();
    r.tau_q_b = j.at("tauQ_b").get<double>();
    r.tau_p_b = j.at("tauP_b").get<double>();
    r.tau_b = j.at("tau_b").get<double>();
    r.mu2 = j.at("mu2").get<double>();
    r.argmax_m = j.at("argmax_m").get<double>();
    r.argmax_n = j.at("argmax_n").get<double>();
    r.degeneracy_flag = j.at("degeneracy_flag").get<int>();
    return r;
}

inline nlohmann::json to_json_report(const std::vector<SweepRecord>& records,
                                     const nlohmann::json& config_echo) {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records) recs.push_back(record_to_json(r));
    return nlohmann::json{{"schema_version", kSchemaVersion},
                          {"tool_version", kToolVersion},
                          {"config", config_echo},
                          {"records", recs}};
}

struct ScalingFit {
    double slope;
    double intercept;
    int n_min;
    int n_max;
    double residual_rms; // in log-log space
    int points_used;
};

// Least-squares line through (log N, log value) restricted to
// [n_min, n_max]. Needs at least three positive points in range.
inline ScalingFit fit_scaling_exponent(const std::vector<std::pair<int, double>>& series,
                                       int n_min, int n_max) {
    if (n_min >= n_max)
        throw std::invalid_argument("fit_scaling_exponent: empty fit range");
    std::vector<double> xs, ys;
    for (const auto& [n, v] : series) {
        if (n < n_min || n > n_max) continue;
        if (!(v > 0.0))
            throw std::domain_error(
                "fit_scaling_exponent: values must be positive");
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(std::log(v));
    }
    const int m = static_cast<int>(xs.size());
    if (m < 3)
        throw std::invalid_argument("fit_scaling_exponent: need >= 3 points");

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < m; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = m * sxx - sx * sx;
    const double slope = (m * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / m;
    double rss = 0.0;
    for (int i = 0; i < m; ++i) {
        const double r = ys[i] - (slope * xs[i] + intercept);
        rss += r * r;
    }
    return {slope, intercept, n_min, n_max, std::sqrt(rss / m), m};
}

// ---------------------------------------------------------------------------
// Figure datasets. Size grids default to even N, roughly log-spaced; the
// exact sample points are a presentation choice, not physics.

inline std::vector<int> even_log_grid(int lo, int hi, int approx_points) {
    std::vector<int> out;
    const double step = std::log(static_cast<double>(hi) / lo) /
                        (approx_points - 1);
    int prev = 0;
    for (int i = 0; i < approx_points; ++i) {
        int n = static_cast<int>(std::lround(lo * std::exp(step * i)));
        n += n % 2; // force even
        if (n <= prev) n = prev + 2;
        out.push_back(n);
        prev = n;
    }
    return out;
}

struct FigureFile {
    std::string name;
    std::string csv;
};

// Fig-1 data: the full b*tau_{m,n} surface at N=100, j=50 for three fields
// and two temperatures; one file per (Gamma, beta) panel.
inline std::vector<FigureFile> figure1_datasets(double coupling = 1.0,
                                                double gamma_coupling = 0.5) {
    const int n = 100;
    const int two_j = 100;
    const double b = time_unit_b(gamma_coupling, coupling);
    const double gc = two_j * coupling / n;
    const double fields[3] = {2.0 * gc, gc, 0.5 * gc};
    const char* field_tag[3] = {"2.0", "1.0", "0.5"};
    const double betas[2] = {1.0, 10.0};

    std::vector<FigureFile> files;
    for (int fi = 0; fi < 3; ++fi) {
        for (double bj : betas) {
            const SectorParams s(n, two_j, coupling, fields[fi]);
            const auto g = sector_generator(s, Beta::finite(bj / coupling),
                                            gamma_coupling);
            std::string csv = "mz_m,mz_n,btau_mn\n";
            for (int a = 0; a < g.size; ++a)
                for (int c = 0; c < g.size; ++c) {
                    if (a == c) continue;
                    csv += format_double(s.mz_at(a));
                    csv += ',';
                    csv += format_double(s.mz_at(c));
                    csv += ',';
                    csv += format_double(b * decoherence_time(g, a, c));
                    csv += '\n';
                }
            char name[64];
            std::snprintf(name, sizeof name, "fig1_gamma%sGc_betaJ%g.csv",
                          field_tag[fi], bj);
            files.push_back({name, csv});
        }
    }
    return files;
}

// Fig-2 data: b*tau_{j,j-1} against even N for four temperatures and fields
// straddling the critical point, with the exact T = 0 value as the reference
// column and N mod 6 recorded so the three ferromagnetic subsequences can be
// separated.
inline std::vector<FigureFile> figure2_datasets(double coupling = 1.0,
                                                double gamma_coupling = 0.5) {
    const double betas[4] = {1.0, 10.0, 100.0, 1000.0};
    const double ratios[3] = {0.5, 1.0, 2.0};
    const auto grid = even_log_grid(10, 3200, 25);
    const double b = time_unit_b(gamma_coupling, coupling);

    std::vector<FigureFile> files;
    for (double ratio : ratios) {
        std::string csv =
            "N,N_mod_6,betaJ,Gamma_over_Gammac,btau_jjm1,btau_jjm1_zeroT\n";
        for (int n : grid) {
            const int two_j = n;
            const SectorParams s(n, two_j, coupling,
                                 ratio * two_j * coupling / n);
            const auto gz = sector_generator(s, Beta::zero_temperature(),
                                             gamma_coupling);
            const double ref =
                b * decoherence_time(gz, gz.size - 1, gz.size - 2);
            for (double bj : betas) {
                const auto g = sector_generator(
                    s, Beta::finite(bj / coupling), gamma_coupling);
                const double val =
                    b * decoherence_time(g, g.size - 1, g.size - 2);
                csv += std::to_string(n);
                csv += ',';
                csv += std::to_string(n % 6);
                csv += ',';
                csv += format_double(bj);
                csv += ',';
                csv += format_double(ratio);
                csv += ',';
                csv += format_double(val);
                csv += ',';
                csv += format_double(ref);
                csv += '\n';
            }
        }
        char name[64];
        std::snprintf(name, sizeof name, "fig2_gamma%gGc.csv", ratio);
        files.push_back({name, csv});
    }
    return files;
}

// Fig-3 data: b*tau^(P) = b/mu2 against even N, same temperature and field
// grids, T = 0 reference from the exact triangular diagonal.
inline std::vector<FigureFile> figure3_datasets(double coupling = 1.0,
                                                double gamma_coupling = 0.5) {
    const double betas[4] = {1.0, 10.0, 100.0, 1000.0};
    const double ratios[3] = {0.5, 1.0, 2.0};
    const auto grid = even_log_grid(10, 3200, 25);
    const double b = time_unit_b(gamma_coupling, coupling);

    std::vector<FigureFile> files;
    for (double ratio : ratios) {
        std::string csv = "N,N_mod_6,betaJ,Gamma_over_Gammac,btauP,btauP_zeroT\n";
        for (int n : grid) {
            const int two_j = n;
            const SectorParams s(n, two_j, coupling,
                                 ratio * two_j * coupling / n);
            const auto gz = sector_generator(s, Beta::zero_temperature(),
                                             gamma_coupling);
            const double ref = b / spectral_gap(gz);
            for (double bj : betas) {
                const auto g = sector_generator(
                    s, Beta::finite(bj / coupling), gamma_coupling);
                const double val = b / spectral_gap(g);
                csv += std::to_string(n);
                csv += ',';
                csv += std::to_string(n % 6);
                csv += ',';
                csv += format_double(bj);
                csv += ',';
                csv += format_double(ratio);
                csv += ',';
                csv += format_double(val);
                csv += ',';
                csv += format_double(ref);
                csv += '\n';
            }
        }
        char name[64];
        std::snprintf(name, sizeof name, "fig3_gamma%gGc.csv", ratio);
        files.push_back({name, csv});
    }
    return files;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_file: cannot open " + path);
    out << content;
    if (!out)
        throw std::runtime_error("write_file: short write to " + path);
}

} // namespace lmg

#endif
