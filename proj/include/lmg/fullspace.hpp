#ifndef LMG_FULLSPACE_HPP
#define LMG_FULLSPACE_HPP

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmg/beta.hpp"
#include "lmg/eigen_dense.hpp"
#include "lmg/planck.hpp"

namespace lmg {

constexpr int kFullSpaceCap = 12; // dense 4096^2 doubles is the desk ceiling

using Vec3 = std::array<double, 3>;

// Exact small-N laboratory: N spin-1/2 sites on the full 2^N product basis,
// H = -(J/N)(Jx^2 + gamma_y Jy^2) - Gamma Jz with J_h = (1/2) sum_i sigma_i^h.
struct FullSpaceModel {
    int n_spins;
    double coupling;   // J > 0
    double field;      // Gamma
    double gamma_y;    // anisotropy in [0, 1]
    std::vector<Vec3> positions; // optional, needed for geometry-aware rates

    FullSpaceModel(int n, double j_coupling, double gamma_field, double gy)
        : n_spins(n), coupling(j_coupling), field(gamma_field), gamma_y(gy) {
        if (n < 2)
            throw std::domain_error("FullSpaceModel: N must be >= 2");
        if (n > kFullSpaceCap)
            throw std::length_error("FullSpaceModel: N exceeds the dense cap");
        if (gy < 0.0 || gy > 1.0)
            throw std::domain_error("FullSpaceModel: gamma_y must lie in [0, 1]");
        if (!(j_coupling > 0.0))
            throw std::domain_error("FullSpaceModel: coupling must be positive");
    }

    std::size_t dim() const { return std::size_t{1} << n_spins; }
};

// sigma_i^z eigenvalue of basis state b at site i: bit clear = +1 (up).
inline int eta(std::uint32_t b, int i) { return (b >> i) & 1u ? -1 : 1; }

// H in the product basis. Flipping the pair (i, j) picks up
// (1 - gamma_y eta_i eta_j) from sigma^x sigma^x + gamma_y sigma^y sigma^y;
// the i = j terms are the constant N(1 + gamma_y)/4 kept here so that the
// gamma_y = 1 spectrum matches -J(j(j+1) - mz^2)/N - Gamma mz level by level.
inline std::vector<double> build_hamiltonian(const FullSpaceModel& model) {
    const std::size_t dim = model.dim();
    const int n = model.n_spins;
    std::vector<double> h(dim * dim, 0.0);
    for (std::uint32_t b = 0; b < dim; ++b) {
        double mz = 0.0;
        for (int i = 0; i < n; ++i) mz += 0.5 * eta(b, i);
        h[b * dim + b] = -model.coupling / n * 0.25 * n * (1.0 + model.gamma_y) -
                         model.field * mz;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const std::uint32_t flipped = b ^ (1u << i) ^ (1u << j);
                const double w = 1.0 - model.gamma_y * eta(b, i) * eta(b, j);
                // factor 1/4 from the two spin-1/2 operators, times 2 for the
                // (i,j) + (j,i) ordered pairs
                h[flipped * dim + b] += -model.coupling / n * 0.5 * w;
            }
        }
    }
    return h;
}

// J^2 = Jx^2 + Jy^2 + Jz^2 in the product basis.
inline std::vector<double> build_j_squared(int n_spins) {
    const std::size_t dim = std::size_t{1} << n_spins;
    std::vector<double> m(dim * dim, 0.0);
    for (std::uint32_t b = 0; b < dim; ++b) {
        double mz = 0.0;
        for (int i = 0; i < n_spins; ++i) mz += 0.5 * eta(b, i);
        m[b * dim + b] = mz * mz + 0.5 * n_spins;
        for (int i = 0; i < n_spins; ++i) {
            for (int j = i + 1; j < n_spins; ++j) {
                const std::uint32_t flipped = b ^ (1u << i) ^ (1u << j);
                m[flipped * dim + b] += 0.5 * (1.0 - eta(b, i) * eta(b, j));
            }
        }
    }
    return m;
}

// Parity prod_i sigma_i^z: diagonal, (-1)^(number of down spins).
inline std::vector<double> parity_diagonal(int n_spins) {
    const std::size_t dim = std::size_t{1} << n_spins;
    std::vector<double> p(dim);
    for (std::uint32_t b = 0; b < dim; ++b)
        p[b] = (std::popcount(b) % 2 == 0) ? 1.0 : -1.0;
    return p;
}

struct LabeledEigensystem {
    std::size_t dim;
    std::vector<double> energy;   // ascending
    std::vector<double> vecs;     // row-major, columns are eigenvectors
    std::vector<double> j_label;  // per state, on the N-grid
    std::vector<int> parity;      // +1 / -1
    std::vector<int> cluster;     // degenerate-energy cluster id per state
};

namespace detail {

// Rotate the columns [first, last) of vecs so that they diagonalize the
// symmetric operator op restricted to their span; returns the eigenvalues of
// the restriction in the new column order.
inline std::vector<double> rotate_to_diagonalize(std::vector<double>& vecs,
                                                 std::size_t dim,
                                                 std::size_t first,
                                                 std::size_t last,
                                                 const std::vector<double>& op) {
    const std::size_t k = last - first;
    // op restricted: r = V^T op V over the cluster columns
    std::vector<double> opv(dim * k, 0.0);
    for (std::size_t row = 0; row < dim; ++row)
        for (std::size_t col = 0; col < dim; ++col) {
            const double o = op[row * dim + col];
            if (o == 0.0) continue;
            for (std::size_t c = 0; c < k; ++c)
                opv[row * k + c] += o * vecs[col * dim + first + c];
        }
    std::vector<double> r(k * k, 0.0);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (std::size_t row = 0; row < dim; ++row)
                s += vecs[row * dim + first + a] * opv[row * k + c];
            r[a * k + c] = s;
        }
    std::vector<double> rot;
    auto lam = jacobi_eigensystem(r, k, &rot);
    // new columns = old columns * rot
    std::vector<double> fresh(dim * k, 0.0);
    for (std::size_t row = 0; row < dim; ++row)
        for (std::size_t a = 0; a < k; ++a) {
            double s = 0.0;
            for (std::size_t c = 0; c < k; ++c)
                s += vecs[row * dim + first + c] * rot[c * k + a];
            fresh[row * k + a] = s;
        }
    for (std::size_t row = 0; row < dim; ++row)
        for (std::size_t a = 0; a < k; ++a)
            vecs[row * dim + first + a] = fresh[row * k + a];
    return lam;
}

} // namespace detail

// Full eigendecomposition of H with simultaneous (E, j, parity) labels.
// Within each degenerate energy cluster the eigenvectors are rotated to
// diagonalize J^2, then parity inside each J^2 sub-cluster (the nesting order
// H -> J^2 -> parity is fixed).
inline LabeledEigensystem diagonalize_labeled(const FullSpaceModel& model) {
    const std::size_t dim = model.dim();
    auto h = build_hamiltonian(model);
    const auto j2 = build_j_squared(model.n_spins);
    const auto par = parity_diagonal(model.n_spins);

    LabeledEigensystem sys;
    sys.dim = dim;
    sys.energy = jacobi_eigensystem(h, dim, &sys.vecs);
    sys.j_label.assign(dim, 0.0);
    sys.parity.assign(dim, 0);
    sys.cluster.assign(dim, 0);

    const double spread =
        std::max(sys.energy.back() - sys.energy.front(), 1e-300);

    // dense diagonal parity as an operator for the nested rotation
    std::vector<double> par_op(dim * dim, 0.0);
    for (std::size_t b = 0; b < dim; ++b) par_op[b * dim + b] = par[b];

    std::size_t first = 0;
    int cluster_id = 0;
    while (first < dim) {
        std::size_t last = first + 1;
        while (last < dim &&
               sys.energy[last] - sys.energy[last - 1] < 1e-8 * spread)
            ++last;
        for (std::size_t k = first; k < last; ++k) sys.cluster[k] = cluster_id;

        auto j2_vals =
            detail::rotate_to_diagonalize(sys.vecs, dim, first, last, j2);
        for (std::size_t k = first; k < last; ++k) {
            const double lam = j2_vals[k - first];
            const double j = 0.5 * (std::sqrt(1.0 + 4.0 * lam) - 1.0);
            const double grid = 0.5 * std::round(2.0 * j);
            if (std::abs(j - grid) > 1e-4)
                throw std::runtime_error(
                    "diagonalize_labeled: j label off the grid in cluster " +
                    std::to_string(cluster_id));
            sys.j_label[k] = grid;
        }
        // parity sub-clusters share the same j label
        std::size_t sub = first;
        while (sub < last) {
            std::size_t sub_end = sub + 1;
            while (sub_end < last &&
                   sys.j_label[sub_end] == sys.j_label[sub])
                ++sub_end;
            auto p_vals = detail::rotate_to_diagonalize(sys.vecs, dim, sub,
                                                        sub_end, par_op);
            for (std::size_t k = sub; k < sub_end; ++k) {
                const double p = p_vals[k - sub];
                if (std::abs(std::abs(p) - 1.0) > 1e-8)
                    throw std::runtime_error(
                        "diagonalize_labeled: parity label not +-1 in cluster " +
                        std::to_string(cluster_id));
                sys.parity[k] = (p > 0.0) ? 1 : -1;
            }
            sub = sub_end;
        }
        first = last;
        ++cluster_id;
    }
    return sys;
}

namespace detail {

// Collective matrix elements: X = sum_i sigma_i^x, K with sum_i sigma_i^y
// = i K (K real antisymmetric in the product basis), Z = sum_i sigma_i^z.
// Returns the element tables in the eigenbasis (row-major dim x dim).
struct CollectiveElements {
    std::vector<double> x, k, z;
};

inline CollectiveElements collective_elements(const LabeledEigensystem& sys,
                                              int n_spins) {
    const std::size_t dim = sys.dim;
    CollectiveElements out;
    out.x.assign(dim * dim, 0.0);
    out.k.assign(dim * dim, 0.0);
    out.z.assign(dim * dim, 0.0);

    // apply the operators to every eigenvector, then contract
    std::vector<double> xv(dim * dim, 0.0), kv(dim * dim, 0.0),
        zv(dim * dim, 0.0);
    for (std::size_t col = 0; col < dim; ++col) {
        for (std::uint32_t b = 0; b < dim; ++b) {
            const double v = sys.vecs[b * dim + col];
            if (v == 0.0) continue;
            double mz2 = 0.0;
            for (int i = 0; i < n_spins; ++i) {
                const std::uint32_t f = b ^ (1u << i);
                xv[f * dim + col] += v;                // sigma^x flips
                kv[f * dim + col] += eta(b, i) * v;    // sigma^y = i K
                mz2 += eta(b, i);
            }
            zv[b * dim + col] += mz2 * v;
        }
    }
    for (std::size_t row = 0; row < dim; ++row)
        for (std::size_t col = 0; col < dim; ++col) {
            double sx = 0.0, sk = 0.0, sz = 0.0;
            for (std::size_t b = 0; b < dim; ++b) {
                const double u = sys.vecs[b * dim + row];
                sx += u * xv[b * dim + col];
                sk += u * kv[b * dim + col];
                sz += u * zv[b * dim + col];
            }
            out.x[row * dim + col] = sx;
            out.k[row * dim + col] = sk;
            out.z[row * dim + col] = sz;
        }
    return out;
}

// Per-site element <n| sigma_i^h |m> as a complex number (y elements are
// purely imaginary for real eigenvectors).
inline std::complex<double> site_element(const LabeledEigensystem& sys,
                                         int site, int axis, std::size_t n,
                                         std::size_t m) {
    const std::size_t dim = sys.dim;
    double acc = 0.0;
    if (axis == 2) { // z, diagonal
        for (std::uint32_t b = 0; b < dim; ++b)
            acc += eta(b, site) * sys.vecs[b * dim + n] * sys.vecs[b * dim + m];
        return {acc, 0.0};
    }
    for (std::uint32_t b = 0; b < dim; ++b) {
        const std::uint32_t f = b ^ (1u << site);
        const double v = sys.vecs[b * dim + m];
        if (axis == 0)
            acc += sys.vecs[f * dim + n] * v;
        else
            acc += eta(b, site) * sys.vecs[f * dim + n] * v;
    }
    if (axis == 0) return {acc, 0.0};
    return {0.0, acc}; // sigma^y = i K
}

} // namespace detail

// D_{n,m} = gamma sum_h |<n| sum_i sigma_i^h |m>|^2 (long-wavelength limit,
// all sites radiate in phase). Symmetric, zero across different j labels.
inline std::vector<double> coherent_dipoles(const LabeledEigensystem& sys,
                                            int n_spins, double gamma) {
    const std::size_t dim = sys.dim;
    const auto el = detail::collective_elements(sys, n_spins);
    std::vector<double> d(dim * dim, 0.0);
    for (std::size_t n = 0; n < dim; ++n)
        for (std::size_t m = 0; m < dim; ++m) {
            if (n == m) continue; // diagonal carries no transition
            const double x = el.x[n * dim + m];
            const double k = el.k[n * dim + m];
            const double z = el.z[n * dim + m];
            d[n * dim + m] = gamma * (x * x + k * k + z * z);
        }
    return d;
}

// D_{n,m} = gamma sum_i sum_h |<n| sigma_i^h |m>|^2 (sites radiate
// independently). Connects different j sectors.
inline std::vector<double> incoherent_dipoles(const LabeledEigensystem& sys,
                                              int n_spins, double gamma) {
    const std::size_t dim = sys.dim;
    std::vector<double> d(dim * dim, 0.0);
    for (std::size_t n = 0; n < dim; ++n)
        for (std::size_t m = 0; m < dim; ++m) {
            if (n == m) continue;
            double s = 0.0;
            for (int i = 0; i < n_spins; ++i)
                for (int h = 0; h < 3; ++h)
                    s += std::norm(detail::site_element(sys, i, h, n, m));
            d[n * dim + m] = gamma * s;
        }
    return d;
}

using Mat3 = std::array<std::array<double, 3>, 3>;

// Angular tensor Q^{i,j}(omega) = Int dOmega e^{i u.(r_i - r_j) omega/c}
// (delta_hl - u_h u_l). Gauss-Legendre in cos(theta) crossed with a uniform
// phi grid, order doubled until two successive evaluations agree to 1e-9.
// The imaginary part cancels by u -> -u symmetry and is asserted small.
inline Mat3 q_tensor(const Vec3& ri, const Vec3& rj, double omega, double c) {
    if (omega < 0.0 || !(c > 0.0))
        throw std::domain_error("q_tensor: omega must be >= 0 and c positive");
    const double kx = (ri[0] - rj[0]) * omega / c;
    const double ky = (ri[1] - rj[1]) * omega / c;
    const double kz = (ri[2] - rj[2]) * omega / c;

    auto evaluate = [&](int order) {
        // Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration
        std::vector<double> node(order), weight(order);
        for (int i = 0; i < order; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= order; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 -
                                       (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = order * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            node[i] = x;
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 =
                    ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = order * (x * p1 - p0) / (x * x - 1.0);
            weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        const int nphi = 2 * order;
        std::array<std::array<std::complex<double>, 3>, 3> q{};
        for (int a = 0; a < order; ++a) {
            const double ct = node[a];
            const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
            for (int b = 0; b < nphi; ++b) {
                const double phi = 2.0 * M_PI * b / nphi;
                const double u[3] = {st * std::cos(phi), st * std::sin(phi),
                                     ct};
                const std::complex<double> phase =
                    std::exp(std::complex<double>(
                        0.0, u[0] * kx + u[1] * ky + u[2] * kz));
                const double w = weight[a] * 2.0 * M_PI / nphi;
                for (int h = 0; h < 3; ++h)
                    for (int l = 0; l < 3; ++l)
                        q[h][l] += w * phase *
                                   ((h == l ? 1.0 : 0.0) - u[h] * u[l]);
            }
        }
        return q;
    };

    // the integrand oscillates through ~|k.r| radians across the sphere, so
    // the starting order must track the phase or far separations never converge
    const double kr = std::sqrt(kx * kx + ky * ky + kz * kz);
    int order = std::max(8, static_cast<int>(std::lround(kr)) + 8);
    auto prev = evaluate(order);
    for (int doubling = 0; doubling < 4; ++doubling) {
        order *= 2;
        auto next = evaluate(order);
        double delta = 0.0;
        for (int h = 0; h < 3; ++h)
            for (int l = 0; l < 3; ++l)
                delta = std::max(delta, std::abs(next[h][l] - prev[h][l]));
        if (delta < 1e-9) {
            Mat3 out{};
            for (int h = 0; h < 3; ++h)
                for (int l = 0; l < 3; ++l) {
                    if (std::abs(next[h][l].imag()) > 1e-10)
                        throw std::runtime_error(
                            "q_tensor: imaginary residue above tolerance");
                    out[h][l] = next[h][l].real();
                }
            return out;
        }
        prev = next;
    }
    throw std::runtime_error("q_tensor: quadrature did not converge");
}

// Geometry-resolved dipole table
//   G_{n,m} = sum_{i,j,h,l} Q^{i,j;h,l}(omega_nm) <n|s_i^h|m> conj(<n|s_j^l|m>),
// the orientation sum of the general transition probability with the overall
// Planck/prefactor split off (rates are defined up to a constant here, so
// only ratios and the coherent/incoherent reductions are meaningful).
// Coincident positions give (8 pi / 3) x (coherent D / gamma); separations
// with omega r / c >> 1 suppress the i != j cross terms toward the
// incoherent table.
inline std::vector<double> general_dipole_table(const LabeledEigensystem& sys,
                                                const FullSpaceModel& model,
                                                double c = 1.0) {
    const std::size_t dim = sys.dim;
    const int ns = model.n_spins;
    if (static_cast<int>(model.positions.size()) != ns)
        throw std::domain_error("general_dipole_table: positions missing");

    // per-site elements for every (site, axis): dim x dim complex tables
    std::vector<std::vector<std::complex<double>>> el(
        ns * 3, std::vector<std::complex<double>>(dim * dim));
    for (int i = 0; i < ns; ++i)
        for (int h = 0; h < 3; ++h)
            for (std::size_t n = 0; n < dim; ++n)
                for (std::size_t m = 0; m < dim; ++m)
                    el[i * 3 + h][n * dim + m] =
                        detail::site_element(sys, i, h, n, m);

    // Q cache: identical separations and frequencies recur across pairs
    std::map<std::tuple<int, int, long long>, Mat3> cache;
    auto q_of = [&](int i, int j, double omega) -> const Mat3& {
        const long long key =
            static_cast<long long>(std::llround(omega * 1e12));
        auto [it, fresh] = cache.try_emplace({i, j, key});
        if (fresh)
            it->second = q_tensor(model.positions[i], model.positions[j],
                                  omega, c);
        return it->second;
    };

    std::vector<double> g(dim * dim, 0.0);
    for (std::size_t n = 0; n < dim; ++n)
        for (std::size_t m = 0; m < dim; ++m) {
            if (n == m) continue;
            const double omega = std::abs(sys.energy[n] - sys.energy[m]);
            std::complex<double> acc = 0.0;
            for (int i = 0; i < ns; ++i)
                for (int j = 0; j < ns; ++j) {
                    const Mat3& q = q_of(i, j, omega);
                    for (int h = 0; h < 3; ++h)
                        for (int l = 0; l < 3; ++l) {
                            if (q[h][l] == 0.0) continue;
                            acc += q[h][l] * el[i * 3 + h][n * dim + m] *
                                   std::conj(el[j * 3 + l][n * dim + m]);
                        }
                }
            if (std::abs(acc.imag()) > 1e-8 * (std::abs(acc.real()) + 1.0))
                throw std::runtime_error(
                    "general_dipole_table: imaginary residue");
            g[n * dim + m] = acc.real();
        }
    return g;
}

// Built-in geometries for the lab.
inline std::vector<Vec3> positions_coincident(int n) {
    return std::vector<Vec3>(n, Vec3{0.0, 0.0, 0.0});
}

inline std::vector<Vec3> positions_chain(int n, double spacing) {
    if (!(spacing > 0.0))
        throw std::domain_error("positions_chain: spacing must be positive");
    std::vector<Vec3> r(n);
    for (int i = 0; i < n; ++i) r[i] = {i * spacing, 0.0, 0.0};
    return r;
}

inline std::vector<Vec3> positions_cube_random(int n, double side,
                                               std::uint64_t seed) {
    if (!(side > 0.0))
        throw std::domain_error("positions_cube_random: side must be positive");
    // splitmix64: deterministic across platforms, unlike distributions
    auto next = [state = seed]() mutable {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z = z ^ (z >> 31);
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    };
    std::vector<Vec3> r(n);
    for (int i = 0; i < n; ++i) r[i] = {next() * side, next() * side,
                                        next() * side};
    return r;
}

inline double max_pair_distance(const std::vector<Vec3>& r) {
    double best = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = i + 1; j < r.size(); ++j) {
            const double d = std::hypot(r[i][0] - r[j][0], r[i][1] - r[j][1],
                                        r[i][2] - r[j][2]);
            best = std::max(best, d);
        }
    return best;
}

inline double min_pair_distance(const std::vector<Vec3>& r) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = i + 1; j < r.size(); ++j) {
            const double d = std::hypot(r[i][0] - r[j][0], r[i][1] - r[j][1],
                                        r[i][2] - r[j][2]);
            best = std::min(best, d);
        }
    return best;
}

} // namespace lmg

#endif
