#ifndef LMG_EIGEN_TRIDIAG_HPP
#define LMG_EIGEN_TRIDIAG_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lmg {

// Sturm sequence count: number of eigenvalues of the symmetric tridiagonal
// (d, e) strictly below x. e[k] couples k and k+1. The classic negative-pivot
// count of the LDL^T recursion, with underflow guarded pivots.
inline int sturm_count(const std::vector<double>& d, const std::vector<double>& e,
                       double x) {
    const std::size_t n = d.size();
    const double tiny = std::numeric_limits<double>::min();
    int count = 0;
    double q = d[0] - x;
    if (q < 0.0) ++count;
    for (std::size_t k = 1; k < n; ++k) {
        if (q == 0.0) q = tiny;
        q = d[k] - x - e[k - 1] * e[k - 1] / q;
        if (q < 0.0) ++count;
    }
    return count;
}

// k-th smallest eigenvalue (k is 0-based) by bisection on the Sturm count.
// Converges to machine-relative width of the Gershgorin enclosure.
inline double sturm_eigenvalue(const std::vector<double>& d,
                               const std::vector<double>& e, int k) {
    const std::size_t n = d.size();
    if (e.size() + 1 != n)
        throw std::invalid_argument("sturm_eigenvalue: off-diagonal length must be n-1");
    if (k < 0 || static_cast<std::size_t>(k) >= n)
        throw std::invalid_argument("sturm_eigenvalue: index out of range");

    // Gershgorin bounds
    double lo = d[0], hi = d[0];
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(e[i - 1]);
        if (i + 1 < n) r += std::abs(e[i]);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    // converge relative to the eigenvalue itself (not the Gershgorin span),
    // so small relaxation rates keep full relative accuracy; the iteration
    // cap bounds the work when the bracket straddles zero
    const double eps = std::numeric_limits<double>::epsilon();
    for (int it = 0;
         it < 200 && hi - lo > 4.0 * eps * std::max(std::abs(lo), std::abs(hi));
         ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count(d, e, mid) > k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

// m smallest eigenvalues in ascending order.
inline std::vector<double> sturm_smallest(const std::vector<double>& d,
                                          const std::vector<double>& e, int m) {
    std::vector<double> lam(m);
    for (int k = 0; k < m; ++k) lam[k] = sturm_eigenvalue(d, e, k);
    return lam;
}

// Full eigendecomposition of a symmetric tridiagonal matrix by the QL
// algorithm with implicit shifts. d and e are overwritten: d receives the
// eigenvalues (unsorted), e is destroyed. If z is non-null it must hold an
// n x n row-major identity on entry and receives the eigenvectors in its
// COLUMNS: z[i*n + k] is component i of eigenvector k.
inline void tqli(std::vector<double>& d, std::vector<double>& e,
                 std::vector<double>* z = nullptr) {
    const std::size_t n = d.size();
    if (n == 0) return;
    if (e.size() + 1 != n)
        throw std::invalid_argument("tqli: off-diagonal length must be n-1");
    e.push_back(0.0);

    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd)
                    break;
            }
            if (m != l) {
                if (++iter == 50)
                    throw std::runtime_error("tqli: too many iterations");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t i = m; i-- > l;) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    if (z) {
                        for (std::size_t row = 0; row < n; ++row) {
                            f = (*z)[row * n + i + 1];
                            (*z)[row * n + i + 1] = s * (*z)[row * n + i] + c * f;
                            (*z)[row * n + i] = c * (*z)[row * n + i] - s * f;
                        }
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    e.pop_back();
}

// Convenience: sorted eigendecomposition. Returns eigenvalues ascending and,
// via vecs (row-major, columns = eigenvectors), the matching vectors.
inline std::vector<double> tridiag_eigensystem(std::vector<double> d,
                                               std::vector<double> e,
                                               std::vector<double>& vecs) {
    const std::size_t n = d.size();
    vecs.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) vecs[i * n + i] = 1.0;
    tqli(d, e, &vecs);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    std::vector<double> lam(n);
    std::vector<double> sorted(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        lam[k] = d[order[k]];
        for (std::size_t i = 0; i < n; ++i)
            sorted[i * n + k] = vecs[i * n + order[k]];
    }
    vecs.swap(sorted);
    return lam;
}

} // namespace lmg

#endif
