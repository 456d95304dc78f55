#ifndef LMG_EIGEN_DENSE_HPP
#define LMG_EIGEN_DENSE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lmg {

// Cyclic Jacobi eigensolver for a real symmetric matrix (row-major n x n).
// a is overwritten. Eigenvalues return ascending; if vecs is non-null it
// receives the matching eigenvectors in its COLUMNS (vecs[i*n + k] is
// component i of eigenvector k). O(n^3) per sweep, fine for the dimensions
// reached here (the full-space basis is capped well below 2^13 states).
inline std::vector<double> jacobi_eigensystem(std::vector<double>& a,
                                              std::size_t n,
                                              std::vector<double>* vecs = nullptr) {
    if (a.size() != n * n)
        throw std::invalid_argument("jacobi_eigensystem: shape mismatch");
    if (vecs) {
        vecs->assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) (*vecs)[i * n + i] = 1.0;
    }

    const double eps = std::numeric_limits<double>::epsilon();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0, diag = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            diag += std::abs(a[p * n + p]);
            for (std::size_t q = p + 1; q < n; ++q) off += std::abs(a[p * n + q]);
        }
        if (off <= eps * std::max(diag, 1.0)) break;
        if (sweep == 99)
            throw std::runtime_error("jacobi_eigensystem: no convergence in 100 sweeps");

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = 0.5 * (aqq - app) / apq;
                const double t = std::copysign(
                    1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0)), theta);
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = a[i * n + p];
                    const double aiq = a[i * n + q];
                    a[i * n + p] = aip - s * (aiq + tau * aip);
                    a[i * n + q] = aiq + s * (aip - tau * aiq);
                    a[p * n + i] = a[i * n + p];
                    a[q * n + i] = a[i * n + q];
                }
                if (vecs) {
                    for (std::size_t i = 0; i < n; ++i) {
                        const double vip = (*vecs)[i * n + p];
                        const double viq = (*vecs)[i * n + q];
                        (*vecs)[i * n + p] = vip - s * (viq + tau * vip);
                        (*vecs)[i * n + q] = viq + s * (vip - tau * viq);
                    }
                }
            }
        }
    }

    std::vector<double> lam(n);
    for (std::size_t i = 0; i < n; ++i) lam[i] = a[i * n + i];

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return lam[x] < lam[y]; });
    std::vector<double> sorted_lam(n);
    for (std::size_t k = 0; k < n; ++k) sorted_lam[k] = lam[order[k]];
    if (vecs) {
        std::vector<double> sorted(n * n);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                sorted[i * n + k] = (*vecs)[i * n + order[k]];
        vecs->swap(sorted);
    }
    return sorted_lam;
}

} // namespace lmg

#endif
