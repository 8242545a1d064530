#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "manybody/matrix.hpp"

namespace manybody {

/// Eigenvalues ascending; eigenvector columns match them, U Λ Uᵀ = input.
struct EigenDecomposition {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;  // column m is the eigenvector of eigenvalues[m]

    std::size_t dim() const { return eigenvalues.size(); }

    double max_abs_eigenvalue() const {
        double m = 0.0;
        for (double v : eigenvalues) m = std::max(m, std::abs(v));
        return m;
    }
};

/// Cyclic Jacobi for dense symmetric matrices. Fixed sweep order (row-major
/// over the upper triangle) so results are reproducible bit-for-bit; intended
/// for the small matrices this project produces (motifs and desk-scale
/// Laplacians, <= a few hundred rows).
inline EigenDecomposition eigh(const Matrix& m, double symmetry_tol = 1e-10) {
    const std::size_t n = m.rows();
    if (m.cols() != n) throw std::invalid_argument("eigh: matrix not square");
    double scale = std::max(1.0, m.max_abs());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(m(i, j) - m(j, i)) > symmetry_tol * scale)
                throw std::invalid_argument("eigh: matrix not symmetric");

    Matrix a = m;
    Matrix v = Matrix::identity(n);
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off <= 1e-30 * scale * scale) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double app = a(p, p), aqq = a(q, q);
                const double theta = 0.5 * (aqq - app) / apq;
                double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return diag[x] < diag[y]; });

    EigenDecomposition d;
    d.eigenvalues.resize(n);
    d.eigenvectors = Matrix(n, n);
    for (std::size_t col = 0; col < n; ++col) {
        d.eigenvalues[col] = diag[order[col]];
        for (std::size_t row = 0; row < n; ++row) d.eigenvectors(row, col) = v(row, order[col]);
    }
    return d;
}

}  // namespace manybody
