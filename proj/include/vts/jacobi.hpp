#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace vts {

// Cyclic Jacobi eigen-decomposition for small symmetric matrices.
// Sweeps rotate away off-diagonal mass until it drops below `tol` times the
// Frobenius norm (capped at `max_sweeps`). The problems here are tiny (N <= 9)
// so this converges in a handful of sweeps to near machine precision.
template <std::size_t N>
struct SymmetricEigen {
    std::array<double, N> values{};                 // ascending
    std::array<std::array<double, N>, N> vectors{}; // vectors[k] = k-th eigenvector

    static SymmetricEigen solve(std::array<std::array<double, N>, N> a,
                                int max_sweeps = 100, double tol = 1e-12) {
        std::array<std::array<double, N>, N> v{};
        for (std::size_t i = 0; i < N; ++i) v[i][i] = 1.0;

        double norm = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) norm += a[i][j] * a[i][j];
        norm = std::sqrt(norm);
        if (norm == 0.0) norm = 1.0;

        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            double off = 0.0;
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = i + 1; j < N; ++j) off += a[i][j] * a[i][j];
            if (std::sqrt(off) < tol * norm) break;

            for (std::size_t p = 0; p < N; ++p) {
                for (std::size_t q = p + 1; q < N; ++q) {
                    if (std::abs(a[p][q]) < 1e-300) continue;
                    double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    double t = (theta >= 0 ? 1.0 : -1.0) /
                               (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    double c = 1.0 / std::sqrt(t * t + 1.0);
                    double s = t * c;

                    for (std::size_t k = 0; k < N; ++k) {
                        double akp = a[k][p], akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for (std::size_t k = 0; k < N; ++k) {
                        double apk = a[p][k], aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                    for (std::size_t k = 0; k < N; ++k) {
                        double vkp = v[k][p], vkq = v[k][q];
                        v[k][p] = c * vkp - s * vkq;
                        v[k][q] = s * vkp + c * vkq;
                    }
                }
            }
        }

        SymmetricEigen out;
        std::array<std::size_t, N> order{};
        for (std::size_t i = 0; i < N; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            return a[x][x] < a[y][y];
        });
        for (std::size_t k = 0; k < N; ++k) {
            out.values[k] = a[order[k]][order[k]];
            for (std::size_t i = 0; i < N; ++i) out.vectors[k][i] = v[i][order[k]];
        }
        return out;
    }
};

}  // namespace vts
