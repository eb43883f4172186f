#pragma once

// 4x4 matrices of jets and their exact truncated inverse (Gauss-Jordan with
// value-level partial pivoting).

#include <array>
#include <cmath>

#include "calabi/jet.hpp"

namespace calabi {

using JetVec4 = std::array<Jet, 4>;
using Mat4Jet = std::array<JetVec4, 4>;

inline Mat4Jet zero_mat4(const Point4& base) {
    Mat4Jet m;
    for (auto& row : m)
        for (auto& e : row) e = jet_constant(0.0, base);
    return m;
}

inline double det4_value(const Mat4Jet& m) {
    double a[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a[i][j] = m[std::size_t(i)][std::size_t(j)].value();
    double det = 1.0;
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (a[pivot][col] == 0.0) return 0.0;
        if (pivot != col) {
            std::swap(a[pivot], a[col]);
            det = -det;
        }
        det *= a[col][col];
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
        }
    }
    return det;
}

template <class SingularError>
inline Mat4Jet invert4(const Mat4Jet& m, const char* what, double pivot_min = 1e-13) {
    const Point4 base = m[0][0].base;
    Mat4Jet a = m;
    Mat4Jet inv = zero_mat4(base);
    for (int i = 0; i < 4; ++i) inv[std::size_t(i)][std::size_t(i)] = jet_constant(1.0, base);

    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[std::size_t(r)][std::size_t(col)].value()) >
                std::abs(a[std::size_t(pivot)][std::size_t(col)].value()))
                pivot = r;
        if (std::abs(a[std::size_t(pivot)][std::size_t(col)].value()) < pivot_min)
            throw SingularError(what);
        if (pivot != col) {
            std::swap(a[std::size_t(pivot)], a[std::size_t(col)]);
            std::swap(inv[std::size_t(pivot)], inv[std::size_t(col)]);
        }
        const Jet scale = jet_apply(Elem::Recip, a[std::size_t(col)][std::size_t(col)]);
        for (int c = 0; c < 4; ++c) {
            a[std::size_t(col)][std::size_t(c)] = a[std::size_t(col)][std::size_t(c)] * scale;
            inv[std::size_t(col)][std::size_t(c)] = inv[std::size_t(col)][std::size_t(c)] * scale;
        }
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const Jet f = a[std::size_t(r)][std::size_t(col)];
            if (f.value() == 0.0) {
                bool all_zero = true;
                for (double v : f.c)
                    if (v != 0.0) all_zero = false;
                if (all_zero) continue;
            }
            for (int c = 0; c < 4; ++c) {
                a[std::size_t(r)][std::size_t(c)] =
                    a[std::size_t(r)][std::size_t(c)] - f * a[std::size_t(col)][std::size_t(c)];
                inv[std::size_t(r)][std::size_t(c)] =
                    inv[std::size_t(r)][std::size_t(c)] - f * inv[std::size_t(col)][std::size_t(c)];
            }
        }
    }
    return inv;
}

}  // namespace calabi
