#pragma once

// Truncated Taylor arithmetic in the four chart variables (x, y, z, t).
//
// A Jet stores the Taylor coefficients (derivative / alpha!) of a scalar
// quantity at a fixed base point, up to total degree 3.  Multiplication is a
// truncated Cauchy product, composition with elementary functions goes
// through the degree-3 Faa di Bruno expansion, so every partial derivative
// of a composite quantity comes out exact up to rounding.  Two jets combine
// only if their base points agree bitwise.

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "calabi/errors.hpp"

namespace calabi {

using Point4 = std::array<double, 4>;

inline constexpr int kJetOrder = 3;
inline constexpr int kNumVars = 4;
inline constexpr int kNumCoeffs = 35;  // multi-indices in 4 vars, degree <= 3

struct MultiIndex {
    std::array<std::uint8_t, kNumVars> e{};

    int total() const { return e[0] + e[1] + e[2] + e[3]; }
    bool operator==(const MultiIndex&) const = default;
};

namespace detail {

struct JetTables {
    std::array<MultiIndex, kNumCoeffs> index_of;  // flat position -> multi-index
    std::array<int, kNumCoeffs> degree_of;
    std::array<double, kNumCoeffs> factorial;  // alpha! = i! j! k! l!
    int flat[kJetOrder + 1][kJetOrder + 1][kJetOrder + 1][kJetOrder + 1];
    struct ProdTerm {
        std::uint8_t a, b, out;
    };
    std::vector<ProdTerm> products;  // every (a, b) with deg a + deg b <= 3

    JetTables() {
        for (auto& plane : flat)
            for (auto& row : plane)
                for (auto& col : row)
                    for (auto& cell : col) cell = -1;
        int pos = 0;
        for (int d = 0; d <= kJetOrder; ++d) {
            for (int i = 0; i <= d; ++i)
                for (int j = 0; j <= d - i; ++j)
                    for (int k = 0; k <= d - i - j; ++k) {
                        const int l = d - i - j - k;
                        index_of[pos] = MultiIndex{{std::uint8_t(i), std::uint8_t(j),
                                                    std::uint8_t(k), std::uint8_t(l)}};
                        degree_of[pos] = d;
                        flat[i][j][k][l] = pos;
                        double f = 1.0;
                        for (int v : {i, j, k, l})
                            for (int m = 2; m <= v; ++m) f *= m;
                        factorial[pos] = f;
                        ++pos;
                    }
        }
        for (int a = 0; a < kNumCoeffs; ++a)
            for (int b = 0; b < kNumCoeffs; ++b) {
                if (degree_of[a] + degree_of[b] > kJetOrder) continue;
                const MultiIndex& ma = index_of[a];
                const MultiIndex& mb = index_of[b];
                const int out = flat[ma.e[0] + mb.e[0]][ma.e[1] + mb.e[1]]
                                    [ma.e[2] + mb.e[2]][ma.e[3] + mb.e[3]];
                products.push_back({std::uint8_t(a), std::uint8_t(b), std::uint8_t(out)});
            }
    }

    static const JetTables& get() {
        static const JetTables tables;
        return tables;
    }
};

}  // namespace detail

inline int flat_index(const MultiIndex& m) {
    if (m.total() > kJetOrder)
        throw DomainError("multi-index exceeds jet order 3");
    return detail::JetTables::get().flat[m.e[0]][m.e[1]][m.e[2]][m.e[3]];
}

struct Jet {
    std::array<double, kNumCoeffs> c{};
    Point4 base{};
    int order = kJetOrder;  // highest trustworthy total degree

    double value() const { return c[0]; }

    double coeff(const MultiIndex& m) const { return c[flat_index(m)]; }

    // Partial derivative d^|m| f / dx^m at the base point.
    double derivative(const MultiIndex& m) const {
        const int idx = flat_index(m);
        return c[idx] * detail::JetTables::get().factorial[idx];
    }

    void truncate_above(int max_degree) {
        const auto& deg = detail::JetTables::get().degree_of;
        for (int i = 0; i < kNumCoeffs; ++i)
            if (deg[i] > max_degree) c[i] = 0.0;
    }
};

inline Jet jet_constant(double v, const Point4& base) {
    Jet j;
    j.base = base;
    j.c[0] = v;
    return j;
}

inline Jet jet_variable(int index, const Point4& base) {
    if (index < 0 || index >= kNumVars)
        throw DomainError("jet_variable: index must select one of x, y, z, t");
    Jet j;
    j.base = base;
    j.c[0] = base[std::size_t(index)];
    MultiIndex unit;
    unit.e[std::size_t(index)] = 1;
    j.c[std::size_t(flat_index(unit))] = 1.0;
    return j;
}

namespace detail {

inline void check_same_base(const Jet& a, const Jet& b) {
    if (a.base != b.base) {
        std::ostringstream os;
        os << "jet base points differ: (";
        for (int i = 0; i < 4; ++i) os << (i ? "," : "") << a.base[std::size_t(i)];
        os << ") vs (";
        for (int i = 0; i < 4; ++i) os << (i ? "," : "") << b.base[std::size_t(i)];
        os << ")";
        throw BasePointMismatch(os.str());
    }
}

}  // namespace detail

inline Jet operator+(const Jet& a, const Jet& b) {
    detail::check_same_base(a, b);
    Jet r = a;
    for (int i = 0; i < kNumCoeffs; ++i) r.c[i] += b.c[i];
    r.order = std::min(a.order, b.order);
    r.truncate_above(r.order);
    return r;
}

inline Jet operator-(const Jet& a) {
    Jet r = a;
    for (auto& v : r.c) v = -v;
    return r;
}

inline Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }

inline Jet operator*(const Jet& a, const Jet& b) {
    detail::check_same_base(a, b);
    Jet r;
    r.base = a.base;
    r.order = std::min(a.order, b.order);
    for (const auto& term : detail::JetTables::get().products)
        r.c[term.out] += a.c[term.a] * b.c[term.b];
    r.truncate_above(r.order);
    return r;
}

inline Jet operator+(const Jet& a, double s) {
    Jet r = a;
    r.c[0] += s;
    return r;
}
inline Jet operator+(double s, const Jet& a) { return a + s; }
inline Jet operator-(const Jet& a, double s) { return a + (-s); }
inline Jet operator-(double s, const Jet& a) { return (-a) + s; }
inline Jet operator*(const Jet& a, double s) {
    Jet r = a;
    for (auto& v : r.c) v *= s;
    return r;
}
inline Jet operator*(double s, const Jet& a) { return a * s; }

enum class Elem { Sin, Cos, Tan, Sinh, Cosh, Tanh, Coth, Exp, Ln, Sqrt, Recip };

inline const char* elem_name(Elem f) {
    switch (f) {
        case Elem::Sin: return "sin";
        case Elem::Cos: return "cos";
        case Elem::Tan: return "tan";
        case Elem::Sinh: return "sinh";
        case Elem::Cosh: return "cosh";
        case Elem::Tanh: return "tanh";
        case Elem::Coth: return "coth";
        case Elem::Exp: return "exp";
        case Elem::Ln: return "ln";
        case Elem::Sqrt: return "sqrt";
        case Elem::Recip: return "recip";
    }
    return "?";
}

namespace detail {

[[noreturn]] inline void domain_fail(Elem f, double v, const char* why) {
    std::ostringstream os;
    os << elem_name(f) << ": " << why << " (got " << v << ")";
    throw DomainError(os.str());
}

// Value and first three derivatives of an elementary function at v.
inline std::array<double, 4> elem_derivatives(Elem f, double v) {
    switch (f) {
        case Elem::Sin:
            return {std::sin(v), std::cos(v), -std::sin(v), -std::cos(v)};
        case Elem::Cos:
            return {std::cos(v), -std::sin(v), -std::cos(v), std::sin(v)};
        case Elem::Tan: {
            if (std::cos(v) == 0.0) domain_fail(f, v, "argument is a pole of tan");
            const double t = std::tan(v);
            const double s = 1.0 + t * t;
            return {t, s, 2.0 * t * s, (2.0 + 6.0 * t * t) * s};
        }
        case Elem::Sinh:
            return {std::sinh(v), std::cosh(v), std::sinh(v), std::cosh(v)};
        case Elem::Cosh:
            return {std::cosh(v), std::sinh(v), std::cosh(v), std::sinh(v)};
        case Elem::Tanh: {
            const double t = std::tanh(v);
            const double s = 1.0 - t * t;
            return {t, s, -2.0 * t * s, (6.0 * t * t - 2.0) * s};
        }
        case Elem::Coth: {
            if (std::sinh(v) == 0.0) domain_fail(f, v, "argument is a pole of coth");
            const double t = 1.0 / std::tanh(v);
            const double s = 1.0 - t * t;
            return {t, s, -2.0 * t * s, (6.0 * t * t - 2.0) * s};
        }
        case Elem::Exp: {
            const double e = std::exp(v);
            return {e, e, e, e};
        }
        case Elem::Ln: {
            if (!(v > 0.0)) domain_fail(f, v, "argument must be positive");
            const double r = 1.0 / v;
            return {std::log(v), r, -r * r, 2.0 * r * r * r};
        }
        case Elem::Sqrt: {
            if (!(v > 0.0)) domain_fail(f, v, "argument must be positive");
            const double s = std::sqrt(v);
            return {s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v)};
        }
        case Elem::Recip: {
            if (v == 0.0) domain_fail(f, v, "division by zero");
            const double r = 1.0 / v;
            return {r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r};
        }
    }
    throw DomainError("unknown elementary function");
}

}  // namespace detail

// Composition f(u) through order 3 (Faa di Bruno truncated at degree 3).
inline Jet jet_apply(Elem f, const Jet& u) {
    const auto d = detail::elem_derivatives(f, u.value());
    Jet w = u;
    w.c[0] = 0.0;
    const Jet w2 = w * w;
    const Jet w3 = w2 * w;
    Jet r = jet_constant(d[0], u.base);
    r.order = u.order;
    for (int i = 0; i < kNumCoeffs; ++i)
        r.c[i] += d[1] * w.c[i] + (d[2] / 2.0) * w2.c[i] + (d[3] / 6.0) * w3.c[i];
    r.truncate_above(r.order);
    return r;
}

inline Jet operator/(const Jet& a, const Jet& b) {
    return a * jet_apply(Elem::Recip, b);
}
inline Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }
inline Jet operator/(double s, const Jet& b) { return s * jet_apply(Elem::Recip, b); }

inline Jet sin(const Jet& u) { return jet_apply(Elem::Sin, u); }
inline Jet cos(const Jet& u) { return jet_apply(Elem::Cos, u); }
inline Jet tan(const Jet& u) { return jet_apply(Elem::Tan, u); }
inline Jet sinh(const Jet& u) { return jet_apply(Elem::Sinh, u); }
inline Jet cosh(const Jet& u) { return jet_apply(Elem::Cosh, u); }
inline Jet tanh(const Jet& u) { return jet_apply(Elem::Tanh, u); }
inline Jet coth(const Jet& u) { return jet_apply(Elem::Coth, u); }
inline Jet exp(const Jet& u) { return jet_apply(Elem::Exp, u); }
inline Jet log(const Jet& u) { return jet_apply(Elem::Ln, u); }
inline Jet sqrt(const Jet& u) { return jet_apply(Elem::Sqrt, u); }

inline Jet jet_pow(const Jet& u, int n) {
    if (n < 0) return jet_apply(Elem::Recip, jet_pow(u, -n));
    Jet r = jet_constant(1.0, u.base);
    r.order = u.order;
    Jet p = u;
    while (n > 0) {
        if (n & 1) r = r * p;
        n >>= 1;
        if (n) p = p * p;
    }
    return r;
}

// d/dx_dim as a jet one order lower.  Coefficients above the new order are
// zero, never stale data.
inline Jet jet_partial(const Jet& u, int dim) {
    if (dim < 0 || dim >= kNumVars)
        throw DomainError("jet_partial: dimension out of range");
    const auto& tables = detail::JetTables::get();
    Jet r;
    r.base = u.base;
    r.order = std::max(u.order - 1, 0);
    for (int i = 0; i < kNumCoeffs; ++i) {
        if (tables.degree_of[i] > r.order) continue;
        MultiIndex m = tables.index_of[i];
        const int up = m.e[std::size_t(dim)] + 1;
        m.e[std::size_t(dim)] = std::uint8_t(up);
        r.c[i] = double(up) * u.c[std::size_t(tables.flat[m.e[0]][m.e[1]][m.e[2]][m.e[3]])];
    }
    return r;
}

// (ln H)_xx + (ln H)_yy read straight off the degree-2 coefficients.
inline double laplacian_xy(const Jet& u) {
    if (u.order < 2)
        throw DomainError("laplacian_xy: jet carries no degree-2 coefficients");
    return 2.0 * u.c[std::size_t(flat_index(MultiIndex{{2, 0, 0, 0}}))] +
           2.0 * u.c[std::size_t(flat_index(MultiIndex{{0, 2, 0, 0}}))];
}

}  // namespace calabi
