#pragma once

// The four generalized-Calabi-type metric families on U x N, built from a
// surface pair (h, H) and the chart coordinates (x, y, z, t):
//
//   coframe   theta1 = f dx, theta2 = f dy (f = warp(z) h), plus the
//             family-specific theta3, theta4
//   frame     E1..E4 dual to the coframe, E4 = d/dz, E3 = (1/beta) d/dt
//   alpha     the Lee-form profile: -2/z, 2a tan az, -2a coth az, -2a tanh az
//
// Each family constrains the pair through Delta ln H = c1 h^2 + c2 H^2 and
// degenerates to a space form exactly when Delta ln h = d1 h^2 + d2 H^2.

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "calabi/errors.hpp"
#include "calabi/expr.hpp"
#include "calabi/grid.hpp"
#include "calabi/jet.hpp"
#include "calabi/jet_matrix.hpp"

namespace calabi {

enum class FamilyKind { SemiSymmetric, Tan, Coth, Tanh };

inline const char* family_name(FamilyKind k) {
    switch (k) {
        case FamilyKind::SemiSymmetric: return "semi_symmetric";
        case FamilyKind::Tan: return "tan";
        case FamilyKind::Coth: return "coth";
        case FamilyKind::Tanh: return "tanh";
    }
    return "?";
}

struct FamilySpec {
    FamilyKind kind = FamilyKind::SemiSymmetric;
    double a = 0.0;                  // ignored for SemiSymmetric
    bool a_normalized = false;       // true when a negative a was mapped to |a|

    static FamilySpec make(FamilyKind kind, double a = 0.0) {
        FamilySpec s;
        s.kind = kind;
        if (kind == FamilyKind::SemiSymmetric) {
            s.a = 0.0;
            return s;
        }
        if (a == 0.0 || !std::isfinite(a))
            throw ConfigError(std::string(family_name(kind)) + " family requires a nonzero a");
        if (a < 0.0) {
            a = -a;
            s.a_normalized = true;  // metrics depend on a through even/odd pairs
        }
        s.a = a;
        return s;
    }
};

// A surface function on U: either a parsed expression or a sampled grid.
class SurfaceFunc {
public:
    static SurfaceFunc expression(ExprPtr ast, Bindings bindings = {}) {
        SurfaceFunc f;
        f.source_ = ExprSource{std::move(ast), std::move(bindings)};
        return f;
    }
    static SurfaceFunc expression(std::string_view src, Bindings bindings = {}) {
        return expression(parse(src), std::move(bindings));
    }
    static SurfaceFunc grid(std::shared_ptr<const Grid2D> g) {
        SurfaceFunc f;
        f.source_ = GridSource{std::move(g)};
        return f;
    }

    bool is_grid() const { return std::holds_alternative<GridSource>(source_); }
    const Grid2D* grid_ptr() const {
        auto* g = std::get_if<GridSource>(&source_);
        return g ? g->grid.get() : nullptr;
    }

    // Degree-3 jet in x and y; base carries the full chart point.
    Jet jet_at(const Point4& base) const {
        if (const auto* e = std::get_if<ExprSource>(&source_))
            return eval_jet(*e->ast, base, e->bindings);
        const auto& g = *std::get<GridSource>(source_).grid;
        const auto node = grid_node_at(g, base[0], base[1]);
        if (!node)
            throw DomainError("surface grid has no node at the requested (x, y)");
        return grid_jet(g, node->first, node->second, base);
    }

    double value_at(double x, double y) const {
        if (const auto* e = std::get_if<ExprSource>(&source_))
            return eval_value(*e->ast, x, y, e->bindings);
        const auto& g = *std::get<GridSource>(source_).grid;
        const auto node = grid_node_at(g, x, y);
        if (!node) throw DomainError("surface grid has no node at the requested (x, y)");
        return g.at(node->first, node->second);
    }

private:
    struct ExprSource {
        ExprPtr ast;
        Bindings bindings;
    };
    struct GridSource {
        std::shared_ptr<const Grid2D> grid;
    };
    std::variant<ExprSource, GridSource> source_;
};

struct SurfacePair {
    SurfaceFunc h, H;

    static SurfacePair expressions(std::string_view h_src, std::string_view H_src,
                                   Bindings bindings = {}) {
        return SurfacePair{SurfaceFunc::expression(h_src, bindings),
                           SurfaceFunc::expression(H_src, bindings)};
    }
};

struct Coframe {
    Mat4Jet theta;  // theta[i][j] = dx^j coefficient of theta_{i+1}
    Point4 base{};
};

struct FrameVectors {
    Mat4Jet e;  // e[i][j] = d/dx^j coefficient of E_{i+1}
    Point4 base{};
};

inline void check_chart_domain(const FamilySpec& spec, const Point4& p) {
    const double z = p[2];
    switch (spec.kind) {
        case FamilyKind::SemiSymmetric:
        case FamilyKind::Coth:
        case FamilyKind::Tanh:
            if (!(z < 0.0))
                throw DomainError(std::string(family_name(spec.kind)) +
                                  " chart requires z < 0 (got z = " + std::to_string(z) + ")");
            return;
        case FamilyKind::Tan: {
            const double limit = 2.0 * std::atan(1.0) / spec.a;  // pi / (2a)
            if (!(std::abs(z) < limit))
                throw DomainError("tan chart requires |z| < pi/(2a) (got z = " +
                                  std::to_string(z) + ")");
            return;
        }
    }
}

inline double warp_value(const FamilySpec& spec, double z) {
    switch (spec.kind) {
        case FamilyKind::SemiSymmetric: return z;
        case FamilyKind::Tan: return std::cos(spec.a * z);
        case FamilyKind::Coth: return std::sinh(spec.a * z);
        case FamilyKind::Tanh: return std::cosh(spec.a * z);
    }
    return 0.0;
}

inline double beta_value(const FamilySpec& spec, double z) {
    switch (spec.kind) {
        case FamilyKind::SemiSymmetric: return -z / 2.0;
        case FamilyKind::Tan: return std::sin(2.0 * spec.a * z);
        case FamilyKind::Coth:
        case FamilyKind::Tanh: return std::sinh(2.0 * spec.a * z);
    }
    return 0.0;
}

inline Jet warp_jet(const FamilySpec& spec, const Jet& z) {
    switch (spec.kind) {
        case FamilyKind::SemiSymmetric: return z;
        case FamilyKind::Tan: return cos(spec.a * z);
        case FamilyKind::Coth: return sinh(spec.a * z);
        case FamilyKind::Tanh: return cosh(spec.a * z);
    }
    throw DomainError("unreachable");
}

inline Jet beta_jet(const FamilySpec& spec, const Jet& z) {
    switch (spec.kind) {
        case FamilyKind::SemiSymmetric: return z * (-0.5);
        case FamilyKind::Tan: return sin(2.0 * spec.a * z);
        case FamilyKind::Coth:
        case FamilyKind::Tanh: return sinh(2.0 * spec.a * z);
    }
    throw DomainError("unreachable");
}

// Lee-form profile alpha(z).  Domain: the family chart, except that the
// tanh profile is regular at z = 0 and admits the closure point.
inline Jet alpha_jet(const FamilySpec& spec, const Jet& z) {
    Point4 probe = z.base;
    probe[2] = z.value();
    if (spec.kind == FamilyKind::Tanh) {
        if (!(z.value() <= 0.0))
            throw DomainError("tanh alpha requires z <= 0 (got z = " +
                              std::to_string(z.value()) + ")");
    } else {
        check_chart_domain(spec, probe);
    }
    switch (spec.kind) {
        case FamilyKind::SemiSymmetric: return -2.0 / z;
        case FamilyKind::Tan: return 2.0 * spec.a * tan(spec.a * z);
        case FamilyKind::Coth: return -2.0 * spec.a * coth(spec.a * z);
        case FamilyKind::Tanh: return -2.0 * spec.a * tanh(spec.a * z);
    }
    throw DomainError("unreachable");
}

inline Jet alpha_at(const FamilySpec& spec, const Point4& p) {
    return alpha_jet(spec, jet_variable(2, p));
}

// Coefficients (c1, c2) of the constraint Delta ln H = c1 h^2 + c2 H^2.
inline std::pair<double, double> pde_coefficients(const FamilySpec& spec) {
    const double a2 = spec.a * spec.a;
    switch (spec.kind) {
        case FamilyKind::SemiSymmetric: return {2.0, 0.0};
        case FamilyKind::Tan: return {2.0 * a2, -4.0 * a2};
        case FamilyKind::Coth: return {2.0 * a2, 4.0 * a2};
        case FamilyKind::Tanh: return {-2.0 * a2, 4.0 * a2};
    }
    return {0, 0};
}

// Coefficients (d1, d2) of the space-form condition Delta ln h = d1 h^2 + d2 H^2.
inline std::pair<double, double> spaceform_coefficients(const FamilySpec& spec) {
    const double a2 = spec.a * spec.a;
    switch (spec.kind) {
        case FamilyKind::SemiSymmetric: return {-4.0, 0.0};
        case FamilyKind::Tan: return {-4.0 * a2, 2.0 * a2};
        case FamilyKind::Coth: return {-4.0 * a2, -2.0 * a2};
        case FamilyKind::Tanh: return {4.0 * a2, -2.0 * a2};
    }
    return {0, 0};
}

namespace detail {

inline Jet positive_surface_jet(const SurfaceFunc& f, const Point4& base, const char* name) {
    const Jet j = f.jet_at(base);
    if (!(j.value() > 0.0))
        throw DomainError(std::string(name) + " must be positive at the sampled point (got " +
                          std::to_string(j.value()) + ")");
    return j;
}

}  // namespace detail

inline double pde_residual(const FamilySpec& spec, const SurfacePair& pair, double x, double y) {
    const Point4 base{x, y, 0.0, 0.0};
    const Jet h = detail::positive_surface_jet(pair.h, base, "h");
    const Jet H = detail::positive_surface_jet(pair.H, base, "H");
    const auto [c1, c2] = pde_coefficients(spec);
    return laplacian_xy(log(H)) - c1 * h.value() * h.value() - c2 * H.value() * H.value();
}

inline double spaceform_residual(const FamilySpec& spec, const SurfacePair& pair, double x,
                                 double y) {
    const Point4 base{x, y, 0.0, 0.0};
    const Jet h = detail::positive_surface_jet(pair.h, base, "h");
    const Jet H = detail::positive_surface_jet(pair.H, base, "H");
    const auto [d1, d2] = spaceform_coefficients(spec);
    return laplacian_xy(log(h)) - d1 * h.value() * h.value() - d2 * H.value() * H.value();
}

inline Coframe build_coframe(const FamilySpec& spec, const SurfacePair& pair, const Point4& p) {
    check_chart_domain(spec, p);
    const Jet h = detail::positive_surface_jet(pair.h, p, "h");
    const Jet H = detail::positive_surface_jet(pair.H, p, "H");
    const Jet z = jet_variable(2, p);
    const Jet t = jet_variable(3, p);
    const Jet zero = jet_constant(0.0, p);
    const Jet one = jet_constant(1.0, p);

    const Jet f = warp_jet(spec, z) * h;
    const Jet beta = beta_jet(spec, z);
    const Jet lnH_x = jet_partial(H, 0) / H;
    const Jet lnH_y = jet_partial(H, 1) / H;

    Coframe c;
    c.base = p;
    c.theta = zero_mat4(p);
    c.theta[0] = {f, zero, zero, zero};
    c.theta[1] = {zero, f, zero, zero};

    switch (spec.kind) {
        case FamilyKind::SemiSymmetric: {
            const Jet s = sin(0.5 * t), co = cos(0.5 * t);
            const Jet l2 = -lnH_y, n2 = lnH_x;
            c.theta[2] = {co * H + z * l2, -(s * H) + z * n2, zero, beta};
            c.theta[3] = {-(s * H), -(co * H), one, zero};
            break;
        }
        case FamilyKind::Tan: {
            const Jet s = sin(2.0 * spec.a * t), co = cos(2.0 * spec.a * t);
            const Jet c2z = cos(2.0 * spec.a * z);
            const Jet l2 = (-0.5 / spec.a) * lnH_y, n2 = (0.5 / spec.a) * lnH_x;
            c.theta[2] = {-(co * c2z * H + beta * l2), -(-(s * c2z * H) + beta * n2), zero, beta};
            c.theta[3] = {-(s * H), -(co * H), one, zero};
            break;
        }
        case FamilyKind::Coth: {
            const Jet s = sin(2.0 * spec.a * t), co = cos(2.0 * spec.a * t);
            const Jet ch2z = cosh(2.0 * spec.a * z);
            const Jet l2 = (0.5 / spec.a) * lnH_y, n2 = (-0.5 / spec.a) * lnH_x;
            c.theta[2] = {-(-(s * ch2z * H) + beta * l2), -(co * ch2z * H + beta * n2), zero, beta};
            c.theta[3] = {-(co * H), -(s * H), one, zero};
            break;
        }
        case FamilyKind::Tanh: {
            const Jet s = sin(2.0 * spec.a * t), co = cos(2.0 * spec.a * t);
            const Jet ch2z = cosh(2.0 * spec.a * z);
            const Jet l2 = (-0.5 / spec.a) * lnH_y, n2 = (0.5 / spec.a) * lnH_x;
            c.theta[2] = {-(co * ch2z * H + beta * l2), -(-(s * ch2z * H) + beta * n2), zero, beta};
            c.theta[3] = {-(s * H), -(co * H), one, zero};
            break;
        }
    }
    return c;
}

inline FrameVectors frame_from_coframe(const Coframe& c) {
    const Mat4Jet inv = invert4<SingularFrame>(c.theta, "coframe is singular at the base point");
    FrameVectors fr;
    fr.base = c.base;
    fr.e = zero_mat4(c.base);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) fr.e[std::size_t(i)][std::size_t(j)] = inv[std::size_t(j)][std::size_t(i)];
    return fr;
}

inline FrameVectors build_frame(const FamilySpec& spec, const SurfacePair& pair, const Point4& p) {
    check_chart_domain(spec, p);
    if (std::abs(beta_value(spec, p[2])) < 1e-12)
        throw SingularFrame("E3 = (1/beta) d/dt degenerates: |beta| < 1e-12");
    const double f = warp_value(spec, p[2]) * pair.h.value_at(p[0], p[1]);
    if (std::abs(f) < 1e-12) throw SingularFrame("warp factor f = warp(z) h vanishes");
    return frame_from_coframe(build_coframe(spec, pair, p));
}

// Closed-form Gamma^2_11 and Gamma^1_22 as jets on the chart.
inline std::pair<Jet, Jet> gamma_jets(const FamilySpec& spec, const SurfacePair& pair,
                                      const Point4& p) {
    check_chart_domain(spec, p);
    const Jet h = detail::positive_surface_jet(pair.h, p, "h");
    const Jet H = detail::positive_surface_jet(pair.H, p, "H");
    const Jet z = jet_variable(2, p);
    const Jet t = jet_variable(3, p);
    const Jet hx = jet_partial(h, 0), hy = jet_partial(h, 1);
    const Jet h2 = h * h;

    switch (spec.kind) {
        case FamilyKind::SemiSymmetric: {
            const Jet s = sin(0.5 * t), co = cos(0.5 * t);
            const Jet z2h = z * z * h;
            return {-(co * H) / z2h - hy / (z * h2), -(s * H) / z2h - hx / (z * h2)};
        }
        case FamilyKind::Tan: {
            const Jet s = sin(2.0 * spec.a * t), co = cos(2.0 * spec.a * t);
            const Jet g = cos(spec.a * z);
            const Jet saz = sin(spec.a * z);
            const Jet g2h = g * g * h;
            return {spec.a * saz * co * H / g2h - hy / (g * h2),
                    spec.a * saz * s * H / g2h - hx / (g * h2)};
        }
        case FamilyKind::Coth: {
            const Jet s = sin(2.0 * spec.a * t), co = cos(2.0 * spec.a * t);
            const Jet g = sinh(spec.a * z);
            const Jet caz = cosh(spec.a * z);
            const Jet g2h = g * g * h;
            return {-(spec.a * caz * s * H) / g2h - hy / (g * h2),
                    -(spec.a * caz * co * H) / g2h - hx / (g * h2)};
        }
        case FamilyKind::Tanh: {
            const Jet s = sin(2.0 * spec.a * t), co = cos(2.0 * spec.a * t);
            const Jet g = cosh(spec.a * z);
            const Jet saz = sinh(spec.a * z);
            const Jet g2h = g * g * h;
            return {-(spec.a * saz * co * H) / g2h - hy / (g * h2),
                    -(spec.a * saz * s * H) / g2h - hx / (g * h2)};
        }
    }
    throw DomainError("unreachable");
}

inline std::pair<double, double> gamma_coeffs(const FamilySpec& spec, const SurfacePair& pair,
                                              const Point4& p) {
    const auto [g211, g122] = gamma_jets(spec, pair, p);
    return {g211.value(), g122.value()};
}

// Sampling admissibility: inside the chart, away from the beta and warp
// degeneracies.
inline bool point_admissible(const FamilySpec& spec, const Point4& p, double beta_min,
                             double warp_min) {
    const double z = p[2];
    switch (spec.kind) {
        case FamilyKind::SemiSymmetric:
        case FamilyKind::Coth:
        case FamilyKind::Tanh:
            if (!(z < 0.0)) return false;
            break;
        case FamilyKind::Tan:
            if (!(std::abs(z) < 2.0 * std::atan(1.0) / spec.a)) return false;
            break;
    }
    return std::abs(beta_value(spec, z)) >= beta_min &&
           std::abs(warp_value(spec, z)) >= warp_min;
}

}  // namespace calabi
