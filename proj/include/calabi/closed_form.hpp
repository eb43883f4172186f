#pragma once

// Closed-form curvature of the four families: Ricci eigenvalues, tau, kappa,
// the W- spectrum, both sectional curvatures, the Gamma coefficients, the
// general Hermitian Ricci expressions, and the space-form targets.  The
// cartan engine is diffed against these by the harness.

#include <array>
#include <cmath>
#include <string>

#include "calabi/cartan.hpp"
#include "calabi/family.hpp"
#include "calabi/jet.hpp"

namespace calabi {

struct ClosedFormBundle {
    double ricci_perp = 0;   // Ric(E1,E1) = Ric(E2,E2)
    double ricci_delta = 0;  // Ric(E3,E3) = Ric(E4,E4)
    double tau = 0;
    double kappa = 0;
    std::array<double, 3> wminus_eigs{};  // kappa/6, -kappa/12, -kappa/12
    double K12 = 0;
    double K34 = 0;
    double gamma211 = 0;
    double gamma122 = 0;
};

inline ClosedFormBundle closed_forms(const FamilySpec& spec, const SurfacePair& pair,
                                     const Point4& p) {
    check_chart_domain(spec, p);
    const Jet h_jet = pair.h.jet_at(p);
    const Jet H_jet = pair.H.jet_at(p);
    const double h = h_jet.value(), H = H_jet.value();
    if (!(h > 0.0) || !(H > 0.0))
        throw DomainError("closed_forms: h and H must be positive at the point");
    const double lap_ln_h = laplacian_xy(log(h_jet));
    const double h2 = h * h, H2 = H * H;
    const double a = spec.a, a2 = a * a;
    const double z = p[2];

    ClosedFormBundle out;
    switch (spec.kind) {
        case FamilyKind::SemiSymmetric: {
            const double z2h2 = z * z * h2;
            out.ricci_perp = -lap_ln_h / z2h2 - 4.0 / (z * z);
            out.ricci_delta = 0.0;
            out.tau = -2.0 * lap_ln_h / z2h2 - 8.0 / (z * z);
            out.kappa = out.tau;
            out.K12 = -lap_ln_h / z2h2 - 4.0 / (z * z);
            out.K34 = 0.0;
            break;
        }
        case FamilyKind::Tan: {
            const double c2 = std::cos(a * z) * std::cos(a * z);
            const double t2 = std::tan(a * z) * std::tan(a * z);
            out.ricci_perp = (-4.0 * a2 * h2 + 2.0 * a2 * H2 - lap_ln_h) / (h2 * c2) + 6.0 * a2;
            out.ricci_delta = 6.0 * a2;
            out.tau = (-8.0 * a2 * h2 + 4.0 * a2 * H2 - 2.0 * lap_ln_h) / (h2 * c2) + 24.0 * a2;
            out.kappa = (-8.0 * a2 * h2 + 4.0 * a2 * H2 - 2.0 * lap_ln_h) / (h2 * c2);
            out.K12 = (2.0 * a2 * H2 - lap_ln_h) / (c2 * h2) - 4.0 * a2 * t2;
            out.K34 = 4.0 * a2;
            break;
        }
        case FamilyKind::Coth: {
            const double s2 = std::sinh(a * z) * std::sinh(a * z);
            const double ct2 = 1.0 / (std::tanh(a * z) * std::tanh(a * z));
            out.ricci_perp = -(4.0 * a2 * h2 + 2.0 * a2 * H2 + lap_ln_h) / (h2 * s2) - 6.0 * a2;
            out.ricci_delta = -6.0 * a2;
            out.tau = -(8.0 * a2 * h2 + 4.0 * a2 * H2 + 2.0 * lap_ln_h) / (h2 * s2) - 24.0 * a2;
            out.kappa = -(8.0 * a2 * h2 + 4.0 * a2 * H2 + 2.0 * lap_ln_h) / (h2 * s2);
            out.K12 = -(2.0 * a2 * H2 + lap_ln_h) / (s2 * h2) - 4.0 * a2 * ct2;
            out.K34 = -4.0 * a2;
            break;
        }
        case FamilyKind::Tanh: {
            const double c2 = std::cosh(a * z) * std::cosh(a * z);
            const double t2 = std::tanh(a * z) * std::tanh(a * z);
            out.ricci_perp = (4.0 * a2 * h2 - 2.0 * a2 * H2 - lap_ln_h) / (h2 * c2) - 6.0 * a2;
            out.ricci_delta = -6.0 * a2;
            out.tau = (8.0 * a2 * h2 - 4.0 * a2 * H2 - 2.0 * lap_ln_h) / (h2 * c2) - 24.0 * a2;
            out.kappa = (8.0 * a2 * h2 - 4.0 * a2 * H2 - 2.0 * lap_ln_h) / (h2 * c2);
            out.K12 = -(2.0 * a2 * H2 + lap_ln_h) / (c2 * h2) - 4.0 * a2 * t2;
            out.K34 = -4.0 * a2;
            break;
        }
    }
    out.wminus_eigs = {out.kappa / 6.0, -out.kappa / 12.0, -out.kappa / 12.0};
    const auto [g211, g122] = gamma_coeffs(spec, pair, p);
    out.gamma211 = g211;
    out.gamma122 = g122;
    return out;
}

// The Eq.-(10) expressions for the full Ricci matrix, evaluated with jet
// frame derivatives of alpha and the closed Gamma jets.  For the families
// here the off-diagonal entries must vanish identically.
inline std::array<std::array<double, 4>, 4> general_ricci_eq10(const FamilySpec& spec,
                                                               const SurfacePair& pair,
                                                               const Point4& p) {
    const FrameVectors fr = build_frame(spec, pair, p);
    const Jet alpha = alpha_at(spec, p);
    auto dfield = [&](int i, const Jet& u) { return field_derivative(fr.e[std::size_t(i)], u); };
    const Jet e_ln_a[4] = {dfield(0, alpha) / alpha, dfield(1, alpha) / alpha,
                           dfield(2, alpha) / alpha, dfield(3, alpha) / alpha};
    const double av = alpha.value();
    const auto [g211, g122] = gamma_jets(spec, pair, p);

    std::array<std::array<double, 4>, 4> ric{};
    const double diag_perp = dfield(1, g211).value() + dfield(0, g122).value() -
                             g211.value() * g211.value() - g122.value() * g122.value() +
                             dfield(3, alpha).value() - 1.5 * av * av;
    const double w = e_ln_a[3].value() - av;
    const double diag_delta =
        -dfield(3, e_ln_a[3] - alpha).value() - w * w + av * w + av * av / 2.0;

    ric[0][0] = ric[1][1] = diag_perp;
    ric[2][2] = ric[3][3] = diag_delta;
    ric[0][1] = ric[1][0] = 0.5 * dfield(2, alpha).value();
    ric[0][2] = ric[2][0] = 1.5 * dfield(1, alpha).value() - dfield(3, e_ln_a[1]).value() -
                            e_ln_a[1].value() * e_ln_a[3].value();
    ric[0][3] = ric[3][0] = dfield(2, e_ln_a[1]).value() -
                            (dfield(0, e_ln_a[3]).value() - dfield(0, alpha).value());
    ric[1][2] = ric[2][1] = -1.5 * dfield(0, alpha).value() + dfield(3, e_ln_a[0]).value() +
                            e_ln_a[0].value() * e_ln_a[3].value();
    ric[1][3] = ric[3][1] = -dfield(2, e_ln_a[0]).value() -
                            (dfield(1, e_ln_a[3]).value() - dfield(1, alpha).value());
    ric[2][3] = ric[3][2] = dfield(2, alpha).value();
    return ric;
}

struct SpaceformExpected {
    double holomorphic;  // constant holomorphic sectional curvature c_H
    double tau;
    std::string model;   // "C2", "CP2", "B2"
};

inline SpaceformExpected spaceform_expected(const FamilySpec& spec) {
    const double a2 = spec.a * spec.a;
    switch (spec.kind) {
        case FamilyKind::SemiSymmetric: return {0.0, 0.0, "C2"};
        case FamilyKind::Tan: return {4.0 * a2, 24.0 * a2, "CP2"};
        case FamilyKind::Coth:
        case FamilyKind::Tanh: return {-4.0 * a2, -24.0 * a2, "B2"};
    }
    return {0, 0, "?"};
}

// The per-family value of |theta|^2 + delta theta = 2 E4 alpha - alpha^2.
inline double lee_constant(const FamilySpec& spec) {
    const double a2 = spec.a * spec.a;
    switch (spec.kind) {
        case FamilyKind::SemiSymmetric: return 0.0;
        case FamilyKind::Tan: return 4.0 * a2;
        case FamilyKind::Coth:
        case FamilyKind::Tanh: return -4.0 * a2;
    }
    return 0;
}

}  // namespace calabi
