#pragma once

// Family-agnostic curvature engine.  From a jet-valued coframe it assembles
// the chart metric, Christoffel jets, the coordinate Riemann tensor (sign
// convention R(X,Y)Z = ([nabla_X, nabla_Y] - nabla_[X,Y]) Z, so the round
// sphere has K = R(X,Y,Y,X) = +1), and everything the verification needs on
// top: frame curvature, Lee-form quantities, the anti-self-dual Weyl block,
// Nijenhuis and Kaehler residuals, the Pi/Phi/Psi decomposition, and the
// holomorphic-curvature scan.
//
// Orientation: fixed so the Kaehler form Omega_bar = theta1^theta2 -
// theta3^theta4 is self-dual (volume form -theta1^theta2^theta3^theta4);
// {Omega, Phi, Psi} then spans the anti-self-dual bundle.

#include <array>
#include <cmath>
#include <random>

#include "calabi/errors.hpp"
#include "calabi/family.hpp"
#include "calabi/jet.hpp"
#include "calabi/jet_matrix.hpp"

namespace calabi {

struct MetricJet {
    Mat4Jet g;
    Point4 base{};
};

inline MetricJet metric_from_coframe(const Coframe& c) {
    MetricJet m;
    m.base = c.base;
    m.g = zero_mat4(c.base);
    for (int j = 0; j < 4; ++j)
        for (int k = j; k < 4; ++k) {
            Jet s = jet_constant(0.0, c.base);
            for (int i = 0; i < 4; ++i)
                s = s + c.theta[std::size_t(i)][std::size_t(j)] * c.theta[std::size_t(i)][std::size_t(k)];
            m.g[std::size_t(j)][std::size_t(k)] = s;
            m.g[std::size_t(k)][std::size_t(j)] = s;
        }
    return m;
}

// Leading principal minors at the base point; the metric must be positive
// definite where we differentiate it.
inline void check_positive_definite(const MetricJet& m) {
    double a[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a[i][j] = m.g[std::size_t(i)][std::size_t(j)].value();
    double minor = a[0][0];
    if (!(minor > 0)) throw SingularMetric("metric is not positive definite (minor 1)");
    for (int k = 2; k <= 4; ++k) {
        double sub[4][4];
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) sub[i][j] = a[i][j];
        double det = 1.0;
        for (int col = 0; col < k; ++col) {
            int pivot = col;
            for (int r = col + 1; r < k; ++r)
                if (std::abs(sub[r][col]) > std::abs(sub[pivot][col])) pivot = r;
            if (sub[pivot][col] == 0.0) {
                det = 0.0;
                break;
            }
            if (pivot != col) {
                for (int c2 = 0; c2 < k; ++c2) std::swap(sub[pivot][c2], sub[col][c2]);
                det = -det;
            }
            det *= sub[col][col];
            for (int r = col + 1; r < k; ++r) {
                const double fct = sub[r][col] / sub[col][col];
                for (int c2 = col; c2 < k; ++c2) sub[r][c2] -= fct * sub[col][c2];
            }
        }
        if (!(det > 0))
            throw SingularMetric("metric is not positive definite (minor " + std::to_string(k) +
                                 ")");
    }
}

using Christoffels = std::array<Mat4Jet, 4>;  // [k][i][j] = Gamma^k_ij

inline Christoffels levi_civita(const MetricJet& m) {
    if (std::abs(det4_value(m.g)) < 1e-12)
        throw SingularMetric("metric determinant below 1e-12");
    check_positive_definite(m);
    const Mat4Jet ginv = invert4<SingularMetric>(m.g, "metric not invertible");

    Mat4Jet dg[4];  // dg[l][i][j] = d_l g_ij
    for (int l = 0; l < 4; ++l) {
        dg[l] = zero_mat4(m.base);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                dg[l][std::size_t(i)][std::size_t(j)] = jet_partial(m.g[std::size_t(i)][std::size_t(j)], l);
    }

    Christoffels ch;
    for (auto& plane : ch) plane = zero_mat4(m.base);
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) {
                Jet s = jet_constant(0.0, m.base);
                for (int l = 0; l < 4; ++l) {
                    const Jet term = dg[i][std::size_t(j)][std::size_t(l)] +
                                     dg[j][std::size_t(i)][std::size_t(l)] -
                                     dg[l][std::size_t(i)][std::size_t(j)];
                    s = s + ginv[std::size_t(k)][std::size_t(l)] * term;
                }
                s = 0.5 * s;
                ch[std::size_t(k)][std::size_t(i)][std::size_t(j)] = s;
                ch[std::size_t(k)][std::size_t(j)][std::size_t(i)] = s;
            }
    return ch;
}

// Lowered coordinate curvature R(d_a, d_b, d_c, d_d) at the base point.
struct RiemannCoord {
    double r[4][4][4][4] = {};
};

inline RiemannCoord riemann_from_christoffels(const MetricJet& m, const Christoffels& ch) {
    double up[4][4][4][4];  // up[l][k][i][j] = R^l_kij
    double dch[4][4][4][4];  // dch[i][l][j][k] = d_i Gamma^l_jk
    double chv[4][4][4];
    for (int l = 0; l < 4; ++l)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) {
                chv[l][j][k] = ch[std::size_t(l)][std::size_t(j)][std::size_t(k)].value();
                for (int i = 0; i < 4; ++i)
                    dch[i][l][j][k] =
                        jet_partial(ch[std::size_t(l)][std::size_t(j)][std::size_t(k)], i).value();
            }
    for (int l = 0; l < 4; ++l)
        for (int k = 0; k < 4; ++k)
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    double s = dch[i][l][j][k] - dch[j][l][i][k];
                    for (int mm = 0; mm < 4; ++mm)
                        s += chv[l][i][mm] * chv[mm][j][k] - chv[l][j][mm] * chv[mm][i][k];
                    up[l][k][i][j] = s;
                }
    RiemannCoord out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) {
                    double s = 0.0;
                    for (int mm = 0; mm < 4; ++mm)
                        s += m.g[std::size_t(mm)][std::size_t(l)].value() * up[mm][k][i][j];
                    out.r[i][j][k][l] = s;
                }
    return out;
}

inline RiemannCoord riemann_at(const MetricJet& m) {
    return riemann_from_christoffels(m, levi_civita(m));
}

// ---- generic jet machinery on vector fields -------------------------------

// Commutator [A, B]^a at the base point.
inline std::array<double, 4> bracket_values(const JetVec4& A, const JetVec4& B) {
    std::array<double, 4> out{};
    for (int a = 0; a < 4; ++a) {
        double s = 0.0;
        for (int b = 0; b < 4; ++b)
            s += A[std::size_t(b)].value() * jet_partial(B[std::size_t(a)], b).value() -
                 B[std::size_t(b)].value() * jet_partial(A[std::size_t(a)], b).value();
        out[std::size_t(a)] = s;
    }
    return out;
}

// Scalar field derivative V(u) as a jet (one order lower than u).
inline Jet field_derivative(const JetVec4& V, const Jet& u) {
    Jet s = jet_constant(0.0, u.base);
    for (int a = 0; a < 4; ++a) s = s + V[std::size_t(a)] * jet_partial(u, a);
    return s;
}

// (d theta)_ab at the base point for a jet 1-form.
inline std::array<std::array<double, 4>, 4> d_one_form(const JetVec4& theta) {
    std::array<std::array<double, 4>, 4> d{};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            d[std::size_t(a)][std::size_t(b)] = jet_partial(theta[std::size_t(b)], a).value() -
                                                jet_partial(theta[std::size_t(a)], b).value();
    return d;
}

inline Mat4Jet wedge_jets(const JetVec4& u, const JetVec4& v) {
    Mat4Jet w = zero_mat4(u[0].base);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            w[std::size_t(a)][std::size_t(b)] = u[std::size_t(a)] * v[std::size_t(b)] -
                                                u[std::size_t(b)] * v[std::size_t(a)];
    return w;
}

// (d omega)_abc at the base point for a jet 2-form.
inline double d_two_form_component(const Mat4Jet& omega, int a, int b, int c) {
    return jet_partial(omega[std::size_t(b)][std::size_t(c)], a).value() +
           jet_partial(omega[std::size_t(c)][std::size_t(a)], b).value() +
           jet_partial(omega[std::size_t(a)][std::size_t(b)], c).value();
}

// ---- frame structures ------------------------------------------------------

// Frame action matrices: M[m][i] is the E_m component of the image of E_i.
// Jbar is the Kaehler structure, Jopp the opposite Hermitian one.
inline constexpr double kJbar[4][4] = {
    {0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}};
inline constexpr double kJopp[4][4] = {
    {0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, -1}, {0, 0, 1, 0}};

struct FormBasis {
    double omega_bar[4][4] = {};
    double omega[4][4] = {};
    double phi[4][4] = {};
    double psi[4][4] = {};
    int orientation_sign = -1;  // volume form = sign * theta1^theta2^theta3^theta4

    static FormBasis standard() {
        FormBasis b;
        auto set = [](double (&f)[4][4], int i, int j, double v) {
            f[i][j] = v;
            f[j][i] = -v;
        };
        set(b.omega_bar, 0, 1, 1.0);
        set(b.omega_bar, 2, 3, -1.0);
        set(b.omega, 0, 1, 1.0);
        set(b.omega, 2, 3, 1.0);
        set(b.phi, 0, 2, 1.0);
        set(b.phi, 1, 3, -1.0);
        set(b.psi, 0, 3, 1.0);
        set(b.psi, 1, 2, 1.0);
        return b;
    }
};

struct FrameRiemann {
    double r[4][4][4][4] = {};
};

inline FrameRiemann project_to_frame(const RiemannCoord& rc, const FrameVectors& fr) {
    double e[4][4];
    for (int i = 0; i < 4; ++i)
        for (int a = 0; a < 4; ++a) e[i][a] = fr.e[std::size_t(i)][std::size_t(a)].value();
    // contract one slot at a time
    double t1[4][4][4][4], t2[4][4][4][4], t3[4][4][4][4];
    FrameRiemann out;
    for (int i = 0; i < 4; ++i)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    double s = 0;
                    for (int a = 0; a < 4; ++a) s += e[i][a] * rc.r[a][b][c][d];
                    t1[i][b][c][d] = s;
                }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    double s = 0;
                    for (int b = 0; b < 4; ++b) s += e[j][b] * t1[i][b][c][d];
                    t2[i][j][c][d] = s;
                }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                for (int d = 0; d < 4; ++d) {
                    double s = 0;
                    for (int c = 0; c < 4; ++c) s += e[k][c] * t2[i][j][c][d];
                    t3[i][j][k][d] = s;
                }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) {
                    double s = 0;
                    for (int d = 0; d < 4; ++d) s += e[l][d] * t3[i][j][k][d];
                    out.r[i][j][k][l] = s;
                }
    return out;
}

inline std::array<double, 3> sym3_eigenvalues(const double m_in[3][3]) {
    double a[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a[i][j] = m_in[i][j];
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off < 1e-15) break;
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(a[p][q]) < 1e-18) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                double row_p[3], row_q[3];
                for (int k = 0; k < 3; ++k) {
                    row_p[k] = c * a[p][k] - s * a[q][k];
                    row_q[k] = s * a[p][k] + c * a[q][k];
                }
                for (int k = 0; k < 3; ++k) {
                    a[p][k] = row_p[k];
                    a[q][k] = row_q[k];
                }
                for (int k = 0; k < 3; ++k) {
                    const double col_p = c * a[k][p] - s * a[k][q];
                    const double col_q = s * a[k][p] + c * a[k][q];
                    a[k][p] = col_p;
                    a[k][q] = col_q;
                }
            }
    }
    std::array<double, 3> eig{a[0][0], a[1][1], a[2][2]};
    std::sort(eig.begin(), eig.end());
    return eig;
}

struct WeylMinus {
    double m[3][3] = {};                 // in the orthonormalized {Omega, phi, psi}
    std::array<double, 3> eigs{};        // ascending
    double trace = 0.0;
    double tensor_norm = 0.0;            // Frobenius norm of W- as a 4-tensor
};

// Restriction of the Weyl operator to the anti-self-dual bundle, expressed
// in {Omega/|Omega|, phi/|phi|, psi/|psi|}.  The contraction sign matches
// the convention in which the simple eigenvalue on a Kaehler block is
// kappa/6 (sphere-positive sectional curvature flips it relative to the
// naive 1/4-contraction).
inline WeylMinus weyl_minus(const FrameRiemann& rf, const FormBasis& basis = FormBasis::standard()) {
    double ric[4][4] = {};
    for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) {
            double s = 0;
            for (int a = 0; a < 4; ++a) s += rf.r[a][b][c][a];
            ric[b][c] = s;
        }
    const double tau = ric[0][0] + ric[1][1] + ric[2][2] + ric[3][3];
    double schouten[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            schouten[i][j] = 0.5 * (ric[i][j] - (i == j ? tau / 6.0 : 0.0));

    double w[4][4][4][4];
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    const double kn = schouten[a][c] * (b == d ? 1.0 : 0.0) +
                                      schouten[b][d] * (a == c ? 1.0 : 0.0) -
                                      schouten[a][d] * (b == c ? 1.0 : 0.0) -
                                      schouten[b][c] * (a == d ? 1.0 : 0.0);
                    w[a][b][c][d] = rf.r[a][b][c][d] + kn;
                }

    const double (*forms[3])[4] = {basis.omega, basis.phi, basis.psi};
    WeylMinus out;
    for (int A = 0; A < 3; ++A)
        for (int B = 0; B < 3; ++B) {
            double s = 0;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    for (int c = 0; c < 4; ++c)
                        for (int d = 0; d < 4; ++d)
                            s += forms[A][a][b] * forms[B][c][d] * w[a][b][c][d];
            out.m[A][B] = -s / 8.0;  // 1/4 contraction, unit forms (|.|^2 = 2), sign per above
        }
    out.eigs = sym3_eigenvalues(out.m);
    out.trace = out.m[0][0] + out.m[1][1] + out.m[2][2];
    double fro = 0;
    for (int A = 0; A < 3; ++A)
        for (int B = 0; B < 3; ++B) fro += out.m[A][B] * out.m[A][B];
    out.tensor_norm = 2.0 * std::sqrt(fro);
    return out;
}

// Connection forms w^i_j(E_k) = g(nabla_{E_k} E_j, E_i).
struct ConnectionForms {
    double w[4][4][4] = {};  // [i][j][k]
};

inline ConnectionForms connection_forms_frame(const FrameVectors& fr, const Coframe& c,
                                              const MetricJet& m, const Christoffels& ch) {
    (void)c;
    ConnectionForms out;
    double gv[4][4], ev[4][4], chv[4][4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            gv[i][j] = m.g[std::size_t(i)][std::size_t(j)].value();
            ev[i][j] = fr.e[std::size_t(i)][std::size_t(j)].value();
        }
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                chv[k][i][j] = ch[std::size_t(k)][std::size_t(i)][std::size_t(j)].value();

    for (int k = 0; k < 4; ++k) {
        for (int j = 0; j < 4; ++j) {
            // coordinate components of nabla_{E_k} E_j
            double v[4];
            for (int a = 0; a < 4; ++a) {
                double s = field_derivative(fr.e[std::size_t(k)], fr.e[std::size_t(j)][std::size_t(a)]).value();
                for (int b = 0; b < 4; ++b)
                    for (int cc = 0; cc < 4; ++cc) s += ev[k][b] * ev[j][cc] * chv[a][b][cc];
                v[a] = s;
            }
            for (int i = 0; i < 4; ++i) {
                double s = 0;
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) s += gv[a][b] * v[a] * ev[i][b];
                out.w[i][j][k] = s;
            }
        }
    }
    return out;
}

inline ConnectionForms connection_forms_frame(const FrameVectors& fr, const Coframe& c) {
    const MetricJet m = metric_from_coframe(c);
    return connection_forms_frame(fr, c, m, levi_civita(m));
}

// ---- curvature data ---------------------------------------------------------

struct CurvatureData {
    FrameRiemann riemann;      // R(E_i, E_j, E_k, E_l)
    double ricci[4][4] = {};   // Ric(E_i, E_j)
    double tau = 0.0;
    double delta_ric = 0.0;    // (Ric(E1,E1) - Ric(E3,E3)) / 2
    double alpha = 0.0;
    double e4_alpha = 0.0;
    double lee_sq = 0.0;                 // |theta|^2 = alpha^2
    double delta_theta_closed = 0.0;     // 2 (E4 alpha - alpha^2)
    double delta_theta_generic = 0.0;    // -g^{ab} (nabla_a theta)_b from jets
    double kappa = 0.0;                  // tau - 6(|theta|^2 + delta theta)
    double K12 = 0.0, K34 = 0.0;
    WeylMinus wminus;
};

inline CurvatureData frame_curvature(const RiemannCoord& rc, const FrameVectors& fr,
                                     const Coframe& c, const MetricJet& m,
                                     const Christoffels& ch, const FamilySpec& spec) {
    CurvatureData cd;
    cd.riemann = project_to_frame(rc, fr);
    for (int b = 0; b < 4; ++b)
        for (int cc = 0; cc < 4; ++cc) {
            double s = 0;
            for (int a = 0; a < 4; ++a) s += cd.riemann.r[a][b][cc][a];
            cd.ricci[b][cc] = s;
        }
    cd.tau = cd.ricci[0][0] + cd.ricci[1][1] + cd.ricci[2][2] + cd.ricci[3][3];
    cd.delta_ric = 0.5 * (cd.ricci[0][0] - cd.ricci[2][2]);
    cd.K12 = cd.riemann.r[0][1][1][0];
    cd.K34 = cd.riemann.r[2][3][3][2];

    const Jet alpha = alpha_at(spec, c.base);
    cd.alpha = alpha.value();
    cd.e4_alpha = field_derivative(fr.e[3], alpha).value();
    cd.lee_sq = cd.alpha * cd.alpha;
    cd.delta_theta_closed = 2.0 * (cd.e4_alpha - cd.lee_sq);

    // Lee form theta = -alpha theta4 differentiated generically.
    JetVec4 theta;
    for (int a = 0; a < 4; ++a) theta[std::size_t(a)] = -(alpha * c.theta[3][std::size_t(a)]);
    const Mat4Jet ginv = invert4<SingularMetric>(m.g, "metric not invertible");
    double div = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double cov = jet_partial(theta[std::size_t(b)], a).value();
            for (int k = 0; k < 4; ++k)
                cov -= ch[std::size_t(k)][std::size_t(a)][std::size_t(b)].value() *
                       theta[std::size_t(k)].value();
            div += ginv[std::size_t(a)][std::size_t(b)].value() * cov;
        }
    cd.delta_theta_generic = -div;

    cd.kappa = cd.tau - 6.0 * (cd.lee_sq + cd.delta_theta_generic);
    cd.wminus = weyl_minus(cd.riemann);
    return cd;
}

inline CurvatureData frame_curvature(const RiemannCoord& rc, const FrameVectors& fr,
                                     const Coframe& c, const FamilySpec& spec) {
    const MetricJet m = metric_from_coframe(c);
    return frame_curvature(rc, fr, c, m, levi_civita(m), spec);
}

// ---- integrability and Kaehler checks ---------------------------------------

// Max norm of the Nijenhuis tensor N(E_i, E_j) over frame pairs, with the
// almost-complex structure given by its frame action (act[m][i] = E_m
// component of the image of E_i).
inline double nijenhuis_residual(const double act[4][4], const FrameVectors& fr,
                                 const Coframe& c) {
    const Point4 base = c.base;
    JetVec4 F[4];
    for (int i = 0; i < 4; ++i) {
        for (int a = 0; a < 4; ++a) {
            Jet s = jet_constant(0.0, base);
            for (int mm = 0; mm < 4; ++mm)
                if (act[mm][i] != 0.0) s = s + act[mm][i] * fr.e[std::size_t(mm)][std::size_t(a)];
            F[i][std::size_t(a)] = s;
        }
    }
    // coordinate action of J at the base point: J^a_b = sum act[m][i] E_m^a theta^i_b
    double jc[4][4] = {};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double s = 0;
            for (int i = 0; i < 4; ++i)
                for (int mm = 0; mm < 4; ++mm)
                    s += act[mm][i] * fr.e[std::size_t(mm)][std::size_t(a)].value() *
                         c.theta[std::size_t(i)][std::size_t(b)].value();
            jc[a][b] = s;
        }
    double gv[4][4];
    {
        const MetricJet m = metric_from_coframe(c);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) gv[i][j] = m.g[std::size_t(i)][std::size_t(j)].value();
    }

    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const auto ff = bracket_values(F[i], F[j]);
            const auto fe = bracket_values(F[i], fr.e[std::size_t(j)]);
            const auto ef = bracket_values(fr.e[std::size_t(i)], F[j]);
            const auto ee = bracket_values(fr.e[std::size_t(i)], fr.e[std::size_t(j)]);
            double n[4];
            for (int a = 0; a < 4; ++a) {
                double s = ff[std::size_t(a)] - ee[std::size_t(a)];
                for (int b = 0; b < 4; ++b)
                    s -= jc[a][b] * (fe[std::size_t(b)] + ef[std::size_t(b)]);
                n[a] = s;
            }
            double norm2 = 0;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) norm2 += gv[a][b] * n[a] * n[b];
            worst = std::max(worst, std::sqrt(std::max(norm2, 0.0)));
        }
    return worst;
}

// Frame components (nabla_{E_k} form)(E_i, E_j) for a constant-frame 2-form.
inline std::array<std::array<std::array<double, 4>, 4>, 4> nabla_two_form(
    const ConnectionForms& conn, const double form[4][4]) {
    std::array<std::array<std::array<double, 4>, 4>, 4> out{};
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double s = 0;
                for (int mm = 0; mm < 4; ++mm)
                    s -= conn.w[mm][i][k] * form[mm][j] + conn.w[mm][j][k] * form[i][mm];
                out[std::size_t(k)][std::size_t(i)][std::size_t(j)] = s;
            }
    return out;
}

// max_k |nabla_{E_k} form| with |w|^2 = (1/2) sum_ij w_ij^2.
inline double nabla_form_max_norm(const ConnectionForms& conn, const double form[4][4]) {
    const auto grad = nabla_two_form(conn, form);
    double worst = 0;
    for (int k = 0; k < 4; ++k) {
        double n2 = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                n2 += 0.5 * grad[std::size_t(k)][std::size_t(i)][std::size_t(j)] *
                      grad[std::size_t(k)][std::size_t(i)][std::size_t(j)];
        worst = std::max(worst, std::sqrt(n2));
    }
    return worst;
}

// ||nabla Omega_bar|| for the Kaehler form; ~0 certifies J_bar Kaehler.
inline double kahler_residual(const FrameVectors& fr, const Coframe& c, const MetricJet& m) {
    const ConnectionForms conn = connection_forms_frame(fr, c, m, levi_civita(m));
    return nabla_form_max_norm(conn, FormBasis::standard().omega_bar);
}

// ---- the Pi / Phi / Psi curvature decomposition -------------------------------

namespace detail {

inline double proj_h(int i, int j) { return (i == j && i < 2) ? 1.0 : 0.0; }
inline double gJ(int i, int j) { return kJbar[j][i]; }        // g(Jbar E_i, E_j)
inline double hJ(int i, int j) {                              // h(Jbar E_i, E_j)
    double s = 0;
    for (int mm = 0; mm < 4; ++mm) s += kJbar[mm][i] * proj_h(mm, j);
    return s;
}

}  // namespace detail

inline double pi_tensor(int i, int j, int k, int l) {
    using detail::gJ;
    const auto d = [](int p, int q) { return p == q ? 1.0 : 0.0; };
    return 0.25 * (d(j, k) * d(i, l) - d(i, k) * d(j, l) + gJ(j, k) * gJ(i, l) -
                   gJ(i, k) * gJ(j, l) - 2.0 * gJ(i, j) * gJ(k, l));
}

inline double phi_tensor(int i, int j, int k, int l) {
    using detail::gJ;
    using detail::hJ;
    using detail::proj_h;
    const auto d = [](int p, int q) { return p == q ? 1.0 : 0.0; };
    return 0.125 * (d(j, k) * proj_h(i, l) - d(i, k) * proj_h(j, l) + d(i, l) * proj_h(j, k) -
                    d(j, l) * proj_h(i, k) + gJ(j, k) * hJ(i, l) - gJ(i, k) * hJ(j, l) +
                    gJ(i, l) * hJ(j, k) - gJ(j, l) * hJ(i, k) - 2.0 * gJ(i, j) * hJ(k, l) -
                    2.0 * gJ(k, l) * hJ(i, j));
}

inline double psi_tensor(int i, int j, int k, int l) {
    return -detail::hJ(i, j) * detail::hJ(k, l);
}

// Max residual of R = a Pi + b Phi + c Psi with a = tau/6 - delta + kappa/12,
// b = 2 delta - kappa/2, c = kappa/2.  The decomposition presumes the
// two-eigenvalue Ricci block structure; block_tol is the grid-tier escape
// hatch.
inline double decomposition_check(const CurvatureData& cd, double block_tol = 1e-6) {
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j && std::abs(cd.ricci[i][j]) > block_tol)
                throw BlockStructureViolated(
                    "Ricci is not block diagonal in the special frame: |Ric(E" +
                    std::to_string(i + 1) + ",E" + std::to_string(j + 1) + ")| = " +
                    std::to_string(std::abs(cd.ricci[i][j])));
    const double a = cd.tau / 6.0 - cd.delta_ric + cd.kappa / 12.0;
    const double b = 2.0 * cd.delta_ric - cd.kappa / 2.0;
    const double c2 = cd.kappa / 2.0;
    double worst = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) {
                    const double model = a * pi_tensor(i, j, k, l) + b * phi_tensor(i, j, k, l) +
                                         c2 * psi_tensor(i, j, k, l);
                    worst = std::max(worst, std::abs(cd.riemann.r[i][j][k][l] - model));
                }
    return worst;
}

// ---- holomorphic-curvature scan ----------------------------------------------

struct QchScan {
    std::array<double, 4> t_values{0.0, 0.5, 1.0 / std::sqrt(2.0), 1.0};
    std::array<double, 4> spread{};   // max - min of R(X, JX, JX, X) per t
    std::array<double, 4> mean{};
    double fit_a = 0, fit_b = 0, fit_c = 0;  // a + b t^2 + c t^4
    double fit_residual = 0;
};

inline double holomorphic_curvature(const FrameRiemann& rf, const std::array<double, 4>& x) {
    std::array<double, 4> jx{};
    for (int mm = 0; mm < 4; ++mm)
        for (int i = 0; i < 4; ++i) jx[std::size_t(mm)] += kJbar[mm][i] * x[std::size_t(i)];
    double s = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l)
                    s += rf.r[i][j][k][l] * x[std::size_t(i)] * jx[std::size_t(j)] *
                         jx[std::size_t(k)] * x[std::size_t(l)];
    return s;
}

inline QchScan qch_scan(const CurvatureData& cd, std::mt19937_64& rng, int directions = 32) {
    QchScan out;
    auto uniform_angle = [&rng]() {
        return double(rng() >> 11) * 0x1.0p-53 * 8.0 * std::atan(1.0);
    };
    for (int ti = 0; ti < 4; ++ti) {
        const double t = out.t_values[std::size_t(ti)];
        const double u = std::sqrt(std::max(0.0, 1.0 - t * t));
        double lo = 0, hi = 0, sum = 0;
        for (int d = 0; d < directions; ++d) {
            const double p1 = uniform_angle(), p2 = uniform_angle();
            const std::array<double, 4> x{u * std::cos(p1), u * std::sin(p1),
                                          t * std::cos(p2), t * std::sin(p2)};
            const double hol = holomorphic_curvature(cd.riemann, x);
            if (d == 0) lo = hi = hol;
            lo = std::min(lo, hol);
            hi = std::max(hi, hol);
            sum += hol;
        }
        out.spread[std::size_t(ti)] = hi - lo;
        out.mean[std::size_t(ti)] = sum / directions;
    }
    // least-squares fit of a + b t^2 + c t^4 through the four means
    double ata[3][3] = {}, aty[3] = {};
    for (int ti = 0; ti < 4; ++ti) {
        const double t2 = out.t_values[std::size_t(ti)] * out.t_values[std::size_t(ti)];
        const double row[3] = {1.0, t2, t2 * t2};
        for (int i = 0; i < 3; ++i) {
            aty[i] += row[i] * out.mean[std::size_t(ti)];
            for (int j = 0; j < 3; ++j) ata[i][j] += row[i] * row[j];
        }
    }
    const double det = ata[0][0] * (ata[1][1] * ata[2][2] - ata[1][2] * ata[2][1]) -
                       ata[0][1] * (ata[1][0] * ata[2][2] - ata[1][2] * ata[2][0]) +
                       ata[0][2] * (ata[1][0] * ata[2][1] - ata[1][1] * ata[2][0]);
    auto solve3 = [&](int col) {
        double m[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] = (j == col) ? aty[i] : ata[i][j];
        return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])) /
               det;
    };
    out.fit_a = solve3(0);
    out.fit_b = solve3(1);
    out.fit_c = solve3(2);
    for (int ti = 0; ti < 4; ++ti) {
        const double t2 = out.t_values[std::size_t(ti)] * out.t_values[std::size_t(ti)];
        out.fit_residual = std::max(out.fit_residual,
                                    std::abs(out.mean[std::size_t(ti)] -
                                             (out.fit_a + out.fit_b * t2 + out.fit_c * t2 * t2)));
    }
    return out;
}

}  // namespace calabi
