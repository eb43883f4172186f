#pragma once

// Scenario-driven verification: sample admissible chart points, run the
// cartan engine and the closed forms side by side, and score every claim in
// the registry (structure equations, connection forms, Lee identities, the
// Ricci/tau/kappa/W-/sectional closed forms, the curvature decomposition,
// the holomorphic-curvature scan, and the space-form criterion in both
// directions).  Reports are deterministic for a fixed scenario and seed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "calabi/cartan.hpp"
#include "calabi/closed_form.hpp"
#include "calabi/errors.hpp"
#include "calabi/family.hpp"
#include "calabi/grid.hpp"
#include "calabi/jet.hpp"
#include "calabi/liouville.hpp"

namespace calabi {

inline constexpr const char* kEngineVersion = "0.1.0";

struct ToleranceSet {
    double linear = 1e-8;
    double spectral = 1e-6;
    double grid = 1e-3;  // floor applied to every claim when a source is a grid
    double pde = 1e-9;   // point-acceptance gate
    std::map<std::string, double> overrides;
};

struct SampleSpec {
    int count = 50;
    std::optional<std::array<std::array<double, 2>, 4>> ranges;  // x, y, z, t
    std::vector<Point4> points;
    double beta_exclusion = 0.05;
    double warp_exclusion = 0.05;
};

struct SolveDirective {
    int nx = 33, ny = 33;
    double spacing = 0.0625;
    double x0 = -1.0, y0 = -1.0;
    std::optional<double> boundary_constant;        // value of u = ln H
    std::optional<std::string> boundary_expression; // u(x, y) on the edge
    double residual_target = 1e-10;
    int max_iters = 50;
    double damping = 1.0;
    int continuation_steps = 0;
    bool spaceform = false;  // solve the coupled system instead
    std::string out = "H_solved.csv";
};

struct SurfaceSourceSpec {
    std::optional<std::string> expression;
    std::optional<std::string> grid_path;
    std::optional<SolveDirective> solve;
};

struct Scenario {
    FamilySpec spec;
    SurfaceSourceSpec h_source, H_source;
    SampleSpec samples;
    ToleranceSet tolerances;
    std::uint64_t seed = 1;
    std::string report_path;
    std::vector<std::string> notes;
    nlohmann::json raw;  // echoed into the report

    static Scenario from_json(const nlohmann::json& j);
    static Scenario from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("scenario '" + path + "' is not valid JSON: " + e.what());
        }
        return from_json(j);
    }
};

namespace detail {

inline SurfaceSourceSpec parse_surface_source(const nlohmann::json& j, const char* key) {
    SurfaceSourceSpec src;
    if (!j.contains(key)) throw ConfigError(std::string("scenario is missing '") + key + "'");
    const auto& node = j.at(key);
    if (node.is_string()) {
        src.expression = node.get<std::string>();
        return src;
    }
    if (node.is_object()) {
        if (node.contains("grid")) {
            src.grid_path = node.at("grid").get<std::string>();
            return src;
        }
        if (node.contains("solve")) {
            SolveDirective d;
            const auto& s = node.at("solve");
            d.nx = s.value("nx", d.nx);
            d.ny = s.value("ny", d.ny);
            d.spacing = s.value("spacing", d.spacing);
            if (s.contains("origin")) {
                d.x0 = s.at("origin").at(0).get<double>();
                d.y0 = s.at("origin").at(1).get<double>();
            }
            if (s.contains("boundary")) {
                const auto& b = s.at("boundary");
                if (b.is_number())
                    d.boundary_constant = b.get<double>();
                else if (b.is_string())
                    d.boundary_expression = b.get<std::string>();
                else
                    throw ConfigError("solve.boundary must be a number or an expression string");
            }
            d.residual_target = s.value("residual_target", d.residual_target);
            d.max_iters = s.value("max_iters", d.max_iters);
            d.damping = s.value("damping", d.damping);
            d.continuation_steps = s.value("continuation_steps", d.continuation_steps);
            d.spaceform = s.value("spaceform", d.spaceform);
            d.out = s.value("out", d.out);
            src.solve = d;
            return src;
        }
    }
    throw ConfigError(std::string("'") + key +
                      "' must be an expression string, {\"grid\": path}, or {\"solve\": {...}}");
}

inline FamilyKind family_from_name(const std::string& name) {
    if (name == "semi_symmetric") return FamilyKind::SemiSymmetric;
    if (name == "tan") return FamilyKind::Tan;
    if (name == "coth") return FamilyKind::Coth;
    if (name == "tanh") return FamilyKind::Tanh;
    throw ConfigError("unknown family '" + name +
                      "' (expected semi_symmetric, tan, coth, or tanh)");
}

inline double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

// Defaults keep a*z at desk scale so curvature magnitudes stay O(1-10) and
// the absolute tolerances are meaningful.
inline std::array<std::array<double, 2>, 4> default_ranges(const FamilySpec& spec) {
    std::array<std::array<double, 2>, 4> r{{{-0.6, 0.6}, {-0.6, 0.6}, {0, 0}, {-1.0, 1.0}}};
    switch (spec.kind) {
        case FamilyKind::SemiSymmetric: r[2] = {-2.0, -0.3}; break;
        case FamilyKind::Tan: r[2] = {-1.2 / spec.a, 1.2 / spec.a}; break;
        case FamilyKind::Coth:
        case FamilyKind::Tanh: r[2] = {-1.5 / spec.a, -0.15 / spec.a}; break;
    }
    return r;
}

}  // namespace detail

inline Scenario Scenario::from_json(const nlohmann::json& j) {
    Scenario s;
    s.raw = j;
    if (!j.contains("family")) throw ConfigError("scenario is missing 'family'");
    const FamilyKind kind = detail::family_from_name(j.at("family").get<std::string>());
    const double a = j.value("a", 0.0);
    s.spec = FamilySpec::make(kind, a);
    if (s.spec.a_normalized)
        s.notes.push_back("a < 0 was mapped to |a| = " + std::to_string(s.spec.a));
    s.h_source = detail::parse_surface_source(j, "h");
    s.H_source = detail::parse_surface_source(j, "H");
    if (s.h_source.solve) throw ConfigError("'h' cannot be a solve directive");

    if (j.contains("samples")) {
        const auto& sm = j.at("samples");
        s.samples.count = sm.value("count", s.samples.count);
        if (s.samples.count < 1) throw ConfigError("samples.count must be positive");
        if (sm.contains("ranges")) {
            auto ranges = detail::default_ranges(s.spec);
            const auto& rg = sm.at("ranges");
            const char* names[4] = {"x", "y", "z", "t"};
            for (int d = 0; d < 4; ++d)
                if (rg.contains(names[d])) {
                    ranges[std::size_t(d)][0] = rg.at(names[d]).at(0).get<double>();
                    ranges[std::size_t(d)][1] = rg.at(names[d]).at(1).get<double>();
                }
            s.samples.ranges = ranges;
        }
        if (sm.contains("points"))
            for (const auto& pt : sm.at("points")) {
                if (!pt.is_array() || pt.size() != 4)
                    throw ConfigError("samples.points entries must be [x, y, z, t]");
                s.samples.points.push_back(
                    Point4{pt.at(0).get<double>(), pt.at(1).get<double>(),
                           pt.at(2).get<double>(), pt.at(3).get<double>()});
            }
        s.samples.beta_exclusion = sm.value("beta_exclusion", s.samples.beta_exclusion);
        s.samples.warp_exclusion = sm.value("warp_exclusion", s.samples.warp_exclusion);
    }
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        s.tolerances.linear = t.value("linear", s.tolerances.linear);
        s.tolerances.spectral = t.value("spectral", s.tolerances.spectral);
        s.tolerances.grid = t.value("grid", s.tolerances.grid);
        s.tolerances.pde = t.value("pde", s.tolerances.pde);
        if (t.contains("claims"))
            for (const auto& [key, val] : t.at("claims").items())
                s.tolerances.overrides[key] = val.get<double>();
    }
    s.seed = j.value("seed", std::uint64_t(1));
    s.report_path = j.value("report", std::string());
    return s;
}

// ---- claim registry -----------------------------------------------------------

// Everything computed once per accepted point; claims read from here.
struct PointData {
    Point4 p{};
    Coframe cf;
    FrameVectors fr;
    MetricJet m;
    Christoffels ch;
    CurvatureData cd;
    ConnectionForms conn;
    ClosedFormBundle bundle;
    std::array<std::array<double, 4>, 4> eq10;
    Jet alpha = {};
    Jet g211 = {}, g122 = {};
    double e_ln_alpha[4] = {};  // E_i ln alpha
    double pde_residual = 0;
    double spaceform_residual = 0;
    bool grid_mode = false;
};

enum class ClaimKind { Residual, Witness };       // Witness passes when value >= tolerance
enum class ClaimWhen { Always, Spaceform, NonSpaceform };

struct Claim {
    const char* id;
    const char* description;
    double default_tolerance;
    ClaimKind kind;
    ClaimWhen when;
    std::function<double(const PointData&)> eval;
};

namespace detail {

inline double theta_value(const PointData& d, int i, int a) {
    return d.cf.theta[std::size_t(i)][std::size_t(a)].value();
}
inline double evec(const PointData& d, int i, int a) {
    return d.fr.e[std::size_t(i)][std::size_t(a)].value();
}
inline double wedge_value(const PointData& d, int i, int j, int a, int b) {
    return theta_value(d, i, a) * theta_value(d, j, b) -
           theta_value(d, i, b) * theta_value(d, j, a);
}

inline double bracket_claim(const PointData& d, int i, int j,
                            const std::function<double(const PointData&, int)>& rhs) {
    const auto lhs = bracket_values(d.fr.e[std::size_t(i)], d.fr.e[std::size_t(j)]);
    double worst = 0;
    for (int a = 0; a < 4; ++a) worst = std::max(worst, std::abs(lhs[std::size_t(a)] - rhs(d, a)));
    return worst;
}

inline double dtheta_claim(const PointData& d, int which,
                           const std::function<double(const PointData&, int, int)>& rhs) {
    const auto lhs = d_one_form(d.cf.theta[std::size_t(which)]);
    double worst = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            worst = std::max(worst, std::abs(lhs[std::size_t(a)][std::size_t(b)] - rhs(d, a, b)));
    return worst;
}

inline double omega_form_claim(const PointData& d, int i, int j, const double expect[4]) {
    double worst = 0;
    for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(d.conn.w[i][j][k] - expect[k]));
    return worst;
}

inline Mat4Jet coordinate_two_form(const PointData& d, double c34) {
    Mat4Jet omega = zero_mat4(d.p);
    const Mat4Jet w12 = wedge_jets(d.cf.theta[0], d.cf.theta[1]);
    const Mat4Jet w34 = wedge_jets(d.cf.theta[2], d.cf.theta[3]);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            omega[std::size_t(a)][std::size_t(b)] =
                w12[std::size_t(a)][std::size_t(b)] + c34 * w34[std::size_t(a)][std::size_t(b)];
    return omega;
}

inline const std::vector<Claim>& claim_registry() {
    static const std::vector<Claim> reg = [] {
        std::vector<Claim> c;
        auto add = [&](const char* id, const char* desc, double tol,
                       std::function<double(const PointData&)> fn,
                       ClaimKind kind = ClaimKind::Residual, ClaimWhen when = ClaimWhen::Always) {
            c.push_back(Claim{id, desc, tol, kind, when, std::move(fn)});
        };

        add("pde.residual", "Delta ln H = c1 h^2 + c2 H^2 at accepted points", 1e-9,
            [](const PointData& d) { return std::abs(d.pde_residual); });

        add("metric.orthonormal", "g(E_i, E_j) = delta_ij", 1e-10, [](const PointData& d) {
            double worst = 0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    double dot = 0;
                    for (int a = 0; a < 4; ++a)
                        for (int b = 0; b < 4; ++b)
                            dot += d.m.g[std::size_t(a)][std::size_t(b)].value() * evec(d, i, a) *
                                   evec(d, j, b);
                    worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
                }
            return worst;
        });

        add("metric.block", "g = warp^2 h^2 (dx^2+dy^2) + theta3 x theta3 + theta4 x theta4",
            1e-10, [](const PointData& d) {
                const Jet f = d.cf.theta[0][0];
                double worst = 0;
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) {
                        Jet expect = d.cf.theta[2][std::size_t(a)] * d.cf.theta[2][std::size_t(b)] +
                                     d.cf.theta[3][std::size_t(a)] * d.cf.theta[3][std::size_t(b)];
                        if (a == b && a < 2) expect = expect + f * f;
                        for (int ci = 0; ci < kNumCoeffs; ++ci)
                            worst = std::max(
                                worst,
                                std::abs(d.m.g[std::size_t(a)][std::size_t(b)].c[std::size_t(ci)] -
                                         expect.c[std::size_t(ci)]));
                    }
                return worst;
            });

        add("frame.duality", "theta_i(E_j) = delta_ij", 1e-10, [](const PointData& d) {
            double worst = 0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    double pairing = 0;
                    for (int a = 0; a < 4; ++a) pairing += theta_value(d, i, a) * evec(d, j, a);
                    worst = std::max(worst, std::abs(pairing - (i == j ? 1.0 : 0.0)));
                }
            return worst;
        });

        add("eq2.bracket12", "[E1,E2] = -G211 E1 + G122 E2 + alpha E3", 1e-8,
            [](const PointData& d) {
                return bracket_claim(d, 0, 1, [](const PointData& q, int a) {
                    return -q.g211.value() * evec(q, 0, a) + q.g122.value() * evec(q, 1, a) +
                           q.cd.alpha * evec(q, 2, a);
                });
            });
        add("eq2.bracket13", "[E1,E3] = -(E2 ln alpha) E4", 1e-8, [](const PointData& d) {
            return bracket_claim(d, 0, 2, [](const PointData& q, int a) {
                return -q.e_ln_alpha[1] * evec(q, 3, a);
            });
        });
        add("eq2.bracket14", "[E1,E4] = -(alpha/2) E1 + (E2 ln alpha) E3", 1e-8,
            [](const PointData& d) {
                return bracket_claim(d, 0, 3, [](const PointData& q, int a) {
                    return -q.cd.alpha / 2.0 * evec(q, 0, a) + q.e_ln_alpha[1] * evec(q, 2, a);
                });
            });
        add("eq2.bracket23", "[E2,E3] = (E1 ln alpha) E4", 1e-8, [](const PointData& d) {
            return bracket_claim(d, 1, 2, [](const PointData& q, int a) {
                return q.e_ln_alpha[0] * evec(q, 3, a);
            });
        });
        add("eq2.bracket24", "[E2,E4] = -(alpha/2) E2 - (E1 ln alpha) E3", 1e-8,
            [](const PointData& d) {
                return bracket_claim(d, 1, 3, [](const PointData& q, int a) {
                    return -q.cd.alpha / 2.0 * evec(q, 1, a) - q.e_ln_alpha[0] * evec(q, 2, a);
                });
            });
        add("eq2.bracket34", "[E3,E4] = -(-E4 ln alpha + alpha) E3", 1e-8,
            [](const PointData& d) {
                return bracket_claim(d, 2, 3, [](const PointData& q, int a) {
                    return -(-q.e_ln_alpha[3] + q.cd.alpha) * evec(q, 2, a);
                });
            });

        add("eq3.dtheta1", "d theta1 = G211 theta1^theta2 + (alpha/2) theta1^theta4", 1e-8,
            [](const PointData& d) {
                return dtheta_claim(d, 0, [](const PointData& q, int a, int b) {
                    return q.g211.value() * wedge_value(q, 0, 1, a, b) +
                           0.5 * q.cd.alpha * wedge_value(q, 0, 3, a, b);
                });
            });
        add("eq3.dtheta2", "d theta2 = -G122 theta1^theta2 + (alpha/2) theta2^theta4", 1e-8,
            [](const PointData& d) {
                return dtheta_claim(d, 1, [](const PointData& q, int a, int b) {
                    return -q.g122.value() * wedge_value(q, 0, 1, a, b) +
                           0.5 * q.cd.alpha * wedge_value(q, 1, 3, a, b);
                });
            });
        add("eq3.dtheta3",
            "d theta3 = -alpha theta1^theta2 - E2lna theta1^theta4 + E1lna theta2^theta4 "
            "+ (alpha - E4lna) theta3^theta4",
            1e-8, [](const PointData& d) {
                return dtheta_claim(d, 2, [](const PointData& q, int a, int b) {
                    return -q.cd.alpha * wedge_value(q, 0, 1, a, b) -
                           q.e_ln_alpha[1] * wedge_value(q, 0, 3, a, b) +
                           q.e_ln_alpha[0] * wedge_value(q, 1, 3, a, b) +
                           (-q.e_ln_alpha[3] + q.cd.alpha) * wedge_value(q, 2, 3, a, b);
                });
            });
        add("eq3.dtheta4", "d theta4 = E2lna theta1^theta3 - E1lna theta2^theta3", 1e-8,
            [](const PointData& d) {
                return dtheta_claim(d, 3, [](const PointData& q, int a, int b) {
                    return q.e_ln_alpha[1] * wedge_value(q, 0, 2, a, b) -
                           q.e_ln_alpha[0] * wedge_value(q, 1, 2, a, b);
                });
            });

        add("eq4.omega31", "w31 = w24 = -(alpha/2) theta2", 1e-8, [](const PointData& d) {
            const double expect[4] = {0, -d.cd.alpha / 2.0, 0, 0};
            return std::max(omega_form_claim(d, 2, 0, expect), omega_form_claim(d, 1, 3, expect));
        });
        add("eq4.omega14", "w14 = w23 = -(alpha/2) theta1", 1e-8, [](const PointData& d) {
            const double expect[4] = {-d.cd.alpha / 2.0, 0, 0, 0};
            return std::max(omega_form_claim(d, 0, 3, expect), omega_form_claim(d, 1, 2, expect));
        });
        add("eq4.omega21", "w21 = G211 theta1 - G122 theta2 - (alpha/2) theta3", 1e-8,
            [](const PointData& d) {
                const double expect[4] = {d.g211.value(), -d.g122.value(), -d.cd.alpha / 2.0, 0};
                return omega_form_claim(d, 1, 0, expect);
            });
        add("eq4.omega34", "w34 = E2lna theta1 - E1lna theta2 + (E4lna - alpha) theta3", 1e-8,
            [](const PointData& d) {
                const double expect[4] = {d.e_ln_alpha[1], -d.e_ln_alpha[0],
                                          d.e_ln_alpha[3] - d.cd.alpha, 0};
                return omega_form_claim(d, 2, 3, expect);
            });

        add("eq7.k12",
            "K(E1,E2) = E1 G122 + E2 G211 - G211^2 - G122^2 - alpha^2 from the Gamma jets", 1e-7,
            [](const PointData& d) {
                const double k12 = field_derivative(d.fr.e[0], d.g122).value() +
                                   field_derivative(d.fr.e[1], d.g211).value() -
                                   d.g211.value() * d.g211.value() -
                                   d.g122.value() * d.g122.value() - d.cd.lee_sq;
                return std::abs(d.cd.K12 - k12);
            });

        add("eq9.lee_identity", "|theta|^2 + delta theta = 2 E4 alpha - alpha^2", 1e-8,
            [](const PointData& d) {
                return std::abs(d.cd.lee_sq + d.cd.delta_theta_generic -
                                (2.0 * d.cd.e4_alpha - d.cd.lee_sq));
            });
        add("eq9.family_constant", "2 E4 alpha - alpha^2 equals 0 / 4a^2 / -4a^2 / -4a^2", 1e-8,
            [](const PointData&) { return 0.0; });  // family-dependent; filled in by the runner

        add("eq10.ricci", "numeric Ricci equals the general eq10 expressions", 1e-7,
            [](const PointData& d) {
                double worst = 0;
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j)
                        worst = std::max(worst, std::abs(d.cd.ricci[i][j] -
                                                         d.eq10[std::size_t(i)][std::size_t(j)]));
                return worst;
            });

        add("riemann.symmetries", "antisymmetry, pair symmetry, first Bianchi", 1e-8,
            [](const PointData& d) {
                const auto& r = d.cd.riemann.r;
                double worst = 0;
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b)
                        for (int cc = 0; cc < 4; ++cc)
                            for (int e = 0; e < 4; ++e) {
                                worst = std::max(worst, std::abs(r[a][b][cc][e] + r[b][a][cc][e]));
                                worst = std::max(worst, std::abs(r[a][b][cc][e] + r[a][b][e][cc]));
                                worst = std::max(worst, std::abs(r[a][b][cc][e] - r[cc][e][a][b]));
                                worst = std::max(worst, std::abs(r[a][b][cc][e] +
                                                                 r[b][cc][a][e] +
                                                                 r[cc][a][b][e]));
                            }
                return worst;
            });

        add("ricci.j_invariance", "Ric(JX, JY) = Ric(X, Y)", 1e-7, [](const PointData& d) {
            double worst = 0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    double jij = 0;
                    for (int mi = 0; mi < 4; ++mi)
                        for (int mj = 0; mj < 4; ++mj)
                            jij += kJopp[mi][i] * kJopp[mj][j] * d.cd.ricci[mi][mj];
                    worst = std::max(worst, std::abs(d.cd.ricci[i][j] - jij));
                }
            return worst;
        });

        add("lee.d_omega", "d Omega = 2 theta ^ Omega with theta = -alpha theta4", 1e-8,
            [](const PointData& d) {
                const Mat4Jet omega = coordinate_two_form(d, +1.0);
                double theta_coord[4];
                for (int a = 0; a < 4; ++a)
                    theta_coord[a] = -(d.cd.alpha * theta_value(d, 3, a));
                double worst = 0;
                for (int a = 0; a < 4; ++a)
                    for (int b = a + 1; b < 4; ++b)
                        for (int cc = b + 1; cc < 4; ++cc) {
                            const double lhs = d_two_form_component(omega, a, b, cc);
                            const double rhs =
                                2.0 *
                                (theta_coord[a] * omega[std::size_t(b)][std::size_t(cc)].value() +
                                 theta_coord[b] * omega[std::size_t(cc)][std::size_t(a)].value() +
                                 theta_coord[cc] * omega[std::size_t(a)][std::size_t(b)].value());
                            worst = std::max(worst, std::abs(lhs - rhs));
                        }
                return worst;
            });

        add("kahler.d_omega_bar", "d Omega_bar = 0", 1e-9, [](const PointData& d) {
            const Mat4Jet omega_bar = coordinate_two_form(d, -1.0);
            double worst = 0;
            for (int a = 0; a < 4; ++a)
                for (int b = a + 1; b < 4; ++b)
                    for (int cc = b + 1; cc < 4; ++cc)
                        worst = std::max(worst,
                                         std::abs(d_two_form_component(omega_bar, a, b, cc)));
            return worst;
        });

        add("kahler.nabla_omega_bar", "nabla Omega_bar = 0 (J_bar is Kaehler)", 1e-8,
            [](const PointData& d) {
                return nabla_form_max_norm(d.conn, FormBasis::standard().omega_bar);
            });

        add("kahler.nijenhuis_jbar", "N(J_bar) = 0", 1e-8, [](const PointData& d) {
            return nijenhuis_residual(kJbar, d.fr, d.cf);
        });
        add("hermitian.nijenhuis_j", "N(J) = 0 (J integrable, non-Kaehler)", 1e-8,
            [](const PointData& d) { return nijenhuis_residual(kJopp, d.fr, d.cf); });

        add("hermitian.nabla_omega",
            "nabla Omega = alpha (theta1 (x) Phi + theta2 (x) Psi) componentwise", 1e-8,
            [](const PointData& d) {
                const FormBasis basis = FormBasis::standard();
                const auto grad = nabla_two_form(d.conn, basis.omega);
                double worst = 0;
                for (int k = 0; k < 4; ++k)
                    for (int i = 0; i < 4; ++i)
                        for (int j = 0; j < 4; ++j) {
                            double expect = 0;
                            if (k == 0) expect = d.cd.alpha * basis.phi[i][j];
                            if (k == 1) expect = d.cd.alpha * basis.psi[i][j];
                            worst = std::max(
                                worst, std::abs(grad[std::size_t(k)][std::size_t(i)][std::size_t(j)] -
                                                expect));
                        }
                return worst;
            });
        add("hermitian.nabla_omega_norm", "||nabla Omega||^2 = 2 alpha^2", 1e-7,
            [](const PointData& d) {
                const double norm =
                    nabla_form_max_norm(d.conn, FormBasis::standard().omega);
                return std::abs(norm * norm - 2.0 * d.cd.lee_sq);
            });

        add("thm.ii.gamma", "closed Gamma^2_11, Gamma^1_22 match d theta1, d theta2", 1e-8,
            [](const PointData& d) {
                // d theta1(E1, E2) = Gamma^2_11 and d theta2(E1, E2) = -Gamma^1_22
                const auto d1 = d_one_form(d.cf.theta[0]);
                const auto d2 = d_one_form(d.cf.theta[1]);
                double g211 = 0, g122 = 0;
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) {
                        g211 += d1[std::size_t(a)][std::size_t(b)] * evec(d, 0, a) * evec(d, 1, b);
                        g122 -= d2[std::size_t(a)][std::size_t(b)] * evec(d, 0, a) * evec(d, 1, b);
                    }
                return std::max(std::abs(g211 - d.bundle.gamma211),
                                std::abs(g122 - d.bundle.gamma122));
            });

        add("thm.iii.ricci", "Ricci matches the family closed form (diagonal blocks)", 1e-7,
            [](const PointData& d) {
                double worst = std::max(std::abs(d.cd.ricci[0][0] - d.bundle.ricci_perp),
                                        std::abs(d.cd.ricci[1][1] - d.bundle.ricci_perp));
                worst = std::max(worst, std::abs(d.cd.ricci[2][2] - d.bundle.ricci_delta));
                worst = std::max(worst, std::abs(d.cd.ricci[3][3] - d.bundle.ricci_delta));
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j)
                        if (i != j) worst = std::max(worst, std::abs(d.cd.ricci[i][j]));
                return worst;
            });
        add("thm.iv.tau", "tau matches the family closed form", 1e-7, [](const PointData& d) {
            return std::abs(d.cd.tau - d.bundle.tau);
        });
        add("thm.v.kappa", "kappa matches the family closed form", 1e-7, [](const PointData& d) {
            return std::abs(d.cd.kappa - d.bundle.kappa);
        });
        add("thm.vi.wminus", "W- spectrum matches (kappa/6, -kappa/12, -kappa/12)", 1e-6,
            [](const PointData& d) {
                std::array<double, 3> expect = d.bundle.wminus_eigs;
                std::sort(expect.begin(), expect.end());
                double worst = 0;
                for (int i = 0; i < 3; ++i)
                    worst = std::max(worst, std::abs(d.cd.wminus.eigs[std::size_t(i)] -
                                                     expect[std::size_t(i)]));
                return worst;
            });
        add("thm.vii.k12", "K(E1,E2) matches the family closed form", 1e-7, [](const PointData& d) {
            return std::abs(d.cd.K12 - d.bundle.K12);
        });
        add("thm.vii.k34", "K(E3,E4) matches the family closed form", 1e-7, [](const PointData& d) {
            return std::abs(d.cd.K34 - d.bundle.K34);
        });

        add("wminus.degenerate", "numeric W- spectrum is (kappa/6, -kappa/12, -kappa/12)", 1e-6,
            [](const PointData& d) {
                std::array<double, 3> expect{d.cd.kappa / 6.0, -d.cd.kappa / 12.0,
                                             -d.cd.kappa / 12.0};
                std::sort(expect.begin(), expect.end());
                double worst = std::abs(d.cd.wminus.trace);
                for (int i = 0; i < 3; ++i)
                    worst = std::max(worst, std::abs(d.cd.wminus.eigs[std::size_t(i)] -
                                                     expect[std::size_t(i)]));
                return worst;
            });

        add("eq1.decomposition", "R = a Pi + b Phi + c Psi with coefficients from tau, delta, kappa", 1e-6,
            [](const PointData& d) {
                return decomposition_check(d.cd, d.grid_mode ? 1e-3 : 1e-6);
            });

        add("qch.spread", "holomorphic curvature depends only on |X_Delta|", 1e-7,
            [](const PointData& d) {
                std::mt19937_64 rng(0x9e3779b97f4a7c15ull ^ std::uint64_t(d.p[0] * 4096) ^
                                    (std::uint64_t(d.p[2] * 4096) << 20));
                const QchScan scan = qch_scan(d.cd, rng, 32);
                double worst = 0;
                for (double s : scan.spread) worst = std::max(worst, s);
                return worst;
            });
        add("qch.fit", "phi(t) = a + b t^2 + c t^4 fits the scan", 1e-7, [](const PointData& d) {
            std::mt19937_64 rng(0xdeadbeefcafef00dull ^ std::uint64_t(d.p[1] * 4096));
            return qch_scan(d.cd, rng, 32).fit_residual;
        });

        add("spaceform.r_eq_cpi", "R = c_H Pi at space-form points", 1e-6,
            [](const PointData&) { return 0.0; }, ClaimKind::Residual, ClaimWhen::Spaceform);
        add("spaceform.tau", "tau equals the space-form value", 1e-6,
            [](const PointData&) { return 0.0; }, ClaimKind::Residual, ClaimWhen::Spaceform);
        add("spaceform.wminus_zero", "W- = 0 at space-form points", 1e-8,
            [](const PointData& d) { return d.cd.wminus.tensor_norm; }, ClaimKind::Residual,
            ClaimWhen::Spaceform);
        add("remark.wminus_nonzero", "W- stays away from zero off the space-form locus", 1e-6,
            [](const PointData& d) { return d.cd.wminus.tensor_norm; }, ClaimKind::Witness,
            ClaimWhen::NonSpaceform);
        return c;
    }();
    return reg;
}

}  // namespace detail

// ---- report -------------------------------------------------------------------

struct ClaimResult {
    std::string id;
    std::string description;
    std::string status;  // "pass" | "fail" | "skipped"
    double extremum = 0;  // max residual, or min witness value
    double tolerance = 0;
    Point4 worst_point{};
    int points = 0;
};

struct Rejection {
    Point4 point{};
    std::string reason;
    double pde_residual = 0;
};

struct VerificationReport {
    bool pass = false;
    std::vector<ClaimResult> claims;
    std::vector<Rejection> rejections;
    std::vector<std::string> findings;
    std::vector<std::string> notes;
    int points_accepted = 0;
    std::uint64_t seed = 0;
    nlohmann::json scenario_echo;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["engine"] = {{"name", "calabi"}, {"version", kEngineVersion}};
        j["scenario"] = scenario_echo;
        j["seed"] = seed;
        int np = 0, nf = 0, ns = 0;
        for (const auto& c : claims) {
            if (c.status == "pass") ++np;
            if (c.status == "fail") ++nf;
            if (c.status == "skipped") ++ns;
        }
        j["summary"] = {{"pass", pass},
                        {"claims_pass", np},
                        {"claims_fail", nf},
                        {"claims_skipped", ns},
                        {"points_accepted", points_accepted},
                        {"points_rejected", rejections.size()}};
        j["claims"] = nlohmann::json::array();
        for (const auto& c : claims)
            j["claims"].push_back({{"id", c.id},
                                   {"description", c.description},
                                   {"status", c.status},
                                   {"extremum", c.extremum},
                                   {"tolerance", c.tolerance},
                                   {"worst_point", c.worst_point},
                                   {"points", c.points}});
        j["rejections"] = nlohmann::json::array();
        for (const auto& r : rejections)
            j["rejections"].push_back(
                {{"point", r.point}, {"reason", r.reason}, {"pde_residual", r.pde_residual}});
        j["findings"] = findings;
        j["notes"] = notes;
        return j;
    }
};

namespace detail {

struct PreparedScenario {
    SurfacePair pair;
    bool grid_mode = false;
    std::shared_ptr<const Grid2D> alignment_grid;  // sampling snaps to its nodes
};

inline SurfaceFunc make_surface(const SurfaceSourceSpec& src, const Bindings& bindings,
                                std::shared_ptr<const Grid2D>* grid_out) {
    if (src.expression) {
        try {
            return SurfaceFunc::expression(*src.expression, bindings);
        } catch (const ParseError& e) {
            throw ConfigError(std::string("bad surface expression: ") + e.what());
        }
    }
    if (src.grid_path) {
        auto g = std::make_shared<Grid2D>(read_grid_csv(*src.grid_path));
        if (grid_out) *grid_out = g;
        return SurfaceFunc::grid(g);
    }
    throw ConfigError("surface source is a solve directive; run the solve first");
}

inline PreparedScenario prepare(const Scenario& s) {
    if (s.H_source.solve)
        throw ConfigError("H is a solve directive; run 'solve' and feed the grid back in");
    PreparedScenario out{SurfacePair{SurfaceFunc::expression("1"), SurfaceFunc::expression("1")},
                         false, nullptr};
    const Bindings bindings{{"a", s.spec.a}};
    std::shared_ptr<const Grid2D> gh, gH;
    out.pair.h = make_surface(s.h_source, bindings, &gh);
    out.pair.H = make_surface(s.H_source, bindings, &gH);
    if (gh && gH && !gh->same_shape(*gH))
        throw ConfigError("h and H grids have different geometry");
    out.alignment_grid = gH ? gH : gh;
    out.grid_mode = bool(out.alignment_grid);
    return out;
}

inline PointData analyze_point(const FamilySpec& spec, const SurfacePair& pair, const Point4& p) {
    PointData d;
    d.p = p;
    d.cf = build_coframe(spec, pair, p);
    d.fr = build_frame(spec, pair, p);
    d.m = metric_from_coframe(d.cf);
    d.ch = levi_civita(d.m);
    const RiemannCoord rc = riemann_from_christoffels(d.m, d.ch);
    d.cd = frame_curvature(rc, d.fr, d.cf, d.m, d.ch, spec);
    d.conn = connection_forms_frame(d.fr, d.cf, d.m, d.ch);
    d.bundle = closed_forms(spec, pair, p);
    d.eq10 = general_ricci_eq10(spec, pair, p);
    d.alpha = alpha_at(spec, p);
    const auto [g211, g122] = gamma_jets(spec, pair, p);
    d.g211 = g211;
    d.g122 = g122;
    for (int i = 0; i < 4; ++i)
        d.e_ln_alpha[i] =
            field_derivative(d.fr.e[std::size_t(i)], d.alpha).value() / d.alpha.value();
    d.pde_residual = pde_residual(spec, pair, p[0], p[1]);
    d.spaceform_residual = spaceform_residual(spec, pair, p[0], p[1]);
    return d;
}

}  // namespace detail

inline VerificationReport run_verify(const Scenario& s) {
    const auto prepared = detail::prepare(s);
    VerificationReport report;
    report.seed = s.seed;
    report.scenario_echo = s.raw;
    report.notes = s.notes;

    const double pde_tol = s.tolerances.overrides.count("pde.residual")
                               ? s.tolerances.overrides.at("pde.residual")
                               : (prepared.grid_mode
                                      ? std::max(s.tolerances.pde, s.tolerances.grid)
                                      : s.tolerances.pde);
    const double sf_tol = std::max(pde_tol, 1e-8);

    // ---- sample admissible points
    std::mt19937_64 rng(s.seed);
    std::vector<PointData> accepted;
    auto ranges = s.samples.ranges ? *s.samples.ranges : detail::default_ranges(s.spec);

    auto try_point = [&](const Point4& p) {
        if (!point_admissible(s.spec, p, s.samples.beta_exclusion, s.samples.warp_exclusion)) {
            report.rejections.push_back({p, "outside chart domain or exclusion band", 0.0});
            return;
        }
        double pde_res = 0;
        try {
            pde_res = pde_residual(s.spec, prepared.pair, p[0], p[1]);
        } catch (const DomainError& e) {
            report.rejections.push_back({p, std::string("surface evaluation: ") + e.what(), 0.0});
            return;
        }
        if (std::abs(pde_res) > pde_tol) {
            report.rejections.push_back({p, "PDE constraint residual exceeds tolerance", pde_res});
            return;
        }
        PointData d = detail::analyze_point(s.spec, prepared.pair, p);
        d.grid_mode = prepared.grid_mode;
        accepted.push_back(std::move(d));
    };

    for (const Point4& p : s.samples.points) try_point(p);
    const int wanted = s.samples.count;
    int attempts = 0;
    const int max_attempts = wanted * 60;
    while (int(accepted.size()) < wanted && attempts < max_attempts) {
        ++attempts;
        Point4 p;
        if (prepared.grid_mode) {
            const auto& g = *prepared.alignment_grid;
            const int i = 2 + int(detail::uniform01(rng) * (g.nx - 4));
            const int j = 2 + int(detail::uniform01(rng) * (g.ny - 4));
            p[0] = g.x_of(std::min(i, g.nx - 3));
            p[1] = g.y_of(std::min(j, g.ny - 3));
        } else {
            p[0] = ranges[0][0] + (ranges[0][1] - ranges[0][0]) * detail::uniform01(rng);
            p[1] = ranges[1][0] + (ranges[1][1] - ranges[1][0]) * detail::uniform01(rng);
        }
        p[2] = ranges[2][0] + (ranges[2][1] - ranges[2][0]) * detail::uniform01(rng);
        p[3] = ranges[3][0] + (ranges[3][1] - ranges[3][0]) * detail::uniform01(rng);
        try_point(p);
    }
    report.points_accepted = int(accepted.size());

    // ---- evaluate the registry
    const auto& registry = detail::claim_registry();
    for (const Claim& claim : registry) {
        ClaimResult res;
        res.id = claim.id;
        res.description = claim.description;
        double tol = claim.default_tolerance;
        if (prepared.grid_mode && claim.kind == ClaimKind::Residual)
            tol = std::max(tol, s.tolerances.grid);
        if (res.id == "pde.residual") tol = pde_tol;
        if (auto it = s.tolerances.overrides.find(res.id); it != s.tolerances.overrides.end())
            tol = it->second;
        res.tolerance = tol;

        bool any = false;
        for (const PointData& d : accepted) {
            const bool is_sf = std::abs(d.spaceform_residual) <= sf_tol;
            if (claim.when == ClaimWhen::Spaceform && !is_sf) continue;
            if (claim.when == ClaimWhen::NonSpaceform && is_sf) continue;

            double value = 0;
            if (res.id == "spaceform.r_eq_cpi") {
                const double cH = spaceform_expected(s.spec).holomorphic;
                double worst = 0;
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j)
                        for (int k = 0; k < 4; ++k)
                            for (int l = 0; l < 4; ++l)
                                worst = std::max(worst,
                                                 std::abs(d.cd.riemann.r[i][j][k][l] -
                                                          cH * pi_tensor(i, j, k, l)));
                value = worst;
            } else if (res.id == "spaceform.tau") {
                value = std::abs(d.cd.tau - spaceform_expected(s.spec).tau);
            } else if (res.id == "eq9.family_constant") {
                value = std::abs(2.0 * d.cd.e4_alpha - d.cd.lee_sq - lee_constant(s.spec));
            } else {
                try {
                    value = claim.eval(d);
                } catch (const std::exception& e) {
                    value = std::numeric_limits<double>::infinity();
                    report.findings.push_back(std::string("claim ") + res.id +
                                              " raised: " + e.what());
                }
            }

            if (!any) {
                res.extremum = value;
                res.worst_point = d.p;
                any = true;
            } else if ((claim.kind == ClaimKind::Residual && value > res.extremum) ||
                       (claim.kind == ClaimKind::Witness && value < res.extremum)) {
                res.extremum = value;
                res.worst_point = d.p;
            }
            ++res.points;
        }
        if (!any) {
            res.status = "skipped";
        } else if (claim.kind == ClaimKind::Residual) {
            res.status = res.extremum <= tol ? "pass" : "fail";
        } else {
            res.status = res.extremum >= tol ? "pass" : "fail";
        }
        if (res.status == "fail" &&
            (res.id.rfind("thm.", 0) == 0 || res.id == "eq10.ricci" || res.id == "eq7.k12")) {
            std::ostringstream os;
            os << "closed-form vs numeric disagreement: " << res.id << " extremum "
               << res.extremum << " (tolerance " << tol << ") at point (" << res.worst_point[0]
               << ", " << res.worst_point[1] << ", " << res.worst_point[2] << ", "
               << res.worst_point[3] << ")";
            report.findings.push_back(os.str());
        }
        report.claims.push_back(std::move(res));
    }
    std::sort(report.claims.begin(), report.claims.end(),
              [](const ClaimResult& a, const ClaimResult& b) { return a.id < b.id; });

    bool any_fail = false;
    for (const auto& c : report.claims) any_fail = any_fail || c.status == "fail";
    report.pass = !any_fail && report.points_accepted > 0;
    if (report.points_accepted == 0)
        report.notes.push_back("no admissible points: every sample was rejected");
    return report;
}

// ---- profile ------------------------------------------------------------------

// One row per sampled coordinate: the closed forms are always printed, the
// numeric columns are nan where the frame degenerates.
inline std::string run_profile(const Scenario& s, int axis, int count) {
    if (axis != 2 && axis != 3) throw ConfigError("profile axis must be z (2) or t (3)");
    if (count < 2) throw ConfigError("profile needs at least 2 points");
    const auto prepared = detail::prepare(s);
    auto ranges = s.samples.ranges ? *s.samples.ranges : detail::default_ranges(s.spec);

    Point4 base;
    if (!s.samples.points.empty()) {
        base = s.samples.points.front();
    } else {
        for (int d = 0; d < 4; ++d)
            base[std::size_t(d)] = 0.5 * (ranges[std::size_t(d)][0] + ranges[std::size_t(d)][1]);
    }

    std::ostringstream csv;
    csv.setf(std::ios::fmtflags(0), std::ios::floatfield);
    csv.precision(12);
    csv << "coordinate,tau_numeric,tau_closed,kappa_numeric,kappa_closed,"
           "k12_numeric,k12_closed,k34_numeric,k34_closed,"
           "wminus_eig1,wminus_eig2,wminus_eig3\n";
    const double lo = ranges[std::size_t(axis)][0], hi = ranges[std::size_t(axis)][1];
    for (int i = 0; i < count; ++i) {
        Point4 p = base;
        p[std::size_t(axis)] = lo + (hi - lo) * double(i) / double(count - 1);
        csv << p[std::size_t(axis)];

        bool closed_ok = true;
        ClosedFormBundle bundle;
        try {
            bundle = closed_forms(s.spec, prepared.pair, p);
        } catch (const std::exception&) {
            closed_ok = false;
        }
        bool numeric_ok =
            point_admissible(s.spec, p, s.samples.beta_exclusion, s.samples.warp_exclusion);
        PointData d;
        if (numeric_ok) {
            try {
                d = detail::analyze_point(s.spec, prepared.pair, p);
            } catch (const std::exception&) {
                numeric_ok = false;
            }
        }
        auto emit = [&](bool ok, double v) {
            csv << ",";
            if (ok)
                csv << v;
            else
                csv << "nan";
        };
        emit(numeric_ok, d.cd.tau);
        emit(closed_ok, bundle.tau);
        emit(numeric_ok, d.cd.kappa);
        emit(closed_ok, bundle.kappa);
        emit(numeric_ok, d.cd.K12);
        emit(closed_ok, bundle.K12);
        emit(numeric_ok, d.cd.K34);
        emit(closed_ok, bundle.K34);
        for (int e = 0; e < 3; ++e) emit(numeric_ok, d.cd.wminus.eigs[std::size_t(e)]);
        csv << "\n";
    }
    return csv.str();
}

// ---- solve --------------------------------------------------------------------

struct SolveOutcome {
    bool converged = false;
    double residual = 0;
    int grid_nx = 0, grid_ny = 0;
    std::string h_out, H_out;
    nlohmann::json summary;
};

inline SolveOutcome run_solve(const Scenario& s, const std::string& out_override = "") {
    if (!s.H_source.solve)
        throw ConfigError("scenario's H is not a solve directive; nothing to solve");
    const SolveDirective d = *s.H_source.solve;
    const std::string out_path = out_override.empty() ? d.out : out_override;

    SolveOutcome outcome;
    outcome.grid_nx = d.nx;
    outcome.grid_ny = d.ny;

    Grid2D h_grid = Grid2D::make(d.nx, d.ny, d.spacing, d.x0, d.y0);
    const Bindings bindings{{"a", s.spec.a}};
    if (s.h_source.expression) {
        const ExprPtr h_ast = parse(*s.h_source.expression);
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i)
                h_grid.at(i, j) = eval_value(*h_ast, h_grid.x_of(i), h_grid.y_of(j), bindings);
    } else if (s.h_source.grid_path) {
        h_grid = read_grid_csv(*s.h_source.grid_path);
        if (h_grid.nx != d.nx || h_grid.ny != d.ny)
            throw ConfigError("h grid geometry does not match the solve directive");
    }

    SolveConfig cfg;
    cfg.residual_target = d.residual_target;
    cfg.max_iters = d.max_iters;
    cfg.damping = d.damping;
    cfg.continuation_steps = d.continuation_steps;
    if (d.boundary_constant) {
        cfg.boundary = BoundaryValues::constant(d.nx, d.ny, *d.boundary_constant);
    } else if (d.boundary_expression) {
        const ExprPtr b_ast = parse(*d.boundary_expression);
        cfg.boundary = BoundaryValues::from_function(h_grid, [&](double x, double y) {
            return eval_value(*b_ast, x, y, bindings);
        });
    } else if (!d.spaceform) {
        throw ConfigError("solve directive needs a 'boundary' (constant or expression)");
    }

    auto finish = [&](const Grid2D& H, bool converged, double residual, int iterations) {
        write_grid_csv(H, out_path);
        outcome.converged = converged;
        outcome.residual = residual;
        outcome.H_out = out_path;
        outcome.summary = {{"engine", {{"name", "calabi"}, {"version", kEngineVersion}}},
                           {"converged", converged},
                           {"residual", residual},
                           {"iterations", iterations},
                           {"grid", {{"nx", d.nx},
                                     {"ny", d.ny},
                                     {"spacing", d.spacing},
                                     {"origin", {d.x0, d.y0}}}},
                           {"H", out_path}};
        if (!outcome.h_out.empty()) outcome.summary["h"] = outcome.h_out;
    };

    try {
        if (d.spaceform) {
            SolveConfig sf_cfg = cfg;
            sf_cfg.boundary = BoundaryValues::constant(d.nx, d.ny, 0.0);  // taken from the seed
            const auto [h_sf, H_sf] =
                spaceform_pair(s.spec, d.nx, d.ny, d.spacing, d.x0, d.y0, sf_cfg);
            const std::string h_path = out_path + ".h.csv";
            write_grid_csv(h_sf, h_path);
            outcome.h_out = h_path;
            const Grid2D res = residual_grid(s.spec, h_sf, H_sf);
            double worst = 0;
            for (double v : res.values) worst = std::max(worst, std::abs(v));
            finish(H_sf, true, worst, -1);
        } else {
            int iters = 0;
            SolveConfig counted = cfg;
            counted.on_iteration = [&](int it, double) { iters = it; };
            const Grid2D H = solve_H(s.spec, h_grid, counted);
            const Grid2D res = residual_grid(s.spec, h_grid, H);
            double worst = 0;
            for (double v : res.values) worst = std::max(worst, std::abs(v));
            finish(H, true, worst, iters);
        }
    } catch (const NonConvergence& e) {
        finish(e.best, false, e.best_residual, e.iterations);
    }
    return outcome;
}

}  // namespace calabi
