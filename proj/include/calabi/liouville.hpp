#pragma once

// Damped-Newton solver for the family constraint Delta ln H = c1 h^2 + c2 H^2
// on a rectangle with Dirichlet data, plus the coupled space-form system
// (Delta ln h, Delta ln H) and grid residual certification.  The five-point
// Laplacian is the discrete operator throughout; steps are accepted only if
// they decrease the residual norm (backtracking with floor 2^-20).

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "calabi/errors.hpp"
#include "calabi/family.hpp"
#include "calabi/grid.hpp"

namespace calabi {

struct BoundaryValues {
    std::vector<double> bottom, top, left, right;  // left/right exclude the corners

    static BoundaryValues constant(int nx, int ny, double v) {
        BoundaryValues b;
        b.bottom.assign(std::size_t(nx), v);
        b.top.assign(std::size_t(nx), v);
        b.left.assign(std::size_t(ny - 2), v);
        b.right.assign(std::size_t(ny - 2), v);
        return b;
    }

    static BoundaryValues from_function(const Grid2D& geom,
                                        const std::function<double(double, double)>& f) {
        BoundaryValues b;
        for (int i = 0; i < geom.nx; ++i) {
            b.bottom.push_back(f(geom.x_of(i), geom.y_of(0)));
            b.top.push_back(f(geom.x_of(i), geom.y_of(geom.ny - 1)));
        }
        for (int j = 1; j < geom.ny - 1; ++j) {
            b.left.push_back(f(geom.x_of(0), geom.y_of(j)));
            b.right.push_back(f(geom.x_of(geom.nx - 1), geom.y_of(j)));
        }
        return b;
    }

    void validate(int nx, int ny) const {
        auto expect = [](const char* edge, std::size_t got, std::size_t want) {
            if (got != want)
                throw ConfigError(std::string("boundary.") + edge + ": expected " +
                                  std::to_string(want) + " values, got " + std::to_string(got));
        };
        expect("bottom", bottom.size(), std::size_t(nx));
        expect("top", top.size(), std::size_t(nx));
        expect("left", left.size(), std::size_t(ny - 2));
        expect("right", right.size(), std::size_t(ny - 2));
    }

    void apply(Grid2D& u) const {
        validate(u.nx, u.ny);
        for (int i = 0; i < u.nx; ++i) {
            u.at(i, 0) = bottom[std::size_t(i)];
            u.at(i, u.ny - 1) = top[std::size_t(i)];
        }
        for (int j = 1; j < u.ny - 1; ++j) {
            u.at(0, j) = left[std::size_t(j - 1)];
            u.at(u.nx - 1, j) = right[std::size_t(j - 1)];
        }
    }
};

struct SolveConfig {
    BoundaryValues boundary;
    double damping = 1.0;  // initial step fraction, halved until the residual drops
    int max_iters = 50;
    double residual_target = 1e-10;
    int continuation_steps = 0;  // > 0: ramp a up from a/steps, reusing iterates
    std::function<void(int, double)> on_iteration;  // (iteration, residual norm)
};

struct NonConvergence : std::runtime_error {
    Grid2D best;
    double best_residual;
    int iterations;
    NonConvergence(Grid2D g, double r, int it)
        : std::runtime_error("Newton did not reach the residual target: best " +
                             std::to_string(r) + " after " + std::to_string(it) + " iterations"),
          best(std::move(g)),
          best_residual(r),
          iterations(it) {}
};

namespace detail {

inline double laplace5(const Grid2D& u, int i, int j) {
    const double s2 = u.spacing * u.spacing;
    return (u.at(i + 1, j) + u.at(i - 1, j) + u.at(i, j + 1) + u.at(i, j - 1) -
            4.0 * u.at(i, j)) /
           s2;
}

// residual of Delta5 u - c1 h^2 - c2 e^{2u} on the interior
inline double newton_residual(const Grid2D& u, const Grid2D& h, double c1, double c2,
                              Grid2D* out = nullptr) {
    double worst = 0;
    for (int j = 1; j < u.ny - 1; ++j)
        for (int i = 1; i < u.nx - 1; ++i) {
            const double hv = h.at(i, j);
            const double r = laplace5(u, i, j) - c1 * hv * hv - c2 * std::exp(2.0 * u.at(i, j));
            if (out) out->at(i, j) = r;
            worst = std::max(worst, std::abs(r));
        }
    return worst;
}

inline Grid2D solve_H_once(const FamilySpec& spec, const Grid2D& h, const SolveConfig& cfg,
                           const Grid2D* initial) {
    for (double v : h.values)
        if (!(v > 0.0)) throw DomainError("solve_H: h must be positive on the grid");
    const auto [c1, c2] = pde_coefficients(spec);
    const int nx = h.nx, ny = h.ny;
    cfg.boundary.validate(nx, ny);

    Grid2D u = initial ? *initial : Grid2D::make(nx, ny, h.spacing, h.x0, h.y0);
    if (!initial) {
        double mean = 0;
        for (double v : cfg.boundary.bottom) mean += v;
        for (double v : cfg.boundary.top) mean += v;
        for (double v : cfg.boundary.left) mean += v;
        for (double v : cfg.boundary.right) mean += v;
        mean /= double(2 * nx + 2 * (ny - 2));
        for (auto& v : u.values) v = mean;
    }
    cfg.boundary.apply(u);

    const int mx = nx - 2, my = ny - 2;
    const int n = mx * my;
    auto idx = [&](int i, int j) { return (i - 1) + (j - 1) * mx; };
    const double s2 = h.spacing * h.spacing;

    double res = newton_residual(u, h, c1, c2);
    if (cfg.on_iteration) cfg.on_iteration(0, res);
    Grid2D best = u;
    double best_res = res;

    for (int iter = 1; iter <= cfg.max_iters && res > cfg.residual_target; ++iter) {
        Eigen::VectorXd rhs(n);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(std::size_t(n) * 5);
        for (int j = 1; j < ny - 1; ++j)
            for (int i = 1; i < nx - 1; ++i) {
                const int row = idx(i, j);
                const double hv = h.at(i, j);
                rhs(row) = -(laplace5(u, i, j) - c1 * hv * hv - c2 * std::exp(2.0 * u.at(i, j)));
                trip.emplace_back(row, row, -4.0 / s2 - 2.0 * c2 * std::exp(2.0 * u.at(i, j)));
                if (i > 1) trip.emplace_back(row, idx(i - 1, j), 1.0 / s2);
                if (i < nx - 2) trip.emplace_back(row, idx(i + 1, j), 1.0 / s2);
                if (j > 1) trip.emplace_back(row, idx(i, j - 1), 1.0 / s2);
                if (j < ny - 2) trip.emplace_back(row, idx(i, j + 1), 1.0 / s2);
            }
        Eigen::SparseMatrix<double> jac(n, n);
        jac.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
        if (lu.info() != Eigen::Success)
            throw NonConvergence(best, best_res, iter - 1);
        const Eigen::VectorXd step = lu.solve(rhs);

        double lambda = cfg.damping;
        bool accepted = false;
        while (lambda >= 0x1.0p-20) {
            Grid2D trial = u;
            for (int j = 1; j < ny - 1; ++j)
                for (int i = 1; i < nx - 1; ++i) trial.at(i, j) += lambda * step(idx(i, j));
            const double trial_res = newton_residual(trial, h, c1, c2);
            if (trial_res < res) {
                u = std::move(trial);
                res = trial_res;
                accepted = true;
                break;
            }
            lambda /= 2.0;
        }
        if (cfg.on_iteration) cfg.on_iteration(iter, res);
        if (res < best_res) {
            best = u;
            best_res = res;
        }
        if (!accepted) break;  // backtracking floor: no descent direction left
    }
    if (best_res > cfg.residual_target) throw NonConvergence(best, best_res, cfg.max_iters);
    Grid2D H = best;
    for (auto& v : H.values) v = std::exp(v);
    return H;
}

}  // namespace detail

// Solve Delta ln H = c1 h^2 + c2 H^2 for H given h; boundary data is ln H.
inline Grid2D solve_H(const FamilySpec& spec, const Grid2D& h, const SolveConfig& cfg) {
    if (cfg.continuation_steps <= 0) return detail::solve_H_once(spec, h, cfg, nullptr);
    Grid2D u = Grid2D::make(h.nx, h.ny, h.spacing, h.x0, h.y0);
    cfg.boundary.apply(u);
    Grid2D H = u;
    for (int step = 1; step <= cfg.continuation_steps; ++step) {
        FamilySpec ramp = spec;
        if (spec.kind != FamilyKind::SemiSymmetric)
            ramp = FamilySpec::make(spec.kind, spec.a * double(step) / cfg.continuation_steps);
        Grid2D init = H;
        if (step > 1)
            for (auto& v : init.values) v = std::log(v);
        H = detail::solve_H_once(ramp, h, cfg, step > 1 ? &init : nullptr);
    }
    return H;
}

// Pointwise interior residual of the discrete constraint; boundary cells 0.
inline Grid2D residual_grid(const FamilySpec& spec, const Grid2D& h, const Grid2D& H) {
    if (!h.same_shape(H)) throw ShapeMismatch("residual_grid: h and H grids differ in shape");
    for (double v : H.values)
        if (!(v > 0.0)) throw DomainError("residual_grid: H must be positive");
    const auto [c1, c2] = pde_coefficients(spec);
    Grid2D u = H;
    for (auto& v : u.values) v = std::log(v);
    Grid2D out = Grid2D::make(h.nx, h.ny, h.spacing, h.x0, h.y0);
    detail::newton_residual(u, h, c1, c2, &out);
    return out;
}

// Analytic space-form seeds (the C^2 and CP^2 pairs sampled on the grid).
inline std::pair<Grid2D, Grid2D> spaceform_seed(const FamilySpec& spec, int nx, int ny,
                                                double spacing, double x0, double y0) {
    Grid2D h = Grid2D::make(nx, ny, spacing, x0, y0);
    Grid2D H = h;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double x = h.x_of(i), y = h.y_of(j);
            const double r2 = x * x + y * y;
            switch (spec.kind) {
                case FamilyKind::SemiSymmetric:
                    h.at(i, j) = 1.0 / (1.0 + r2);
                    H.at(i, j) = std::sqrt(1.0 + r2);
                    break;
                case FamilyKind::Tan:
                    h.at(i, j) = H.at(i, j) = std::sqrt(2.0) / (spec.a * (1.0 + r2));
                    break;
                default:
                    throw ConfigError(
                        "spaceform_seed: bundled analytic seeds exist only for the "
                        "semi_symmetric and tan families");
            }
        }
    return {h, H};
}

// Coupled damped Newton on (u, v) = (ln h, ln H) for the space-form system
//   Delta u = d1 e^{2u} + d2 e^{2v},  Delta v = c1 e^{2u} + c2 e^{2v},
// starting from (and taking Dirichlet data from) the given seed pair.
inline std::pair<Grid2D, Grid2D> spaceform_pair(const FamilySpec& spec, const Grid2D& seed_h,
                                                const Grid2D& seed_H, const SolveConfig& cfg) {
    if (!seed_h.same_shape(seed_H)) throw ShapeMismatch("spaceform_pair: seed grids differ");
    for (double v : seed_h.values)
        if (!(v > 0.0)) throw DomainError("spaceform_pair: seed h must be positive");
    for (double v : seed_H.values)
        if (!(v > 0.0)) throw DomainError("spaceform_pair: seed H must be positive");
    const auto [c1, c2] = pde_coefficients(spec);
    const auto [d1, d2] = spaceform_coefficients(spec);
    const int nx = seed_h.nx, ny = seed_h.ny;
    const int mx = nx - 2, my = ny - 2;
    const int n = mx * my;
    const double s2 = seed_h.spacing * seed_h.spacing;
    auto idx = [&](int i, int j) { return (i - 1) + (j - 1) * mx; };

    Grid2D u = seed_h, v = seed_H;
    for (auto& w : u.values) w = std::log(w);
    for (auto& w : v.values) w = std::log(w);

    auto residual = [&](const Grid2D& uu, const Grid2D& vv) {
        double worst = 0;
        for (int j = 1; j < ny - 1; ++j)
            for (int i = 1; i < nx - 1; ++i) {
                const double eu = std::exp(2.0 * uu.at(i, j)), ev = std::exp(2.0 * vv.at(i, j));
                worst = std::max(worst,
                                 std::abs(detail::laplace5(uu, i, j) - d1 * eu - d2 * ev));
                worst = std::max(worst,
                                 std::abs(detail::laplace5(vv, i, j) - c1 * eu - c2 * ev));
            }
        return worst;
    };

    double res = residual(u, v);
    Grid2D best_u = u, best_v = v;
    double best_res = res;
    if (cfg.on_iteration) cfg.on_iteration(0, res);

    for (int iter = 1; iter <= cfg.max_iters && res > cfg.residual_target; ++iter) {
        Eigen::VectorXd rhs(2 * n);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(std::size_t(n) * 12);
        for (int j = 1; j < ny - 1; ++j)
            for (int i = 1; i < nx - 1; ++i) {
                const int row = idx(i, j);
                const double eu = std::exp(2.0 * u.at(i, j)), ev = std::exp(2.0 * v.at(i, j));
                rhs(row) = -(detail::laplace5(u, i, j) - d1 * eu - d2 * ev);
                rhs(n + row) = -(detail::laplace5(v, i, j) - c1 * eu - c2 * ev);
                auto stencil = [&](int block_row, int block_col, double diag_extra) {
                    const int r0 = block_row * n + row, c0 = block_col * n;
                    trip.emplace_back(r0, c0 + row, -4.0 / s2 + diag_extra);
                    if (i > 1) trip.emplace_back(r0, c0 + idx(i - 1, j), 1.0 / s2);
                    if (i < nx - 2) trip.emplace_back(r0, c0 + idx(i + 1, j), 1.0 / s2);
                    if (j > 1) trip.emplace_back(r0, c0 + idx(i, j - 1), 1.0 / s2);
                    if (j < ny - 2) trip.emplace_back(r0, c0 + idx(i, j + 1), 1.0 / s2);
                };
                stencil(0, 0, -2.0 * d1 * eu);
                trip.emplace_back(row, n + row, -2.0 * d2 * ev);
                stencil(1, 1, -2.0 * c2 * ev);
                trip.emplace_back(n + row, row, -2.0 * c1 * eu);
            }
        Eigen::SparseMatrix<double> jac(2 * n, 2 * n);
        jac.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
        if (lu.info() != Eigen::Success) break;
        const Eigen::VectorXd step = lu.solve(rhs);

        double lambda = cfg.damping;
        bool accepted = false;
        while (lambda >= 0x1.0p-20) {
            Grid2D tu = u, tv = v;
            for (int j = 1; j < ny - 1; ++j)
                for (int i = 1; i < nx - 1; ++i) {
                    tu.at(i, j) += lambda * step(idx(i, j));
                    tv.at(i, j) += lambda * step(n + idx(i, j));
                }
            const double trial_res = residual(tu, tv);
            if (trial_res < res) {
                u = std::move(tu);
                v = std::move(tv);
                res = trial_res;
                accepted = true;
                break;
            }
            lambda /= 2.0;
        }
        if (cfg.on_iteration) cfg.on_iteration(iter, res);
        if (res < best_res) {
            best_u = u;
            best_v = v;
            best_res = res;
        }
        if (!accepted) break;
    }
    if (best_res > cfg.residual_target) {
        Grid2D best = best_u;
        for (auto& w : best.values) w = std::exp(w);
        throw NonConvergence(best, best_res, cfg.max_iters);
    }
    Grid2D h_out = best_u, H_out = best_v;
    for (auto& w : h_out.values) w = std::exp(w);
    for (auto& w : H_out.values) w = std::exp(w);
    return {h_out, H_out};
}

// Convenience: analytic seed + coupled Newton (semi_symmetric and tan).
inline std::pair<Grid2D, Grid2D> spaceform_pair(const FamilySpec& spec, int nx, int ny,
                                                double spacing, double x0, double y0,
                                                const SolveConfig& cfg) {
    const auto [h, H] = spaceform_seed(spec, nx, ny, spacing, x0, y0);
    return spaceform_pair(spec, h, H, cfg);
}

}  // namespace calabi
