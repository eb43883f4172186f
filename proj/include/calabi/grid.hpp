#pragma once

// Uniform 2-D grids for the elliptic solver, CSV import/export, and
// five-point-wide stencils that turn grid samples into degree-3 jets.

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "calabi/errors.hpp"
#include "calabi/jet.hpp"

namespace calabi {

struct Grid2D {
    int nx = 0, ny = 0;
    double spacing = 0.0;
    double x0 = 0.0, y0 = 0.0;
    std::vector<double> values;  // row-major, index = j * nx + i

    static Grid2D make(int nx, int ny, double spacing, double x0, double y0,
                       double fill = 0.0) {
        if (nx < 5 || ny < 5)
            throw ConfigError("grid must be at least 5x5 for interior stencils");
        if (!(spacing > 0.0)) throw ConfigError("grid spacing must be positive");
        Grid2D g;
        g.nx = nx;
        g.ny = ny;
        g.spacing = spacing;
        g.x0 = x0;
        g.y0 = y0;
        g.values.assign(std::size_t(nx) * std::size_t(ny), fill);
        return g;
    }

    double& at(int i, int j) { return values[std::size_t(j) * std::size_t(nx) + std::size_t(i)]; }
    double at(int i, int j) const {
        return values[std::size_t(j) * std::size_t(nx) + std::size_t(i)];
    }
    double x_of(int i) const { return x0 + i * spacing; }
    double y_of(int j) const { return y0 + j * spacing; }
    bool interior(int i, int j) const { return i > 0 && j > 0 && i < nx - 1 && j < ny - 1; }
    bool stencil_interior(int i, int j) const {
        return i >= 2 && j >= 2 && i <= nx - 3 && j <= ny - 3;
    }
    bool same_shape(const Grid2D& o) const {
        return nx == o.nx && ny == o.ny && spacing == o.spacing && x0 == o.x0 && y0 == o.y0;
    }
};

// File layout: a header line naming the metadata, the metadata values, then
// ny rows of nx comma-separated samples (row j ascending).
inline void write_grid_csv(const Grid2D& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << "nx,ny,spacing,x0,y0\n";
    char buf[64];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    out << g.nx << "," << g.ny << ",";
    emit(g.spacing);
    out << ",";
    emit(g.x0);
    out << ",";
    emit(g.y0);
    out << "\n";
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (i) out << ",";
            emit(g.at(i, j));
        }
        out << "\n";
    }
}

inline Grid2D read_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open grid file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("nx,ny,spacing,x0,y0", 0) != 0)
        throw ConfigError("grid file '" + path + "' missing 'nx,ny,spacing,x0,y0' header");
    if (!std::getline(in, line)) throw ConfigError("grid file '" + path + "' truncated");
    std::istringstream meta(line);
    double nx_d = 0, ny_d = 0, spacing = 0, x0 = 0, y0 = 0;
    char comma;
    if (!(meta >> nx_d >> comma >> ny_d >> comma >> spacing >> comma >> x0 >> comma >> y0))
        throw ConfigError("grid file '" + path + "' has a malformed metadata line");
    Grid2D g = Grid2D::make(int(nx_d), int(ny_d), spacing, x0, y0);
    for (int j = 0; j < g.ny; ++j) {
        if (!std::getline(in, line))
            throw ConfigError("grid file '" + path + "': expected " + std::to_string(g.ny) +
                              " data rows");
        std::istringstream row(line);
        for (int i = 0; i < g.nx; ++i) {
            double v;
            if (!(row >> v))
                throw ConfigError("grid file '" + path + "': row " + std::to_string(j) +
                                  " has fewer than " + std::to_string(g.nx) + " values");
            g.at(i, j) = v;
            row >> comma;
        }
    }
    return g;
}

namespace detail {

// Fourth-order central weights on offsets -2..2 for derivative order p.
inline std::array<double, 5> stencil_weights(int p, double s) {
    switch (p) {
        case 0: return {0, 0, 1, 0, 0};
        case 1: return {1 / (12 * s), -8 / (12 * s), 0, 8 / (12 * s), -1 / (12 * s)};
        case 2: {
            const double s2 = s * s;
            return {-1 / (12 * s2), 16 / (12 * s2), -30 / (12 * s2), 16 / (12 * s2),
                    -1 / (12 * s2)};
        }
        case 3: {
            const double s3 = s * s * s;
            return {-1 / (2 * s3), 2 / (2 * s3), 0, -2 / (2 * s3), 1 / (2 * s3)};
        }
        default: throw DomainError("stencil order out of range");
    }
}

}  // namespace detail

// Degree-3 jet of the gridded function at node (i, j); base carries the full
// chart point.  Derivative estimates use the 5x5 neighbourhood.
inline Jet grid_jet(const Grid2D& g, int i, int j, const Point4& base) {
    if (!g.stencil_interior(i, j))
        throw DomainError("grid_jet: node (" + std::to_string(i) + "," + std::to_string(j) +
                          ") too close to the boundary for a 5x5 stencil");
    Jet out;
    out.base = base;
    static const double kFact[4] = {1, 1, 2, 6};
    for (int p = 0; p <= 3; ++p) {
        const auto wx = detail::stencil_weights(p, g.spacing);
        for (int q = 0; q + p <= 3; ++q) {
            const auto wy = detail::stencil_weights(q, g.spacing);
            double d = 0.0;
            for (int m = -2; m <= 2; ++m) {
                if (p == 0 && m != 0) continue;
                for (int n = -2; n <= 2; ++n) {
                    if (q == 0 && n != 0) continue;
                    d += wx[std::size_t(m + 2)] * wy[std::size_t(n + 2)] * g.at(i + m, j + n);
                }
            }
            const MultiIndex mi{{std::uint8_t(p), std::uint8_t(q), 0, 0}};
            out.c[std::size_t(flat_index(mi))] = d / (kFact[p] * kFact[q]);
        }
    }
    return out;
}

// Node whose chart position matches (x, y) to within tol, if any.
inline std::optional<std::pair<int, int>> grid_node_at(const Grid2D& g, double x, double y,
                                                       double tol = 1e-9) {
    const double fi = (x - g.x0) / g.spacing;
    const double fj = (y - g.y0) / g.spacing;
    const int i = int(std::lround(fi));
    const int j = int(std::lround(fj));
    if (i < 0 || j < 0 || i >= g.nx || j >= g.ny) return std::nullopt;
    if (std::abs(fi - i) * g.spacing > tol || std::abs(fj - j) * g.spacing > tol)
        return std::nullopt;
    return std::make_pair(i, j);
}

}  // namespace calabi
