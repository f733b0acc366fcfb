#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "swerect/errors.hpp"

namespace swerect {

// Node-centered uniform grid on (0,L1)x(0,L2), boundary nodes included.
// Node (0,j) lies on the inflow edge x=0, node (i,0) on the inflow edge y=0.
struct Grid {
    double L1 = 1.0;
    double L2 = 1.0;
    int nx = 3;
    int ny = 3;
    double dx = 0.5;
    double dy = 0.5;

    Grid() = default;

    Grid(double L1_, double L2_, int nx_, int ny_)
        : L1(L1_), L2(L2_), nx(nx_), ny(ny_) {
        if (!(L1 > 0.0) || !(L2 > 0.0)) {
            throw NumericError("grid: side lengths must be positive");
        }
        if (nx < 3 || ny < 3) {
            throw GridTooCoarse("grid: need nx >= 3 and ny >= 3");
        }
        dx = L1 / (nx - 1);
        dy = L2 / (ny - 1);
    }

    double x(int i) const { return i * dx; }
    double y(int j) const { return j * dy; }
    int size() const { return nx * ny; }
    int index(int i, int j) const { return i * ny + j; }

    bool operator==(const Grid& o) const {
        return nx == o.nx && ny == o.ny && L1 == o.L1 && L2 == o.L2;
    }
};

struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), values(static_cast<std::size_t>(g.size()), 0.0) {}

    double& operator()(int i, int j) { return values[static_cast<std::size_t>(grid.index(i, j))]; }
    double operator()(int i, int j) const {
        return values[static_cast<std::size_t>(grid.index(i, j))];
    }

    double* data() { return values.data(); }
    const double* data() const { return values.data(); }
    int size() const { return grid.size(); }

    void fill(double c) {
        for (auto& v : values) v = c;
    }

    bool finite() const {
        for (double v : values) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (!(a == b)) {
        throw GridMismatch(std::string(where) + ": fields live on different grids");
    }
}

}  // namespace swerect
