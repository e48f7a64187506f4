#include "fvtaxis/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fvtaxis {

Grid Grid::box(int dim, std::span<const int> n, std::span<const double> length) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid: dim must be 1, 2, or 3");
    if (n.size() != static_cast<std::size_t>(dim) ||
        length.size() != static_cast<std::size_t>(dim))
        throw std::invalid_argument("grid: need one extent and one length per axis");
    Grid g;
    g.dim = dim;
    for (int a = 0; a < dim; ++a) {
        if (n[a] < 1) throw std::invalid_argument("grid: axis " + std::to_string(a) +
                                                  " needs at least one cell");
        if (!(length[a] > 0.0) || !std::isfinite(length[a]))
            throw std::invalid_argument("grid: axis " + std::to_string(a) +
                                        " length must be positive and finite");
        g.n[a] = n[a];
        g.length[a] = length[a];
        g.h[a] = length[a] / static_cast<double>(n[a]);
    }
    g.stride[2] = 1;
    g.stride[1] = static_cast<std::size_t>(g.n[2]);
    g.stride[0] = static_cast<std::size_t>(g.n[1]) * g.n[2];
    g.cells = static_cast<std::size_t>(g.n[0]) * g.n[1] * g.n[2];
    g.cell_volume = 1.0;
    for (int a = 0; a < dim; ++a) g.cell_volume *= g.h[a];
    return g;
}

Grid Grid::refined() const {
    std::array<int, 3> n2 = n;
    for (int a = 0; a < dim; ++a) n2[a] *= 2;
    return Grid::box(dim, std::span<const int>(n2.data(), dim),
                     std::span<const double>(length.data(), dim));
}

ScalarField ScalarField::from_function(
    const Grid& g, const std::function<double(const std::array<double, 3>&)>& f) {
    ScalarField out(g);
    for (std::size_t c = 0; c < g.cells; ++c) out[c] = f(g.cell_center(c));
    return out;
}

namespace {

void require_same_grid(const Grid& a, const Grid& b, const char* op) {
    if (!(a == b)) throw std::invalid_argument(std::string(op) + ": grid mismatch");
}

}  // namespace

void laplacian_noflux(const ScalarField& f, ScalarField& out) {
    const Grid& g = f.grid();
    require_same_grid(g, out.grid(), "laplacian_noflux");
    const double* x = f.values().data();
    double* o = out.values().data();
    std::fill(o, o + g.cells, 0.0);
    for (int a = 0; a < g.dim; ++a) {
        if (g.n[a] < 2) continue;
        const double invh2 = 1.0 / (g.h[a] * g.h[a]);
        const std::size_t s = g.stride[a];
        const std::size_t na = static_cast<std::size_t>(g.n[a]);
        const std::size_t outer = g.cells / (na * s);
        for (std::size_t ob = 0; ob < outer; ++ob) {
            const std::size_t base = ob * na * s;
            for (std::size_t i = 0; i + 1 < na; ++i) {
                const double* l = x + base + i * s;
                double* ol = o + base + i * s;
                for (std::size_t in = 0; in < s; ++in) {
                    const double flux = (l[in + s] - l[in]) * invh2;
                    ol[in] += flux;
                    ol[in + s] -= flux;
                }
            }
        }
    }
}

ScalarField laplacian_noflux(const ScalarField& f) {
    ScalarField out(f.grid());
    laplacian_noflux(f, out);
    return out;
}

double lp_norm(const ScalarField& f, double p) {
    if (std::isinf(p) && p > 0) {
        double m = 0.0;
        for (double x : f.values()) m = std::max(m, std::abs(x));
        return m;
    }
    if (!(p >= 1.0) || !std::isfinite(p))
        throw std::invalid_argument("lp_norm: p must be >= 1 or infinity");
    CompensatedSum acc;
    if (p == 1.0) {
        for (double x : f.values()) acc.add(std::abs(x));
    } else if (p == 2.0) {
        for (double x : f.values()) acc.add(x * x);
    } else {
        for (double x : f.values()) acc.add(std::pow(std::abs(x), p));
    }
    return std::pow(acc.value() * f.grid().cell_volume, 1.0 / p);
}

double inner_product(const ScalarField& f, const ScalarField& g) {
    require_same_grid(f.grid(), g.grid(), "inner_product");
    CompensatedSum acc;
    const double* a = f.values().data();
    const double* b = g.values().data();
    for (std::size_t i = 0; i < f.size(); ++i) acc.add(a[i] * b[i]);
    return acc.value() * f.grid().cell_volume;
}

double integral(const ScalarField& f) {
    CompensatedSum acc;
    for (double x : f.values()) acc.add(x);
    return acc.value() * f.grid().cell_volume;
}

double field_min(const ScalarField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (double x : f.values()) m = std::min(m, x);
    return m;
}

double field_max(const ScalarField& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : f.values()) m = std::max(m, x);
    return m;
}

bool field_finite(const ScalarField& f) {
    for (double x : f.values())
        if (!std::isfinite(x)) return false;
    return true;
}

namespace {

/// Shared face sweep: calls acc(diff_over_h) for every interior face.
template <class Acc>
void sweep_face_diffs(const ScalarField& f, Acc&& acc) {
    const Grid& g = f.grid();
    const double* x = f.values().data();
    for (int a = 0; a < g.dim; ++a) {
        if (g.n[a] < 2) continue;
        const double invh = 1.0 / g.h[a];
        const std::size_t s = g.stride[a];
        const std::size_t na = static_cast<std::size_t>(g.n[a]);
        const std::size_t outer = g.cells / (na * s);
        for (std::size_t ob = 0; ob < outer; ++ob) {
            const std::size_t base = ob * na * s;
            for (std::size_t i = 0; i + 1 < na; ++i) {
                const double* l = x + base + i * s;
                for (std::size_t in = 0; in < s; ++in)
                    acc((l[in + s] - l[in]) * invh);
            }
        }
    }
}

}  // namespace

double gradient_energy(const ScalarField& f) {
    CompensatedSum acc;
    sweep_face_diffs(f, [&](double d) { acc.add(d * d); });
    return acc.value() * f.grid().cell_volume;
}

double gradient_lq(const ScalarField& f, double q) {
    if (!(q >= 1.0) || !std::isfinite(q))
        throw std::invalid_argument("gradient_lq: q must be >= 1 and finite");
    CompensatedSum acc;
    if (q == 2.0) {
        sweep_face_diffs(f, [&](double d) { acc.add(d * d); });
    } else {
        sweep_face_diffs(f, [&](double d) { acc.add(std::pow(std::abs(d), q)); });
    }
    return std::pow(acc.value() * f.grid().cell_volume, 1.0 / q);
}

FaceGradient::FaceGradient(const Grid& g) : grid_(g) {
    for (int a = 0; a < g.dim; ++a) {
        const std::size_t na = static_cast<std::size_t>(g.n[a]);
        face_[a].assign((na + 1) * (g.cells / na), 0.0);
    }
}

FaceGradient face_gradient(const ScalarField& f) {
    const Grid& g = f.grid();
    FaceGradient fg(g);
    const double* x = f.values().data();
    for (int a = 0; a < g.dim; ++a) {
        if (g.n[a] < 2) continue;
        const double invh = 1.0 / g.h[a];
        const std::size_t s = g.stride[a];
        const std::size_t na = static_cast<std::size_t>(g.n[a]);
        const std::size_t outer = g.cells / (na * s);
        double* out = fg.faces(a).data();
        for (std::size_t ob = 0; ob < outer; ++ob) {
            const std::size_t cbase = ob * na * s;
            const std::size_t fbase = ob * (na + 1) * s;
            for (std::size_t fi = 1; fi < na; ++fi) {
                const double* l = x + cbase + (fi - 1) * s;
                double* of = out + fbase + fi * s;
                for (std::size_t in = 0; in < s; ++in)
                    of[in] = (l[in + s] - l[in]) * invh;
            }
        }
    }
    return fg;
}

ScalarField restrict_to_coarse(const ScalarField& fine, const Grid& coarse) {
    if (!(fine.grid() == coarse.refined()))
        throw std::invalid_argument("restrict_to_coarse: fine grid is not the refinement");
    const Grid& fg = fine.grid();
    ScalarField out(coarse);
    const int reps0 = coarse.dim >= 1 ? 2 : 1;
    const int reps1 = coarse.dim >= 2 ? 2 : 1;
    const int reps2 = coarse.dim >= 3 ? 2 : 1;
    const double scale = 1.0 / static_cast<double>(reps0 * reps1 * reps2);
    for (int i = 0; i < coarse.n[0]; ++i)
        for (int j = 0; j < coarse.n[1]; ++j)
            for (int k = 0; k < coarse.n[2]; ++k) {
                double s = 0.0;
                for (int di = 0; di < reps0; ++di)
                    for (int dj = 0; dj < reps1; ++dj)
                        for (int dk = 0; dk < reps2; ++dk)
                            s += fine[fg.index(reps0 > 1 ? 2 * i + di : i,
                                               reps1 > 1 ? 2 * j + dj : j,
                                               reps2 > 1 ? 2 * k + dk : k)];
                out[coarse.index(i, j, k)] = s * scale;
            }
    return out;
}

}  // namespace fvtaxis
