#ifndef FVTAXIS_FIELD_HPP
#define FVTAXIS_FIELD_HPP

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "fvtaxis/grid.hpp"

namespace fvtaxis {

/// Streaming compensated (Neumaier) accumulator. Conservation audits compare
/// sums that cancel to machine precision, so the plain left-to-right sum is
/// not good enough for the reductions below.
class CompensatedSum {
public:
    void add(double x) {
        double t = s_ + x;
        if (std::abs(s_) >= std::abs(x))
            c_ += (s_ - t) + x;
        else
            c_ += (x - t) + s_;
        s_ = t;
    }
    double value() const { return s_ + c_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

/// One scalar unknown per cell, stored flat in row-major axis order.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid& g, double init = 0.0)
        : grid_(g), v_(g.cells, init) {}

    static ScalarField from_function(
        const Grid& g, const std::function<double(const std::array<double, 3>&)>& f);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }

    double operator[](std::size_t i) const { return v_[i]; }
    double& operator[](std::size_t i) { return v_[i]; }

    std::span<const double> values() const { return v_; }
    std::span<double> values() { return v_; }

private:
    Grid grid_;
    std::vector<double> v_;
};

/// Divergence-form five/seven-point Laplacian with zero-flux (mirrored ghost)
/// boundary faces. Interior flux across a face is the neighbor difference over
/// the spacing; boundary faces contribute nothing, so the cell-volume-weighted
/// sum of the output telescopes to zero.
void laplacian_noflux(const ScalarField& f, ScalarField& out);
ScalarField laplacian_noflux(const ScalarField& f);

/// Volume-weighted L^p norm, p >= 1 or infinity.
double lp_norm(const ScalarField& f, double p);

/// Volume-weighted inner product sum(f_i * g_i * vol).
double inner_product(const ScalarField& f, const ScalarField& g);

/// Signed integral sum(f_i * vol); equals the L^1 norm for nonnegative fields.
double integral(const ScalarField& f);

double field_min(const ScalarField& f);
double field_max(const ScalarField& f);
bool field_finite(const ScalarField& f);

/// Discrete Dirichlet energy sum over interior faces of ((f_R - f_L)/h_k)^2 * vol.
/// Satisfies gradient_energy(f) == -inner_product(f, laplacian_noflux(f)).
double gradient_energy(const ScalarField& f);

/// (sum over interior faces of |(f_R - f_L)/h_k|^q * vol)^(1/q); the q = 2 case
/// is the square root of gradient_energy.
double gradient_lq(const ScalarField& f, double q);

/// Per-face one-sided differences (f_R - f_L)/h_k for every face of every
/// active axis; boundary faces carry value 0 (zero-flux convention).
class FaceGradient {
public:
    explicit FaceGradient(const Grid& g);

    const Grid& grid() const { return grid_; }

    /// Number of faces along one axis, boundary faces included.
    std::size_t face_count(int axis) const { return face_[axis].size(); }

    std::span<const double> faces(int axis) const { return face_[axis]; }
    std::span<double> faces(int axis) { return face_[axis]; }

private:
    Grid grid_;
    std::array<std::vector<double>, 3> face_;
};

FaceGradient face_gradient(const ScalarField& f);

/// Visits every interior face: fn(axis, flat index of left cell, flat index of
/// right cell). Iteration order is fixed (axis-major), so reductions built on
/// top of this are deterministic.
template <class F>
void for_each_interior_face(const Grid& g, F&& fn) {
    for (int a = 0; a < g.dim; ++a) {
        if (g.n[a] < 2) continue;
        const std::size_t s = g.stride[a];
        const std::size_t inner = s;
        const std::size_t outer = g.cells / (static_cast<std::size_t>(g.n[a]) * s);
        for (std::size_t o = 0; o < outer; ++o) {
            const std::size_t base = o * static_cast<std::size_t>(g.n[a]) * s;
            for (int i = 0; i + 1 < g.n[a]; ++i) {
                const std::size_t row = base + static_cast<std::size_t>(i) * s;
                for (std::size_t in = 0; in < inner; ++in)
                    fn(a, row + in, row + in + s);
            }
        }
    }
}

/// Conservative restriction: each coarse cell is the mean of its 2^dim fine
/// children. Requires the fine grid to be coarse.refined().
ScalarField restrict_to_coarse(const ScalarField& fine, const Grid& coarse);

}  // namespace fvtaxis

#endif
