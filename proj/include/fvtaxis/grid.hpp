#ifndef FVTAXIS_GRID_HPP
#define FVTAXIS_GRID_HPP

#include <array>
#include <cstddef>
#include <span>

namespace fvtaxis {

/// Cell-centered box grid on [0,L1] x ... x [0,Ld], d in {1,2,3}.
/// Axis 0 is the slowest-varying index, axis dim-1 the fastest (row-major).
/// Unused trailing axes are collapsed to a single cell of unit length so the
/// same flat loops work for every dimension.
struct Grid {
    int dim = 1;
    std::array<int, 3> n{1, 1, 1};
    std::array<double, 3> length{1.0, 1.0, 1.0};
    std::array<double, 3> h{1.0, 1.0, 1.0};
    std::array<std::size_t, 3> stride{1, 1, 1};
    std::size_t cells = 1;
    double cell_volume = 1.0;

    /// Validating factory; throws std::invalid_argument on bad extents.
    static Grid box(int dim, std::span<const int> n, std::span<const double> length);

    /// Coordinate of the cell center along one axis.
    double center(int axis, int i) const { return (static_cast<double>(i) + 0.5) * h[axis]; }

    std::size_t index(int i, int j = 0, int k = 0) const {
        return static_cast<std::size_t>(i) * stride[0] +
               static_cast<std::size_t>(j) * stride[1] +
               static_cast<std::size_t>(k) * stride[2];
    }

    /// Cell-center coordinates of flat index c (unused axes report 0.5).
    std::array<double, 3> cell_center(std::size_t c) const {
        std::array<double, 3> x{};
        for (int a = 0; a < 3; ++a) {
            std::size_t i = (c / stride[a]) % static_cast<std::size_t>(n[a]);
            x[a] = center(a, static_cast<int>(i));
        }
        return x;
    }

    bool operator==(const Grid& o) const {
        return dim == o.dim && n == o.n && length == o.length;
    }

    /// Same box, each axis split into twice as many cells.
    Grid refined() const;

    /// Smallest cell spacing over the active axes.
    double min_h() const {
        double m = h[0];
        for (int a = 1; a < dim; ++a) m = m < h[a] ? m : h[a];
        return m;
    }
};

}  // namespace fvtaxis

#endif
