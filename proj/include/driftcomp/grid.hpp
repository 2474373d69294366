#pragma once

#include <cstddef>
#include <vector>

namespace driftcomp {

// Cell-centered 1D mesh on [0, length]. Face f sits at f*dx for
// f = 0..n_cells, cell i is centered at (i + 1/2)*dx. Flux stencils need at
// least two interior faces, so n_cells >= 4 is enforced by validation.
struct Grid {
    double length = 1.0;
    int n_cells = 300;

    double dx() const { return length / n_cells; }
    int n_faces() const { return n_cells + 1; }
    double cell_center(int i) const { return (i + 0.5) * dx(); }
    double face_position(int f) const { return f * dx(); }

    std::vector<double> cell_centers() const {
        std::vector<double> xs(static_cast<std::size_t>(n_cells));
        for (int i = 0; i < n_cells; ++i)
            xs[static_cast<std::size_t>(i)] = cell_center(i);
        return xs;
    }

    bool operator==(const Grid&) const = default;
};

}  // namespace driftcomp
