#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <evoscape/types.hpp>

namespace evoscape {

/// Axis-aligned grid discretization of the behavior space. Cell ids are
/// flat row-major indices; behaviors outside the bounds clamp to the
/// nearest boundary cell.
struct NicheGrid {
    Vector lo;
    Vector hi;
    std::vector<int> cells_per_dim;

    NicheGrid() = default;
    NicheGrid(Vector lower, Vector upper, std::vector<int> cells)
        : lo(std::move(lower)), hi(std::move(upper)), cells_per_dim(std::move(cells)) {
        if (lo.size() != hi.size() || static_cast<std::size_t>(lo.size()) != cells_per_dim.size())
            throw std::invalid_argument("NicheGrid: dimension mismatch");
        for (Index d = 0; d < lo.size(); ++d) {
            if (!(lo[d] < hi[d]))
                throw std::invalid_argument("NicheGrid: bounds inverted");
            if (cells_per_dim[d] < 1)
                throw std::invalid_argument("NicheGrid: cells_per_dim must be >= 1");
        }
        if (total_cells() < 2)
            throw std::invalid_argument("NicheGrid: need at least 2 cells");
    }

    static NicheGrid uniform(Index dim, Scalar lower, Scalar upper, int cells) {
        return NicheGrid(Vector::Constant(dim, lower), Vector::Constant(dim, upper),
                         std::vector<int>(static_cast<std::size_t>(dim), cells));
    }

    Index dim() const { return lo.size(); }

    Index total_cells() const {
        Index n = 1;
        for (int c : cells_per_dim)
            n *= c;
        return n;
    }

    /// Flat cell id for a behavior vector.
    Index cell_index(const ConstVectorRef& b) const {
        if (b.size() != lo.size())
            throw std::invalid_argument("NicheGrid: behavior dimension mismatch");
        Index flat = 0;
        for (Index d = 0; d < lo.size(); ++d) {
            const Scalar u = (b[d] - lo[d]) / (hi[d] - lo[d]);
            Index cell = static_cast<Index>(std::floor(u * cells_per_dim[d]));
            cell = std::min(std::max(cell, Index{0}), static_cast<Index>(cells_per_dim[d]) - 1);
            flat = flat * cells_per_dim[d] + cell;
        }
        return flat;
    }
};

} // namespace evoscape
