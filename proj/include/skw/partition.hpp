#pragma once

#include <vector>

#include "skw/measure.hpp"
#include "skw/metric_space.hpp"

namespace skw {

// One level of the nested continuity partition. Cell 0 is the remainder; all
// other cells satisfy the per-level diameter bound. `parent[j]` is the index
// of the level-(k-1) cell containing cell j (-1 for the remainder and for
// every cell of level 1).
struct PartitionLevel {
    int k = 0;
    std::vector<PointSet> cells;
    std::vector<int> parent;
};

// Nested partition of the space into continuity cells: at level k every
// non-remainder cell has diameter <= 2^-k * delta, the remainder has limit
// mass <= 2^-k * eps, and each cell of level k+1 sits inside one cell of
// level k. Construction validates every invariant; instances are immutable.
class PartitionTree {
public:
    PartitionTree(std::vector<PartitionLevel> levels, double delta, double eps,
                  const DiscreteMeasure& p_inf);

    int k_max() const { return static_cast<int>(levels_.size()); }
    double delta() const { return delta_; }
    double eps() const { return eps_; }
    const FiniteMetricSpace& space() const { return *space_; }
    const SpacePtr& space_ptr() const { return space_; }

    const PartitionLevel& level(int k) const;
    int cell_count(int k) const;            // q(k), excluding the remainder
    double level_delta(int k) const;         // 2^-k * delta
    double level_eps(int k) const;           // 2^-k * eps

    // I(k): indices of cells with positive limit mass (remainder included
    // when it carries mass).
    const std::vector<int>& active_cells(int k) const;

    // Limit mass of every cell at level k, as computed at construction.
    const std::vector<double>& cell_masses(int k) const;

    // The unique cell index j with s in C_{j,k}.
    int locate_cell(int k, int s) const;

private:
    SpacePtr space_;
    std::vector<PartitionLevel> levels_;
    double delta_;
    double eps_;
    std::vector<std::vector<int>> active_;       // per level
    std::vector<std::vector<double>> masses_;    // per level, per cell
    std::vector<std::vector<int>> cell_of_;      // per level, per point
};

// Smallest convenient radius r in [target, 2*target] whose sphere carries no
// mu mass: the target itself when its sphere is empty, otherwise the midpoint
// of the gap to the next realized distance (capped at 2*target).
double continuity_radius(const FiniteMetricSpace& space, int center,
                         double target, const DiscreteMeasure& mu);

// Greedy ball cover at level k: open balls with mu-null spheres and diameter
// at most 2^-k * delta, centers picked from `survivors` by decreasing atom
// mass, until the union mass reaches 1 - 2^-k * eps.
std::vector<PointSet> cover_level(const DiscreteMeasure& p_inf, double delta,
                                  double eps, int k, const PointSet& survivors);

// D_1, D_2, ... -> C_1 = D_1, C_j = D_j \ (D_1 u ... u D_{j-1}); empty cells
// are dropped. Cells partition the union and never grow in diameter.
std::vector<PointSet> disjointify(const std::vector<PointSet>& balls);

// Build the full tree for levels 1..k_max by refining every cell (remainder
// included) with a per-cell cover budget proportional to its mass, which
// enforces the remainder mass bound at each level directly.
PartitionTree build_partition_tree(const DiscreteMeasure& p_inf, double delta,
                                   double eps, int k_max);

} // namespace skw
