#include "skw/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "skw/errors.hpp"

namespace skw {

namespace {

double scaled(double base, int k) { return std::ldexp(base, -k); }

void check_level_index(int k, int k_max, const char* what) {
    if (k < 1 || k > k_max)
        throw DomainError(std::string(what) + ": level " + std::to_string(k) +
                          " outside 1.." + std::to_string(k_max));
}

// Greedy cover of `region` by continuity balls: centers by decreasing atom
// mass (ties by index), stop once the covered mass inside the region reaches
// `required`. Balls are not clipped to the region.
std::vector<PointSet> greedy_cover(const DiscreteMeasure& p_inf,
                                   double ball_target, const PointSet& region,
                                   double required) {
    std::vector<int> order(region.members());
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return p_inf[a] > p_inf[b];
    });

    std::vector<PointSet> balls;
    std::vector<bool> covered(p_inf.size(), false);
    double covered_mass = 0.0;
    for (int center : order) {
        if (covered_mass >= required) break;
        if (covered[center] || p_inf[center] == 0.0) continue;
        double r = continuity_radius(p_inf.space(), center, ball_target, p_inf);
        PointSet b = ball(p_inf.space(), center, r);
        const PointSet hit = b.intersect(region);
        for (int x : hit.members()) {
            if (!covered[x]) {
                covered[x] = true;
                covered_mass += p_inf[x];
            }
        }
        balls.push_back(std::move(b));
    }
    return balls;
}

} // namespace

double continuity_radius(const FiniteMetricSpace& space, int center,
                         double target, const DiscreteMeasure& mu) {
    space.check_point(center, "continuity_radius");
    if (!(target > 0.0)) throw DomainError("continuity_radius needs target > 0");
    if (boundary_mass(space, center, target, mu) == 0.0) return target;

    // The target sphere carries an atom; step into the gap before the next
    // realized distance.
    double next = std::numeric_limits<double>::infinity();
    for (int x = 0; x < space.size(); ++x) {
        double d = space.dist(center, x);
        if (d > target) next = std::min(next, d);
    }
    double r = std::isinf(next) ? 2.0 * target
                                : std::min(0.5 * (target + next), 2.0 * target);
    return r;
}

std::vector<PointSet> cover_level(const DiscreteMeasure& p_inf, double delta,
                                  double eps, int k, const PointSet& survivors) {
    if (k < 1) throw DomainError("cover_level needs k >= 1");
    const double target = scaled(delta, k) / 4.0; // ball diameter < 2^-k delta
    const double required = 1.0 - scaled(eps, k);
    return greedy_cover(p_inf, target, survivors, required);
}

std::vector<PointSet> disjointify(const std::vector<PointSet>& balls) {
    std::vector<PointSet> cells;
    PointSet taken;
    for (const auto& b : balls) {
        PointSet c = b.difference(taken);
        taken = taken.set_union(b);
        if (!c.empty()) cells.push_back(std::move(c));
    }
    return cells;
}

PartitionTree build_partition_tree(const DiscreteMeasure& p_inf, double delta,
                                   double eps, int k_max) {
    if (!(delta > 0.0)) throw DomainError("partition needs delta > 0");
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("partition needs 0 < eps < 1");
    if (k_max < 1 || k_max > 60)
        throw DomainError("partition needs 1 <= k_max <= 60");

    const auto& space = p_inf.space();
    std::vector<PartitionLevel> levels;

    // Level 1: cover the whole space, pool the uncovered points.
    {
        auto balls = cover_level(p_inf, delta, eps, 1, PointSet::full(space.size()));
        auto cells = disjointify(balls);
        PointSet remainder = PointSet::full(space.size());
        for (const auto& c : cells) remainder = remainder.difference(c);

        PartitionLevel lvl;
        lvl.k = 1;
        lvl.cells.push_back(std::move(remainder));
        for (auto& c : cells) lvl.cells.push_back(std::move(c));
        lvl.parent.assign(lvl.cells.size(), -1);
        levels.push_back(std::move(lvl));
    }

    // Deeper levels: refine every cell (remainder included) against a budget
    // proportional to its mass, so new leftovers total at most 2^-k eps.
    for (int k = 2; k <= k_max; ++k) {
        const PartitionLevel& prev = levels.back();
        const double target = scaled(delta, k) / 4.0;
        const double eps_k = scaled(eps, k);

        PartitionLevel lvl;
        lvl.k = k;
        lvl.cells.emplace_back(); // remainder, filled as leftovers pool up
        lvl.parent.push_back(-1);
        PointSet leftovers;

        for (std::size_t pj = 0; pj < prev.cells.size(); ++pj) {
            const PointSet& parent_cell = prev.cells[pj];
            if (parent_cell.empty()) continue;
            const double parent_mass = p_inf.mass(parent_cell);
            const double required = parent_mass - eps_k * parent_mass;

            auto balls = greedy_cover(p_inf, target, parent_cell, required);
            PointSet taken;
            for (const auto& b : balls) {
                PointSet c = b.intersect(parent_cell).difference(taken);
                if (c.empty()) continue;
                taken = taken.set_union(c);
                lvl.cells.push_back(std::move(c));
                lvl.parent.push_back(static_cast<int>(pj));
            }
            leftovers = leftovers.set_union(parent_cell.difference(taken));
        }

        lvl.cells[0] = std::move(leftovers);
        levels.push_back(std::move(lvl));
    }

    return PartitionTree(std::move(levels), delta, eps, p_inf);
}

PartitionTree::PartitionTree(std::vector<PartitionLevel> levels, double delta,
                             double eps, const DiscreteMeasure& p_inf)
    : space_(p_inf.space_ptr()), levels_(std::move(levels)), delta_(delta),
      eps_(eps) {
    if (levels_.empty()) throw DomainError("partition tree needs >= 1 level");
    const int n = space_->size();

    for (std::size_t li = 0; li < levels_.size(); ++li) {
        const PartitionLevel& lvl = levels_[li];
        const int k = static_cast<int>(li) + 1;
        if (lvl.k != k)
            throw DomainError("partition level " + std::to_string(k) +
                              " carries wrong index " + std::to_string(lvl.k));
        if (lvl.cells.empty() || lvl.parent.size() != lvl.cells.size())
            throw DomainError("partition level " + std::to_string(k) +
                              " is malformed");

        // Partition property: every point in exactly one cell.
        std::vector<int> owner(n, -1);
        for (std::size_t j = 0; j < lvl.cells.size(); ++j) {
            for (int p : lvl.cells[j].members()) {
                space_->check_point(p, "partition cell");
                if (owner[p] != -1)
                    throw DomainError("point " + space_->label(p) +
                                      " sits in two cells at level " +
                                      std::to_string(k));
                owner[p] = static_cast<int>(j);
            }
        }
        for (int p = 0; p < n; ++p)
            if (owner[p] == -1)
                throw DomainError("point " + space_->label(p) +
                                  " missing from level " + std::to_string(k));
        cell_of_.push_back(std::move(owner));

        // Diameter bound for non-remainder cells.
        const double dk = level_delta(k);
        for (std::size_t j = 1; j < lvl.cells.size(); ++j) {
            if (diameter(*space_, lvl.cells[j]) > dk)
                throw DomainError("cell diameter exceeds bound at level " +
                                  std::to_string(k));
        }

        // Remainder mass bound.
        std::vector<double> mass(lvl.cells.size(), 0.0);
        for (std::size_t j = 0; j < lvl.cells.size(); ++j)
            mass[j] = p_inf.mass(lvl.cells[j]);
        if (mass[0] > level_eps(k) + kMassTol)
            throw DomainError("remainder mass " + std::to_string(mass[0]) +
                              " exceeds bound at level " + std::to_string(k));

        // Nesting.
        if (k == 1) {
            for (int par : lvl.parent)
                if (par != -1)
                    throw DomainError("level 1 cells cannot have parents");
        } else {
            const PartitionLevel& prev = levels_[li - 1];
            for (std::size_t j = 1; j < lvl.cells.size(); ++j) {
                int par = lvl.parent[j];
                if (par < 0 || par >= static_cast<int>(prev.cells.size()))
                    throw DomainError("bad parent index at level " +
                                      std::to_string(k));
                if (!lvl.cells[j].is_subset_of(prev.cells[par]))
                    throw DomainError("cell not nested in its parent at level " +
                                      std::to_string(k));
            }
        }

        std::vector<int> active;
        for (std::size_t j = 0; j < lvl.cells.size(); ++j)
            if (mass[j] > kMassTol) active.push_back(static_cast<int>(j));
        active_.push_back(std::move(active));
        masses_.push_back(std::move(mass));
    }
}

const PartitionLevel& PartitionTree::level(int k) const {
    check_level_index(k, k_max(), "level");
    return levels_[k - 1];
}

int PartitionTree::cell_count(int k) const {
    return static_cast<int>(level(k).cells.size()) - 1;
}

double PartitionTree::level_delta(int k) const { return scaled(delta_, k); }

double PartitionTree::level_eps(int k) const { return scaled(eps_, k); }

const std::vector<int>& PartitionTree::active_cells(int k) const {
    check_level_index(k, k_max(), "active_cells");
    return active_[k - 1];
}

const std::vector<double>& PartitionTree::cell_masses(int k) const {
    check_level_index(k, k_max(), "cell_masses");
    return masses_[k - 1];
}

int PartitionTree::locate_cell(int k, int s) const {
    check_level_index(k, k_max(), "locate_cell");
    space_->check_point(s, "locate_cell");
    return cell_of_[k - 1][s];
}

} // namespace skw
