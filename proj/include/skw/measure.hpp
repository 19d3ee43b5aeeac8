#pragma once

#include <vector>

#include "skw/metric_space.hpp"

namespace skw {

// Absolute tolerance for all mass comparisons in the library.
inline constexpr double kMassTol = 1e-12;

// Probability weights over the points of a FiniteMetricSpace. Weights are
// validated (non-negative, total close to one) and then renormalized to sum
// to one, so repeated conditioning and mixing cannot drift.
class DiscreteMeasure {
public:
    DiscreteMeasure(SpacePtr space, std::vector<double> weights,
                    double sum_tol = 1e-9);

    const FiniteMetricSpace& space() const { return *space_; }
    const SpacePtr& space_ptr() const { return space_; }
    int size() const { return static_cast<int>(w_.size()); }
    double operator[](int i) const { return w_[i]; }
    const std::vector<double>& weights() const { return w_; }

    double mass(const PointSet& cell) const;
    bool same_space(const DiscreteMeasure& other) const;

private:
    SpacePtr space_;
    std::vector<double> w_;
};

// Half the L1 distance between the weight vectors; a metric on measures over
// one space, in [0, 1].
double total_variation(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Mass of the sphere { x : dist(center, x) = r }. In a finite space the
// topological boundary of the ball of radius r is contained in this sphere,
// so a zero sphere mass certifies a continuity set.
double boundary_mass(const FiniteMetricSpace& space, int center, double r,
                     const DiscreteMeasure& mu);

// A |-> mu(A ∩ cell) / mu(cell). Throws NullConditioningError if the cell
// carries no mass.
DiscreteMeasure conditional(const DiscreteMeasure& mu, const PointSet& cell);

DiscreteMeasure point_mass(SpacePtr space, int at);

// a*mu + b*nu (a + b must be 1 up to the constructor tolerance).
DiscreteMeasure mix(double a, const DiscreteMeasure& mu, double b,
                    const DiscreteMeasure& nu);

} // namespace skw
