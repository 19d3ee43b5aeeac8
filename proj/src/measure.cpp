#include "skw/measure.hpp"

#include <cmath>
#include <string>

#include "skw/errors.hpp"

namespace skw {

DiscreteMeasure::DiscreteMeasure(SpacePtr space, std::vector<double> weights,
                                 double sum_tol)
    : space_(std::move(space)), w_(std::move(weights)) {
    if (!space_) throw DomainError("measure needs a space");
    if (static_cast<int>(w_.size()) != space_->size())
        throw DomainError("weight vector length " + std::to_string(w_.size()) +
                          " does not match space size " +
                          std::to_string(space_->size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) {
        if (!std::isfinite(w_[i]))
            throw DomainError("weights must be finite");
        if (w_[i] < 0.0) {
            // Absorb float noise only; anything beyond tolerance is an error.
            if (w_[i] < -kMassTol)
                throw DomainError("negative weight " + std::to_string(w_[i]) +
                                  " at point " + space_->label(static_cast<int>(i)));
            w_[i] = 0.0;
        }
        sum += w_[i];
    }
    if (std::abs(sum - 1.0) > sum_tol)
        throw DomainError("weights sum to " + std::to_string(sum) +
                          ", expected 1");
    // Renormalize, but leave already-normalized vectors untouched so that
    // construction is idempotent and serialized plans reload bit-exactly.
    if (std::abs(sum - 1.0) > 1e-14)
        for (auto& w : w_) w /= sum;
}

double DiscreteMeasure::mass(const PointSet& cell) const {
    double m = 0.0;
    for (int p : cell.members()) m += w_[p];
    return m;
}

bool DiscreteMeasure::same_space(const DiscreteMeasure& other) const {
    return space_->same_as(*other.space_);
}

double total_variation(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (!mu.same_space(nu))
        throw DomainError("total variation needs measures on one space");
    double s = 0.0;
    for (int i = 0; i < mu.size(); ++i) s += std::abs(mu[i] - nu[i]);
    return 0.5 * s;
}

double boundary_mass(const FiniteMetricSpace& space, int center, double r,
                     const DiscreteMeasure& mu) {
    space.check_point(center, "boundary_mass");
    if (r < 0.0) throw DomainError("sphere radius must be non-negative");
    double m = 0.0;
    for (int x = 0; x < space.size(); ++x)
        if (space.dist(center, x) == r) m += mu[x];
    return m;
}

DiscreteMeasure conditional(const DiscreteMeasure& mu, const PointSet& cell) {
    const double denom = mu.mass(cell);
    if (denom <= kMassTol)
        throw NullConditioningError("conditioning on a null cell");
    std::vector<double> w(mu.size(), 0.0);
    for (int p : cell.members()) w[p] = mu[p] / denom;
    return DiscreteMeasure(mu.space_ptr(), std::move(w), 1e-9);
}

DiscreteMeasure point_mass(SpacePtr space, int at) {
    space->check_point(at, "point_mass");
    std::vector<double> w(space->size(), 0.0);
    w[at] = 1.0;
    return DiscreteMeasure(std::move(space), std::move(w));
}

DiscreteMeasure mix(double a, const DiscreteMeasure& mu, double b,
                    const DiscreteMeasure& nu) {
    if (!mu.same_space(nu)) throw DomainError("mixing needs one space");
    std::vector<double> w(mu.size());
    for (int i = 0; i < mu.size(); ++i) w[i] = a * mu[i] + b * nu[i];
    return DiscreteMeasure(mu.space_ptr(), std::move(w));
}

} // namespace skw
