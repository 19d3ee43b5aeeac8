#pragma once

#include <span>
#include <utility>
#include <vector>

namespace skw {

// Right-continuous step CDF on the real line, given by its jumps. Locations
// are strictly increasing, masses positive and summing to one (renormalized
// at construction; the top of the cumulative table is pinned to exactly 1 so
// the generalized inverse is total on (0, 1]).
class StepCdf {
public:
    explicit StepCdf(std::vector<std::pair<double, double>> jumps,
                     double sum_tol = 1e-9);

    static StepCdf bernoulli(double p);

    int jump_count() const { return static_cast<int>(loc_.size()); }
    const std::vector<double>& locations() const { return loc_; }
    const std::vector<double>& masses() const { return mass_; }
    const std::vector<double>& cumulative() const { return cum_; }

    // F(x) = total mass at locations <= x.
    double eval(double x) const;

    // F^{-1}(y) = inf { x : F(x) >= y }, for y in (0, 1]; non-decreasing and
    // left-continuous.
    double inverse(double y) const;

    bool operator==(const StepCdf& other) const {
        return loc_ == other.loc_ && mass_ == other.mass_;
    }

private:
    std::vector<double> loc_;
    std::vector<double> mass_;
    std::vector<double> cum_;
};

// Per-probe CDF convergence diagnosis. A probe converges when its defects
// vanish outright or decay with a clearly negative fitted log-log slope.
struct ProbeDefect {
    double probe = 0.0;
    std::vector<double> defects;      // |F_n(probe) - F_inf(probe)| per n
    double max_defect = 0.0;
    double tail_defect = 0.0;          // defect of the last family member
    double decay_exponent = 0.0;       // least-squares slope of log d vs log n
    bool converged = false;
};

// Evaluates CDF defects at continuity probes of the limit; probes sitting on
// a jump of the limit are rejected (all offenders listed in the error).
std::vector<ProbeDefect> weak_convergence_defect(const std::vector<StepCdf>& fs,
                                                 const StepCdf& f_inf,
                                                 std::span<const double> probes);

// One quantile-coupling path: n -> F_n^{-1}(u) against the limit quantile.
// The path converges when it equals the limit from some family member
// onwards (paths of step CDFs are eventually exactly constant, so no
// tolerance enters); settle_index is the first such member, -1 otherwise.
struct QuantilePath {
    double u = 0.0;
    std::vector<double> values;
    double limit = 0.0;
    bool converged = false;
    int settle_index = -1;
};

struct QuantileCouplingTable {
    std::vector<QuantilePath> paths;
    std::vector<double> failure_set; // u values whose paths fail to converge
};

// Quantile coupling along the family: for every u in the grid, the path of
// generalized inverses and its limit. u values must lie in (0, 1).
QuantileCouplingTable quantile_couple(const std::vector<StepCdf>& fs,
                                      const StepCdf& f_inf,
                                      std::span<const double> u_grid);

// Discontinuity points of the limit's generalized inverse: the cumulative
// levels strictly below one. The failure set of a long enough family is
// contained in this set.
std::vector<double> quantile_discontinuities(const StepCdf& f_inf);

} // namespace skw
