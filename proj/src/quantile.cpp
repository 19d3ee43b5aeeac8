#include "skw/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skw/errors.hpp"

namespace skw {

StepCdf::StepCdf(std::vector<std::pair<double, double>> jumps, double sum_tol) {
    if (jumps.empty()) throw DomainError("step cdf needs at least one jump");
    loc_.reserve(jumps.size());
    mass_.reserve(jumps.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < jumps.size(); ++i) {
        auto [x, m] = jumps[i];
        if (!std::isfinite(x) || !std::isfinite(m))
            throw DomainError("step cdf jumps must be finite");
        if (m <= 0.0) throw DomainError("step cdf masses must be positive");
        if (i > 0 && x <= loc_.back())
            throw DomainError("step cdf locations must be strictly increasing");
        loc_.push_back(x);
        mass_.push_back(m);
        sum += m;
    }
    if (std::abs(sum - 1.0) > sum_tol)
        throw DomainError("step cdf masses sum to " + std::to_string(sum) +
                          ", expected 1");
    const bool renormalize = std::abs(sum - 1.0) > 1e-14;
    cum_.resize(mass_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
        if (renormalize) mass_[i] /= sum;
        acc += mass_[i];
        cum_[i] = acc;
    }
    cum_.back() = 1.0;
}

StepCdf StepCdf::bernoulli(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("bernoulli parameter must lie in (0,1)");
    return StepCdf({{0.0, 1.0 - p}, {1.0, p}});
}

double StepCdf::eval(double x) const {
    auto it = std::upper_bound(loc_.begin(), loc_.end(), x);
    if (it == loc_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - loc_.begin()) - 1];
}

double StepCdf::inverse(double y) const {
    if (!(y > 0.0 && y <= 1.0))
        throw DomainError("generalized inverse needs y in (0,1], got " +
                          std::to_string(y));
    auto it = std::lower_bound(cum_.begin(), cum_.end(), y);
    return loc_[static_cast<std::size_t>(it - cum_.begin())];
}

std::vector<ProbeDefect> weak_convergence_defect(const std::vector<StepCdf>& fs,
                                                 const StepCdf& f_inf,
                                                 std::span<const double> probes) {
    std::vector<double> offenders;
    for (double x : probes)
        if (std::binary_search(f_inf.locations().begin(),
                               f_inf.locations().end(), x))
            offenders.push_back(x);
    if (!offenders.empty()) {
        std::ostringstream msg;
        msg << "probes must avoid jumps of the limit cdf; offending:";
        for (double x : offenders) msg << " " << x;
        throw DomainError(msg.str());
    }

    std::vector<ProbeDefect> out;
    out.reserve(probes.size());
    for (double x : probes) {
        ProbeDefect pd;
        pd.probe = x;
        const double fx = f_inf.eval(x);
        pd.defects.reserve(fs.size());
        for (const auto& f : fs) pd.defects.push_back(std::abs(f.eval(x) - fx));
        for (double d : pd.defects) pd.max_defect = std::max(pd.max_defect, d);
        pd.tail_defect = pd.defects.empty() ? 0.0 : pd.defects.back();

        // Least-squares slope of log defect against log n over the positive
        // defects; all-zero defects converge outright.
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (std::size_t i = 0; i < pd.defects.size(); ++i) {
            if (pd.defects[i] <= 0.0) continue;
            const double lx = std::log(static_cast<double>(i + 1));
            const double ly = std::log(pd.defects[i]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++m;
        }
        if (m >= 2 && sxx * m - sx * sx > 0.0)
            pd.decay_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);

        pd.converged = pd.tail_defect <= 1e-12 ||
                       (pd.decay_exponent <= -0.05 &&
                        pd.tail_defect <= 0.5 * pd.max_defect);
        out.push_back(std::move(pd));
    }
    return out;
}

QuantileCouplingTable quantile_couple(const std::vector<StepCdf>& fs,
                                      const StepCdf& f_inf,
                                      std::span<const double> u_grid) {
    for (double u : u_grid)
        if (!(u > 0.0 && u < 1.0))
            throw DomainError("u grid must lie inside (0,1)");

    QuantileCouplingTable table;
    table.paths.reserve(u_grid.size());
    for (double u : u_grid) {
        QuantilePath path;
        path.u = u;
        path.limit = f_inf.inverse(u);
        path.values.reserve(fs.size());
        for (const auto& f : fs) path.values.push_back(f.inverse(u));

        int settle = -1;
        for (int i = static_cast<int>(path.values.size()) - 1; i >= 0; --i) {
            if (path.values[static_cast<std::size_t>(i)] != path.limit) break;
            settle = i;
        }
        path.settle_index = settle;
        path.converged = settle != -1;
        if (!path.converged) table.failure_set.push_back(u);
        table.paths.push_back(std::move(path));
    }
    return table;
}

std::vector<double> quantile_discontinuities(const StepCdf& f_inf) {
    std::vector<double> out;
    const auto& cum = f_inf.cumulative();
    for (double c : cum)
        if (c < 1.0) out.push_back(c);
    return out;
}

} // namespace skw
