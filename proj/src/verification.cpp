#include "skw/verification.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "skw/errors.hpp"

namespace skw {

bool VerificationReport::marginals_pass() const {
    if (inf_marginal_defect > kExactTol) return false;
    return std::all_of(marginal_defects.begin(), marginal_defects.end(),
                       [](double d) { return d <= kExactTol; });
}

bool VerificationReport::inversion_pass() const {
    return std::all_of(inversion_defects.begin(), inversion_defects.end(),
                       [](double d) { return d <= kExactTol; });
}

bool VerificationReport::all_pass() const {
    if (!marginals_pass() || !inversion_pass()) return false;
    for (const auto& c : concentration)
        if (!c.pass) return false;
    for (const auto& t : tail)
        if (!t.pass) return false;
    for (const auto& a : as_convergence)
        if (!a.pass) return false;
    return true;
}

double verify_inf_marginal(const CouplingPlan& plan) {
    return total_variation(enumerate_inf_marginal(plan), plan.p_inf());
}

std::vector<double> verify_marginals(const CouplingPlan& plan) {
    std::vector<double> defects(plan.alpha_count(), 0.0);
    for (int a = 0; a < plan.alpha_count(); ++a)
        defects[a] = total_variation(enumerate_marginal(plan, a), plan.family()[a]);
    return defects;
}

ConcentrationCheck verify_concentration_bound(const CouplingPlan& plan, int k,
                                              int alpha, int h) {
    if (alpha < 0 || alpha >= plan.alpha_count())
        throw ContractError("concentration bound: family index out of range");
    const int d = plan.depth(alpha);
    // Infinite depth couples through point masses, so every pair (k, h) with
    // h >= k is admissible there; finite depth keeps the h >= depth >= k
    // quantifier.
    const bool ok = d == kDepthInfinite ? (h >= k && k >= 1)
                                        : (h >= d && d >= k && k >= 1);
    if (!ok)
        throw ContractError(
            "concentration bound needs h >= depth(alpha) >= k >= 1");

    const double radius = plan.tree().level_delta(k);
    const auto& space = plan.space();

    SectionEvent event;
    event.section = [&space, radius](int, int s, int x) {
        return space.dist(s, x) > radius;
    };
    const int idx[1] = {alpha};
    ConcentrationCheck out;
    out.alpha = alpha + 1;
    out.k = k;
    out.h = h;
    out.exact_mass = enumerate_nu(plan, idx, event);
    out.bound = std::ldexp(plan.tree().eps(), -h);
    out.pass = out.exact_mass <= out.bound;
    return out;
}

TailCheck verify_tail_bound(const CouplingPlan& plan, int k) {
    if (k < 1 || k > plan.tree().k_max())
        throw ContractError("tail bound: level out of range");

    std::vector<int> qualifying;
    for (int a = 0; a < plan.alpha_count(); ++a) {
        const int d = plan.depth(a);
        if (d != kDepthInfinite && d >= k) qualifying.push_back(a);
    }

    TailCheck out;
    out.k = k;
    out.bound = 2.0 * std::ldexp(plan.tree().eps(), -k);
    if (qualifying.empty()) {
        out.exact_mass = 0.0;
        out.pass = true;
        return out;
    }

    // Union through the complement: all listed coordinates stay within the
    // level-k resolution of the limit draw.
    const double radius = plan.tree().level_delta(k);
    const auto& space = plan.space();
    SectionEvent stay_close;
    stay_close.section = [&space, radius](int, int s, int x) {
        return space.dist(s, x) <= radius;
    };
    // The complement can land an ulp above one; probabilities stay in [0,1].
    out.exact_mass = std::max(0.0, 1.0 - enumerate_nu(plan, qualifying, stay_close));
    out.pass = out.exact_mass <= out.bound;
    return out;
}

std::vector<AsConvergenceCheck> verify_as_convergence(const CouplingPlan& plan,
                                                      std::uint64_t seed,
                                                      long long n) {
    if (n < 1000) throw DomainError("as-convergence check needs n >= 1000");
    const auto samples = sample_coupled(plan, seed, n);
    const auto& space = plan.space();
    const int k_max = plan.tree().k_max();

    std::vector<AsConvergenceCheck> out;
    out.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        const double radius = plan.tree().level_delta(k);
        long long violations = 0;
        for (const auto& smp : samples) {
            bool bad = false;
            for (int a = 0; a < plan.alpha_count() && !bad; ++a) {
                const int d = plan.depth(a);
                if (d == kDepthInfinite || d < k) continue;
                if (space.dist(smp.x[a], smp.s) > radius) bad = true;
            }
            if (bad) ++violations;
        }
        AsConvergenceCheck chk;
        chk.k = k;
        chk.rate = static_cast<double>(violations) / static_cast<double>(n);
        chk.bound = 2.0 * std::ldexp(plan.tree().eps(), -k);
        chk.std_error = std::sqrt(chk.bound * (1.0 - chk.bound) /
                                  static_cast<double>(n));
        chk.pass = chk.rate <= chk.bound + 3.0 * chk.std_error;
        out.push_back(chk);
    }
    return out;
}

bool dkw_check(std::span<const double> samples, const StepCdf& f,
               double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw DomainError("dkw confidence must lie in (0,1)");
    if (samples.empty()) throw DomainError("dkw check needs samples");

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    // Sup distance of the empirical CDF against f. Both are right-continuous
    // steps, so the sup is attained at a jump point of either, from the right
    // or from the left.
    std::vector<double> candidates(sorted);
    candidates.insert(candidates.end(), f.locations().begin(),
                      f.locations().end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());

    const auto& loc = f.locations();
    const auto& cum = f.cumulative();
    auto f_left = [&](double x) {
        const auto it = std::lower_bound(loc.begin(), loc.end(), x);
        if (it == loc.begin()) return 0.0;
        return cum[static_cast<std::size_t>(it - loc.begin()) - 1];
    };

    double sup = 0.0;
    for (double x : candidates) {
        const double emp_at =
            static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) -
                                sorted.begin()) /
            n;
        const double emp_left =
            static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), x) -
                                sorted.begin()) /
            n;
        sup = std::max(sup, std::abs(emp_at - f.eval(x)));
        sup = std::max(sup, std::abs(emp_left - f_left(x)));
    }

    const double band = std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * n));
    return sup <= band;
}

VerificationReport run_verification(const CouplingPlan& plan,
                                    std::uint64_t seed, long long n) {
    VerificationReport report;
    report.seed = seed;
    report.sample_count = n;

    report.inf_marginal_defect = verify_inf_marginal(plan);
    report.marginal_defects = verify_marginals(plan);

    report.inversion_defects.assign(static_cast<std::size_t>(plan.alpha_count()), 0.0);
    for (int a = 0; a < plan.alpha_count(); ++a) {
        if (!plan.finite_depth(a)) continue;
        report.inversion_defects[a] = mixture_identity_defect(
            plan.family()[a], plan.residual(a), plan.tree(), plan.depth(a),
            plan.betas());
    }

    const int k_max = plan.tree().k_max();
    for (int a = 0; a < plan.alpha_count(); ++a) {
        const int d = plan.depth(a);
        if (d == kDepthInfinite) continue;
        for (int k = 1; k <= d; ++k)
            for (int h = d; h <= k_max; ++h)
                report.concentration.push_back(
                    verify_concentration_bound(plan, k, a, h));
    }
    for (int k = 1; k <= k_max; ++k)
        report.tail.push_back(verify_tail_bound(plan, k));

    report.as_convergence = verify_as_convergence(plan, seed, n);
    return report;
}

} // namespace skw
