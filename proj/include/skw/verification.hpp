#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "skw/coupling.hpp"
#include "skw/quantile.hpp"

namespace skw {

// Tolerance for the exact (enumeration-based) checks.
inline constexpr double kExactTol = 1e-10;

struct ConcentrationCheck {
    int alpha = 0; // 1-based in reports
    int k = 0;
    int h = 0;
    double exact_mass = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct TailCheck {
    int k = 0;
    double exact_mass = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct AsConvergenceCheck {
    int k = 0;
    double rate = 0.0;
    double bound = 0.0;      // 2^{1-k} eps
    double std_error = 0.0;  // binomial, at the bound
    bool pass = false;
};

struct VerificationReport {
    std::uint64_t seed = 0;
    long long sample_count = 0;
    double inf_marginal_defect = 0.0;
    std::vector<double> marginal_defects;   // per family member
    std::vector<double> inversion_defects;  // per member, 0 for infinite depth
    std::vector<ConcentrationCheck> concentration;
    std::vector<TailCheck> tail;
    std::vector<AsConvergenceCheck> as_convergence;

    bool marginals_pass() const;
    bool inversion_pass() const;
    bool all_pass() const;
};

// Total-variation defects of the enumerated coordinate laws against the
// prescribed ones; entry 0 of the pair is the limit coordinate.
double verify_inf_marginal(const CouplingPlan& plan);
std::vector<double> verify_marginals(const CouplingPlan& plan);

// Exact mass of the event { d(X_alpha, X_inf) > 2^-k delta } against the
// level-h remainder budget. Requires h >= depth(alpha) >= k.
ConcentrationCheck verify_concentration_bound(const CouplingPlan& plan, int k,
                                              int alpha, int h);

// Exact mass of the union of those events over every member with depth >= k,
// against twice the level-k remainder budget.
TailCheck verify_tail_bound(const CouplingPlan& plan, int k);

// Empirical per-level violation rates from n coupled samples, each compared
// to the tail budget plus three binomial standard errors.
std::vector<AsConvergenceCheck> verify_as_convergence(const CouplingPlan& plan,
                                                      std::uint64_t seed,
                                                      long long n);

// Dvoretzky–Kiefer–Wolfowitz goodness of fit: sup distance of the empirical
// CDF against f, at the stated confidence level.
bool dkw_check(std::span<const double> samples, const StepCdf& f,
               double confidence);

// Runs every check on the plan and assembles the report.
VerificationReport run_verification(const CouplingPlan& plan,
                                    std::uint64_t seed, long long n);

} // namespace skw
