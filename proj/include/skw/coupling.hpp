#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "skw/beta_schedule.hpp"
#include "skw/measure.hpp"
#include "skw/partition.hpp"

namespace skw {

// Sentinel depth for family members that equal the limit law exactly.
inline constexpr int kDepthInfinite = std::numeric_limits<int>::max();

// Cellwise ratios of each family law against the limit law over the active
// cells, with the per-level minima and the worst cellwise deviations.
class RatioTable {
public:
    RatioTable(const DiscreteMeasure& p_inf,
               const std::vector<DiscreteMeasure>& family,
               const PartitionTree& tree);

    int alpha_count() const { return static_cast<int>(min_ratio_.size()); }
    int k_max() const { return k_max_; }

    // P_alpha(C) / P_inf(C) for an active cell at level k. alpha is 0-based.
    double ratio(int alpha, int k, int cell) const;
    double min_ratio(int alpha, int k) const;
    double max_ratio(int alpha, int k) const;
    // max over all cells (remainder included) of |P_alpha(C) - P_inf(C)|.
    double max_cell_deviation(int alpha, int k) const;

private:
    int k_max_;
    std::vector<std::vector<std::vector<double>>> ratio_;   // [alpha][k-1][cell]
    std::vector<std::vector<double>> min_ratio_;             // [alpha][k-1]
    std::vector<std::vector<double>> max_ratio_;
    std::vector<std::vector<double>> deviation_;
    std::vector<std::vector<char>> active_mask_;             // [k-1][cell]
};

// Coupling depth per family member: kDepthInfinite when the member equals the
// limit law exactly; otherwise the deepest level L such that for every
// k <= L the mixing mass beta*_k fits under every active-cell ratio and the
// cellwise deviation stays under beta_k. Depth 0 marks members that cannot
// be coupled yet; building a plan on them fails.
std::vector<int> compute_depths(const RatioTable& table, const BetaSchedule& betas,
                                int k_max, const DiscreteMeasure& p_inf,
                                const std::vector<DiscreteMeasure>& family);

// The measure that complements the cell-conditional mixture of p_alpha at
// level k:
//   R(A) = P_a(A)/(1-b*) - (b*/(1-b*)) * sum_{j active} P_a(A|C_j) Pinf(C_j).
// Requires b*_k <= P_a(C_j)/Pinf(C_j) on every active cell (otherwise some
// atom weight would go negative); throws DomainError naming the first
// offending cell.
DiscreteMeasure residual_measure(const DiscreteMeasure& p_alpha,
                                 const DiscreteMeasure& p_inf,
                                 const PartitionTree& tree, int k,
                                 const BetaSchedule& betas);

// Largest atomwise defect of the mixture identity
//   P_a(A) = (1-b*_k) R(A) + b*_k sum_j Pinf(C_j) P_a(A|C_j);
// zero up to rounding whenever `residual` came from residual_measure.
double mixture_identity_defect(const DiscreteMeasure& p_alpha,
                               const DiscreteMeasure& residual,
                               const PartitionTree& tree, int k,
                               const BetaSchedule& betas);

// One exact draw of the coupling: mixture component, limit coordinate, and
// one coordinate per family member.
struct CoupledSample {
    int j = 0;
    int s = 0;
    std::vector<int> x;
};

// Product event with one section per listed coordinate: the event holds at
// (j, s, x) iff the optional s-filter accepts s and section(alpha, s, x_alpha)
// holds for every listed alpha. Sections must not discriminate the mixture
// component beyond what the kernels themselves do.
struct SectionEvent {
    std::function<bool(int s)> s_allowed;                 // null = all of S
    std::function<bool(int alpha, int s, int x)> section; // null = everything
};

// Everything needed to sample or enumerate the coupling measure: the family,
// the partition tree, the mixing schedule, per-member depths and residual
// measures, and cached cell conditionals.
class CouplingPlan {
public:
    // Computes depths and residuals and checks the mixture identity on every
    // finite-depth member. Throws NotConvergedError when some member has
    // depth 0.
    static CouplingPlan build(DiscreteMeasure p_inf,
                              std::vector<DiscreteMeasure> family,
                              PartitionTree tree, BetaSchedule betas);

    // Assembles a plan from stored parts (deserialization path). Validates
    // shapes and measure validity but not the mixture identity, so that
    // verification can report corrupted plans instead of refusing to load.
    static CouplingPlan from_parts(DiscreteMeasure p_inf,
                                   std::vector<DiscreteMeasure> family,
                                   PartitionTree tree, BetaSchedule betas,
                                   std::vector<int> depths,
                                   std::vector<std::optional<DiscreteMeasure>> residuals);

    const FiniteMetricSpace& space() const { return p_inf_.space(); }
    const SpacePtr& space_ptr() const { return p_inf_.space_ptr(); }
    const DiscreteMeasure& p_inf() const { return p_inf_; }
    const std::vector<DiscreteMeasure>& family() const { return family_; }
    int alpha_count() const { return static_cast<int>(family_.size()); }
    const PartitionTree& tree() const { return tree_; }
    const BetaSchedule& betas() const { return betas_; }

    int depth(int alpha) const;
    const std::vector<int>& depths() const { return depths_; }
    bool finite_depth(int alpha) const { return depths_[alpha] != kDepthInfinite; }
    const DiscreteMeasure& residual(int alpha) const;

    // The law of coordinate alpha given mixture component j and limit draw s.
    DiscreteMeasure kernel(int j, int s, int alpha) const;

    const RatioTable& ratios() const { return *table_; }

private:
    CouplingPlan(DiscreteMeasure p_inf, std::vector<DiscreteMeasure> family,
                 PartitionTree tree, BetaSchedule betas, std::vector<int> depths,
                 std::vector<std::optional<DiscreteMeasure>> residuals);

    // Weights of kernel(j, s, alpha) without materializing a measure.
    const std::vector<double>& kernel_weights(bool deep, int s, int alpha) const;

    DiscreteMeasure p_inf_;
    std::vector<DiscreteMeasure> family_;
    PartitionTree tree_;
    BetaSchedule betas_;
    std::vector<int> depths_;
    std::vector<std::optional<DiscreteMeasure>> residuals_;
    std::shared_ptr<RatioTable> table_;

    // [alpha][cell at level depth(alpha)] -> conditional weights; delta mass
    // at s handled separately.
    std::vector<std::vector<std::optional<std::vector<double>>>> conditionals_;

    friend double enumerate_nu(const CouplingPlan&, std::span<const int>,
                               const SectionEvent&);
    friend DiscreteMeasure enumerate_marginal(const CouplingPlan&, int);
    friend std::vector<CoupledSample> sample_coupled(const CouplingPlan&,
                                                     std::uint64_t, long long);
};

// Exact probability of a product event under the coupling measure. The
// infinite mixture axis collapses into blocks delimited by the distinct
// finite depths of the listed coordinates, on which every kernel is constant.
double enumerate_nu(const CouplingPlan& plan, std::span<const int> alphas,
                    const SectionEvent& event);

// Pushforward laws computed by exact enumeration.
DiscreteMeasure enumerate_marginal(const CouplingPlan& plan, int alpha);
DiscreteMeasure enumerate_inf_marginal(const CouplingPlan& plan);

// n independent draws, reproducible from the seed (each sample consumes its
// own derived stream, so the output does not depend on batching).
std::vector<CoupledSample> sample_coupled(const CouplingPlan& plan,
                                          std::uint64_t seed, long long n);

} // namespace skw
