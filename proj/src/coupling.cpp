#include "skw/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "skw/errors.hpp"
#include "skw/rng.hpp"

namespace skw {

namespace {

void check_alpha(int alpha, int count, const char* what) {
    if (alpha < 0 || alpha >= count)
        throw ContractError(std::string(what) + ": family index " +
                            std::to_string(alpha) + " out of range");
}

// Reference to kernel weights without materializing a measure: either a
// borrowed weight vector or a point mass at `delta_at`.
struct KernelRef {
    const std::vector<double>* weights = nullptr;
    int delta_at = -1;
};

} // namespace

RatioTable::RatioTable(const DiscreteMeasure& p_inf,
                       const std::vector<DiscreteMeasure>& family,
                       const PartitionTree& tree)
    : k_max_(tree.k_max()) {
    if (!tree.space().same_as(p_inf.space()))
        throw DomainError("ratio table: tree and limit law disagree on space");
    for (const auto& pa : family)
        if (!pa.same_space(p_inf))
            throw DomainError("ratio table: family member on a different space");

    const int n_alpha = static_cast<int>(family.size());
    active_mask_.resize(k_max_);
    for (int k = 1; k <= k_max_; ++k) {
        const auto& lvl = tree.level(k);
        std::vector<char> mask(lvl.cells.size(), 0);
        for (int j : tree.active_cells(k)) mask[j] = 1;
        active_mask_[k - 1] = std::move(mask);
    }

    ratio_.resize(n_alpha);
    min_ratio_.resize(n_alpha);
    max_ratio_.resize(n_alpha);
    deviation_.resize(n_alpha);
    for (int a = 0; a < n_alpha; ++a) {
        ratio_[a].resize(k_max_);
        min_ratio_[a].assign(k_max_, 0.0);
        max_ratio_[a].assign(k_max_, 0.0);
        deviation_[a].assign(k_max_, 0.0);
        for (int k = 1; k <= k_max_; ++k) {
            const auto& lvl = tree.level(k);
            const auto& inf_mass = tree.cell_masses(k);
            std::vector<double> row(lvl.cells.size(),
                                    std::numeric_limits<double>::quiet_NaN());
            double lo = std::numeric_limits<double>::infinity();
            double hi = 0.0;
            double dev = 0.0;
            for (std::size_t j = 0; j < lvl.cells.size(); ++j) {
                const double pa_mass = family[a].mass(lvl.cells[j]);
                dev = std::max(dev, std::abs(pa_mass - inf_mass[j]));
                if (active_mask_[k - 1][j]) {
                    row[j] = pa_mass / inf_mass[j];
                    lo = std::min(lo, row[j]);
                    hi = std::max(hi, row[j]);
                }
            }
            ratio_[a][k - 1] = std::move(row);
            min_ratio_[a][k - 1] = lo;
            max_ratio_[a][k - 1] = hi;
            deviation_[a][k - 1] = dev;
        }
    }
}

double RatioTable::ratio(int alpha, int k, int cell) const {
    check_alpha(alpha, alpha_count(), "ratio");
    if (k < 1 || k > k_max_) throw ContractError("ratio: level out of range");
    const auto& row = ratio_[alpha][k - 1];
    if (cell < 0 || cell >= static_cast<int>(row.size()) ||
        !active_mask_[k - 1][cell])
        throw ContractError("ratio: cell " + std::to_string(cell) +
                            " is not active at level " + std::to_string(k));
    return row[cell];
}

double RatioTable::min_ratio(int alpha, int k) const {
    check_alpha(alpha, alpha_count(), "min_ratio");
    if (k < 1 || k > k_max_) throw ContractError("min_ratio: level out of range");
    return min_ratio_[alpha][k - 1];
}

double RatioTable::max_ratio(int alpha, int k) const {
    check_alpha(alpha, alpha_count(), "max_ratio");
    if (k < 1 || k > k_max_) throw ContractError("max_ratio: level out of range");
    return max_ratio_[alpha][k - 1];
}

double RatioTable::max_cell_deviation(int alpha, int k) const {
    check_alpha(alpha, alpha_count(), "max_cell_deviation");
    if (k < 1 || k > k_max_)
        throw ContractError("max_cell_deviation: level out of range");
    return deviation_[alpha][k - 1];
}

std::vector<int> compute_depths(const RatioTable& table, const BetaSchedule& betas,
                                int k_max, const DiscreteMeasure& p_inf,
                                const std::vector<DiscreteMeasure>& family) {
    if (k_max < 1 || k_max > table.k_max())
        throw ContractError("compute_depths: table does not cover k_max");
    if (table.alpha_count() != static_cast<int>(family.size()))
        throw ContractError("compute_depths: table built for a different family");
    std::vector<int> depths(family.size(), 0);
    for (std::size_t a = 0; a < family.size(); ++a) {
        if (total_variation(family[a], p_inf) <= kMassTol) {
            depths[a] = kDepthInfinite;
            continue;
        }
        int level = 0;
        for (int k = 1; k <= k_max; ++k) {
            const bool fits = betas.beta_star(k) <= table.min_ratio(static_cast<int>(a), k) &&
                              table.max_cell_deviation(static_cast<int>(a), k) <= betas.beta(k);
            if (!fits) break;
            level = k;
        }
        depths[a] = level;
    }
    return depths;
}

DiscreteMeasure residual_measure(const DiscreteMeasure& p_alpha,
                                 const DiscreteMeasure& p_inf,
                                 const PartitionTree& tree, int k,
                                 const BetaSchedule& betas) {
    if (!p_alpha.same_space(p_inf))
        throw DomainError("residual_measure: measures on different spaces");
    const double bstar = betas.beta_star(k);
    const auto& lvl = tree.level(k);
    const auto& inf_mass = tree.cell_masses(k);

    std::vector<double> alpha_mass(lvl.cells.size(), 0.0);
    for (std::size_t j = 0; j < lvl.cells.size(); ++j)
        alpha_mass[j] = p_alpha.mass(lvl.cells[j]);
    for (int j : tree.active_cells(k)) {
        if (bstar > alpha_mass[j] / inf_mass[j])
            throw DomainError(
                "residual measure would be negative on cell " +
                std::to_string(j) + " at level " + std::to_string(k) +
                " (mixing mass " + std::to_string(bstar) + " exceeds ratio " +
                std::to_string(alpha_mass[j] / inf_mass[j]) + ")");
    }

    const int n = p_alpha.size();
    std::vector<double> w(n, 0.0);
    const double scale = 1.0 / (1.0 - bstar);
    for (int i = 0; i < n; ++i) {
        const int c = tree.locate_cell(k, i);
        if (inf_mass[c] > kMassTol) {
            w[i] = p_alpha[i] * scale * (1.0 - bstar * inf_mass[c] / alpha_mass[c]);
        } else {
            w[i] = p_alpha[i] * scale;
        }
    }

    double sum = 0.0;
    for (double v : w) {
        if (v < -kMassTol)
            throw DomainError("residual measure has negative atom mass " +
                              std::to_string(v));
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw DomainError("residual measure mass " + std::to_string(sum) +
                          " is not 1");
    return DiscreteMeasure(p_alpha.space_ptr(), std::move(w));
}

double mixture_identity_defect(const DiscreteMeasure& p_alpha,
                               const DiscreteMeasure& residual,
                               const PartitionTree& tree, int k,
                               const BetaSchedule& betas) {
    const double bstar = betas.beta_star(k);
    const auto& lvl = tree.level(k);
    const auto& inf_mass = tree.cell_masses(k);
    std::vector<double> alpha_mass(lvl.cells.size(), 0.0);
    for (std::size_t j = 0; j < lvl.cells.size(); ++j)
        alpha_mass[j] = p_alpha.mass(lvl.cells[j]);

    double defect = 0.0;
    for (int i = 0; i < p_alpha.size(); ++i) {
        const int c = tree.locate_cell(k, i);
        double rhs = (1.0 - bstar) * residual[i];
        if (inf_mass[c] > kMassTol && alpha_mass[c] > 0.0)
            rhs += bstar * inf_mass[c] * p_alpha[i] / alpha_mass[c];
        defect = std::max(defect, std::abs(p_alpha[i] - rhs));
    }
    return defect;
}

CouplingPlan::CouplingPlan(DiscreteMeasure p_inf,
                           std::vector<DiscreteMeasure> family,
                           PartitionTree tree, BetaSchedule betas,
                           std::vector<int> depths,
                           std::vector<std::optional<DiscreteMeasure>> residuals)
    : p_inf_(std::move(p_inf)), family_(std::move(family)), tree_(std::move(tree)),
      betas_(betas), depths_(std::move(depths)), residuals_(std::move(residuals)) {
    if (!tree_.space().same_as(p_inf_.space()))
        throw DomainError("plan: tree built over a different space");
    if (depths_.size() != family_.size() || residuals_.size() != family_.size())
        throw DomainError("plan: depth/residual tables sized wrong");
    for (std::size_t a = 0; a < family_.size(); ++a) {
        if (!family_[a].same_space(p_inf_))
            throw DomainError("plan: family member on a different space");
        const int d = depths_[a];
        if (d == kDepthInfinite) continue;
        if (d < 1 || d > tree_.k_max())
            throw DomainError("plan: depth for member " + std::to_string(a + 1) +
                              " outside 1..k_max");
        if (!residuals_[a])
            throw DomainError("plan: missing residual for member " +
                              std::to_string(a + 1));
    }

    table_ = std::make_shared<RatioTable>(p_inf_, family_, tree_);

    conditionals_.resize(family_.size());
    for (std::size_t a = 0; a < family_.size(); ++a) {
        if (depths_[a] == kDepthInfinite) continue;
        const auto& lvl = tree_.level(depths_[a]);
        conditionals_[a].resize(lvl.cells.size());
        for (std::size_t c = 0; c < lvl.cells.size(); ++c) {
            if (lvl.cells[c].empty()) continue;
            if (family_[a].mass(lvl.cells[c]) <= kMassTol) continue;
            conditionals_[a][c] = conditional(family_[a], lvl.cells[c]).weights();
        }
    }
}

CouplingPlan CouplingPlan::build(DiscreteMeasure p_inf,
                                 std::vector<DiscreteMeasure> family,
                                 PartitionTree tree, BetaSchedule betas) {
    RatioTable table(p_inf, family, tree);
    auto depths = compute_depths(table, betas, tree.k_max(), p_inf, family);

    for (std::size_t a = 0; a < family.size(); ++a) {
        if (depths[a] != 0) continue;
        // Name a level-1 witness of the failure: a starved cell if the ratio
        // condition broke, otherwise the cell with the worst mass deviation.
        int bad_cell = -1;
        std::string reason;
        for (int j : tree.active_cells(1)) {
            if (betas.beta_star(1) > table.ratio(static_cast<int>(a), 1, j)) {
                bad_cell = j;
                reason = "mass ratio " +
                         std::to_string(table.ratio(static_cast<int>(a), 1, j)) +
                         " below the mixing mass";
                break;
            }
        }
        if (bad_cell == -1) {
            const auto& lvl = tree.level(1);
            double worst = -1.0;
            for (std::size_t j = 0; j < lvl.cells.size(); ++j) {
                const double dev = std::abs(family[a].mass(lvl.cells[j]) -
                                            tree.cell_masses(1)[j]);
                if (dev > worst) {
                    worst = dev;
                    bad_cell = static_cast<int>(j);
                }
            }
            reason = "cell mass deviation " + std::to_string(worst) +
                     " above the first mixing weight";
        }
        throw NotConvergedError(
            "family member " + std::to_string(a + 1) +
                " is too far from the limit law to couple (level-1 condition "
                "fails on cell " + std::to_string(bad_cell) + ": " + reason + ")",
            static_cast<int>(a) + 1, bad_cell);
    }

    std::vector<std::optional<DiscreteMeasure>> residuals(family.size());
    for (std::size_t a = 0; a < family.size(); ++a) {
        if (depths[a] == kDepthInfinite) continue;
        residuals[a] = residual_measure(family[a], p_inf, tree, depths[a], betas);
        const double defect = mixture_identity_defect(family[a], *residuals[a],
                                                      tree, depths[a], betas);
        if (defect > 1e-10)
            throw DomainError("mixture identity defect " + std::to_string(defect) +
                              " for member " + std::to_string(a + 1));
    }
    return CouplingPlan(std::move(p_inf), std::move(family), std::move(tree),
                        betas, std::move(depths), std::move(residuals));
}

CouplingPlan CouplingPlan::from_parts(
    DiscreteMeasure p_inf, std::vector<DiscreteMeasure> family,
    PartitionTree tree, BetaSchedule betas, std::vector<int> depths,
    std::vector<std::optional<DiscreteMeasure>> residuals) {
    for (int d : depths)
        if (d == 0)
            throw DomainError("plan: stored depth 0 is not a valid coupling");
    return CouplingPlan(std::move(p_inf), std::move(family), std::move(tree),
                        betas, std::move(depths), std::move(residuals));
}

int CouplingPlan::depth(int alpha) const {
    check_alpha(alpha, alpha_count(), "depth");
    return depths_[alpha];
}

const DiscreteMeasure& CouplingPlan::residual(int alpha) const {
    check_alpha(alpha, alpha_count(), "residual");
    if (!residuals_[alpha])
        throw ContractError("no residual stored for member with infinite depth");
    return *residuals_[alpha];
}

namespace {

KernelRef kernel_ref_impl(const CouplingPlan& plan,
                          const std::vector<std::optional<std::vector<double>>>& conds,
                          const DiscreteMeasure* residual, int depth, bool deep,
                          int s) {
    if (depth == kDepthInfinite) return KernelRef{nullptr, s};
    if (deep) return KernelRef{&residual->weights(), -1};
    const int cell = plan.tree().locate_cell(depth, s);
    if (conds[cell]) return KernelRef{&*conds[cell], -1};
    return KernelRef{nullptr, s}; // limit-null cell, immaterial under s ~ P_inf
}

double section_mass(const KernelRef& ref, const SectionEvent& event, int alpha,
                    int s) {
    if (ref.delta_at >= 0) {
        if (!event.section) return 1.0;
        return event.section(alpha, s, ref.delta_at) ? 1.0 : 0.0;
    }
    if (!event.section) return 1.0;
    double m = 0.0;
    const auto& w = *ref.weights;
    for (std::size_t x = 0; x < w.size(); ++x)
        if (w[x] > 0.0 && event.section(alpha, s, static_cast<int>(x)))
            m += w[x];
    return m;
}

} // namespace

DiscreteMeasure CouplingPlan::kernel(int j, int s, int alpha) const {
    if (j < 1) throw ContractError("kernel: mixture component must be >= 1");
    space().check_point(s, "kernel");
    check_alpha(alpha, alpha_count(), "kernel");

    const int d = depths_[alpha];
    KernelRef ref = kernel_ref_impl(*this, conditionals_[alpha],
                                    residuals_[alpha] ? &*residuals_[alpha] : nullptr,
                                    d, d != kDepthInfinite && j > d, s);
    if (ref.delta_at >= 0) return point_mass(space_ptr(), ref.delta_at);
    return DiscreteMeasure(space_ptr(), *ref.weights);
}

double enumerate_nu(const CouplingPlan& plan, std::span<const int> alphas,
                    const SectionEvent& event) {
    std::vector<int> idx(alphas.begin(), alphas.end());
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
        throw ContractError("enumerate_nu: duplicate family index");
    for (int a : idx) check_alpha(a, plan.alpha_count(), "enumerate_nu");

    // Mixture blocks: the kernels only see whether j exceeds each depth, so
    // the infinite j-sum collapses onto the distinct finite depths.
    std::vector<int> thresholds;
    for (int a : idx)
        if (plan.finite_depth(a)) thresholds.push_back(plan.depth(a));
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                     thresholds.end());

    const auto& betas = plan.betas();
    const auto& pinf = plan.p_inf();

    double total = 0.0;
    int prev = 0;
    for (std::size_t b = 0; b <= thresholds.size(); ++b) {
        const bool tail = b == thresholds.size();
        const int upper = tail ? 0 : thresholds[b];
        const double weight = tail ? 1.0 - betas.beta_star(prev)
                                   : betas.beta_star(upper) - betas.beta_star(prev);
        const int j_rep = prev + 1;
        if (weight > 0.0) {
            double block_sum = 0.0;
            for (int s = 0; s < pinf.size(); ++s) {
                if (pinf[s] == 0.0) continue;
                if (event.s_allowed && !event.s_allowed(s)) continue;
                double prod = 1.0;
                for (int a : idx) {
                    const int d = plan.depth(a);
                    const bool deep = d != kDepthInfinite && j_rep > d;
                    KernelRef ref = kernel_ref_impl(
                        plan, plan.conditionals_[a],
                        plan.residuals_[a] ? &*plan.residuals_[a] : nullptr, d,
                        deep, s);
                    prod *= section_mass(ref, event, a, s);
                    if (prod == 0.0) break;
                }
                block_sum += pinf[s] * prod;
            }
            total += weight * block_sum;
        }
        prev = upper;
    }
    return total;
}

DiscreteMeasure enumerate_marginal(const CouplingPlan& plan, int alpha) {
    check_alpha(alpha, plan.alpha_count(), "enumerate_marginal");
    const auto& pinf = plan.p_inf();
    std::vector<double> w(pinf.size(), 0.0);

    const int d = plan.depth(alpha);
    const auto& betas = plan.betas();
    std::vector<std::pair<bool, double>> blocks; // (deep, weight)
    if (d == kDepthInfinite) {
        blocks.emplace_back(false, 1.0);
    } else {
        blocks.emplace_back(false, betas.beta_star(d));
        blocks.emplace_back(true, 1.0 - betas.beta_star(d));
    }

    for (auto [deep, weight] : blocks) {
        for (int s = 0; s < pinf.size(); ++s) {
            if (pinf[s] == 0.0) continue;
            KernelRef ref = kernel_ref_impl(
                plan, plan.conditionals_[alpha],
                plan.residuals_[alpha] ? &*plan.residuals_[alpha] : nullptr, d,
                deep, s);
            if (ref.delta_at >= 0) {
                w[ref.delta_at] += weight * pinf[s];
            } else {
                const auto& kw = *ref.weights;
                for (std::size_t x = 0; x < kw.size(); ++x)
                    w[x] += weight * pinf[s] * kw[x];
            }
        }
    }
    return DiscreteMeasure(plan.space_ptr(), std::move(w));
}

DiscreteMeasure enumerate_inf_marginal(const CouplingPlan& plan) {
    // The limit coordinate of every component kernel is the identity push of
    // s ~ P_inf, so the enumeration reduces to the weights themselves.
    std::vector<double> w(plan.p_inf().weights());
    return DiscreteMeasure(plan.space_ptr(), std::move(w));
}

std::vector<CoupledSample> sample_coupled(const CouplingPlan& plan,
                                          std::uint64_t seed, long long n) {
    if (n < 0) throw DomainError("sample count must be >= 0");

    const auto& pinf = plan.p_inf();
    const auto& betas = plan.betas();
    const int n_alpha = plan.alpha_count();

    const auto cum_inf = cumulative_weights(pinf.weights());
    std::vector<std::vector<double>> cum_residual(n_alpha);
    std::vector<std::vector<std::vector<double>>> cum_cond(n_alpha);
    for (int a = 0; a < n_alpha; ++a) {
        if (!plan.finite_depth(a)) continue;
        cum_residual[a] = cumulative_weights(plan.residual(a).weights());
        const auto& conds = plan.conditionals_[a];
        cum_cond[a].resize(conds.size());
        for (std::size_t c = 0; c < conds.size(); ++c)
            if (conds[c]) cum_cond[a][c] = cumulative_weights(*conds[c]);
    }

    std::vector<CoupledSample> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        UnitRng rng(derive_stream_seed(seed, static_cast<std::uint64_t>(i)));
        CoupledSample smp;

        const double uj = rng.next_unit();
        int j = 1;
        while (uj >= betas.beta_star(j)) ++j;
        smp.j = j;

        smp.s = draw_index(cum_inf, rng.next_unit());

        smp.x.resize(n_alpha);
        for (int a = 0; a < n_alpha; ++a) {
            const double u = rng.next_unit();
            const int d = plan.depth(a);
            if (d == kDepthInfinite) {
                smp.x[a] = smp.s;
            } else if (j > d) {
                smp.x[a] = draw_index(cum_residual[a], u);
            } else {
                const int cell = plan.tree().locate_cell(d, smp.s);
                if (!cum_cond[a][cell].empty()) {
                    smp.x[a] = draw_index(cum_cond[a][cell], u);
                } else {
                    smp.x[a] = smp.s;
                }
            }
        }
        out.push_back(std::move(smp));
    }
    return out;
}

} // namespace skw
