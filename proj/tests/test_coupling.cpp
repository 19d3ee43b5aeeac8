#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "fixtures.hpp"
#include "skw/coupling.hpp"
#include "skw/errors.hpp"
#include "skw/partition.hpp"
#include "skw/verification.hpp"

using namespace skw;

namespace {

// Independent route to the coupling probability: materialized kernels via
// the public accessor, explicit mixture sum with one tail block, and a full
// product enumeration over the listed coordinates.
double brute_nu(const CouplingPlan& plan, const std::vector<int>& alphas,
                const std::function<bool(int s, const std::map<int, int>& xs)>& event) {
    int max_depth = 0;
    for (int a : alphas)
        if (plan.finite_depth(a)) max_depth = std::max(max_depth, plan.depth(a));

    const auto& pinf = plan.p_inf();
    const int n = pinf.size();

    auto block_value = [&](int j) {
        double sum = 0.0;
        for (int s = 0; s < n; ++s) {
            if (pinf[s] == 0.0) continue;
            std::vector<DiscreteMeasure> kernels;
            for (int a : alphas) kernels.push_back(plan.kernel(j, s, a));
            // Product over all joint assignments.
            std::vector<int> xs(alphas.size(), 0);
            double acc = 0.0;
            while (true) {
                double w = 1.0;
                std::map<int, int> assign;
                for (std::size_t i = 0; i < alphas.size(); ++i) {
                    w *= kernels[i][xs[i]];
                    assign[alphas[i]] = xs[i];
                }
                if (w > 0.0 && event(s, assign)) acc += w;
                std::size_t pos = 0;
                while (pos < xs.size()) {
                    if (++xs[pos] < n) break;
                    xs[pos] = 0;
                    ++pos;
                }
                if (pos == xs.size()) break;
                if (alphas.empty()) break;
            }
            if (alphas.empty()) acc = event(s, {}) ? 1.0 : 0.0;
            sum += pinf[s] * acc;
        }
        return sum;
    };

    double total = 0.0;
    for (int j = 1; j <= max_depth; ++j)
        total += plan.betas().beta(j) * block_value(j);
    total += (1.0 - plan.betas().beta_star(max_depth)) * block_value(max_depth + 1);
    return total;
}

CouplingPlan spread_plan(int family_count = 40) {
    auto spec = fixtures::load_spread();
    std::vector<DiscreteMeasure> family(spec.family.begin(),
                                        spec.family.begin() + family_count);
    auto tree = build_partition_tree(*spec.p_inf, spec.params.delta,
                                     spec.params.eps, spec.params.k_max);
    return CouplingPlan::build(*spec.p_inf, std::move(family), std::move(tree),
                               BetaSchedule::geometric());
}

} // namespace

TEST_CASE("beta schedule: exact geometric partial sums") {
    auto betas = BetaSchedule::geometric();
    CHECK(betas.beta(1) == 0.5);
    CHECK(betas.beta(6) == std::ldexp(1.0, -6));
    CHECK(betas.beta_star(0) == 0.0);
    double acc = 0.0;
    for (int k = 1; k <= 40; ++k) {
        acc += betas.beta(k);
        CHECK(betas.beta_star(k) == acc);
        CHECK(betas.beta(k) > betas.beta(k + 1));
        CHECK(betas.beta_star(k) < 1.0);
    }
    CHECK_THROWS_AS(BetaSchedule::from_rule("harmonic"), DomainError);
}

TEST_CASE("ratio table: identity family") {
    auto space = fixtures::spread_space();
    auto p_inf = fixtures::spread_p_inf(space);
    auto tree = build_partition_tree(p_inf, 1.0, 0.1, 4);
    RatioTable table(p_inf, {p_inf}, tree);
    for (int k = 1; k <= 4; ++k) {
        for (int j : tree.active_cells(k))
            CHECK(table.ratio(0, k, j) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(table.max_cell_deviation(0, k) <= 1e-15);
    }
}

TEST_CASE("ratio table: point mass against a uniform two-point law") {
    auto space = std::make_shared<FiniteMetricSpace>(
        std::vector<std::string>{"a", "b"},
        std::vector<std::vector<double>>{{0, 3.0}, {3.0, 0}});
    DiscreteMeasure p_inf(space, {0.5, 0.5});
    auto tree = build_partition_tree(p_inf, 1.0, 0.1, 2);
    // Singleton cells {a}, {b}.
    RatioTable table(p_inf, {point_mass(space, 0)}, tree);
    CHECK(table.ratio(0, 1, 1) == 2.0);
    CHECK(table.ratio(0, 1, 2) == 0.0);
    CHECK(table.min_ratio(0, 1) == 0.0);
    CHECK(table.max_cell_deviation(0, 1) == 0.5);
    CHECK_THROWS_AS(table.ratio(0, 1, 0), ContractError); // empty remainder
}

TEST_CASE("ratio table: contamination family matches the cellwise formula") {
    auto spec = fixtures::load_spread();
    auto tree = build_partition_tree(*spec.p_inf, 1.0, 0.1, 6);
    RatioTable table(*spec.p_inf, spec.family, tree);
    DiscreteMeasure q(spec.space, {0.17, 0.14, 0.12, 0.09, 0.13, 0.35});

    for (int a = 0; a < static_cast<int>(spec.family.size()); a += 7) {
        const double t = 1.0 / static_cast<double>(a + 1);
        for (int k = 1; k <= 6; ++k) {
            for (int j : tree.active_cells(k)) {
                const auto& cell = tree.level(k).cells[j];
                const double expected =
                    (1.0 - t) + t * q.mass(cell) / spec.p_inf->mass(cell);
                CHECK(table.ratio(a, k, j) ==
                      doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("compute_depths: exact copies get infinite depth") {
    auto space = fixtures::spread_space();
    auto p_inf = fixtures::spread_p_inf(space);
    auto tree = build_partition_tree(p_inf, 1.0, 0.1, 4);
    RatioTable table(p_inf, {p_inf}, tree);
    auto depths = compute_depths(table, BetaSchedule::geometric(), 4, p_inf, {p_inf});
    CHECK(depths == std::vector<int>{kDepthInfinite});
}

TEST_CASE("compute_depths: min ratio below the first mixing mass gives depth 0") {
    auto space = std::make_shared<FiniteMetricSpace>(
        std::vector<std::string>{"a", "b"},
        std::vector<std::vector<double>>{{0, 3.0}, {3.0, 0}});
    DiscreteMeasure p_inf(space, {0.5, 0.5});
    DiscreteMeasure p_far(space, {0.2, 0.8}); // ratio on {a} is 0.4 < 0.5
    auto tree = build_partition_tree(p_inf, 1.0, 0.1, 2);
    RatioTable table(p_inf, {p_far}, tree);
    auto depths = compute_depths(table, BetaSchedule::geometric(), 2, p_inf, {p_far});
    CHECK(depths == std::vector<int>{0});

    CHECK_THROWS_AS(CouplingPlan::build(p_inf, {p_far}, tree,
                                        BetaSchedule::geometric()),
                    NotConvergedError);
}

TEST_CASE("compute_depths: contamination depths are non-decreasing and hit k_max") {
    auto spec = fixtures::load_spread();
    auto tree = build_partition_tree(*spec.p_inf, 1.0, 0.1, 6);
    RatioTable table(*spec.p_inf, spec.family, tree);
    const auto betas = BetaSchedule::geometric();
    auto depths = compute_depths(table, betas, 6, *spec.p_inf, spec.family);

    REQUIRE(depths.size() == 40);
    for (std::size_t a = 1; a < depths.size(); ++a)
        CHECK(depths[a] >= depths[a - 1]);

    // Direct-scan oracle: recompute the prefix-maximal level per member.
    for (std::size_t a = 0; a < depths.size(); ++a) {
        int expected = 0;
        for (int k = 1; k <= 6; ++k) {
            if (betas.beta_star(k) <= table.min_ratio(static_cast<int>(a), k) &&
                table.max_cell_deviation(static_cast<int>(a), k) <= betas.beta(k))
                expected = k;
            else
                break;
        }
        CHECK(depths[a] == expected);
    }

    CHECK(depths[0] == 1);   // alpha = 1 is the corner law itself
    CHECK(depths[28] == 6);  // first member reaching the deepest level
    CHECK(depths[39] == 6);
}

TEST_CASE("residual measure: identity family returns the limit law") {
    auto space = fixtures::spread_space();
    auto p_inf = fixtures::spread_p_inf(space);
    auto tree = build_partition_tree(p_inf, 1.0, 0.1, 4);
    for (int k = 1; k <= 4; ++k) {
        auto res = residual_measure(p_inf, p_inf, tree, k, BetaSchedule::geometric());
        CHECK(total_variation(res, p_inf) <= 1e-12);
    }
}

TEST_CASE("residual measure: single-cell level returns the member itself") {
    auto spec = fixtures::load_reference();
    auto tree = build_partition_tree(*spec.p_inf, 1.0, 0.1, 6);
    REQUIRE(tree.cell_count(4) == 1); // whole space in one cell
    for (int a : {0, 7, 19}) {
        auto res = residual_measure(spec.family[a], *spec.p_inf, tree, 4,
                                    BetaSchedule::geometric());
        CHECK(total_variation(res, spec.family[a]) <= 1e-12);
    }
}

TEST_CASE("residual measure: violated ratio condition names the cell") {
    auto spec = fixtures::load_spread();
    auto tree = build_partition_tree(*spec.p_inf, 1.0, 0.1, 6);
    auto far = point_mass(spec.space, 5);
    CHECK_THROWS_WITH_AS(
        residual_measure(far, *spec.p_inf, tree, 1, BetaSchedule::geometric()),
        doctest::Contains("cell 1"), DomainError);
}

TEST_CASE("residual measure: valid at the computed depth, atomwise oracle") {
    auto plan = spread_plan();
    const auto betas = BetaSchedule::geometric();
    for (int a = 0; a < plan.alpha_count(); ++a) {
        REQUIRE(plan.finite_depth(a));
        const int d = plan.depth(a);
        const auto& res = plan.residual(a);

        double sum = 0.0;
        for (int i = 0; i < res.size(); ++i) {
            CHECK(res[i] >= 0.0);
            sum += res[i];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

        // Atomwise recomputation straight from the defining formula.
        const double bstar = betas.beta_star(d);
        const auto& pa = plan.family()[a];
        for (int i = 0; i < res.size(); ++i) {
            const int c = plan.tree().locate_cell(d, i);
            double expected = pa[i] / (1.0 - bstar);
            const double cell_inf = plan.tree().cell_masses(d)[c];
            if (cell_inf > 1e-12) {
                const double cell_pa = pa.mass(plan.tree().level(d).cells[c]);
                expected -= bstar / (1.0 - bstar) * (pa[i] / cell_pa) * cell_inf;
            }
            CHECK(res[i] == doctest::Approx(expected).epsilon(1e-10));
        }
    }
}

TEST_CASE("mixture identity: zero defect cases and plan-wide bound") {
    auto space = fixtures::spread_space();
    auto p_inf = fixtures::spread_p_inf(space);
    auto tree = build_partition_tree(p_inf, 1.0, 0.1, 4);
    auto betas = BetaSchedule::geometric();

    auto res = residual_measure(p_inf, p_inf, tree, 3, betas);
    CHECK(mixture_identity_defect(p_inf, res, tree, 3, betas) <= 1e-15);

    auto plan = spread_plan();
    for (int a = 0; a < plan.alpha_count(); ++a) {
        CHECK(mixture_identity_defect(plan.family()[a], plan.residual(a),
                                      plan.tree(), plan.depth(a), betas) <= 1e-10);
    }
}

TEST_CASE("mixture identity: corrupting the residual is visible") {
    auto plan = spread_plan(10);
    const int a = 5;
    auto w = plan.residual(a).weights();
    w[0] += 1e-3;
    double sum = 0.0;
    for (double v : w) sum += v;
    for (auto& v : w) v /= sum;
    DiscreteMeasure corrupted(plan.space_ptr(), std::move(w), 1e-6);
    CHECK(mixture_identity_defect(plan.family()[a], corrupted, plan.tree(),
                                  plan.depth(a), plan.betas()) >= 1e-4);
}

TEST_CASE("non-negativity gate: residual succeeds exactly when the ratios allow") {
    auto space = fixtures::spread_space();
    auto p_inf = fixtures::spread_p_inf(space);
    auto tree = build_partition_tree(p_inf, 1.0, 0.1, 6);
    auto betas = BetaSchedule::geometric();
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int trial = 0; trial < 200; ++trial) {
        // Random mixtures between the limit law and random corners, at random
        // levels: some satisfy the cellwise ratio condition, some do not.
        std::vector<double> w(6);
        double sum = 0.0;
        for (auto& v : w) {
            v = unit(rng);
            sum += v;
        }
        for (auto& v : w) v /= sum;
        const double t = unit(rng);
        auto pa = mix(1.0 - t, p_inf, t, DiscreteMeasure(space, w));
        const int k = 1 + static_cast<int>(rng() % 6);

        bool allowed = true;
        for (int j : tree.active_cells(k)) {
            const auto& cell = tree.level(k).cells[j];
            if (betas.beta_star(k) > pa.mass(cell) / p_inf.mass(cell))
                allowed = false;
        }
        if (allowed) {
            CHECK_NOTHROW(residual_measure(pa, p_inf, tree, k, betas));
        } else {
            CHECK_THROWS_AS(residual_measure(pa, p_inf, tree, k, betas),
                            DomainError);
        }
    }
}

TEST_CASE("kernel: case split") {
    auto spec = fixtures::load_spread();
    auto tree = build_partition_tree(*spec.p_inf, 1.0, 0.1, 6);

    // Family: one exact copy (infinite depth) and contamination members.
    std::vector<DiscreteMeasure> family{*spec.p_inf, spec.family[0],
                                        spec.family[19]};
    auto plan = CouplingPlan::build(*spec.p_inf, family, tree,
                                    BetaSchedule::geometric());
    REQUIRE(!plan.finite_depth(0));
    REQUIRE(plan.finite_depth(1));

    // Infinite depth: the kernel is the point mass at s for every component.
    for (int s = 0; s < 6; ++s)
        for (int j : {1, 3, 9})
            CHECK(total_variation(plan.kernel(j, s, 0), point_mass(spec.space, s)) ==
                  0.0);

    // Just past the depth: the residual law, whatever s is.
    for (int a : {1, 2}) {
        const int d = plan.depth(a);
        for (int s = 0; s < 6; ++s) {
            CHECK(total_variation(plan.kernel(d + 1, s, a), plan.residual(a)) ==
                  0.0);
            CHECK(total_variation(plan.kernel(d + 7, s, a), plan.residual(a)) ==
                  0.0);
        }
    }

    // At or below the depth: supported inside the cell of s, proportional to
    // the member there (restrict-and-renormalize oracle).
    for (int a : {1, 2}) {
        const int d = plan.depth(a);
        for (int s = 0; s < 6; ++s) {
            auto k1 = plan.kernel(d, s, a);
            const int cell_idx = plan.tree().locate_cell(d, s);
            const auto& cell = plan.tree().level(d).cells[cell_idx];
            auto oracle = conditional(plan.family()[a], cell);
            CHECK(total_variation(k1, oracle) <= 1e-12);
            for (int x = 0; x < 6; ++x)
                if (!cell.contains(x)) CHECK(k1[x] == 0.0);
        }
    }

    CHECK_THROWS_AS(plan.kernel(0, 0, 0), ContractError);
    CHECK_THROWS_AS(plan.kernel(1, 0, 11), ContractError);
}

TEST_CASE("enumerate_nu: whole event, coordinate laws, contract checks") {
    auto plan = spread_plan(12);

    SectionEvent everything;
    CHECK(enumerate_nu(plan, {}, everything) == doctest::Approx(1.0).epsilon(1e-12));

    // Limit-coordinate events reproduce the limit law.
    for (int p = 0; p < 6; ++p) {
        SectionEvent ev;
        ev.s_allowed = [p](int s) { return s == p; };
        CHECK(enumerate_nu(plan, {}, ev) ==
              doctest::Approx(plan.p_inf()[p]).epsilon(1e-12));
    }

    // Coordinate marginals match both the member law and the mixture
    // decomposition evaluated by hand.
    for (int a : {0, 5, 11}) {
        auto marg = enumerate_marginal(plan, a);
        CHECK(total_variation(marg, plan.family()[a]) <= 1e-10);

        const int d = plan.depth(a);
        const double bstar = plan.betas().beta_star(d);
        for (int p = 0; p < 6; ++p) {
            double rhs = (1.0 - bstar) * plan.residual(a)[p];
            for (int j : plan.tree().active_cells(d)) {
                const auto& cell = plan.tree().level(d).cells[j];
                const double cm = plan.family()[a].mass(cell);
                if (cm > 0.0 && cell.contains(p))
                    rhs += bstar * plan.tree().cell_masses(d)[j] *
                           plan.family()[a][p] / cm;
            }
            SectionEvent ev;
            ev.section = [p](int, int, int x) { return x == p; };
            const int idx[1] = {a};
            CHECK(enumerate_nu(plan, idx, ev) ==
                  doctest::Approx(rhs).epsilon(1e-10));
        }
    }

    const int dup[2] = {3, 3};
    SectionEvent ev;
    CHECK_THROWS_AS(enumerate_nu(plan, dup, ev), ContractError);
}

TEST_CASE("enumerate_nu: blocking agrees with the explicit mixture oracle") {
    auto spec = fixtures::load_spread();
    auto tree = build_partition_tree(*spec.p_inf, 1.0, 0.1, 6);
    std::vector<DiscreteMeasure> family{spec.family[0], spec.family[6],
                                        *spec.p_inf, spec.family[30]};
    auto plan = CouplingPlan::build(*spec.p_inf, family, tree,
                                    BetaSchedule::geometric());
    const auto& space = plan.space();

    // Single-coordinate deviation events at several scales.
    for (int a = 0; a < plan.alpha_count(); ++a) {
        for (double radius : {0.05, 0.2, 0.5}) {
            SectionEvent ev;
            ev.section = [&space, radius](int, int s, int x) {
                return space.dist(s, x) > radius;
            };
            const int idx[1] = {a};
            const double fast = enumerate_nu(plan, idx, ev);
            const double slow = brute_nu(plan, {a}, [&](int s, const std::map<int, int>& xs) {
                return space.dist(s, xs.at(a)) > radius;
            });
            CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
        }
    }

    // Two-coordinate product events across different depths.
    for (auto [a1, a2] : std::vector<std::pair<int, int>>{{0, 1}, {1, 3}, {0, 2}}) {
        SectionEvent ev;
        ev.section = [&space](int, int s, int x) { return space.dist(s, x) <= 0.3; };
        const int idx[2] = {a1, a2};
        const double fast = enumerate_nu(plan, idx, ev);
        const double slow =
            brute_nu(plan, {a1, a2}, [&](int s, const std::map<int, int>& xs) {
                return space.dist(s, xs.at(a1)) <= 0.3 &&
                       space.dist(s, xs.at(a2)) <= 0.3;
            });
        CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
    }

    // Joint limit-coordinate filter and per-coordinate sections.
    SectionEvent joint;
    joint.s_allowed = [](int s) { return s <= 2; };
    joint.section = [&space](int, int s, int x) { return space.dist(s, x) > 0.1; };
    const int pair[2] = {1, 2};
    const double fast = enumerate_nu(plan, pair, joint);
    const double slow = brute_nu(plan, {1, 2}, [&](int s, const std::map<int, int>& xs) {
        return s <= 2 && space.dist(s, xs.at(1)) > 0.1 &&
               space.dist(s, xs.at(2)) > 0.1;
    });
    CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
}

TEST_CASE("sample_coupled: identical family collapses onto the diagonal") {
    auto space = fixtures::spread_space();
    auto p_inf = fixtures::spread_p_inf(space);
    auto tree = build_partition_tree(p_inf, 1.0, 0.1, 4);
    auto plan = CouplingPlan::build(p_inf, {p_inf, p_inf}, tree,
                                    BetaSchedule::geometric());
    auto samples = sample_coupled(plan, 123, 500);
    REQUIRE(samples.size() == 500);
    for (const auto& smp : samples)
        for (int x : smp.x) CHECK(x == smp.s);
}

TEST_CASE("sample_coupled: single-point space pins every coordinate") {
    auto space = std::make_shared<FiniteMetricSpace>(
        std::vector<std::string>{"only"},
        std::vector<std::vector<double>>{{0.0}});
    DiscreteMeasure mu(space, {1.0});
    auto tree = build_partition_tree(mu, 1.0, 0.1, 2);
    auto plan = CouplingPlan::build(mu, {mu, mu, mu}, tree,
                                    BetaSchedule::geometric());
    for (const auto& smp : sample_coupled(plan, 9, 50)) {
        CHECK(smp.s == 0);
        for (int x : smp.x) CHECK(x == 0);
    }
}

TEST_CASE("sample_coupled: deterministic in the seed, sensitive to it") {
    auto plan = spread_plan(6);
    auto s1 = sample_coupled(plan, 42, 200);
    auto s2 = sample_coupled(plan, 42, 200);
    auto s3 = sample_coupled(plan, 43, 200);
    REQUIRE(s1.size() == s2.size());
    bool all_equal = true;
    bool any_diff_seed = false;
    for (std::size_t i = 0; i < s1.size(); ++i) {
        if (s1[i].j != s2[i].j || s1[i].s != s2[i].s || s1[i].x != s2[i].x)
            all_equal = false;
        if (s1[i].s != s3[i].s || s1[i].x != s3[i].x) any_diff_seed = true;
    }
    CHECK(all_equal);
    CHECK(any_diff_seed);
}

TEST_CASE("sample_coupled: empirical marginals match the member laws (DKW)") {
    auto plan = spread_plan(8);
    const long long n = 20000;
    auto samples = sample_coupled(plan, 2027, n);

    for (int a = 0; a < plan.alpha_count(); a += 3) {
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(n));
        for (const auto& smp : samples)
            values.push_back(static_cast<double>(smp.x[a]));

        std::vector<std::pair<double, double>> jumps;
        for (int p = 0; p < 6; ++p)
            if (plan.family()[a][p] > 0.0)
                jumps.emplace_back(static_cast<double>(p), plan.family()[a][p]);
        CHECK(dkw_check(values, StepCdf(std::move(jumps)), 0.999));
    }
}

TEST_CASE("sampler and enumerator agree on event frequencies") {
    auto plan = spread_plan(10);
    const auto& space = plan.space();
    const long long n = 20000;
    auto samples = sample_coupled(plan, 5150, n);

    for (int a : {0, 4, 9}) {
        for (double radius : {0.1, 0.4}) {
            SectionEvent ev;
            ev.section = [&space, radius](int, int s, int x) {
                return space.dist(s, x) > radius;
            };
            const int idx[1] = {a};
            const double exact = enumerate_nu(plan, idx, ev);

            long long hits = 0;
            for (const auto& smp : samples)
                if (space.dist(smp.x[a], smp.s) > radius) ++hits;
            const double rate = static_cast<double>(hits) / static_cast<double>(n);
            const double sigma =
                std::sqrt(std::max(exact * (1.0 - exact), 1e-9) /
                          static_cast<double>(n));
            CHECK(std::abs(rate - exact) <= 4.0 * sigma);
        }
    }
}

TEST_CASE("coordinate laws are exact on random couplable instances") {
    // The mixture construction reproduces every prescribed law exactly, on
    // any instance it accepts; random geometry, random limit law, random
    // contamination directions.
    std::mt19937 rng(515);
    std::uniform_real_distribution<double> coord(0.0, 1.0);
    std::exponential_distribution<double> ex(1.0);

    int built = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 6);
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < n; ++i) pts.emplace_back(coord(rng), coord(rng));
        std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                d[i][j] = std::hypot(pts[i].first - pts[j].first,
                                     pts[i].second - pts[j].second);
        std::vector<std::string> labels;
        for (int i = 0; i < n; ++i) labels.push_back("q" + std::to_string(i));
        auto space = std::make_shared<FiniteMetricSpace>(std::move(labels),
                                                         std::move(d));
        std::vector<double> w(n);
        double sum = 0.0;
        for (auto& v : w) {
            v = ex(rng) + 0.05;
            sum += v;
        }
        for (auto& v : w) v /= sum;
        DiscreteMeasure p_inf(space, w);

        std::vector<DiscreteMeasure> family;
        for (int a = 0; a < 5; ++a) {
            std::vector<double> qw(n);
            double qs = 0.0;
            for (auto& v : qw) {
                v = ex(rng);
                qs += v;
            }
            for (auto& v : qw) v /= qs;
            const double t = 0.02 + 0.2 * coord(rng);
            family.push_back(mix(1.0 - t, p_inf, t, DiscreteMeasure(space, qw)));
        }
        family.push_back(p_inf); // one exact copy

        auto tree = build_partition_tree(p_inf, 1.0, 0.1, 5);
        try {
            auto plan = CouplingPlan::build(p_inf, family, std::move(tree),
                                            BetaSchedule::geometric());
            ++built;
            CHECK(total_variation(enumerate_inf_marginal(plan), plan.p_inf()) <=
                  1e-10);
            for (int a = 0; a < plan.alpha_count(); ++a)
                CHECK(total_variation(enumerate_marginal(plan, a),
                                      plan.family()[a]) <= 1e-10);
        } catch (const NotConvergedError&) {
            // Contamination drawn too strong for the level-1 gate; skip.
        }
    }
    CHECK(built >= 20);
}

TEST_CASE("plan depths on the reference instance are flat at level 4") {
    auto spec = fixtures::load_reference();
    auto tree = build_partition_tree(*spec.p_inf, 1.0, 0.1, 6);
    auto plan = CouplingPlan::build(*spec.p_inf, spec.family, tree,
                                    BetaSchedule::geometric());
    REQUIRE(plan.alpha_count() == 20);
    for (int a = 0; a < 20; ++a) CHECK(plan.depth(a) == 4);
}
