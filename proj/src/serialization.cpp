#include "skw/serialization.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "skw/errors.hpp"

namespace skw {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json parse_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw IoError("input is not valid JSON");
    return j;
}

json space_to_json(const FiniteMetricSpace& space) {
    return json{{"labels", space.labels()}, {"distances", space.matrix()}};
}

SpacePtr space_from_json(const json& j) {
    return std::make_shared<FiniteMetricSpace>(
        j.at("labels").get<std::vector<std::string>>(),
        j.at("distances").get<std::vector<std::vector<double>>>());
}

json tree_body(const PartitionTree& tree) {
    json levels = json::array();
    for (int k = 1; k <= tree.k_max(); ++k) {
        const auto& lvl = tree.level(k);
        json cells = json::array();
        for (const auto& c : lvl.cells) cells.push_back(c.members());
        levels.push_back(json{{"k", k}, {"cells", std::move(cells)},
                              {"parent", lvl.parent}});
    }
    return json{{"delta", tree.delta()},
                {"eps", tree.eps()},
                {"k_max", tree.k_max()},
                {"levels", std::move(levels)}};
}

PartitionTree tree_from_body(const json& j, const DiscreteMeasure& p_inf) {
    std::vector<PartitionLevel> levels;
    for (const auto& lj : j.at("levels")) {
        PartitionLevel lvl;
        lvl.k = lj.at("k").get<int>();
        for (const auto& c : lj.at("cells"))
            lvl.cells.emplace_back(c.get<std::vector<int>>());
        lvl.parent = lj.at("parent").get<std::vector<int>>();
        levels.push_back(std::move(lvl));
    }
    return PartitionTree(std::move(levels), j.at("delta").get<double>(),
                         j.at("eps").get<double>(), p_inf);
}

json summary_body(const PartitionTree& tree, const DiscreteMeasure& p_inf) {
    json out = json::array();
    for (int k = 1; k <= tree.k_max(); ++k) {
        const auto& lvl = tree.level(k);
        double max_diam = 0.0;
        for (std::size_t j = 1; j < lvl.cells.size(); ++j)
            max_diam = std::max(max_diam, diameter(tree.space(), lvl.cells[j]));
        out.push_back(json{{"k", k},
                           {"cell_count", tree.cell_count(k)},
                           {"remainder_mass", p_inf.mass(lvl.cells[0])},
                           {"remainder_bound", tree.level_eps(k)},
                           {"max_diameter", max_diam},
                           {"diameter_bound", tree.level_delta(k)}});
    }
    return out;
}

json params_to_json(const InstanceParams& p) {
    return json{{"delta", p.delta}, {"eps", p.eps},     {"k_max", p.k_max},
                {"beta", p.beta_rule}, {"seed", p.seed}, {"n", p.n}};
}

InstanceParams params_from_json(const json& j) {
    InstanceParams p;
    p.delta = j.value("delta", p.delta);
    p.eps = j.value("eps", p.eps);
    p.k_max = j.value("k_max", p.k_max);
    p.beta_rule = j.value("beta", p.beta_rule);
    p.seed = j.value("seed", p.seed);
    p.n = j.value("n", p.n);
    return p;
}

} // namespace

std::string tree_to_json(const PartitionTree& tree) {
    return tree_body(tree).dump(2);
}

PartitionTree tree_from_json(const std::string& text,
                             const DiscreteMeasure& p_inf) {
    json j = parse_json(text);
    if (j.contains("tree")) j = j.at("tree");
    try {
        return tree_from_body(j, p_inf);
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed partition JSON: ") + e.what());
    }
}

std::string partition_output_json(const PartitionTree& tree,
                                  const DiscreteMeasure& p_inf) {
    json out{{"tree", tree_body(tree)}, {"summary", summary_body(tree, p_inf)}};
    return out.dump(2);
}

std::string partition_summary_text(const PartitionTree& tree,
                                   const DiscreteMeasure& p_inf) {
    std::ostringstream out;
    out << "level  cells  remainder_mass  bound       max_diameter  bound\n";
    for (const auto& row : summary_body(tree, p_inf)) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-6d %-6d %-15.6g %-11.6g %-13.6g %-11.6g\n",
                      row.at("k").get<int>(), row.at("cell_count").get<int>(),
                      row.at("remainder_mass").get<double>(),
                      row.at("remainder_bound").get<double>(),
                      row.at("max_diameter").get<double>(),
                      row.at("diameter_bound").get<double>());
        out << line;
    }
    return out.str();
}

std::string plan_to_json(const CouplingPlan& plan, const InstanceParams& params) {
    json depths = json::array();
    for (int a = 0; a < plan.alpha_count(); ++a) {
        if (plan.finite_depth(a))
            depths.push_back(plan.depth(a));
        else
            depths.push_back(nullptr);
    }

    json residuals = json::array();
    for (int a = 0; a < plan.alpha_count(); ++a) {
        if (plan.finite_depth(a))
            residuals.push_back(plan.residual(a).weights());
        else
            residuals.push_back(nullptr);
    }

    json family = json::array();
    for (const auto& m : plan.family()) family.push_back(m.weights());

    // Diagnostics: ratio ranges and worst cell deviations per member/level.
    json diag = json::array();
    const auto& table = plan.ratios();
    for (int a = 0; a < plan.alpha_count(); ++a) {
        json rows = json::array();
        for (int k = 1; k <= plan.tree().k_max(); ++k) {
            rows.push_back(json{{"k", k},
                                {"min_ratio", table.min_ratio(a, k)},
                                {"max_ratio", table.max_ratio(a, k)},
                                {"max_cell_deviation",
                                 table.max_cell_deviation(a, k)}});
        }
        diag.push_back(json{{"alpha", a + 1}, {"levels", std::move(rows)}});
    }

    json out{{"space", space_to_json(plan.space())},
             {"p_inf", plan.p_inf().weights()},
             {"family", std::move(family)},
             {"beta", plan.betas().rule()},
             {"tree", tree_body(plan.tree())},
             {"depths", std::move(depths)},
             {"residuals", std::move(residuals)},
             {"params", params_to_json(params)},
             {"diagnostics", std::move(diag)}};
    return out.dump(2);
}

CouplingPlan plan_from_json(const std::string& text, InstanceParams* params_out) {
    json j = parse_json(text);
    try {
        SpacePtr space = space_from_json(j.at("space"));
        DiscreteMeasure p_inf(space, j.at("p_inf").get<std::vector<double>>());
        std::vector<DiscreteMeasure> family;
        for (const auto& m : j.at("family"))
            family.emplace_back(space, m.get<std::vector<double>>());

        PartitionTree tree = tree_from_body(j.at("tree"), p_inf);
        BetaSchedule betas = BetaSchedule::from_rule(j.value("beta", "geometric"));

        std::vector<int> depths;
        for (const auto& d : j.at("depths"))
            depths.push_back(d.is_null() ? kDepthInfinite : d.get<int>());

        std::vector<std::optional<DiscreteMeasure>> residuals;
        for (const auto& r : j.at("residuals")) {
            if (r.is_null())
                residuals.emplace_back(std::nullopt);
            else
                residuals.emplace_back(
                    DiscreteMeasure(space, r.get<std::vector<double>>()));
        }

        if (params_out && j.contains("params"))
            *params_out = params_from_json(j.at("params"));

        return CouplingPlan::from_parts(std::move(p_inf), std::move(family),
                                        std::move(tree), betas, std::move(depths),
                                        std::move(residuals));
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed plan JSON: ") + e.what());
    }
}

std::string plan_summary_text(const CouplingPlan& plan) {
    std::ostringstream out;
    out << "family member -> coupling depth (of k_max=" << plan.tree().k_max()
        << ")\n";
    for (int a = 0; a < plan.alpha_count(); ++a) {
        out << "  alpha " << (a + 1) << ": ";
        if (plan.finite_depth(a))
            out << plan.depth(a);
        else
            out << "inf (exact copy of the limit law)";
        out << "\n";
    }
    return out.str();
}

std::string report_to_json(const VerificationReport& report) {
    json conc = json::array();
    for (const auto& c : report.concentration)
        conc.push_back(json{{"alpha", c.alpha},
                            {"k", c.k},
                            {"h", c.h},
                            {"exact_mass", c.exact_mass},
                            {"bound", c.bound},
                            {"pass", c.pass}});
    json tail = json::array();
    for (const auto& t : report.tail)
        tail.push_back(json{{"k", t.k},
                            {"exact_mass", t.exact_mass},
                            {"bound", t.bound},
                            {"pass", t.pass}});
    json asc = json::array();
    for (const auto& a : report.as_convergence)
        asc.push_back(json{{"k", a.k},
                           {"rate", a.rate},
                           {"bound", a.bound},
                           {"std_error", a.std_error},
                           {"pass", a.pass}});

    json out{{"seed", report.seed},
             {"n", report.sample_count},
             {"marginals",
              json{{"inf_defect", report.inf_marginal_defect},
                   {"alpha_defects", report.marginal_defects},
                   {"tolerance", kExactTol},
                   {"pass", report.marginals_pass()}}},
             {"inversion",
              json{{"alpha_defects", report.inversion_defects},
                   {"tolerance", kExactTol},
                   {"pass", report.inversion_pass()}}},
             {"concentration", std::move(conc)},
             {"tail", std::move(tail)},
             {"as_convergence", std::move(asc)},
             {"all_pass", report.all_pass()}};
    return out.dump(2);
}

std::string report_summary_text(const VerificationReport& report) {
    std::ostringstream out;
    auto flag = [](bool b) { return b ? "pass" : "FAIL"; };

    double worst_marginal = report.inf_marginal_defect;
    for (double d : report.marginal_defects)
        worst_marginal = std::max(worst_marginal, d);
    out << "marginal laws      " << flag(report.marginals_pass())
        << "  (worst TV defect " << fmt17(worst_marginal) << ")\n";

    double worst_inv = 0.0;
    for (double d : report.inversion_defects) worst_inv = std::max(worst_inv, d);
    out << "mixture identity   " << flag(report.inversion_pass())
        << "  (worst atom defect " << fmt17(worst_inv) << ")\n";

    bool conc_pass = true;
    double worst_gap = 0.0;
    for (const auto& c : report.concentration) {
        conc_pass = conc_pass && c.pass;
        worst_gap = std::max(worst_gap, c.exact_mass - c.bound);
    }
    out << "concentration      " << flag(conc_pass) << "  ("
        << report.concentration.size() << " checks)\n";

    bool tail_pass = true;
    for (const auto& t : report.tail) tail_pass = tail_pass && t.pass;
    out << "tail bounds        " << flag(tail_pass) << "  (" << report.tail.size()
        << " levels)\n";

    bool as_pass = true;
    for (const auto& a : report.as_convergence) as_pass = as_pass && a.pass;
    out << "sampled deviation  " << flag(as_pass) << "  (seed " << report.seed
        << ", n " << report.sample_count << ")\n";

    out << "overall            " << flag(report.all_pass()) << "\n";
    return out.str();
}

void samples_to_csv(std::ostream& out, const std::vector<CoupledSample>& samples) {
    const int n_alpha = samples.empty() ? 0 : static_cast<int>(samples[0].x.size());
    out << "id,j,s";
    for (int a = 1; a <= n_alpha; ++a) out << ",x_" << a;
    out << "\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out << i << ',' << samples[i].j << ',' << samples[i].s;
        for (int x : samples[i].x) out << ',' << x;
        out << "\n";
    }
}

void quantile_table_to_csv(std::ostream& out, const QuantileCouplingTable& table) {
    out << "u,n,value,limit,converged\n";
    for (const auto& path : table.paths) {
        for (std::size_t i = 0; i < path.values.size(); ++i) {
            out << fmt17(path.u) << ',' << (i + 1) << ',' << fmt17(path.values[i])
                << ',' << fmt17(path.limit) << ',' << (path.converged ? 1 : 0)
                << "\n";
        }
    }
}

std::string quantile_summary_text(const QuantileCouplingTable& table) {
    std::ostringstream out;
    out << "paths: " << table.paths.size() << ", non-convergent: "
        << table.failure_set.size() << "\n";
    if (!table.failure_set.empty()) {
        out << "failure set:";
        std::size_t shown = 0;
        for (double u : table.failure_set) {
            if (shown++ == 16) {
                out << " ...";
                break;
            }
            out << " " << fmt17(u);
        }
        out << "\n";
    }
    return out.str();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

} // namespace skw
