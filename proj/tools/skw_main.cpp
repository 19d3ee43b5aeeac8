// Command-line front end. All real work happens behind the C API; this file
// only parses flags, moves bytes between files and the library, and maps
// failures onto the exit-code contract:
//   0  success
//   1  verification reported failing checks
//   2  input or domain error

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "skw_capi.h"

namespace {

struct StringGuard {
    char* s = nullptr;
    ~StringGuard() { skw_string_free(s); }
};

void print_error_object(const std::string& code, const std::string& message) {
    // Machine-readable error object on stderr.
    std::string msg = message;
    for (auto& c : msg)
        if (c == '"') c = '\'';
    std::cerr << "{\"error\":{\"code\":\"" << code << "\",\"message\":\"" << msg
              << "\"}}" << std::endl;
}

int fail(int rc) {
    const char* code = "error";
    switch (rc) {
        case SKW_ERR_INVALID_ARGUMENT: code = "invalid_argument"; break;
        case SKW_ERR_DOMAIN: code = "domain"; break;
        case SKW_ERR_NOT_CONVERGED: code = "not_converged"; break;
        case SKW_ERR_CONTRACT: code = "contract"; break;
        case SKW_ERR_IO: code = "io"; break;
        case SKW_ERR_INTERNAL: code = "internal"; break;
    }
    print_error_object(code, skw_last_error());
    return 2;
}

bool write_file(const std::string& path, const char* text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) return false;
    out << text;
    return static_cast<bool>(out);
}

int apply_overrides(skw_instance* inst, const std::optional<double>& delta,
                    const std::optional<double>& eps,
                    const std::optional<int>& k_max) {
    if (delta && skw_instance_override(inst, "delta", *delta)) return 1;
    if (eps && skw_instance_override(inst, "eps", *eps)) return 1;
    if (k_max && skw_instance_override(inst, "k_max", *k_max)) return 1;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"skw: build Skorohod couplings for families of discrete laws"};
    app.require_subcommand(1);

    std::string instance_path, plan_path, out_path, u_grid, u_exclude;
    std::optional<double> delta, eps;
    std::optional<int> k_max;
    std::optional<unsigned long long> seed;
    std::optional<long long> n;

    auto* partition = app.add_subcommand(
        "partition", "build the nested continuity partition of an instance");
    partition->add_option("--instance", instance_path, "instance JSON file")
        ->required();
    partition->add_option("--out", out_path, "output JSON file")->required();
    partition->add_option("--delta", delta, "override top diameter scale");
    partition->add_option("--eps", eps, "override remainder budget");
    partition->add_option("--k-max", k_max, "override number of levels");

    auto* couple = app.add_subcommand(
        "couple", "build a coupling plan (partition, depths, residual laws)");
    couple->add_option("--instance", instance_path, "instance JSON file")
        ->required();
    couple->add_option("--out", out_path, "output plan JSON file")->required();
    couple->add_option("--delta", delta, "override top diameter scale");
    couple->add_option("--eps", eps, "override remainder budget");
    couple->add_option("--k-max", k_max, "override number of levels");

    auto* sample = app.add_subcommand(
        "sample", "draw coupled samples from a plan into CSV");
    sample->add_option("--plan", plan_path, "plan JSON file")->required();
    sample->add_option("--out", out_path, "output CSV file")->required();
    sample->add_option("--seed", seed, "root seed (default: plan params)");
    sample->add_option("--n", n, "sample count (default: plan params)");

    auto* verify = app.add_subcommand(
        "verify", "run every exact and statistical check on a plan");
    verify->add_option("--plan", plan_path, "plan JSON file")->required();
    verify->add_option("--out", out_path, "output report JSON file");
    verify->add_option("--seed", seed, "root seed (default: plan params)");
    verify->add_option("--n", n, "sample count (default: plan params)");

    auto* quantile = app.add_subcommand(
        "quantile", "quantile-coupling paths for a line-mode instance");
    quantile->add_option("--instance", instance_path, "instance JSON file")
        ->required();
    quantile->add_option("--out", out_path, "output CSV file")->required();
    quantile->add_option("--u-grid", u_grid, "\"K uniform\" or comma list")
        ->required();
    quantile->add_option("--u-exclude", u_exclude, "comma list of u to drop");

    CLI11_PARSE(app, argc, argv);

    if (partition->parsed()) {
        skw_instance* inst = nullptr;
        if (int rc = skw_instance_load_file(instance_path.c_str(), &inst))
            return fail(rc);
        if (apply_overrides(inst, delta, eps, k_max)) {
            skw_instance_free(inst);
            return fail(SKW_ERR_INVALID_ARGUMENT);
        }
        skw_tree* tree = nullptr;
        int rc = skw_partition_build(inst, &tree);
        if (rc) {
            skw_instance_free(inst);
            return fail(rc);
        }
        StringGuard json, text;
        rc = skw_partition_to_json(inst, tree, &json.s);
        if (rc == SKW_OK)
            rc = skw_partition_summary_text(inst, tree, &text.s);
        skw_tree_free(tree);
        skw_instance_free(inst);
        if (rc) return fail(rc);
        if (!write_file(out_path, json.s)) {
            print_error_object("io", "cannot write " + out_path);
            return 2;
        }
        std::cout << text.s;
        return 0;
    }

    if (couple->parsed()) {
        skw_instance* inst = nullptr;
        if (int rc = skw_instance_load_file(instance_path.c_str(), &inst))
            return fail(rc);
        if (apply_overrides(inst, delta, eps, k_max)) {
            skw_instance_free(inst);
            return fail(SKW_ERR_INVALID_ARGUMENT);
        }
        skw_plan* plan = nullptr;
        int rc = skw_plan_build(inst, &plan);
        skw_instance_free(inst);
        if (rc) return fail(rc);
        StringGuard json, text;
        rc = skw_plan_to_json(plan, &json.s);
        if (rc == SKW_OK) rc = skw_plan_summary_text(plan, &text.s);
        skw_plan_free(plan);
        if (rc) return fail(rc);
        if (!write_file(out_path, json.s)) {
            print_error_object("io", "cannot write " + out_path);
            return 2;
        }
        std::cout << text.s;
        return 0;
    }

    if (sample->parsed() || verify->parsed()) {
        skw_plan* plan = nullptr;
        if (int rc = skw_plan_load_file(plan_path.c_str(), &plan))
            return fail(rc);
        double dflt = 0.0;
        if (!seed) {
            skw_plan_get_param(plan, "seed", &dflt);
            seed = static_cast<unsigned long long>(dflt);
        }
        if (!n) {
            skw_plan_get_param(plan, "n", &dflt);
            n = static_cast<long long>(dflt);
        }

        if (sample->parsed()) {
            StringGuard csv;
            int rc = skw_sample_csv(plan, *seed, *n, &csv.s);
            skw_plan_free(plan);
            if (rc) return fail(rc);
            if (!write_file(out_path, csv.s)) {
                print_error_object("io", "cannot write " + out_path);
                return 2;
            }
            return 0;
        }

        StringGuard report, text;
        int all_pass = 0;
        int rc = skw_verify_run(plan, *seed, *n, &report.s, &all_pass);
        skw_plan_free(plan);
        if (rc) return fail(rc);
        if (!out_path.empty() && !write_file(out_path, report.s)) {
            print_error_object("io", "cannot write " + out_path);
            return 2;
        }
        if (skw_verify_summary_text(report.s, &text.s) == SKW_OK)
            std::cout << text.s;
        return all_pass ? 0 : 1;
    }

    if (quantile->parsed()) {
        skw_instance* inst = nullptr;
        if (int rc = skw_instance_load_file(instance_path.c_str(), &inst))
            return fail(rc);
        StringGuard csv, text;
        int rc = skw_quantile_run(inst, u_grid.c_str(),
                                  u_exclude.empty() ? nullptr : u_exclude.c_str(),
                                  &csv.s, &text.s);
        skw_instance_free(inst);
        if (rc) return fail(rc);
        if (!write_file(out_path, csv.s)) {
            print_error_object("io", "cannot write " + out_path);
            return 2;
        }
        std::cout << text.s;
        return 0;
    }

    return 2;
}
