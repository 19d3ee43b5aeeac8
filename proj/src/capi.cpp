#include "skw_capi.h"

#include <cstring>
#include <sstream>
#include <string>

#include <json.hpp>

#include "skw/errors.hpp"
#include "skw/instance.hpp"
#include "skw/serialization.hpp"
#include "skw/verification.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

int code_of(const skw::Error& e) {
    if (e.code() == "not_converged") return SKW_ERR_NOT_CONVERGED;
    if (e.code() == "contract") return SKW_ERR_CONTRACT;
    if (e.code() == "io") return SKW_ERR_IO;
    return SKW_ERR_DOMAIN;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const skw::Error& e) {
        set_error(e.what());
        return code_of(e);
    } catch (const std::exception& e) {
        set_error(e.what());
        return SKW_ERR_INTERNAL;
    } catch (...) {
        set_error("unknown error");
        return SKW_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

int require(bool cond, const char* msg) {
    if (!cond) {
        set_error(msg);
        return SKW_ERR_INVALID_ARGUMENT;
    }
    return SKW_OK;
}

} // namespace

struct skw_instance {
    skw::InstanceSpec spec;
};

struct skw_tree {
    skw::PartitionTree tree;
};

struct skw_plan {
    skw::CouplingPlan plan;
    skw::InstanceParams params;
};

extern "C" {

const char* skw_version(void) { return "1.0.0"; }

const char* skw_last_error(void) { return g_last_error.c_str(); }

void skw_string_free(char* s) { delete[] s; }

int skw_instance_load_file(const char* path, skw_instance** out) {
    if (int rc = require(path && out, "null argument")) return rc;
    return guarded([&] {
        *out = new skw_instance{skw::InstanceSpec::from_file(path)};
        return SKW_OK;
    });
}

int skw_instance_load_json(const char* json_text, skw_instance** out) {
    if (int rc = require(json_text && out, "null argument")) return rc;
    return guarded([&] {
        *out = new skw_instance{skw::InstanceSpec::from_json_text(json_text)};
        return SKW_OK;
    });
}

int skw_instance_override(skw_instance* instance, const char* key, double value) {
    if (int rc = require(instance && key, "null argument")) return rc;
    return guarded([&]() -> int {
        const std::string k = key;
        auto& p = instance->spec.params;
        if (k == "delta") {
            p.delta = value;
        } else if (k == "eps") {
            p.eps = value;
        } else if (k == "k_max") {
            p.k_max = static_cast<int>(value);
        } else if (k == "seed") {
            p.seed = static_cast<std::uint64_t>(value);
        } else if (k == "n") {
            p.n = static_cast<long long>(value);
        } else {
            set_error("unknown parameter key: " + k);
            return SKW_ERR_INVALID_ARGUMENT;
        }
        return SKW_OK;
    });
}

int skw_instance_get_param(const skw_instance* instance, const char* key,
                           double* out) {
    if (int rc = require(instance && key && out, "null argument")) return rc;
    const std::string k = key;
    const auto& p = instance->spec.params;
    if (k == "delta") {
        *out = p.delta;
    } else if (k == "eps") {
        *out = p.eps;
    } else if (k == "k_max") {
        *out = p.k_max;
    } else if (k == "seed") {
        *out = static_cast<double>(p.seed);
    } else if (k == "n") {
        *out = static_cast<double>(p.n);
    } else {
        set_error("unknown parameter key: " + k);
        return SKW_ERR_INVALID_ARGUMENT;
    }
    return SKW_OK;
}

void skw_instance_free(skw_instance* instance) { delete instance; }

int skw_partition_build(const skw_instance* instance, skw_tree** out) {
    if (int rc = require(instance && out, "null argument")) return rc;
    return guarded([&] {
        instance->spec.require_metric("partition");
        const auto& p = instance->spec.params;
        *out = new skw_tree{skw::build_partition_tree(
            *instance->spec.p_inf, p.delta, p.eps, p.k_max)};
        return SKW_OK;
    });
}

int skw_partition_to_json(const skw_instance* instance, const skw_tree* tree,
                          char** out) {
    if (int rc = require(instance && tree && out, "null argument")) return rc;
    return guarded([&] {
        instance->spec.require_metric("partition");
        *out = dup_string(
            skw::partition_output_json(tree->tree, *instance->spec.p_inf));
        return SKW_OK;
    });
}

int skw_partition_summary_text(const skw_instance* instance,
                               const skw_tree* tree, char** out) {
    if (int rc = require(instance && tree && out, "null argument")) return rc;
    return guarded([&] {
        instance->spec.require_metric("partition");
        *out = dup_string(
            skw::partition_summary_text(tree->tree, *instance->spec.p_inf));
        return SKW_OK;
    });
}

void skw_tree_free(skw_tree* tree) { delete tree; }

int skw_plan_build(const skw_instance* instance, skw_plan** out) {
    if (int rc = require(instance && out, "null argument")) return rc;
    return guarded([&] {
        instance->spec.require_metric("couple");
        const auto& spec = instance->spec;
        auto tree = skw::build_partition_tree(*spec.p_inf, spec.params.delta,
                                              spec.params.eps, spec.params.k_max);
        auto betas = skw::BetaSchedule::from_rule(spec.params.beta_rule);
        auto plan = skw::CouplingPlan::build(*spec.p_inf, spec.family,
                                             std::move(tree), betas);
        *out = new skw_plan{std::move(plan), spec.params};
        return SKW_OK;
    });
}

int skw_plan_load_file(const char* path, skw_plan** out) {
    if (int rc = require(path && out, "null argument")) return rc;
    return guarded([&] {
        const std::string text = skw::read_text_file(path);
        skw::InstanceParams params;
        auto plan = skw::plan_from_json(text, &params);
        *out = new skw_plan{std::move(plan), params};
        return SKW_OK;
    });
}

int skw_plan_load_json(const char* json_text, skw_plan** out) {
    if (int rc = require(json_text && out, "null argument")) return rc;
    return guarded([&] {
        skw::InstanceParams params;
        auto plan = skw::plan_from_json(json_text, &params);
        *out = new skw_plan{std::move(plan), params};
        return SKW_OK;
    });
}

int skw_plan_to_json(const skw_plan* plan, char** out) {
    if (int rc = require(plan && out, "null argument")) return rc;
    return guarded([&] {
        *out = dup_string(skw::plan_to_json(plan->plan, plan->params));
        return SKW_OK;
    });
}

int skw_plan_summary_text(const skw_plan* plan, char** out) {
    if (int rc = require(plan && out, "null argument")) return rc;
    return guarded([&] {
        *out = dup_string(skw::plan_summary_text(plan->plan));
        return SKW_OK;
    });
}

int skw_plan_get_param(const skw_plan* plan, const char* key, double* out) {
    if (int rc = require(plan && key && out, "null argument")) return rc;
    const std::string k = key;
    const auto& p = plan->params;
    if (k == "seed") {
        *out = static_cast<double>(p.seed);
    } else if (k == "n") {
        *out = static_cast<double>(p.n);
    } else if (k == "delta") {
        *out = p.delta;
    } else if (k == "eps") {
        *out = p.eps;
    } else if (k == "k_max") {
        *out = p.k_max;
    } else {
        set_error("unknown parameter key: " + k);
        return SKW_ERR_INVALID_ARGUMENT;
    }
    return SKW_OK;
}

void skw_plan_free(skw_plan* plan) { delete plan; }

int skw_sample_csv(const skw_plan* plan, unsigned long long seed, long long n,
                   char** out) {
    if (int rc = require(plan && out, "null argument")) return rc;
    return guarded([&] {
        auto samples = skw::sample_coupled(plan->plan, seed, n);
        std::ostringstream csv;
        if (samples.empty()) {
            // Header still reflects the family width.
            csv << "id,j,s";
            for (int a = 1; a <= plan->plan.alpha_count(); ++a) csv << ",x_" << a;
            csv << "\n";
        } else {
            skw::samples_to_csv(csv, samples);
        }
        *out = dup_string(csv.str());
        return SKW_OK;
    });
}

int skw_verify_run(const skw_plan* plan, unsigned long long seed, long long n,
                   char** report_json, int* all_pass) {
    if (int rc = require(plan && report_json && all_pass, "null argument"))
        return rc;
    return guarded([&] {
        auto report = skw::run_verification(plan->plan, seed, n);
        *report_json = dup_string(skw::report_to_json(report));
        *all_pass = report.all_pass() ? 1 : 0;
        return SKW_OK;
    });
}

int skw_verify_summary_text(const char* report_json, char** out) {
    if (int rc = require(report_json && out, "null argument")) return rc;
    return guarded([&]() -> int {
        nlohmann::json j = nlohmann::json::parse(report_json, nullptr, false);
        if (j.is_discarded()) {
            set_error("report is not valid JSON");
            return SKW_ERR_IO;
        }
        skw::VerificationReport r;
        r.seed = j.value("seed", 0ULL);
        r.sample_count = j.value("n", 0LL);
        r.inf_marginal_defect = j.at("marginals").at("inf_defect").get<double>();
        r.marginal_defects =
            j.at("marginals").at("alpha_defects").get<std::vector<double>>();
        r.inversion_defects =
            j.at("inversion").at("alpha_defects").get<std::vector<double>>();
        for (const auto& c : j.at("concentration")) {
            skw::ConcentrationCheck chk;
            chk.alpha = c.at("alpha").get<int>();
            chk.k = c.at("k").get<int>();
            chk.h = c.at("h").get<int>();
            chk.exact_mass = c.at("exact_mass").get<double>();
            chk.bound = c.at("bound").get<double>();
            chk.pass = c.at("pass").get<bool>();
            r.concentration.push_back(chk);
        }
        for (const auto& t : j.at("tail")) {
            skw::TailCheck chk;
            chk.k = t.at("k").get<int>();
            chk.exact_mass = t.at("exact_mass").get<double>();
            chk.bound = t.at("bound").get<double>();
            chk.pass = t.at("pass").get<bool>();
            r.tail.push_back(chk);
        }
        for (const auto& a : j.at("as_convergence")) {
            skw::AsConvergenceCheck chk;
            chk.k = a.at("k").get<int>();
            chk.rate = a.at("rate").get<double>();
            chk.bound = a.at("bound").get<double>();
            chk.std_error = a.at("std_error").get<double>();
            chk.pass = a.at("pass").get<bool>();
            r.as_convergence.push_back(chk);
        }
        *out = dup_string(skw::report_summary_text(r));
        return SKW_OK;
    });
}

int skw_quantile_run(const skw_instance* instance, const char* grid_spec,
                     const char* exclude_csv, char** csv_out,
                     char** summary_out) {
    if (int rc = require(instance && grid_spec && csv_out && summary_out,
                         "null argument"))
        return rc;
    return guarded([&] {
        instance->spec.require_line("quantile");
        auto grid = skw::parse_u_grid(grid_spec);
        if (exclude_csv && *exclude_csv) {
            const auto drop = skw::parse_u_grid(exclude_csv);
            std::erase_if(grid, [&](double u) {
                for (double d : drop)
                    if (d == u) return true;
                return false;
            });
        }
        auto table = skw::quantile_couple(instance->spec.line_family,
                                          *instance->spec.f_inf, grid);
        std::ostringstream csv;
        skw::quantile_table_to_csv(csv, table);
        *csv_out = dup_string(csv.str());
        *summary_out = dup_string(skw::quantile_summary_text(table));
        return SKW_OK;
    });
}

} // extern "C"
