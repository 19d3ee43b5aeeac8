#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skw/coupling.hpp"
#include "skw/measure.hpp"
#include "skw/quantile.hpp"

namespace skw {

struct InstanceParams {
    double delta = 1.0;
    double eps = 0.1;
    int k_max = 6;
    std::string beta_rule = "geometric";
    std::uint64_t seed = 0;
    long long n = 10000;
};

// A parsed problem instance. Metric mode carries a space, a limit law and a
// family of laws (explicit or expanded from a generation rule); line mode
// carries a limit step CDF and a family of step CDFs.
struct InstanceSpec {
    enum class Mode { metric, line };

    Mode mode = Mode::metric;
    InstanceParams params;

    // Metric mode.
    SpacePtr space;
    std::optional<DiscreteMeasure> p_inf;
    std::vector<DiscreteMeasure> family;

    // Line mode.
    std::optional<StepCdf> f_inf;
    std::vector<StepCdf> line_family;

    static InstanceSpec from_json_text(const std::string& text);
    static InstanceSpec from_file(const std::string& path);

    void require_metric(const char* what) const;
    void require_line(const char* what) const;
};

// "K uniform" -> { i/K : i = 1..K-1 }, or an explicit comma list of values.
std::vector<double> parse_u_grid(const std::string& spec);

} // namespace skw
