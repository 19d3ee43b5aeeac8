#include "skw/instance.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "skw/errors.hpp"

namespace skw {

namespace {

using nlohmann::json;

json parse_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw IoError("input is not valid JSON");
    return j;
}

std::vector<double> weight_vector(const json& j, const char* what) {
    if (!j.is_array()) throw IoError(std::string(what) + " must be an array");
    std::vector<double> w;
    w.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) throw IoError(std::string(what) + " must be numeric");
        w.push_back(v.get<double>());
    }
    return w;
}

SpacePtr parse_space(const json& j) {
    if (!j.contains("labels") || !j.contains("distances"))
        throw IoError("space needs 'labels' and 'distances'");
    std::vector<std::string> labels = j.at("labels").get<std::vector<std::string>>();
    std::vector<std::vector<double>> dist;
    for (const auto& row : j.at("distances"))
        dist.push_back(weight_vector(row, "distance row"));
    return std::make_shared<FiniteMetricSpace>(std::move(labels), std::move(dist));
}

StepCdf parse_cdf(const json& j) {
    if (!j.contains("jumps")) throw IoError("cdf needs 'jumps'");
    std::vector<std::pair<double, double>> jumps;
    for (const auto& e : j.at("jumps")) {
        if (!e.is_array() || e.size() != 2)
            throw IoError("cdf jump must be [location, mass]");
        jumps.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return StepCdf(std::move(jumps));
}

void expand_metric_family(const json& block, const SpacePtr& space,
                          const DiscreteMeasure& p_inf,
                          std::vector<DiscreteMeasure>& out) {
    const std::string kind = block.value("kind", "");
    if (kind == "explicit") {
        for (const auto& m : block.at("measures"))
            out.emplace_back(space, weight_vector(m, "measure"));
    } else if (kind == "contamination") {
        // P_alpha = (1 - 1/alpha) P_inf + (1/alpha) Q, alpha = 1..count.
        DiscreteMeasure q(space, weight_vector(block.at("q"), "q"));
        const int count = block.at("count").get<int>();
        if (count < 1) throw IoError("contamination count must be >= 1");
        for (int alpha = 1; alpha <= count; ++alpha) {
            const double t = 1.0 / static_cast<double>(alpha);
            out.push_back(mix(1.0 - t, p_inf, t, q));
        }
    } else if (kind == "constant") {
        const int count = block.at("count").get<int>();
        if (count < 1) throw IoError("constant count must be >= 1");
        DiscreteMeasure m = block.contains("measure")
                                ? DiscreteMeasure(space, weight_vector(
                                                             block.at("measure"),
                                                             "measure"))
                                : p_inf;
        for (int i = 0; i < count; ++i) out.push_back(m);
    } else {
        throw IoError("unknown family kind: '" + kind + "'");
    }
}

void expand_line_family(const json& block, std::vector<StepCdf>& out) {
    const std::string kind = block.value("kind", "");
    if (kind == "explicit") {
        for (const auto& c : block.at("cdfs")) out.push_back(parse_cdf(c));
    } else if (kind == "bernoulli_sequence") {
        // p_n = base + shift_scale / n, n = 1..count.
        const double base = block.at("base").get<double>();
        const double scale = block.at("shift_scale").get<double>();
        const int count = block.at("count").get<int>();
        if (count < 1) throw IoError("bernoulli_sequence count must be >= 1");
        for (int n = 1; n <= count; ++n)
            out.push_back(StepCdf::bernoulli(base + scale / static_cast<double>(n)));
    } else {
        throw IoError("unknown line family kind: '" + kind + "'");
    }
}

InstanceParams parse_params(const json& j) {
    InstanceParams p;
    if (!j.contains("params")) return p;
    const json& q = j.at("params");
    p.delta = q.value("delta", p.delta);
    p.eps = q.value("eps", p.eps);
    p.k_max = q.value("k_max", p.k_max);
    p.beta_rule = q.value("beta", p.beta_rule);
    p.seed = q.value("seed", p.seed);
    p.n = q.value("n", p.n);
    return p;
}

} // namespace

InstanceSpec InstanceSpec::from_json_text(const std::string& text) {
    json j = parse_json(text);
    InstanceSpec spec;
    spec.params = parse_params(j);

    const std::string mode = j.value("mode", "metric");
    if (mode == "metric") {
        spec.mode = Mode::metric;
        if (!j.contains("space") || !j.contains("p_inf"))
            throw IoError("metric instance needs 'space' and 'p_inf'");
        spec.space = parse_space(j.at("space"));
        spec.p_inf.emplace(spec.space, weight_vector(j.at("p_inf"), "p_inf"));
        if (j.contains("family")) {
            const json& fam = j.at("family");
            if (fam.is_array()) {
                for (const auto& block : fam)
                    expand_metric_family(block, spec.space, *spec.p_inf,
                                         spec.family);
            } else {
                expand_metric_family(fam, spec.space, *spec.p_inf, spec.family);
            }
        }
    } else if (mode == "line") {
        spec.mode = Mode::line;
        if (!j.contains("f_inf")) throw IoError("line instance needs 'f_inf'");
        spec.f_inf.emplace(parse_cdf(j.at("f_inf")));
        if (j.contains("family")) {
            const json& fam = j.at("family");
            if (fam.is_array()) {
                for (const auto& block : fam)
                    expand_line_family(block, spec.line_family);
            } else {
                expand_line_family(fam, spec.line_family);
            }
        }
    } else {
        throw IoError("unknown instance mode: '" + mode + "'");
    }
    return spec;
}

InstanceSpec InstanceSpec::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open instance file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

void InstanceSpec::require_metric(const char* what) const {
    if (mode != Mode::metric)
        throw DomainError(std::string(what) + " needs a metric-mode instance");
}

void InstanceSpec::require_line(const char* what) const {
    if (mode != Mode::line)
        throw DomainError(std::string(what) + " needs a line-mode instance");
}

std::vector<double> parse_u_grid(const std::string& spec) {
    std::istringstream in(spec);
    std::string first;
    in >> first;
    std::string second;
    if (in >> second && second == "uniform") {
        long count;
        try {
            count = std::stol(first);
        } catch (const std::exception&) {
            throw DomainError("bad u-grid spec: '" + spec + "'");
        }
        if (count < 2) throw DomainError("uniform u-grid needs >= 2 points");
        std::vector<double> grid;
        grid.reserve(static_cast<std::size_t>(count - 1));
        for (long i = 1; i < count; ++i)
            grid.push_back(static_cast<double>(i) / static_cast<double>(count));
        return grid;
    }

    // Comma-separated list of values.
    std::vector<double> grid;
    std::istringstream list(spec);
    std::string tok;
    while (std::getline(list, tok, ',')) {
        if (tok.empty()) continue;
        try {
            grid.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw DomainError("bad u value: '" + tok + "'");
        }
    }
    if (grid.empty()) throw DomainError("empty u-grid spec");
    for (double u : grid)
        if (!(u > 0.0 && u < 1.0))
            throw DomainError("u-grid values must lie in (0,1)");
    return grid;
}

} // namespace skw
