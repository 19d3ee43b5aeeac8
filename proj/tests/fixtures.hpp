#pragma once

// Shared instances for the test suites. The three-point space and the spread
// instance are built in code; the committed instance files are loaded through
// the same parser the CLI uses.

#include <memory>
#include <string>
#include <vector>

#include "skw/instance.hpp"
#include "skw/measure.hpp"
#include "skw/metric_space.hpp"

#ifndef SKW_INSTANCES_DIR
#define SKW_INSTANCES_DIR "."
#endif

namespace fixtures {

inline std::string instance_path(const std::string& name) {
    return std::string(SKW_INSTANCES_DIR) + "/" + name;
}

// a-b-c line with d(a,b)=1, d(b,c)=1, d(a,c)=2.
inline skw::SpacePtr three_point_space() {
    return std::make_shared<skw::FiniteMetricSpace>(
        std::vector<std::string>{"a", "b", "c"},
        std::vector<std::vector<double>>{{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
}

inline skw::DiscreteMeasure uniform_on(const skw::SpacePtr& space) {
    std::vector<double> w(space->size(), 1.0 / space->size());
    return skw::DiscreteMeasure(space, std::move(w));
}

// Six points on a line spanning [0, 0.95]; cells split from level 1 on.
inline skw::SpacePtr spread_space() {
    const std::vector<double> c{0.0, 0.35, 0.40, 0.70, 0.72, 0.95};
    std::vector<std::vector<double>> d(6, std::vector<double>(6, 0.0));
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) d[i][j] = std::abs(c[i] - c[j]);
    return std::make_shared<skw::FiniteMetricSpace>(
        std::vector<std::string>{"p0", "p1", "p2", "p3", "p4", "p5"},
        std::move(d));
}

inline skw::DiscreteMeasure spread_p_inf(const skw::SpacePtr& space) {
    return skw::DiscreteMeasure(space, {0.30, 0.25, 0.20, 0.15, 0.07, 0.03});
}

inline skw::InstanceSpec load_reference() {
    return skw::InstanceSpec::from_file(instance_path("reference.json"));
}

inline skw::InstanceSpec load_spread() {
    return skw::InstanceSpec::from_file(instance_path("spread.json"));
}

} // namespace fixtures
