#include "skw/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "skw/errors.hpp"

namespace skw {

namespace {
// Slack for one rounding step when summing two stored distances.
constexpr double kTriangleSlack = 1e-12;
} // namespace

PointSet::PointSet(std::vector<int> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

PointSet PointSet::full(int n) {
    std::vector<int> m(n);
    for (int i = 0; i < n; ++i) m[i] = i;
    return PointSet(std::move(m));
}

bool PointSet::contains(int p) const {
    return std::binary_search(members_.begin(), members_.end(), p);
}

void PointSet::add(int p) {
    auto it = std::lower_bound(members_.begin(), members_.end(), p);
    if (it == members_.end() || *it != p) members_.insert(it, p);
}

PointSet PointSet::set_union(const PointSet& other) const {
    std::vector<int> out;
    out.reserve(members_.size() + other.members_.size());
    std::set_union(members_.begin(), members_.end(),
                   other.members_.begin(), other.members_.end(),
                   std::back_inserter(out));
    PointSet r;
    r.members_ = std::move(out);
    return r;
}

PointSet PointSet::intersect(const PointSet& other) const {
    std::vector<int> out;
    std::set_intersection(members_.begin(), members_.end(),
                          other.members_.begin(), other.members_.end(),
                          std::back_inserter(out));
    PointSet r;
    r.members_ = std::move(out);
    return r;
}

PointSet PointSet::difference(const PointSet& other) const {
    std::vector<int> out;
    std::set_difference(members_.begin(), members_.end(),
                        other.members_.begin(), other.members_.end(),
                        std::back_inserter(out));
    PointSet r;
    r.members_ = std::move(out);
    return r;
}

bool PointSet::is_subset_of(const PointSet& other) const {
    return std::includes(other.members_.begin(), other.members_.end(),
                         members_.begin(), members_.end());
}

FiniteMetricSpace::FiniteMetricSpace(std::vector<std::string> labels,
                                     std::vector<std::vector<double>> dist)
    : labels_(std::move(labels)), dist_(std::move(dist)) {
    const int n = static_cast<int>(labels_.size());
    if (n == 0) throw DomainError("metric space needs at least one point");

    std::set<std::string> seen(labels_.begin(), labels_.end());
    if (static_cast<int>(seen.size()) != n)
        throw DomainError("point labels must be distinct");

    if (static_cast<int>(dist_.size()) != n)
        throw DomainError("distance matrix must be square (" +
                          std::to_string(n) + " rows expected)");
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(dist_[i].size()) != n)
            throw DomainError("distance matrix row " + std::to_string(i) +
                              " has wrong length");
        if (dist_[i][i] != 0.0)
            throw DomainError("distance matrix diagonal must be zero at " +
                              labels_[i]);
        for (int j = 0; j < n; ++j) {
            if (!(dist_[i][j] >= 0.0) || !std::isfinite(dist_[i][j]))
                throw DomainError("distances must be finite and non-negative");
            if (i != j && dist_[i][j] == 0.0)
                throw DomainError("distinct points " + labels_[i] + ", " +
                                  labels_[j] + " must have positive distance");
            if (dist_[i][j] != dist_[j][i])
                throw DomainError("distance matrix is not symmetric at (" +
                                  labels_[i] + ", " + labels_[j] + ")");
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                if (dist_[i][j] > dist_[i][k] + dist_[k][j] + kTriangleSlack) {
                    std::ostringstream msg;
                    msg << "triangle inequality fails: d(" << labels_[i] << ","
                        << labels_[j] << ") > d(" << labels_[i] << "," << labels_[k]
                        << ") + d(" << labels_[k] << "," << labels_[j] << ")";
                    throw DomainError(msg.str());
                }
            }
        }
    }
}

double FiniteMetricSpace::diameter() const {
    double d = 0.0;
    for (int i = 0; i < size(); ++i)
        for (int j = i + 1; j < size(); ++j) d = std::max(d, dist_[i][j]);
    return d;
}

bool FiniteMetricSpace::same_as(const FiniteMetricSpace& other) const {
    if (this == &other) return true;
    return labels_ == other.labels_ && dist_ == other.dist_;
}

void FiniteMetricSpace::check_point(int p, const char* what) const {
    if (p < 0 || p >= size())
        throw DomainError(std::string(what) + ": point index " +
                          std::to_string(p) + " out of range");
}

PointSet ball(const FiniteMetricSpace& space, int center, double r) {
    space.check_point(center, "ball");
    if (r < 0.0) throw DomainError("ball radius must be non-negative");
    PointSet out;
    for (int x = 0; x < space.size(); ++x)
        if (space.dist(center, x) < r) out.add(x);
    return out;
}

double diameter(const FiniteMetricSpace& space, const PointSet& cell) {
    double d = 0.0;
    const auto& m = cell.members();
    for (std::size_t a = 0; a < m.size(); ++a) {
        space.check_point(m[a], "diameter");
        for (std::size_t b = a + 1; b < m.size(); ++b)
            d = std::max(d, space.dist(m[a], m[b]));
    }
    return d;
}

} // namespace skw
