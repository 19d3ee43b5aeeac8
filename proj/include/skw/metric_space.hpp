#pragma once

#include <memory>
#include <string>
#include <vector>

namespace skw {

// A finite set of point indices, kept sorted and unique.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::vector<int> members);

    static PointSet full(int n);

    bool contains(int p) const;
    int size() const { return static_cast<int>(members_.size()); }
    bool empty() const { return members_.empty(); }
    const std::vector<int>& members() const { return members_; }

    void add(int p);
    PointSet set_union(const PointSet& other) const;
    PointSet intersect(const PointSet& other) const;
    PointSet difference(const PointSet& other) const;
    bool is_subset_of(const PointSet& other) const;

    bool operator==(const PointSet& other) const { return members_ == other.members_; }

private:
    std::vector<int> members_;
};

// Labeled finite metric space with an explicit distance matrix. The matrix is
// validated eagerly: symmetry, zero diagonal (and only there), and the
// triangle inequality over all triples.
class FiniteMetricSpace {
public:
    FiniteMetricSpace(std::vector<std::string> labels,
                      std::vector<std::vector<double>> dist);

    int size() const { return static_cast<int>(labels_.size()); }
    const std::string& label(int i) const { return labels_[i]; }
    const std::vector<std::string>& labels() const { return labels_; }
    double dist(int i, int j) const { return dist_[i][j]; }
    const std::vector<std::vector<double>>& matrix() const { return dist_; }

    // Largest pairwise distance in the space.
    double diameter() const;

    bool same_as(const FiniteMetricSpace& other) const;

    void check_point(int p, const char* what) const;

private:
    std::vector<std::string> labels_;
    std::vector<std::vector<double>> dist_;
};

using SpacePtr = std::shared_ptr<const FiniteMetricSpace>;

// Open ball { x : dist(center, x) < r }.
PointSet ball(const FiniteMetricSpace& space, int center, double r);

// Max pairwise distance within `cell`; 0 for empty or singleton cells.
double diameter(const FiniteMetricSpace& space, const PointSet& cell);

} // namespace skw
