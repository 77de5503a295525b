#pragma once

#include <Eigen/Dense>

#include "rcdyn/sphere.hpp"

#include <cstdint>
#include <vector>

namespace rcdyn {

// Nearest-neighbor index over points on the Riemann sphere. Points are embedded in
// the unit sphere of R^3, where chordal distance equals Euclidean distance, and
// bucketed on a uniform 3D grid with ring-expanding search.
class PointIndex {
public:
    PointIndex() = default;
    explicit PointIndex(const std::vector<SpherePoint>& points);

    std::size_t size() const { return points_.size(); }

    // index of the nearest stored point (excluding `exclude` if >= 0)
    int nearest(const SpherePoint& query, int exclude = -1) const;

    // indices of up to k nearest stored points, closest first
    std::vector<int> k_nearest(const SpherePoint& query, int k) const;

    // all indices within chordal distance r of the query
    std::vector<int> within(const SpherePoint& query, double r) const;

    double distance_to(const SpherePoint& query, int idx) const {
        return (sphere_embed(query) - embedded_[idx]).norm();
    }

    // max over stored points of the distance to its nearest other point
    double max_nearest_neighbor_gap() const;

    // sorted nearest-neighbor distances of all stored points
    std::vector<double> nearest_neighbor_gaps() const;

private:
    std::vector<SpherePoint> points_;
    std::vector<Eigen::Vector3d> embedded_;
    double cell_ = 0.1;
    int n_ = 1;  // cells per axis over [-1,1]
    std::vector<std::vector<std::int32_t>> buckets_;

    int bucket_of(const Eigen::Vector3d& e) const;
    void cells_in_ring(const Eigen::Vector3d& e, int ring, std::vector<int>& out) const;
    std::vector<int> k_nearest_impl(const SpherePoint& query, int k, int exclude) const;
};

}  // namespace rcdyn
