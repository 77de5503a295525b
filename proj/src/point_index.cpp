#include "rcdyn/point_index.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace rcdyn {

PointIndex::PointIndex(const std::vector<SpherePoint>& points) : points_(points) {
    embedded_.reserve(points_.size());
    for (const auto& p : points_) embedded_.push_back(sphere_embed(p));

    // aim for a handful of points per occupied cell
    const double target = std::cbrt(std::max<std::size_t>(points_.size(), 8));
    n_ = std::clamp(int(target * 1.3), 4, 192);
    cell_ = 2.0 / n_;
    buckets_.assign(std::size_t(n_) * n_ * n_, {});
    for (std::size_t i = 0; i < embedded_.size(); ++i)
        buckets_[bucket_of(embedded_[i])].push_back(std::int32_t(i));
}

int PointIndex::bucket_of(const Eigen::Vector3d& e) const {
    auto clampi = [&](double v) { return std::clamp(int((v + 1.0) / cell_), 0, n_ - 1); };
    return (clampi(e.x()) * n_ + clampi(e.y())) * n_ + clampi(e.z());
}

void PointIndex::cells_in_ring(const Eigen::Vector3d& e, int ring, std::vector<int>& out) const {
    auto clampi = [&](double v) { return std::clamp(int((v + 1.0) / cell_), 0, n_ - 1); };
    const int cx = clampi(e.x()), cy = clampi(e.y()), cz = clampi(e.z());
    const int lo = -ring, hi = ring;
    for (int dx = lo; dx <= hi; ++dx)
        for (int dy = lo; dy <= hi; ++dy)
            for (int dz = lo; dz <= hi; ++dz) {
                if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
                const int x = cx + dx, y = cy + dy, z = cz + dz;
                if (x < 0 || y < 0 || z < 0 || x >= n_ || y >= n_ || z >= n_) continue;
                out.push_back((x * n_ + y) * n_ + z);
            }
}

int PointIndex::nearest(const SpherePoint& query, int exclude) const {
    const auto ids = k_nearest_impl(query, 1, exclude);
    return ids.empty() ? -1 : ids.front();
}

std::vector<int> PointIndex::k_nearest(const SpherePoint& query, int k) const {
    return k_nearest_impl(query, k, -1);
}

std::vector<int> PointIndex::k_nearest_impl(const SpherePoint& query, int k, int exclude) const {
    const Eigen::Vector3d e = sphere_embed(query);
    // (distance, index) max-heap of the best k so far
    std::priority_queue<std::pair<double, int>> best;
    std::vector<int> cells;
    int ring = 0;
    for (; ring <= n_; ++ring) {
        cells.clear();
        cells_in_ring(e, ring, cells);
        for (int c : cells)
            for (std::int32_t i : buckets_[c]) {
                if (int(i) == exclude) continue;
                const double d = (embedded_[i] - e).norm();
                if (int(best.size()) < k) {
                    best.emplace(d, int(i));
                } else if (d < best.top().first) {
                    best.pop();
                    best.emplace(d, int(i));
                }
            }
        // a full heap whose worst entry is closer than the next unexplored ring is final
        if (int(best.size()) >= k && best.top().first < (ring)*cell_) break;
    }
    std::vector<int> out(best.size());
    for (auto it = out.rbegin(); it != out.rend(); ++it) {
        *it = best.top().second;
        best.pop();
    }
    return out;
}

std::vector<int> PointIndex::within(const SpherePoint& query, double r) const {
    const Eigen::Vector3d e = sphere_embed(query);
    std::vector<int> out;
    const int max_ring = std::min(n_, int(r / cell_) + 2);
    std::vector<int> cells;
    for (int ring = 0; ring <= max_ring; ++ring) {
        cells.clear();
        cells_in_ring(e, ring, cells);
        for (int c : cells)
            for (std::int32_t i : buckets_[c])
                if ((embedded_[i] - e).norm() <= r) out.push_back(i);
    }
    return out;
}

double PointIndex::max_nearest_neighbor_gap() const {
    const auto gaps = nearest_neighbor_gaps();
    return gaps.empty() ? 0.0 : gaps.back();
}

std::vector<double> PointIndex::nearest_neighbor_gaps() const {
    std::vector<double> gaps;
    gaps.reserve(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const int j = nearest(points_[i], int(i));
        if (j >= 0) gaps.push_back((embedded_[i] - embedded_[j]).norm());
    }
    std::sort(gaps.begin(), gaps.end());
    return gaps;
}

}  // namespace rcdyn
