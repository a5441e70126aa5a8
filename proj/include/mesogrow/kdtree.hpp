#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mesogrow/geometry.hpp"

namespace mesogrow::spatial {

/// Static 2-d tree over a point list. k-nearest queries return exactly the k
/// points minimizing Euclidean distance, with ties broken by insertion order.
class KDTree {
public:
    KDTree() = default;
    explicit KDTree(std::vector<Vec2> points) { build(std::move(points)); }

    void build(std::vector<Vec2> points) {
        pts_ = std::move(points);
        idx_.resize(pts_.size());
        std::iota(idx_.begin(), idx_.end(), 0);
        if (!idx_.empty()) build_rec(0, static_cast<int>(idx_.size()), 0);
    }

    std::size_t size() const { return pts_.size(); }
    const Vec2& point(int i) const { return pts_[static_cast<std::size_t>(i)]; }
    const std::vector<Vec2>& points() const { return pts_; }

    /// Indices of the k nearest points to x.
    std::vector<int> knn(const Vec2& x, int k) const {
        if (k > static_cast<int>(pts_.size()))
            throw std::runtime_error("insufficient nodes");
        std::vector<Heap> heap;
        heap.reserve(static_cast<std::size_t>(k) + 1);
        knn_rec(0, static_cast<int>(idx_.size()), 0, x, k, heap);
        std::sort(heap.begin(), heap.end(), [](const Heap& a, const Heap& b) {
            if (a.d2 != b.d2) return a.d2 < b.d2;
            return a.idx < b.idx;
        });
        std::vector<int> out(heap.size());
        for (std::size_t i = 0; i < heap.size(); ++i) out[i] = heap[i].idx;
        return out;
    }

    /// Index of the single nearest point.
    int nearest(const Vec2& x) const { return knn(x, 1)[0]; }

    /// All indices within radius r of x (unsorted).
    std::vector<int> radius(const Vec2& x, double r) const {
        std::vector<int> out;
        if (!idx_.empty()) radius_rec(0, static_cast<int>(idx_.size()), 0, x, r * r, out);
        return out;
    }

private:
    struct Heap {
        double d2;
        int idx;
        bool operator<(const Heap& o) const {
            if (d2 != o.d2) return d2 < o.d2;
            return idx < o.idx; // deterministic tie-break: older index wins
        }
    };

    std::vector<Vec2> pts_;
    std::vector<int> idx_; // idx_[lo..hi) forms a subtree, median at midpoint

    double coord(int i, int axis) const {
        const Vec2& p = pts_[static_cast<std::size_t>(i)];
        return axis == 0 ? p.x : p.y;
    }

    void build_rec(int lo, int hi, int axis) {
        if (hi - lo <= 1) return;
        int mid = (lo + hi) / 2;
        std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                         [&](int a, int b) {
                             double ca = coord(a, axis), cb = coord(b, axis);
                             if (ca != cb) return ca < cb;
                             return a < b;
                         });
        build_rec(lo, mid, 1 - axis);
        build_rec(mid + 1, hi, 1 - axis);
    }

    static void heap_push(std::vector<Heap>& h, int k, Heap e) {
        if (static_cast<int>(h.size()) < k) {
            h.push_back(e);
            std::push_heap(h.begin(), h.end());
        } else if (e < h.front()) {
            std::pop_heap(h.begin(), h.end());
            h.back() = e;
            std::push_heap(h.begin(), h.end());
        }
    }

    void knn_rec(int lo, int hi, int axis, const Vec2& x, int k,
                 std::vector<Heap>& heap) const {
        if (lo >= hi) return;
        int mid = (lo + hi) / 2;
        int i = idx_[static_cast<std::size_t>(mid)];
        heap_push(heap, k, {dist2(x, pts_[static_cast<std::size_t>(i)]), i});
        double dx = (axis == 0 ? x.x : x.y) - coord(i, axis);
        int near_lo = dx < 0 ? lo : mid + 1, near_hi = dx < 0 ? mid : hi;
        int far_lo = dx < 0 ? mid + 1 : lo, far_hi = dx < 0 ? hi : mid;
        knn_rec(near_lo, near_hi, 1 - axis, x, k, heap);
        if (static_cast<int>(heap.size()) < k || dx * dx <= heap.front().d2)
            knn_rec(far_lo, far_hi, 1 - axis, x, k, heap);
    }

    void radius_rec(int lo, int hi, int axis, const Vec2& x, double r2,
                    std::vector<int>& out) const {
        if (lo >= hi) return;
        int mid = (lo + hi) / 2;
        int i = idx_[static_cast<std::size_t>(mid)];
        if (dist2(x, pts_[static_cast<std::size_t>(i)]) <= r2) out.push_back(i);
        double dx = (axis == 0 ? x.x : x.y) - coord(i, axis);
        int near_lo = dx < 0 ? lo : mid + 1, near_hi = dx < 0 ? mid : hi;
        int far_lo = dx < 0 ? mid + 1 : lo, far_hi = dx < 0 ? hi : mid;
        radius_rec(near_lo, near_hi, 1 - axis, x, r2, out);
        if (dx * dx <= r2) radius_rec(far_lo, far_hi, 1 - axis, x, r2, out);
    }
};

} // namespace mesogrow::spatial
