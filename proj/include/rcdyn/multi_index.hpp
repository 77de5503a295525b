#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rcdyn {

// Multi-index (n_1,...,n_s) of non-negative integers; the differentiation orders
// with respect to the s free probability parameters.
struct MultiIndex {
    std::vector<int> entries;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> e) : entries(std::move(e)) {
        for (int v : entries)
            if (v < 0) throw std::invalid_argument("multi-index entries must be >= 0");
    }
    static MultiIndex zero(int s) { return MultiIndex(std::vector<int>(s, 0)); }
    static MultiIndex unit(int s, int i) {
        std::vector<int> e(s, 0);
        e.at(i) = 1;
        return MultiIndex(std::move(e));
    }

    int size() const { return int(entries.size()); }
    int order() const { return std::accumulate(entries.begin(), entries.end(), 0); }
    int operator[](int i) const { return entries[i]; }

    bool operator==(const MultiIndex& o) const { return entries == o.entries; }

    // componentwise partial order
    bool leq(const MultiIndex& o) const {
        if (entries.size() != o.entries.size()) return false;
        for (std::size_t i = 0; i < entries.size(); ++i)
            if (entries[i] > o.entries[i]) return false;
        return true;
    }

    MultiIndex minus_unit(int i) const {
        MultiIndex m = *this;
        if (m.entries[i] <= 0) throw std::logic_error("multi-index step below zero");
        m.entries[i] -= 1;
        return m;
    }
};

// graded lexicographic: by total order first, then lexicographically
inline bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a.entries < b.entries;
}

// All r with 0 <= r <= n_max (componentwise), in graded lexicographic order.
// This fixed enumeration is the row/column order of every serialized matrix.
std::vector<MultiIndex> multi_index_box(const MultiIndex& n_max);

struct MultiIndexHash {
    std::size_t operator()(const MultiIndex& m) const {
        std::size_t h = 1469598103934665603ull;
        for (int v : m.entries) {
            h ^= std::size_t(v) + 0x9e3779b9;
            h *= 1099511628211ull;
        }
        return h;
    }
};

}  // namespace rcdyn
