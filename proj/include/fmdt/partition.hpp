#pragma once

#include <algorithm>
#include <array>
#include <stdexcept>
#include <vector>

#include "fmdt/pit.hpp"

namespace fmdt {

struct TriangularFuzzySet {
    double left = 0.0;
    double core = 0.0;
    double right = 0.0;
    int label = 0;  // ordinal position in the partition

    // Rises linearly on [left, core], falls on [core, right], 0 outside;
    // shoulder sets (left == core or core == right) stay 1 past the core.
    double membership(double u) const {
        if (u < core) {
            if (u <= left) return left == core ? 1.0 : 0.0;
            return (u - left) / (core - left);
        }
        if (u > core) {
            if (u >= right) return core == right ? 1.0 : 0.0;
            return (right - u) / (right - core);
        }
        return 1.0;
    }
};

// Ordered triangular sets forming a Ruspini strong partition of [0,1]:
// memberships sum to 1 everywhere and at most two consecutive sets are
// active at any point.
struct FuzzyPartition {
    int attribute_index = -1;
    std::vector<TriangularFuzzySet> sets;

    int size() const { return static_cast<int>(sets.size()); }

    // The (at most two) active sets at u. `second_degree` refers to set
    // `first + 1` and is 0 when `first` is the last set.
    struct Activation {
        int first = 0;
        double first_degree = 0.0;
        double second_degree = 0.0;
    };

    Activation activation(double u) const {
        u = std::clamp(u, 0.0, 1.0);
        int lo = 0;
        const int t = size();
        while (lo + 1 < t && sets[lo + 1].core <= u) ++lo;
        Activation a;
        a.first = lo;
        a.first_degree = sets[lo].membership(u);
        if (lo + 1 < t) a.second_degree = sets[lo + 1].membership(u);
        return a;
    }

    std::vector<double> memberships(double u) const {
        std::vector<double> out(sets.size(), 0.0);
        const Activation a = activation(u);
        out[a.first] = a.first_degree;
        if (a.first + 1 < size()) out[a.first + 1] = a.second_degree;
        return out;
    }
};

// T triangular sets with cores equally spaced at (k-1)/(T-1); the first and
// last are shoulders pinned to 0 and 1.
inline FuzzyPartition build_uniform_partition(int set_count, int attribute_index = -1) {
    if (set_count < 2)
        throw std::invalid_argument("build_uniform_partition: need at least 2 fuzzy sets");
    FuzzyPartition p;
    p.attribute_index = attribute_index;
    p.sets.resize(set_count);
    std::vector<double> cores(set_count);
    for (int k = 0; k < set_count; ++k)
        cores[k] = static_cast<double>(k) / (set_count - 1);
    for (int k = 0; k < set_count; ++k) {
        TriangularFuzzySet& s = p.sets[k];
        s.left = k == 0 ? 0.0 : cores[k - 1];
        s.core = cores[k];
        s.right = k == set_count - 1 ? 1.0 : cores[k + 1];
        s.label = k;
    }
    return p;
}

// Fuzzy-set vertices mapped back to attribute units through the quantile
// function. Reporting only; inference always runs in transformed space.
inline std::vector<std::array<double, 3>> map_to_original(const FuzzyPartition& p,
                                                          const QuantileTable& t) {
    std::vector<std::array<double, 3>> out;
    out.reserve(p.sets.size());
    for (const TriangularFuzzySet& s : p.sets)
        out.push_back({t.quantile(s.left), t.quantile(s.core), t.quantile(s.right)});
    return out;
}

}  // namespace fmdt
