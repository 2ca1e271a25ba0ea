#pragma once

#include <span>
#include <vector>

#include "fmdt/dataset.hpp"

namespace fmdt {

struct QuantileAnchor {
    double value = 0.0;  // attribute units
    double level = 0.0;  // fraction in (0,1)
};

// Sorted quantile anchors approximating the empirical CDF of one attribute
// and, through the inverse interpolation, its quantile function. Anchors are
// strictly increasing in both value and level; ties in the underlying data
// are collapsed keeping the highest level.
struct QuantileTable {
    int attribute_index = -1;
    int q = 0;  // effective quantile count the anchors were extracted with
    std::vector<QuantileAnchor> anchors;

    // Piecewise-linear CDF: 0 below the first anchor, 1 above the last,
    // anchor level at an anchor value, linear in between.
    double cdf(double x) const;

    // Inverse of cdf. Levels at or below the first anchor level map to the
    // first anchor value, at or above the last to the last (left-continuous
    // inverse across collapsed ties). Throws if level is outside [0,1].
    double quantile(double level) const;
};

// Nearest-rank q-quantiles of `values`: the i-th raw quantile is the element
// of rank ceil(i*n/q) in the sorted vector, with level i/q, for i = 1..q-1.
// When q >= n the quantile count falls back to n (floored at 2).
QuantileTable compute_quantiles(std::span<const double> values, int q,
                                int attribute_index = -1);

// One table per continuous attribute, in ascending attribute order.
std::vector<QuantileTable> compute_all_quantiles(const Dataset& ds, int q,
                                                 int workers = 1);

// Replaces every continuous cell by its table's CDF value; categorical cells
// and class labels pass through untouched. `tables` must cover exactly the
// continuous attributes of `ds`.
Dataset transform_dataset(const Dataset& ds, const std::vector<QuantileTable>& tables,
                          int workers = 1);

}  // namespace fmdt
