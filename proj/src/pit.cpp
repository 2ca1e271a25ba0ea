#include "fmdt/pit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fmdt/parallel.hpp"

namespace fmdt {

double QuantileTable::cdf(double x) const {
    if (!std::isfinite(x)) throw std::invalid_argument("cdf: non-finite input");
    if (anchors.empty()) throw std::logic_error("cdf: empty quantile table");
    if (x < anchors.front().value) return 0.0;
    if (x > anchors.back().value) return 1.0;
    const auto it = std::lower_bound(
        anchors.begin(), anchors.end(), x,
        [](const QuantileAnchor& a, double v) { return a.value < v; });
    if (it->value == x) return it->level;
    const QuantileAnchor& hi = *it;
    const QuantileAnchor& lo = *(it - 1);
    return lo.level + (x - lo.value) * (hi.level - lo.level) / (hi.value - lo.value);
}

double QuantileTable::quantile(double level) const {
    if (!(level >= 0.0 && level <= 1.0))
        throw std::invalid_argument("quantile: level outside [0,1]");
    if (anchors.empty()) throw std::logic_error("quantile: empty quantile table");
    if (level <= anchors.front().level) return anchors.front().value;
    if (level >= anchors.back().level) return anchors.back().value;
    const auto it = std::lower_bound(
        anchors.begin(), anchors.end(), level,
        [](const QuantileAnchor& a, double l) { return a.level < l; });
    if (it->level == level) return it->value;
    const QuantileAnchor& hi = *it;
    const QuantileAnchor& lo = *(it - 1);
    return lo.value + (level - lo.level) * (hi.value - lo.value) / (hi.level - lo.level);
}

QuantileTable compute_quantiles(std::span<const double> values, int q, int attribute_index) {
    if (values.empty()) throw std::invalid_argument("compute_quantiles: empty input");
    if (q < 2) throw std::invalid_argument("compute_quantiles: quantile count must be at least 2");
    const std::size_t n = values.size();
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("compute_quantiles: non-finite value");
    // q >= n degenerates to plain order statistics
    const std::size_t q_eff = static_cast<std::size_t>(q) >= n ? std::max<std::size_t>(n, 2)
                                                               : static_cast<std::size_t>(q);
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    QuantileTable t;
    t.attribute_index = attribute_index;
    t.q = static_cast<int>(q_eff);
    t.anchors.reserve(q_eff - 1);
    for (std::size_t i = 1; i < q_eff; ++i) {
        const std::size_t rank = (i * n + q_eff - 1) / q_eff;  // ceil(i*n/q), 1-based
        const double value = sorted[rank - 1];
        const double level = static_cast<double>(i) / static_cast<double>(q_eff);
        if (!t.anchors.empty() && t.anchors.back().value == value)
            t.anchors.back().level = level;  // collapse ties, keep the highest level
        else
            t.anchors.push_back({value, level});
    }
    return t;
}

std::vector<QuantileTable> compute_all_quantiles(const Dataset& ds, int q, int workers) {
    std::vector<int> continuous;
    for (const AttributeSchema& a : ds.schema)
        if (a.kind == AttrKind::Continuous) continuous.push_back(a.index);
    std::vector<QuantileTable> tables(continuous.size());
    parallel_slots(tables.size(), workers, [&](std::size_t slot) {
        const int attr = continuous[slot];
        tables[slot] = compute_quantiles(ds.column(attr), q, attr);
    });
    return tables;
}

Dataset transform_dataset(const Dataset& ds, const std::vector<QuantileTable>& tables,
                          int workers) {
    const std::size_t f = ds.attribute_count();
    std::vector<const QuantileTable*> by_attr(f, nullptr);
    for (const QuantileTable& t : tables) {
        if (t.attribute_index < 0 || t.attribute_index >= static_cast<int>(f))
            throw std::runtime_error("quantile table for unknown attribute index " +
                                     std::to_string(t.attribute_index));
        const AttributeSchema& a = ds.schema[t.attribute_index];
        if (a.kind != AttrKind::Continuous)
            throw std::runtime_error("quantile table for non-continuous attribute '" + a.name +
                                     "'");
        if (by_attr[t.attribute_index])
            throw std::runtime_error("duplicate quantile table for attribute '" + a.name + "'");
        by_attr[t.attribute_index] = &t;
    }
    for (const AttributeSchema& a : ds.schema)
        if (a.kind == AttrKind::Continuous && !by_attr[a.index])
            throw std::runtime_error("missing quantile table for attribute '" + a.name + "'");

    Dataset out = ds;
    for_each_chunk(ds.size(), workers, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r)
            for (std::size_t i = 0; i < f; ++i)
                if (by_attr[i]) out.values[r * f + i] = by_attr[i]->cdf(ds.value(r, i));
    });
    return out;
}

}  // namespace fmdt
