#include "fmdt/tree.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "fmdt/parallel.hpp"

namespace fmdt {

void Hyperparameters::validate() const {
    if (fuzzy_sets < 2) throw std::invalid_argument("fuzzy_sets must be at least 2");
    if (quantiles < 2) throw std::invalid_argument("quantiles must be at least 2");
    if (max_depth < 0) throw std::invalid_argument("max_depth must be non-negative");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0,1)");
    if (!(phi > 0.0 && phi < 1.0)) throw std::invalid_argument("phi must be in (0,1)");
    if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must be in (0,1)");
}

double fuzzy_entropy(std::span<const double> class_cardinalities) {
    double total = 0.0;
    for (double s : class_cardinalities) {
        if (s < 0.0) throw std::domain_error("fuzzy_entropy: negative cardinality");
        total += s;
    }
    if (total <= 0.0) throw std::domain_error("fuzzy_entropy: zero total cardinality");
    double h = 0.0;
    for (double s : class_cardinalities) {
        if (s <= 0.0) continue;
        const double p = s / total;
        h -= p * std::log2(p);
    }
    return h;
}

double fuzzy_info_gain(std::span<const double> parent,
                       const std::vector<std::vector<double>>& children) {
    double parent_total = 0.0;
    for (double s : parent) parent_total += s;
    double children_total = 0.0;
    for (const auto& c : children)
        for (double s : c) children_total += s;
    if (children_total > parent_total + 1e-6 * std::max(1.0, parent_total))
        throw std::logic_error("fuzzy_info_gain: children cardinality exceeds parent");
    double gain = fuzzy_entropy(parent);
    for (const auto& c : children) {
        double child_total = 0.0;
        for (double s : c) child_total += s;
        if (child_total <= 0.0) continue;
        gain -= (child_total / parent_total) * fuzzy_entropy(c);
    }
    return gain;
}

namespace {

double sum(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

std::vector<double> normalized(std::span<const double> stats) {
    const double total = sum(stats);
    std::vector<double> w(stats.begin(), stats.end());
    for (double& x : w) x /= total;
    return w;
}

// Rows reaching a node, with the matching degree each carries: the product
// of memberships accumulated along the path.
struct RowSet {
    std::vector<std::uint32_t> idx;
    std::vector<double> weight;

    std::size_t size() const { return idx.size(); }
};

class Grower {
public:
    Grower(const Dataset& ds, const std::vector<FuzzyPartition>& partitions,
           const Hyperparameters& hp, int workers)
        : ds_(ds), hp_(hp), workers_(workers), m_(static_cast<int>(ds.class_count())) {
        const std::size_t f = ds.attribute_count();
        part_of_.assign(f, nullptr);
        for (const FuzzyPartition& p : partitions) part_of_[p.attribute_index] = &p;
        child_count_.assign(f, 0);
        for (std::size_t i = 0; i < f; ++i)
            child_count_[i] = part_of_[i] ? part_of_[i]->size()
                                          : static_cast<int>(ds.schema[i].categories.size());
        n_total_ = static_cast<double>(ds.size());
    }

    TreeNode grow_root() {
        RowSet rows;
        rows.idx.resize(ds_.size());
        rows.weight.assign(ds_.size(), 1.0);
        for (std::size_t r = 0; r < ds_.size(); ++r) rows.idx[r] = static_cast<std::uint32_t>(r);
        std::vector<double> stats = chunked_accumulate(
            rows.size(), m_, workers_, [&](std::size_t lo, std::size_t hi, double* buf) {
                for (std::size_t r = lo; r < hi; ++r) buf[ds_.labels[rows.idx[r]]] += rows.weight[r];
            });
        const std::vector<double> priors = normalized(stats);
        return grow(std::move(rows), std::move(stats), 0, std::vector<bool>(ds_.attribute_count()),
                    priors);
    }

private:
    TreeNode make_leaf(std::span<const double> stats, int depth,
                       std::span<const double> parent_weights) const {
        TreeNode leaf;
        leaf.depth = depth;
        leaf.cardinality = sum(stats);
        if (leaf.cardinality > 0.0)
            leaf.class_weights = normalized(stats);
        else
            leaf.class_weights.assign(parent_weights.begin(), parent_weights.end());
        return leaf;
    }

    TreeNode grow(RowSet rows, std::vector<double> stats, int depth, std::vector<bool> used,
                  std::span<const double> parent_weights) {
        const double total = sum(stats);
        if (depth >= hp_.max_depth) return make_leaf(stats, depth, parent_weights);
        const double max_share = *std::max_element(stats.begin(), stats.end()) / total;
        if (max_share >= 1.0 - hp_.gamma) return make_leaf(stats, depth, parent_weights);
        if (total < hp_.phi * n_total_) return make_leaf(stats, depth, parent_weights);

        std::vector<int> candidates;
        for (std::size_t i = 0; i < used.size(); ++i)
            if (!used[i]) candidates.push_back(static_cast<int>(i));
        if (candidates.empty()) return make_leaf(stats, depth, parent_weights);

        // One pass over the node's weighted rows fills the per-child,
        // per-class cardinalities of every candidate attribute.
        std::vector<std::size_t> offset(candidates.size() + 1, 0);
        for (std::size_t ci = 0; ci < candidates.size(); ++ci)
            offset[ci + 1] = offset[ci] + static_cast<std::size_t>(child_count_[candidates[ci]]) * m_;
        const std::vector<double> buf = chunked_accumulate(
            rows.size(), offset.back(), workers_,
            [&](std::size_t lo, std::size_t hi, double* b) {
                for (std::size_t r = lo; r < hi; ++r) {
                    const std::uint32_t row = rows.idx[r];
                    const double w = rows.weight[r];
                    const int cls = ds_.labels[row];
                    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
                        const int f = candidates[ci];
                        const double v = ds_.value(row, f);
                        double* base = b + offset[ci];
                        if (const FuzzyPartition* p = part_of_[f]) {
                            const auto act = p->activation(v);
                            base[act.first * m_ + cls] += w * act.first_degree;
                            if (act.first + 1 < p->size())
                                base[(act.first + 1) * m_ + cls] += w * act.second_degree;
                        } else {
                            base[static_cast<int>(v) * m_ + cls] += w;
                        }
                    }
                }
            });

        int best_attr = -1;
        std::size_t best_ci = 0;
        double best_gain = 0.0;
        for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
            const int f = candidates[ci];
            std::vector<std::vector<double>> children(child_count_[f]);
            for (int j = 0; j < child_count_[f]; ++j) {
                const double* base = buf.data() + offset[ci] + static_cast<std::size_t>(j) * m_;
                children[j].assign(base, base + m_);
            }
            const double gain = fuzzy_info_gain(stats, children);
            if (gain > best_gain) {
                best_gain = gain;
                best_attr = f;
                best_ci = ci;
            }
        }
        if (best_attr < 0) return make_leaf(stats, depth, parent_weights);

        TreeNode node;
        node.attribute = best_attr;
        node.depth = depth;
        node.cardinality = total;
        node.gain = best_gain;
        const std::vector<double> own_weights = normalized(stats);

        const int nc = child_count_[best_attr];
        std::vector<RowSet> child_rows(nc);
        if (const FuzzyPartition* p = part_of_[best_attr]) {
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const std::uint32_t row = rows.idx[r];
                const double w = rows.weight[r];
                const auto act = p->activation(ds_.value(row, best_attr));
                if (w * act.first_degree > 0.0) {
                    child_rows[act.first].idx.push_back(row);
                    child_rows[act.first].weight.push_back(w * act.first_degree);
                }
                if (act.first + 1 < nc && w * act.second_degree > 0.0) {
                    child_rows[act.first + 1].idx.push_back(row);
                    child_rows[act.first + 1].weight.push_back(w * act.second_degree);
                }
            }
        } else {
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const std::uint32_t row = rows.idx[r];
                if (rows.weight[r] > 0.0) {
                    const int c = static_cast<int>(ds_.value(row, best_attr));
                    child_rows[c].idx.push_back(row);
                    child_rows[c].weight.push_back(rows.weight[r]);
                }
            }
        }
        rows = RowSet{};  // free before recursing

        std::vector<bool> child_used = used;
        child_used[best_attr] = true;
        node.children.reserve(nc);
        double children_total = 0.0;
        for (int j = 0; j < nc; ++j) {
            const double* base = buf.data() + offset[best_ci] + static_cast<std::size_t>(j) * m_;
            std::vector<double> child_stats(base, base + m_);
            const double child_total = sum(child_stats);
            children_total += child_total;
            if (child_total < hp_.lambda * n_total_)
                node.children.push_back(make_leaf(child_stats, depth + 1, own_weights));
            else
                node.children.push_back(grow(std::move(child_rows[j]), std::move(child_stats),
                                             depth + 1, child_used, own_weights));
        }
        if (std::abs(children_total - total) > 1e-6 * std::max(1.0, total))
            throw std::logic_error("grow: cardinality not conserved across split");
        return node;
    }

    const Dataset& ds_;
    const Hyperparameters& hp_;
    int workers_;
    int m_;
    double n_total_ = 0.0;
    std::vector<const FuzzyPartition*> part_of_;
    std::vector<int> child_count_;
};

void walk_leaves(const TreeNode& node, std::size_t& leaves, std::size_t& depth_sum) {
    if (node.is_leaf()) {
        ++leaves;
        depth_sum += static_cast<std::size_t>(node.depth);
        return;
    }
    for (const TreeNode& c : node.children) walk_leaves(c, leaves, depth_sum);
}

}  // namespace

FMDTModel grow_tree(const Dataset& transformed, std::vector<QuantileTable> tables,
                    std::vector<FuzzyPartition> partitions, const Hyperparameters& hp,
                    int workers) {
    hp.validate();
    transformed.validate();
    if (transformed.attribute_count() == 0)
        throw std::invalid_argument("grow_tree: dataset has no attributes");
    std::vector<bool> covered(transformed.attribute_count(), false);
    for (const FuzzyPartition& p : partitions) {
        if (p.attribute_index < 0 ||
            p.attribute_index >= static_cast<int>(transformed.attribute_count()) ||
            transformed.schema[p.attribute_index].kind != AttrKind::Continuous ||
            covered[p.attribute_index])
            throw std::invalid_argument("grow_tree: partitions must cover the continuous "
                                        "attributes exactly once");
        covered[p.attribute_index] = true;
    }
    for (const AttributeSchema& a : transformed.schema)
        if (a.kind == AttrKind::Continuous && !covered[a.index])
            throw std::invalid_argument("grow_tree: missing partition for attribute '" + a.name +
                                        "'");

    FMDTModel model;
    model.schema = transformed.schema;
    model.class_labels = transformed.class_labels;
    model.hp = hp;
    model.tables = std::move(tables);
    model.partitions = std::move(partitions);
    std::sort(model.tables.begin(), model.tables.end(),
              [](const QuantileTable& a, const QuantileTable& b) {
                  return a.attribute_index < b.attribute_index;
              });
    std::sort(model.partitions.begin(), model.partitions.end(),
              [](const FuzzyPartition& a, const FuzzyPartition& b) {
                  return a.attribute_index < b.attribute_index;
              });

    std::vector<double> class_counts(transformed.class_count(), 0.0);
    for (int label : transformed.labels) class_counts[label] += 1.0;
    model.majority_class = static_cast<int>(
        std::max_element(class_counts.begin(), class_counts.end()) - class_counts.begin());

    Grower grower(transformed, model.partitions, hp, workers);
    model.root = grower.grow_root();
    return model;
}

FMDTModel train(const Dataset& ds, const Hyperparameters& hp, std::uint64_t seed, int workers,
                StageTimings* timings) {
    (void)seed;  // induction is deterministic; the seed only drives fold shuffling upstream
    hp.validate();
    ds.validate();
    if (ds.attribute_count() == 0) throw std::invalid_argument("train: dataset has no attributes");

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    std::vector<QuantileTable> tables = compute_all_quantiles(ds, hp.quantiles, workers);
    Dataset transformed = transform_dataset(ds, tables, workers);
    std::vector<FuzzyPartition> partitions;
    for (const AttributeSchema& a : ds.schema)
        if (a.kind == AttrKind::Continuous)
            partitions.push_back(build_uniform_partition(hp.fuzzy_sets, a.index));
    const auto t1 = clock::now();
    FMDTModel model =
        grow_tree(transformed, std::move(tables), std::move(partitions), hp, workers);
    const auto t2 = clock::now();
    if (timings) {
        timings->partitioning_s = std::chrono::duration<double>(t1 - t0).count();
        timings->learning_s = std::chrono::duration<double>(t2 - t1).count();
        timings->total_s = std::chrono::duration<double>(t2 - t0).count();
    }
    return model;
}

std::vector<double> FMDTModel::transform(std::span<const double> raw_row) const {
    if (raw_row.size() != schema.size())
        throw std::invalid_argument("predict: row width does not match schema");
    std::vector<double> out(raw_row.begin(), raw_row.end());
    std::size_t t = 0;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (schema[i].kind != AttrKind::Continuous) continue;
        out[i] = tables[t].cdf(raw_row[i]);
        ++t;
    }
    return out;
}

namespace {

template <typename LeafFn>
void descend(const TreeNode& node, const FMDTModel& model,
             std::span<const double> transformed_row, double md, LeafFn&& fn) {
    if (node.is_leaf()) {
        fn(node, md);
        return;
    }
    const AttributeSchema& a = model.schema[node.attribute];
    if (a.kind == AttrKind::Continuous) {
        const FuzzyPartition* part = nullptr;
        for (const FuzzyPartition& p : model.partitions)
            if (p.attribute_index == node.attribute) part = &p;
        const auto act = part->activation(transformed_row[node.attribute]);
        if (md * act.first_degree > 0.0)
            descend(node.children[act.first], model, transformed_row, md * act.first_degree, fn);
        if (act.first + 1 < static_cast<int>(node.children.size()) &&
            md * act.second_degree > 0.0)
            descend(node.children[act.first + 1], model, transformed_row,
                    md * act.second_degree, fn);
    } else {
        const double v = transformed_row[node.attribute];
        if (v >= 0.0 && v < static_cast<double>(node.children.size()))
            descend(node.children[static_cast<int>(v)], model, transformed_row, md, fn);
        // unseen category: membership 0 to every branch
    }
}

}  // namespace

std::vector<FMDTModel::LeafHit> FMDTModel::leaf_activations(
    std::span<const double> transformed_row) const {
    std::vector<LeafHit> hits;
    descend(root, *this, transformed_row, 1.0,
            [&](const TreeNode& leaf, double md) { hits.push_back({&leaf, md}); });
    return hits;
}

std::vector<std::pair<const TreeNode*, std::vector<double>>> FMDTModel::association_degrees(
    std::span<const double> raw_row) const {
    const std::vector<double> u = transform(raw_row);
    std::vector<std::pair<const TreeNode*, std::vector<double>>> out;
    descend(root, *this, u, 1.0, [&](const TreeNode& leaf, double md) {
        std::vector<double> ad(leaf.class_weights.size());
        for (std::size_t m = 0; m < ad.size(); ++m) ad[m] = md * leaf.class_weights[m];
        out.emplace_back(&leaf, std::move(ad));
    });
    return out;
}

std::vector<double> FMDTModel::scores(std::span<const double> raw_row, InferenceMode mode) const {
    const std::vector<double> u = transform(raw_row);
    std::vector<double> acc(class_labels.size(), 0.0);
    descend(root, *this, u, 1.0, [&](const TreeNode& leaf, double md) {
        for (std::size_t m = 0; m < acc.size(); ++m) {
            const double ad = md * leaf.class_weights[m];
            if (mode == InferenceMode::WeightedVote)
                acc[m] += ad;
            else
                acc[m] = std::max(acc[m], ad);
        }
    });
    return acc;
}

int FMDTModel::predict(std::span<const double> raw_row, InferenceMode mode,
                       std::vector<double>* out_scores) const {
    std::vector<double> s = scores(raw_row, mode);
    int best = majority_class;
    bool any = false;
    for (std::size_t m = 0; m < s.size(); ++m)
        if (s[m] > 0.0) {
            any = true;
            break;
        }
    if (any) {
        best = 0;
        for (std::size_t m = 1; m < s.size(); ++m)
            if (s[m] > s[best]) best = static_cast<int>(m);
    }
    if (out_scores) *out_scores = std::move(s);
    return best;
}

ModelComplexity FMDTModel::complexity() const {
    ModelComplexity c;
    std::size_t depth_sum = 0;
    walk_leaves(root, c.leaves, depth_sum);
    c.avg_depth = c.leaves ? static_cast<double>(depth_sum) / static_cast<double>(c.leaves) : 0.0;
    if (!partitions.empty()) {
        double sets = 0.0;
        for (const FuzzyPartition& p : partitions) sets += p.size();
        c.avg_fuzzy_sets = sets / static_cast<double>(partitions.size());
    }
    return c;
}

}  // namespace fmdt
