#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fmdt/dataset.hpp"
#include "fmdt/partition.hpp"
#include "fmdt/pit.hpp"

namespace fmdt {

enum class TNorm { Product };
enum class InferenceMode { MaxMatching, WeightedVote };

struct Hyperparameters {
    int fuzzy_sets = 5;     // T, sets per continuous attribute
    int quantiles = 1000;   // q, CDF anchors per continuous attribute
    int max_depth = 5;
    double gamma = 0.001;   // purity stop: leaf when max class share >= 1 - gamma
    double phi = 0.02;      // min node cardinality to attempt a split, fraction of N
    double lambda = 1e-4;   // min child cardinality to recurse, fraction of N
    TNorm tnorm = TNorm::Product;
    InferenceMode inference = InferenceMode::MaxMatching;

    void validate() const;
};

// Multi-way tree node: internal nodes test one attribute and hold one child
// per fuzzy set (continuous) or per category (categorical); leaves hold the
// normalized per-class weights. `cardinality` is the fuzzy cardinality of the
// training mass that reached the node.
struct TreeNode {
    int attribute = -1;  // -1 marks a leaf
    int depth = 0;
    double cardinality = 0.0;
    double gain = 0.0;                  // internal only: gain of the executed split
    std::vector<double> class_weights;  // leaves only, sums to 1
    std::vector<TreeNode> children;     // internal only

    bool is_leaf() const { return attribute < 0; }
};

struct ModelComplexity {
    std::size_t leaves = 0;
    double avg_depth = 0.0;
    double avg_fuzzy_sets = 0.0;
};

struct StageTimings {
    double partitioning_s = 0.0;
    double learning_s = 0.0;
    double total_s = 0.0;
};

// Per-class fuzzy entropy in bits of a vector of per-class cardinalities.
// Throws std::domain_error when the total cardinality is zero.
double fuzzy_entropy(std::span<const double> class_cardinalities);

// FEnt(parent) - sum_j (total_j / total_parent) * FEnt(child_j); children with
// zero cardinality contribute nothing. Throws std::logic_error when the
// children's cardinality exceeds the parent's beyond rounding tolerance.
double fuzzy_info_gain(std::span<const double> parent,
                       const std::vector<std::vector<double>>& children);

struct FMDTModel {
    std::vector<AttributeSchema> schema;
    std::vector<std::string> class_labels;
    Hyperparameters hp;
    std::vector<QuantileTable> tables;        // per continuous attribute, ascending
    std::vector<FuzzyPartition> partitions;   // per continuous attribute, ascending
    TreeNode root;
    int majority_class = 0;  // fallback when no leaf is activated

    // Applies the per-attribute CDFs; categorical cells pass through.
    std::vector<double> transform(std::span<const double> raw_row) const;

    struct LeafHit {
        const TreeNode* leaf = nullptr;
        double matching = 0.0;  // matching degree, product t-norm along the path
    };
    std::vector<LeafHit> leaf_activations(std::span<const double> transformed_row) const;

    // Per-leaf association degrees AD_m = md * w_m for every activated leaf.
    std::vector<std::pair<const TreeNode*, std::vector<double>>> association_degrees(
        std::span<const double> raw_row) const;

    // Per-class scores: the per-class sum of association degrees under
    // WeightedVote, the per-class maximum under MaxMatching.
    std::vector<double> scores(std::span<const double> raw_row, InferenceMode mode) const;

    int predict(std::span<const double> raw_row, InferenceMode mode,
                std::vector<double>* out_scores = nullptr) const;
    int predict(std::span<const double> raw_row) const { return predict(raw_row, hp.inference); }

    ModelComplexity complexity() const;
};

// Grows the tree on an already-transformed dataset; `tables` and `partitions`
// become part of the returned model. train() is this plus the PIT stage.
FMDTModel grow_tree(const Dataset& transformed, std::vector<QuantileTable> tables,
                    std::vector<FuzzyPartition> partitions, const Hyperparameters& hp,
                    int workers = 1);

// Full pipeline: per-attribute quantile tables on the training data, PIT
// transform, uniform partitions, recursive induction. Deterministic for fixed
// inputs regardless of the worker count.
FMDTModel train(const Dataset& ds, const Hyperparameters& hp, std::uint64_t seed = 0,
                int workers = 1, StageTimings* timings = nullptr);

}  // namespace fmdt
