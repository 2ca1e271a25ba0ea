#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fmdt/dataset.hpp"
#include "fmdt/tree.hpp"

namespace fmdt {

// M x M counts, rows indexed by actual class, columns by prediction. Binary
// projections (tp/fn/fp/tn) fold every class other than `positive` into the
// negative side.
struct ConfusionMatrix {
    std::vector<std::vector<std::size_t>> counts;
    int positive = 0;

    std::size_t classes() const { return counts.size(); }
    std::size_t total() const;
    double tp() const;
    double fn() const;
    double fp() const;
    double tn() const;
};

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels,
                          int num_classes, int positive = 0);

struct ClassificationRates {
    double tp_rate = 0.0;
    double tn_rate = 0.0;
    double fp_rate = 0.0;  // 1 - tn_rate
    double fn_rate = 0.0;  // 1 - tp_rate
};

// Throws std::domain_error naming the class when a rate denominator is zero.
ClassificationRates rates(const ConfusionMatrix& cm);

// Fraction of correctly classified examples (trace over total).
double accuracy(const ConfusionMatrix& cm);

// Single-operating-point area under the ROC curve, (1 + tp_rate - fp_rate)/2.
double auc(const ConfusionMatrix& cm);

struct FoldOutcome {
    int fold = 0;
    double accuracy = 0.0;
    double auc = 0.0;  // NaN for multi-class runs
    ModelComplexity complexity;
    StageTimings timings;
};

struct EvaluationReport {
    int k = 0;
    std::uint64_t seed = 0;
    int positive = 0;
    bool binary = false;
    std::vector<FoldOutcome> folds;
    double accuracy_mean = 0.0, accuracy_std = 0.0;
    double auc_mean = 0.0, auc_std = 0.0;
    double leaves_mean = 0.0, avg_depth_mean = 0.0, avg_fuzzy_sets_mean = 0.0;
    StageTimings timings;  // summed over folds
};

// Stratified k-fold cross-validation: trains on k-1 folds, evaluates on the
// held-out one, reports per-fold values and mean +/- sample std. Trained
// models are handed to `out_models` when provided.
EvaluationReport cross_validate(const Dataset& ds, const Hyperparameters& hp, int k,
                                std::uint64_t seed, int positive = 0, int workers = 1,
                                std::vector<FMDTModel>* out_models = nullptr);

// Human-readable table, one row per fold plus "mean +/- std" summary lines.
std::string render_report(const EvaluationReport& report);

}  // namespace fmdt
