#include "fmdt/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace fmdt {

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (const auto& row : counts)
        for (std::size_t c : row) t += c;
    return t;
}

double ConfusionMatrix::tp() const { return static_cast<double>(counts[positive][positive]); }

double ConfusionMatrix::fn() const {
    std::size_t s = 0;
    for (std::size_t j = 0; j < counts.size(); ++j)
        if (static_cast<int>(j) != positive) s += counts[positive][j];
    return static_cast<double>(s);
}

double ConfusionMatrix::fp() const {
    std::size_t s = 0;
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (static_cast<int>(i) != positive) s += counts[i][positive];
    return static_cast<double>(s);
}

double ConfusionMatrix::tn() const {
    return static_cast<double>(total()) - tp() - fn() - fp();
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels,
                          int num_classes, int positive) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("confusion: predictions and labels differ in length");
    if (predictions.empty()) throw std::invalid_argument("confusion: empty input");
    if (num_classes < 2) throw std::invalid_argument("confusion: need at least 2 classes");
    if (positive < 0 || positive >= num_classes)
        throw std::invalid_argument("confusion: positive class out of range");
    ConfusionMatrix cm;
    cm.positive = positive;
    cm.counts.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes || predictions[i] < 0 ||
            predictions[i] >= num_classes)
            throw std::invalid_argument("confusion: class index out of range");
        ++cm.counts[labels[i]][predictions[i]];
    }
    return cm;
}

ClassificationRates rates(const ConfusionMatrix& cm) {
    const double tp = cm.tp(), fn = cm.fn(), fp = cm.fp(), tn = cm.tn();
    if (tp + fn == 0.0)
        throw std::domain_error("rates: no examples of positive class " +
                                std::to_string(cm.positive) + ", tp_rate/fn_rate undefined");
    if (tn + fp == 0.0)
        throw std::domain_error("rates: no examples outside positive class " +
                                std::to_string(cm.positive) + ", tn_rate/fp_rate undefined");
    ClassificationRates r;
    r.tp_rate = tp / (tp + fn);
    r.tn_rate = tn / (tn + fp);
    // exact complements of the rates above
    r.fn_rate = 1.0 - r.tp_rate;
    r.fp_rate = 1.0 - r.tn_rate;
    return r;
}

double accuracy(const ConfusionMatrix& cm) {
    const std::size_t t = cm.total();
    if (t == 0) throw std::domain_error("accuracy: empty confusion matrix");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < cm.counts.size(); ++i) correct += cm.counts[i][i];
    return static_cast<double>(correct) / static_cast<double>(t);
}

double auc(const ConfusionMatrix& cm) {
    const ClassificationRates r = rates(cm);
    return (1.0 + r.tp_rate - r.fp_rate) / 2.0;
}

EvaluationReport cross_validate(const Dataset& ds, const Hyperparameters& hp, int k,
                                std::uint64_t seed, int positive, int workers,
                                std::vector<FMDTModel>* out_models) {
    hp.validate();
    if (positive < 0 || positive >= static_cast<int>(ds.class_count()))
        throw std::invalid_argument("cross_validate: positive class out of range");
    const FoldAssignment folds = stratified_folds(ds, k, seed);
    const int m = static_cast<int>(ds.class_count());

    EvaluationReport report;
    report.k = k;
    report.seed = seed;
    report.positive = positive;
    report.binary = m == 2;
    for (int fold = 0; fold < k; ++fold) {
        auto [train_ds, test_ds] = split_by_fold(ds, folds, fold);
        FoldOutcome outcome;
        outcome.fold = fold;
        FMDTModel model = train(train_ds, hp, seed, workers, &outcome.timings);
        std::vector<int> preds;
        preds.reserve(test_ds.size());
        for (std::size_t r = 0; r < test_ds.size(); ++r)
            preds.push_back(model.predict(test_ds.row(r), hp.inference));
        const ConfusionMatrix cm = confusion(preds, test_ds.labels, m, positive);
        outcome.accuracy = accuracy(cm);
        outcome.auc = report.binary ? auc(cm) : std::numeric_limits<double>::quiet_NaN();
        outcome.complexity = model.complexity();
        report.folds.push_back(outcome);
        report.timings.partitioning_s += outcome.timings.partitioning_s;
        report.timings.learning_s += outcome.timings.learning_s;
        report.timings.total_s += outcome.timings.total_s;
        if (out_models) out_models->push_back(std::move(model));
    }

    auto mean_std = [&](auto getter, double& mean, double& stdev) {
        double s = 0.0;
        for (const FoldOutcome& f : report.folds) s += getter(f);
        mean = s / k;
        double ss = 0.0;
        for (const FoldOutcome& f : report.folds) {
            const double d = getter(f) - mean;
            ss += d * d;
        }
        stdev = std::sqrt(ss / (k - 1));
    };
    mean_std([](const FoldOutcome& f) { return f.accuracy; }, report.accuracy_mean,
             report.accuracy_std);
    if (report.binary)
        mean_std([](const FoldOutcome& f) { return f.auc; }, report.auc_mean, report.auc_std);
    double dummy = 0.0;
    mean_std([](const FoldOutcome& f) { return static_cast<double>(f.complexity.leaves); },
             report.leaves_mean, dummy);
    mean_std([](const FoldOutcome& f) { return f.complexity.avg_depth; }, report.avg_depth_mean,
             dummy);
    mean_std([](const FoldOutcome& f) { return f.complexity.avg_fuzzy_sets; },
             report.avg_fuzzy_sets_mean, dummy);
    return report;
}

std::string render_report(const EvaluationReport& report) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%d-fold stratified cross-validation (seed %llu)\n",
                  report.k, static_cast<unsigned long long>(report.seed));
    out += line;
    out += report.binary ? "fold  accuracy       auc   leaves  avg_depth  fuzzy_sets\n"
                         : "fold  accuracy   leaves  avg_depth  fuzzy_sets\n";
    for (const FoldOutcome& f : report.folds) {
        if (report.binary)
            std::snprintf(line, sizeof(line), "%4d  %8.4f  %8.4f  %7zu  %9.2f  %10.2f\n", f.fold,
                          f.accuracy, f.auc, f.complexity.leaves, f.complexity.avg_depth,
                          f.complexity.avg_fuzzy_sets);
        else
            std::snprintf(line, sizeof(line), "%4d  %8.4f  %7zu  %9.2f  %10.2f\n", f.fold,
                          f.accuracy, f.complexity.leaves, f.complexity.avg_depth,
                          f.complexity.avg_fuzzy_sets);
        out += line;
    }
    std::snprintf(line, sizeof(line), "accuracy: %.2f ±%.2f %%\n", 100.0 * report.accuracy_mean,
                  100.0 * report.accuracy_std);
    out += line;
    if (report.binary) {
        std::snprintf(line, sizeof(line), "auc: %.4f ±%.4f\n", report.auc_mean, report.auc_std);
        out += line;
    }
    std::snprintf(line, sizeof(line),
                  "leaves: %.1f   avg depth: %.2f   avg fuzzy sets: %.2f\n", report.leaves_mean,
                  report.avg_depth_mean, report.avg_fuzzy_sets_mean);
    out += line;
    std::snprintf(line, sizeof(line),
                  "partitioning: %.3f s   learning: %.3f s   total: %.3f s\n",
                  report.timings.partitioning_s, report.timings.learning_s,
                  report.timings.total_s);
    out += line;
    return out;
}

}  // namespace fmdt
