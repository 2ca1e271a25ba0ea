// Command-line front end: quantile/partition dumps, model training,
// prediction, and cross-validated evaluation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"

#include "fmdt/dataset.hpp"
#include "fmdt/metrics.hpp"
#include "fmdt/model_io.hpp"
#include "fmdt/partition.hpp"
#include "fmdt/pit.hpp"
#include "fmdt/tree.hpp"

namespace {

// exit code 2: bad flags, bad config values, missing input files
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string data_path;
    std::string schema_path;
    std::string model_path;
    std::string output_path;
    std::string folds_out;
    std::string positive_label;
    std::string inference = "max-matching";
    std::string tnorm = "product";
    bool header = false;
    bool inference_overridden = false;  // predict: flag given, ignore the model's mode
    int folds = 5;
    int max_bins = 0;
    std::uint64_t seed = 42;
    int workers = 1;
    fmdt::Hyperparameters hp;
};

void require_file(const std::string& path, const char* what) {
    if (!std::filesystem::exists(path))
        throw UsageError(std::string(what) + " not found: " + path);
}

fmdt::InferenceMode parse_inference(const std::string& s) {
    if (s == "max-matching") return fmdt::InferenceMode::MaxMatching;
    if (s == "weighted-vote") return fmdt::InferenceMode::WeightedVote;
    throw UsageError("unknown inference mode '" + s + "'");
}

fmdt::Dataset load_input(const RunConfig& cfg, fmdt::SchemaSpec* out_spec = nullptr) {
    require_file(cfg.schema_path, "schema file");
    require_file(cfg.data_path, "data file");
    fmdt::SchemaSpec spec = fmdt::read_schema_file(cfg.schema_path);
    if (out_spec) *out_spec = spec;
    return fmdt::load_csv(cfg.data_path, spec, cfg.header);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void print_train_summary(const fmdt::ModelComplexity& cx, const fmdt::StageTimings& tm) {
    std::printf("leaves: %zu\n", cx.leaves);
    std::printf("avg depth: %.2f\n", cx.avg_depth);
    std::printf("avg fuzzy sets: %.2f\n", cx.avg_fuzzy_sets);
    std::printf("partitioning: %.3f s\n", tm.partitioning_s);
    std::printf("learning: %.3f s\n", tm.learning_s);
    std::printf("total: %.3f s\n", tm.total_s);
}

int cmd_partition(const RunConfig& cfg) {
    const fmdt::Dataset ds = load_input(cfg);
    const auto tables = fmdt::compute_all_quantiles(ds, cfg.hp.quantiles, cfg.workers);
    for (const fmdt::QuantileTable& t : tables)
        if (t.anchors.size() == 1)
            std::fprintf(stderr,
                         "warning: attribute '%s' is constant, quantiles collapse to a "
                         "single anchor\n",
                         ds.schema[t.attribute_index].name.c_str());

    const std::string sets_path = cfg.output_path + ".partition.csv";
    std::ofstream sets_out(sets_path);
    if (!sets_out) throw std::runtime_error("cannot open output file: " + sets_path);
    sets_out << "attribute,set_index,left,core,right,original_left,original_core,original_right\n";
    for (const fmdt::QuantileTable& t : tables) {
        const fmdt::FuzzyPartition p =
            fmdt::build_uniform_partition(cfg.hp.fuzzy_sets, t.attribute_index);
        const auto original = fmdt::map_to_original(p, t);
        for (int k = 0; k < p.size(); ++k) {
            const fmdt::TriangularFuzzySet& s = p.sets[k];
            sets_out << ds.schema[t.attribute_index].name << ',' << k << ','
                     << format_double(s.left) << ',' << format_double(s.core) << ','
                     << format_double(s.right) << ',' << format_double(original[k][0]) << ','
                     << format_double(original[k][1]) << ',' << format_double(original[k][2])
                     << '\n';
        }
    }

    const std::string tables_path = cfg.output_path + ".quantiles.json";
    nlohmann::json jt = nlohmann::json::array();
    for (const fmdt::QuantileTable& t : tables) {
        nlohmann::json anchors = nlohmann::json::array();
        for (const fmdt::QuantileAnchor& a : t.anchors) anchors.push_back({a.value, a.level});
        jt.push_back({{"attribute_index", t.attribute_index},
                      {"attribute", ds.schema[t.attribute_index].name},
                      {"q", t.q},
                      {"anchors", std::move(anchors)}});
    }
    std::ofstream tables_out(tables_path);
    if (!tables_out) throw std::runtime_error("cannot open output file: " + tables_path);
    tables_out << nlohmann::json{{"quantiles", std::move(jt)}}.dump(2) << '\n';
    std::printf("wrote %s and %s\n", sets_path.c_str(), tables_path.c_str());
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    const fmdt::Dataset ds = load_input(cfg);
    fmdt::StageTimings tm;
    const fmdt::FMDTModel model = fmdt::train(ds, cfg.hp, cfg.seed, cfg.workers, &tm);
    fmdt::save_model(model, cfg.model_path);
    std::printf("model written to %s\n", cfg.model_path.c_str());
    print_train_summary(model.complexity(), tm);
    return 0;
}

void check_schema_match(const fmdt::FMDTModel& model, const fmdt::Dataset& ds) {
    bool ok = model.class_labels == ds.class_labels &&
              model.schema.size() == ds.schema.size();
    for (std::size_t i = 0; ok && i < ds.schema.size(); ++i)
        ok = model.schema[i].name == ds.schema[i].name &&
             model.schema[i].kind == ds.schema[i].kind &&
             model.schema[i].categories == ds.schema[i].categories;
    if (!ok) throw UsageError("data schema does not match model schema");
}

int cmd_predict(const RunConfig& cfg) {
    require_file(cfg.model_path, "model file");
    const fmdt::FMDTModel model = fmdt::load_model(cfg.model_path);
    const fmdt::Dataset ds = load_input(cfg);
    check_schema_match(model, ds);
    const fmdt::InferenceMode mode =
        cfg.inference_overridden ? parse_inference(cfg.inference) : model.hp.inference;

    std::ofstream out(cfg.output_path);
    if (!out) throw std::runtime_error("cannot open output file: " + cfg.output_path);
    out << "prediction";
    for (const std::string& label : model.class_labels) out << ',' << label;
    out << '\n';
    std::vector<double> scores;
    char buf[40];
    for (std::size_t r = 0; r < ds.size(); ++r) {
        const int cls = model.predict(ds.row(r), mode, &scores);
        out << model.class_labels[cls];
        for (double s : scores) {
            std::snprintf(buf, sizeof(buf), "%.10g", s);
            out << ',' << buf;
        }
        out << '\n';
    }
    std::printf("predictions written to %s\n", cfg.output_path.c_str());
    return 0;
}

int cmd_cv(const RunConfig& cfg) {
    const fmdt::Dataset ds = load_input(cfg);
    int positive = 0;
    if (!cfg.positive_label.empty()) {
        const auto it =
            std::find(ds.class_labels.begin(), ds.class_labels.end(), cfg.positive_label);
        if (it == ds.class_labels.end())
            throw UsageError("positive class '" + cfg.positive_label + "' not among class labels");
        positive = static_cast<int>(it - ds.class_labels.begin());
    }
    const fmdt::EvaluationReport report =
        fmdt::cross_validate(ds, cfg.hp, cfg.folds, cfg.seed, positive, cfg.workers);
    std::fputs(fmdt::render_report(report).c_str(), stdout);
    std::ofstream out(cfg.output_path);
    if (!out) throw std::runtime_error("cannot open output file: " + cfg.output_path);
    out << fmdt::report_to_json(report).dump(2) << '\n';
    if (!cfg.folds_out.empty()) {
        const fmdt::FoldAssignment fa = fmdt::stratified_folds(ds, cfg.folds, cfg.seed);
        std::ofstream fout(cfg.folds_out);
        if (!fout) throw std::runtime_error("cannot open output file: " + cfg.folds_out);
        fmdt::write_folds(fa, fout);
    }
    std::printf("report written to %s\n", cfg.output_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"Multi-way fuzzy decision trees over quantile-uniformized attributes"};
    app.require_subcommand(1);

    const auto fraction = CLI::Validator(
        [](std::string& s) -> std::string {
            try {
                const double v = std::stod(s);
                if (v > 0.0 && v < 1.0) return {};
            } catch (...) {
            }
            return "value must be a fraction strictly inside (0,1)";
        },
        "FRACTION", "fraction in (0,1)");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-d,--data", cfg.data_path, "delimited data file")->required();
        sub->add_option("-s,--schema", cfg.schema_path, "schema declaration file")->required();
        sub->add_flag("--header", cfg.header, "skip the first data line");
        sub->add_option("--workers", cfg.workers, "worker threads for data-parallel stages")
            ->check(CLI::Range(1, 1024))
            ->capture_default_str();
        sub->add_option("--seed", cfg.seed, "seed for all randomized steps")
            ->capture_default_str();
    };
    auto add_hyper = [&](CLI::App* sub) {
        sub->add_option("-T,--fuzzy-sets", cfg.hp.fuzzy_sets, "fuzzy sets per attribute")
            ->check(CLI::Range(2, 1 << 20))
            ->capture_default_str();
        sub->add_option("-q,--quantiles", cfg.hp.quantiles, "quantile count for the CDF tables")
            ->check(CLI::Range(2, 1 << 30))
            ->capture_default_str();
        sub->add_option("--max-depth", cfg.hp.max_depth, "maximum tree depth")
            ->check(CLI::Range(0, 1 << 20))
            ->capture_default_str();
        sub->add_option("--gamma", cfg.hp.gamma, "purity stop threshold")
            ->check(fraction)
            ->capture_default_str();
        sub->add_option("--phi", cfg.hp.phi, "min node cardinality to split, fraction of N")
            ->check(fraction)
            ->capture_default_str();
        sub->add_option("--lambda", cfg.hp.lambda, "min child cardinality to recurse, fraction of N")
            ->check(fraction)
            ->capture_default_str();
        sub->add_option("--tnorm", cfg.tnorm, "t-norm for matching degrees")
            ->check(CLI::IsMember({"product"}))
            ->capture_default_str();
        sub->add_option("--inference", cfg.inference, "prediction rule")
            ->check(CLI::IsMember({"max-matching", "weighted-vote"}))
            ->capture_default_str();
        sub->add_option("--max-bins", cfg.max_bins,
                        "accepted for compatibility; fuzzy sets play this role here");
    };

    CLI::App* partition = app.add_subcommand(
        "partition", "dump quantile tables and fuzzy sets in transformed and original units");
    add_common(partition);
    add_hyper(partition);
    partition->add_option("-o,--output", cfg.output_path, "output path prefix")->required();

    CLI::App* train = app.add_subcommand("train", "train a model and write it as JSON");
    add_common(train);
    add_hyper(train);
    train->add_option("-m,--model", cfg.model_path, "output model file")->required();

    CLI::App* predict = app.add_subcommand("predict", "predict class labels with a trained model");
    add_common(predict);
    predict->add_option("-m,--model", cfg.model_path, "input model file")->required();
    predict->add_option("-o,--output", cfg.output_path, "output predictions file")->required();
    predict
        ->add_option("--inference", cfg.inference,
                     "prediction rule (default: the mode stored in the model)")
        ->check(CLI::IsMember({"max-matching", "weighted-vote"}))
        ->each([&](const std::string&) { cfg.inference_overridden = true; });

    CLI::App* cv = app.add_subcommand("cv", "stratified k-fold cross-validation");
    add_common(cv);
    add_hyper(cv);
    cv->add_option("-k,--folds", cfg.folds, "fold count")
        ->check(CLI::Range(2, 1 << 20))
        ->capture_default_str();
    cv->add_option("--positive-class", cfg.positive_label,
                   "label treated as positive (default: first class)");
    cv->add_option("-o,--output", cfg.output_path, "output report JSON")->required();
    cv->add_option("--folds-out", cfg.folds_out, "also write the fold assignment");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        cfg.hp.inference = parse_inference(cfg.inference);
        cfg.hp.validate();
        if (cfg.max_bins > 0)
            std::fprintf(stderr,
                         "warning: --max-bins is ignored; --fuzzy-sets controls branching\n");
        if (partition->parsed()) return cmd_partition(cfg);
        if (train->parsed()) return cmd_train(cfg);
        if (predict->parsed()) return cmd_predict(cfg);
        if (cv->parsed()) return cmd_cv(cfg);
        return 2;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
