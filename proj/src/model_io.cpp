#include "fmdt/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fmdt {

namespace {

using nlohmann::json;

void check_node(const FMDTModel& m, const TreeNode& n) {
    if (n.is_leaf()) {
        if (n.class_weights.size() != m.class_labels.size())
            throw std::runtime_error("model: leaf weight arity does not match the class count");
        return;
    }
    if (n.attribute < 0 || n.attribute >= static_cast<int>(m.schema.size()))
        throw std::runtime_error("model: split attribute out of range");
    const AttributeSchema& a = m.schema[n.attribute];
    std::size_t expected = 0;
    if (a.kind == AttrKind::Continuous) {
        for (const FuzzyPartition& p : m.partitions)
            if (p.attribute_index == n.attribute) expected = p.sets.size();
    } else {
        expected = a.categories.size();
    }
    if (n.children.size() != expected)
        throw std::runtime_error("model: child count does not match the split attribute");
    for (const TreeNode& c : n.children) check_node(m, c);
}

// Loaded models come from files; normalize the table/partition order the
// inference code relies on and reject inconsistent documents.
void normalize_and_check(FMDTModel& m) {
    std::sort(m.tables.begin(), m.tables.end(),
              [](const QuantileTable& a, const QuantileTable& b) {
                  return a.attribute_index < b.attribute_index;
              });
    std::sort(m.partitions.begin(), m.partitions.end(),
              [](const FuzzyPartition& a, const FuzzyPartition& b) {
                  return a.attribute_index < b.attribute_index;
              });
    if (m.class_labels.size() < 2) throw std::runtime_error("model: fewer than 2 classes");
    if (m.majority_class < 0 || m.majority_class >= static_cast<int>(m.class_labels.size()))
        throw std::runtime_error("model: majority class out of range");
    std::vector<bool> covered(m.schema.size(), false);
    for (std::size_t i = 0; i < m.schema.size(); ++i)
        if (m.schema[i].index != static_cast<int>(i))
            throw std::runtime_error("model: schema indices must be contiguous from 0");
    auto check_cover = [&](int idx, const char* what) {
        if (idx < 0 || idx >= static_cast<int>(m.schema.size()) ||
            m.schema[idx].kind != AttrKind::Continuous || covered[idx])
            throw std::runtime_error(std::string("model: ") + what +
                                     " must cover the continuous attributes exactly once");
        covered[idx] = true;
    };
    for (const QuantileTable& t : m.tables) check_cover(t.attribute_index, "quantile tables");
    for (const AttributeSchema& a : m.schema)
        if (a.kind == AttrKind::Continuous && !covered[a.index])
            throw std::runtime_error("model: missing quantile table for attribute '" + a.name +
                                     "'");
    covered.assign(m.schema.size(), false);
    for (const FuzzyPartition& p : m.partitions) check_cover(p.attribute_index, "partitions");
    for (const AttributeSchema& a : m.schema)
        if (a.kind == AttrKind::Continuous && !covered[a.index])
            throw std::runtime_error("model: missing partition for attribute '" + a.name + "'");
    check_node(m, m.root);
}

json schema_to_json(const std::vector<AttributeSchema>& schema) {
    json arr = json::array();
    for (const AttributeSchema& a : schema) {
        json j{{"name", a.name},
               {"index", a.index},
               {"kind", a.kind == AttrKind::Continuous ? "continuous" : "categorical"}};
        if (a.kind == AttrKind::Categorical) j["categories"] = a.categories;
        arr.push_back(std::move(j));
    }
    return arr;
}

std::vector<AttributeSchema> schema_from_json(const json& arr) {
    std::vector<AttributeSchema> schema;
    for (const json& j : arr) {
        AttributeSchema a;
        a.name = j.at("name").get<std::string>();
        a.index = j.at("index").get<int>();
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "continuous") {
            a.kind = AttrKind::Continuous;
        } else if (kind == "categorical") {
            a.kind = AttrKind::Categorical;
            a.categories = j.at("categories").get<std::vector<std::string>>();
        } else {
            throw std::runtime_error("model: unknown attribute kind '" + kind + "'");
        }
        schema.push_back(std::move(a));
    }
    return schema;
}

json node_to_json(const TreeNode& n) {
    if (n.is_leaf())
        return json{{"type", "leaf"},
                    {"depth", n.depth},
                    {"cardinality", n.cardinality},
                    {"class_weights", n.class_weights}};
    json children = json::array();
    for (const TreeNode& c : n.children) children.push_back(node_to_json(c));
    return json{{"type", "internal"},
                {"attribute", n.attribute},
                {"depth", n.depth},
                {"cardinality", n.cardinality},
                {"children", std::move(children)}};
}

TreeNode node_from_json(const json& j) {
    TreeNode n;
    const std::string type = j.at("type").get<std::string>();
    n.depth = j.at("depth").get<int>();
    n.cardinality = j.at("cardinality").get<double>();
    if (type == "leaf") {
        n.class_weights = j.at("class_weights").get<std::vector<double>>();
    } else if (type == "internal") {
        n.attribute = j.at("attribute").get<int>();
        for (const json& c : j.at("children")) n.children.push_back(node_from_json(c));
    } else {
        throw std::runtime_error("model: unknown node type '" + type + "'");
    }
    return n;
}

const char* inference_name(InferenceMode m) {
    return m == InferenceMode::MaxMatching ? "max_matching" : "weighted_vote";
}

InferenceMode inference_from_name(const std::string& s) {
    if (s == "max_matching") return InferenceMode::MaxMatching;
    if (s == "weighted_vote") return InferenceMode::WeightedVote;
    throw std::runtime_error("model: unknown inference mode '" + s + "'");
}

}  // namespace

json model_to_json(const FMDTModel& model) {
    json tables = json::array();
    for (const QuantileTable& t : model.tables) {
        json anchors = json::array();
        for (const QuantileAnchor& a : t.anchors) anchors.push_back({a.value, a.level});
        tables.push_back(
            {{"attribute_index", t.attribute_index}, {"q", t.q}, {"anchors", std::move(anchors)}});
    }
    json partitions = json::array();
    for (const FuzzyPartition& p : model.partitions) {
        json sets = json::array();
        for (const TriangularFuzzySet& s : p.sets) sets.push_back({s.left, s.core, s.right});
        partitions.push_back(
            {{"attribute_index", p.attribute_index}, {"sets", std::move(sets)}});
    }
    return json{{"version", kModelVersion},
                {"schema", schema_to_json(model.schema)},
                {"class_labels", model.class_labels},
                {"hyperparameters",
                 {{"fuzzy_sets", model.hp.fuzzy_sets},
                  {"quantiles", model.hp.quantiles},
                  {"max_depth", model.hp.max_depth},
                  {"gamma", model.hp.gamma},
                  {"phi", model.hp.phi},
                  {"lambda", model.hp.lambda},
                  {"tnorm", "product"},
                  {"inference", inference_name(model.hp.inference)}}},
                {"majority_class", model.majority_class},
                {"tables", std::move(tables)},
                {"partitions", std::move(partitions)},
                {"tree", node_to_json(model.root)}};
}

FMDTModel model_from_json(const json& j) {
    const std::string version = j.at("version").get<std::string>();
    if (version != kModelVersion)
        throw std::runtime_error("unsupported model version '" + version + "', expected '" +
                                 std::string(kModelVersion) + "'");
    FMDTModel model;
    model.schema = schema_from_json(j.at("schema"));
    model.class_labels = j.at("class_labels").get<std::vector<std::string>>();
    const json& hp = j.at("hyperparameters");
    model.hp.fuzzy_sets = hp.at("fuzzy_sets").get<int>();
    model.hp.quantiles = hp.at("quantiles").get<int>();
    model.hp.max_depth = hp.at("max_depth").get<int>();
    model.hp.gamma = hp.at("gamma").get<double>();
    model.hp.phi = hp.at("phi").get<double>();
    model.hp.lambda = hp.at("lambda").get<double>();
    if (hp.at("tnorm").get<std::string>() != "product")
        throw std::runtime_error("model: only the product t-norm is supported");
    model.hp.inference = inference_from_name(hp.at("inference").get<std::string>());
    model.majority_class = j.at("majority_class").get<int>();
    for (const json& t : j.at("tables")) {
        QuantileTable table;
        table.attribute_index = t.at("attribute_index").get<int>();
        table.q = t.at("q").get<int>();
        for (const json& a : t.at("anchors"))
            table.anchors.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
        model.tables.push_back(std::move(table));
    }
    for (const json& p : j.at("partitions")) {
        FuzzyPartition part;
        part.attribute_index = p.at("attribute_index").get<int>();
        int label = 0;
        for (const json& s : p.at("sets")) {
            TriangularFuzzySet set;
            set.left = s.at(0).get<double>();
            set.core = s.at(1).get<double>();
            set.right = s.at(2).get<double>();
            set.label = label++;
            part.sets.push_back(set);
        }
        model.partitions.push_back(std::move(part));
    }
    model.root = node_from_json(j.at("tree"));
    normalize_and_check(model);
    return model;
}

void save_model(const FMDTModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
    out << model_to_json(model).dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing model file: " + path);
}

FMDTModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    json j;
    in >> j;
    return model_from_json(j);
}

json report_to_json(const EvaluationReport& report, bool include_timings) {
    json folds = json::array();
    for (const FoldOutcome& f : report.folds) {
        json jf{{"fold", f.fold},
                {"accuracy", f.accuracy},
                {"leaves", f.complexity.leaves},
                {"avg_depth", f.complexity.avg_depth},
                {"avg_fuzzy_sets", f.complexity.avg_fuzzy_sets}};
        if (report.binary) jf["auc"] = f.auc;
        if (include_timings) {
            jf["partitioning_s"] = f.timings.partitioning_s;
            jf["learning_s"] = f.timings.learning_s;
            jf["total_s"] = f.timings.total_s;
        }
        folds.push_back(std::move(jf));
    }
    json j{{"k", report.k},
           {"seed", report.seed},
           {"positive_class", report.positive},
           {"folds", std::move(folds)},
           {"accuracy", {{"mean", report.accuracy_mean}, {"std", report.accuracy_std}}},
           {"complexity",
            {{"leaves_mean", report.leaves_mean},
             {"avg_depth_mean", report.avg_depth_mean},
             {"avg_fuzzy_sets_mean", report.avg_fuzzy_sets_mean}}}};
    if (report.binary) j["auc"] = {{"mean", report.auc_mean}, {"std", report.auc_std}};
    if (include_timings)
        j["timings"] = {{"partitioning_s", report.timings.partitioning_s},
                        {"learning_s", report.timings.learning_s},
                        {"total_s", report.timings.total_s}};
    return j;
}

}  // namespace fmdt
