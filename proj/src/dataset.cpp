#include "fmdt/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace fmdt {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> parse_category_list(std::string_view field, const std::string& where) {
    std::vector<std::string> cats;
    std::unordered_set<std::string> seen;
    for (std::string_view tok : split(field, '|')) {
        std::string cat(trim(tok));
        if (cat.empty()) throw std::runtime_error(where + ": empty label in list");
        if (!seen.insert(cat).second)
            throw std::runtime_error(where + ": duplicate label '" + cat + "'");
        cats.push_back(std::move(cat));
    }
    return cats;
}

}  // namespace

std::vector<double> Dataset::column(std::size_t attr) const {
    std::vector<double> out;
    out.reserve(size());
    for (std::size_t r = 0; r < size(); ++r) out.push_back(value(r, attr));
    return out;
}

void Dataset::validate() const {
    const std::size_t f = schema.size();
    for (std::size_t i = 0; i < f; ++i) {
        if (schema[i].index != static_cast<int>(i))
            throw std::runtime_error("schema indices must be contiguous from 0");
        if (schema[i].kind == AttrKind::Categorical) {
            if (schema[i].categories.empty())
                throw std::runtime_error("categorical attribute '" + schema[i].name +
                                         "' has an empty label list");
            std::unordered_set<std::string> seen(schema[i].categories.begin(),
                                                 schema[i].categories.end());
            if (seen.size() != schema[i].categories.size())
                throw std::runtime_error("categorical attribute '" + schema[i].name +
                                         "' has duplicate labels");
        } else if (!schema[i].categories.empty()) {
            throw std::runtime_error("continuous attribute '" + schema[i].name +
                                     "' must not list categories");
        }
    }
    if (labels.empty()) throw std::runtime_error("dataset is empty");
    if (class_labels.size() < 2) throw std::runtime_error("dataset needs at least 2 classes");
    if (values.size() != labels.size() * f)
        throw std::runtime_error("value buffer does not match row count");
    for (std::size_t r = 0; r < labels.size(); ++r) {
        if (labels[r] < 0 || labels[r] >= static_cast<int>(class_labels.size()))
            throw std::runtime_error("class index out of range");
        for (std::size_t i = 0; i < f; ++i) {
            const double v = value(r, i);
            if (schema[i].kind == AttrKind::Continuous) {
                if (!std::isfinite(v)) throw std::runtime_error("non-finite value in column '" +
                                                                schema[i].name + "'");
            } else {
                const int c = static_cast<int>(v);
                if (static_cast<double>(c) != v || c < 0 ||
                    c >= static_cast<int>(schema[i].categories.size()))
                    throw std::runtime_error("category index out of range in column '" +
                                             schema[i].name + "'");
            }
        }
    }
}

SchemaSpec parse_schema(std::istream& in) {
    SchemaSpec spec;
    spec.class_column = -1;
    std::string raw;
    int column = 0;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const std::string where = "schema line " + std::to_string(line_no);
        const auto fields = split(line, ',');
        if (fields.size() < 2) throw std::runtime_error(where + ": expected 'name,kind[,labels]'");
        const std::string name(trim(fields[0]));
        if (name.empty()) throw std::runtime_error(where + ": empty column name");
        const std::string kind = lower(trim(fields[1]));
        if (kind == "continuous") {
            if (fields.size() > 2) throw std::runtime_error(where + ": unexpected extra field");
            AttributeSchema a;
            a.name = name;
            a.index = static_cast<int>(spec.attributes.size());
            a.kind = AttrKind::Continuous;
            spec.attributes.push_back(std::move(a));
        } else if (kind == "categorical") {
            if (fields.size() != 3)
                throw std::runtime_error(where + ": categorical column needs a 'a|b|...' list");
            AttributeSchema a;
            a.name = name;
            a.index = static_cast<int>(spec.attributes.size());
            a.kind = AttrKind::Categorical;
            a.categories = parse_category_list(trim(fields[2]), where);
            spec.attributes.push_back(std::move(a));
        } else if (kind == "class") {
            if (spec.class_column >= 0)
                throw std::runtime_error(where + ": class column declared twice");
            if (fields.size() > 3) throw std::runtime_error(where + ": unexpected extra field");
            if (fields.size() == 3) spec.class_labels = parse_category_list(trim(fields[2]), where);
            spec.class_column = column;
        } else {
            throw std::runtime_error(where + ": unknown kind '" + kind + "'");
        }
        ++column;
    }
    if (spec.attributes.empty()) throw std::runtime_error("schema declares no attribute columns");
    if (spec.class_column < 0) spec.class_column = column;  // implicit last column
    return spec;
}

SchemaSpec read_schema_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open schema file: " + path);
    return parse_schema(in);
}

Dataset load_csv(std::istream& in, const SchemaSpec& spec, bool has_header) {
    Dataset ds;
    ds.schema = spec.attributes;
    ds.class_labels = spec.class_labels;
    const bool declared_labels = !spec.class_labels.empty();
    std::unordered_map<std::string, int> label_index;
    for (std::size_t i = 0; i < ds.class_labels.size(); ++i)
        label_index[ds.class_labels[i]] = static_cast<int>(i);

    const std::size_t file_columns = spec.attributes.size() + 1;
    std::string raw;
    int line_no = 0;
    bool skipped_header = false;
    while (std::getline(in, raw)) {
        ++line_no;
        if (has_header && !skipped_header) {
            skipped_header = true;
            continue;
        }
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        const auto fields = split(line, ',');
        if (fields.size() != file_columns)
            throw std::runtime_error(where + ": expected " + std::to_string(file_columns) +
                                     " fields, got " + std::to_string(fields.size()));
        std::size_t attr = 0;
        for (std::size_t col = 0; col < fields.size(); ++col) {
            const std::string_view tok = trim(fields[col]);
            if (static_cast<int>(col) == spec.class_column) {
                const std::string label(tok);
                auto it = label_index.find(label);
                if (it == label_index.end()) {
                    if (declared_labels)
                        throw std::runtime_error(where + ": unknown class label '" + label + "'");
                    const int idx = static_cast<int>(ds.class_labels.size());
                    ds.class_labels.push_back(label);
                    it = label_index.emplace(label, idx).first;
                }
                ds.labels.push_back(it->second);
                continue;
            }
            const AttributeSchema& a = spec.attributes[attr++];
            if (a.kind == AttrKind::Continuous) {
                double v = 0.0;
                const char* first = tok.data();
                const char* last = tok.data() + tok.size();
                const auto res = std::from_chars(first, last, v);
                if (res.ec != std::errc{} || res.ptr != last)
                    throw std::runtime_error(where + ": non-numeric value '" + std::string(tok) +
                                             "' in column '" + a.name + "'");
                if (!std::isfinite(v))
                    throw std::runtime_error(where + ": non-finite value in column '" + a.name +
                                             "'");
                ds.values.push_back(v);
            } else {
                const auto it =
                    std::find(a.categories.begin(), a.categories.end(), std::string(tok));
                if (it == a.categories.end())
                    throw std::runtime_error(where + ": unknown category '" + std::string(tok) +
                                             "' in column '" + a.name + "'");
                ds.values.push_back(static_cast<double>(it - a.categories.begin()));
            }
        }
    }
    if (ds.labels.empty()) throw std::runtime_error("no data rows");
    if (ds.class_labels.size() < 2)
        throw std::runtime_error("dataset needs at least 2 classes, found " +
                                 std::to_string(ds.class_labels.size()));
    ds.validate();
    return ds;
}

Dataset load_csv(const std::string& path, const SchemaSpec& spec, bool has_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file: " + path);
    return load_csv(in, spec, has_header);
}

void write_csv(const Dataset& ds, std::ostream& out) {
    char buf[64];
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (std::size_t i = 0; i < ds.attribute_count(); ++i) {
            const double v = ds.value(r, i);
            if (ds.schema[i].kind == AttrKind::Continuous) {
                const auto res = std::to_chars(buf, buf + sizeof(buf), v);
                out.write(buf, res.ptr - buf);
            } else {
                out << ds.schema[i].categories[static_cast<std::size_t>(v)];
            }
            out << ',';
        }
        out << ds.class_labels[ds.labels[r]] << '\n';
    }
}

namespace {

// Portable Fisher-Yates; std::shuffle's draw sequence is not pinned by the
// standard, this one is.
void seeded_shuffle(std::vector<std::uint32_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace

FoldAssignment stratified_folds(const Dataset& ds, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("stratified_folds: fold count must be at least 2");
    const std::size_t m = ds.class_count();
    std::vector<std::vector<std::uint32_t>> by_class(m);
    for (std::size_t r = 0; r < ds.size(); ++r)
        by_class[ds.labels[r]].push_back(static_cast<std::uint32_t>(r));
    for (std::size_t c = 0; c < m; ++c)
        if (by_class[c].size() < static_cast<std::size_t>(k))
            throw std::runtime_error("class '" + ds.class_labels[c] + "' has " +
                                     std::to_string(by_class[c].size()) +
                                     " examples, fewer than " + std::to_string(k) + " folds");
    FoldAssignment fa;
    fa.k = k;
    fa.assignment.assign(ds.size(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t c = 0; c < m; ++c) {
        seeded_shuffle(by_class[c], rng);
        for (std::size_t pos = 0; pos < by_class[c].size(); ++pos)
            fa.assignment[by_class[c][pos]] = static_cast<int>(pos % k);
    }
    return fa;
}

std::pair<Dataset, Dataset> split_by_fold(const Dataset& ds, const FoldAssignment& fa,
                                          int test_fold) {
    if (fa.assignment.size() != ds.size())
        throw std::invalid_argument("split_by_fold: fold assignment does not match dataset");
    if (test_fold < 0 || test_fold >= fa.k)
        throw std::invalid_argument("split_by_fold: test fold out of range");
    Dataset train, test;
    train.schema = test.schema = ds.schema;
    train.class_labels = test.class_labels = ds.class_labels;
    const std::size_t f = ds.attribute_count();
    for (std::size_t r = 0; r < ds.size(); ++r) {
        Dataset& dst = fa.assignment[r] == test_fold ? test : train;
        const auto row = ds.row(r);
        dst.values.insert(dst.values.end(), row.begin(), row.end());
        dst.labels.push_back(ds.labels[r]);
    }
    (void)f;
    return {std::move(train), std::move(test)};
}

void write_folds(const FoldAssignment& fa, std::ostream& out) {
    out << "row_index,fold\n";
    for (std::size_t r = 0; r < fa.assignment.size(); ++r)
        out << r << ',' << fa.assignment[r] << '\n';
}

FoldAssignment read_folds(std::istream& in) {
    FoldAssignment fa;
    std::string raw;
    if (!std::getline(in, raw) || trim(raw) != "row_index,fold")
        throw std::runtime_error("fold file: missing 'row_index,fold' header");
    int max_fold = -1;
    std::size_t expected = 0;
    while (std::getline(in, raw)) {
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 2) throw std::runtime_error("fold file: malformed line '" + raw + "'");
        const std::string idx_s(trim(fields[0])), fold_s(trim(fields[1]));
        std::size_t idx = 0;
        int fold = 0;
        auto r1 = std::from_chars(idx_s.data(), idx_s.data() + idx_s.size(), idx);
        auto r2 = std::from_chars(fold_s.data(), fold_s.data() + fold_s.size(), fold);
        if (r1.ec != std::errc{} || r2.ec != std::errc{} || fold < 0)
            throw std::runtime_error("fold file: malformed line '" + raw + "'");
        if (idx != expected++) throw std::runtime_error("fold file: row indices must be 0,1,2,...");
        fa.assignment.push_back(fold);
        max_fold = std::max(max_fold, fold);
    }
    fa.k = max_fold + 1;
    return fa;
}

}  // namespace fmdt
