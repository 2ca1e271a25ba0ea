#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fmdt {

enum class AttrKind { Continuous, Categorical };

struct AttributeSchema {
    std::string name;
    int index = 0;
    AttrKind kind = AttrKind::Continuous;
    std::vector<std::string> categories;  // admissible labels, Categorical only
};

// Schema-typed tabular data. Cells are stored as doubles; categorical cells
// hold the position of the label in the schema's category list. A Dataset is
// immutable once built and safe to share across threads.
struct Dataset {
    std::vector<AttributeSchema> schema;
    std::vector<std::string> class_labels;
    std::vector<double> values;  // row-major, size() * attribute_count()
    std::vector<int> labels;     // class index per row

    std::size_t size() const { return labels.size(); }
    std::size_t attribute_count() const { return schema.size(); }
    std::size_t class_count() const { return class_labels.size(); }

    double value(std::size_t row, std::size_t attr) const {
        return values[row * schema.size() + attr];
    }
    int category(std::size_t row, std::size_t attr) const {
        return static_cast<int>(value(row, attr));
    }
    std::span<const double> row(std::size_t r) const {
        return {values.data() + r * schema.size(), schema.size()};
    }
    std::vector<double> column(std::size_t attr) const;

    // Throws std::runtime_error on any invariant violation: non-finite
    // continuous cell, out-of-range category or class index, empty data,
    // fewer than 2 classes, malformed schema.
    void validate() const;
};

// Column declarations parsed from a schema file. One line per column,
// "name,kind[,cat1|cat2|...]" with kind continuous/categorical/class; the
// class line may carry the admissible labels. Files without a class line get
// an implicit class column appended after the declared ones, with labels
// inferred from the data in order of first appearance.
struct SchemaSpec {
    std::vector<AttributeSchema> attributes;  // indexed 0..F-1
    int class_column = 0;                     // file column position of the class
    std::vector<std::string> class_labels;    // empty: infer from data
};

SchemaSpec parse_schema(std::istream& in);
SchemaSpec read_schema_file(const std::string& path);

Dataset load_csv(std::istream& in, const SchemaSpec& spec, bool has_header = false);
Dataset load_csv(const std::string& path, const SchemaSpec& spec, bool has_header = false);

// Writes attributes in schema order followed by the class label, one row per
// line. Continuous cells are printed with enough digits to round-trip.
void write_csv(const Dataset& ds, std::ostream& out);

struct FoldAssignment {
    int k = 0;
    std::vector<int> assignment;  // fold index in 0..k-1 per row
};

// Seeded per-class shuffle followed by round-robin assignment, so per-class
// fold sizes differ by at most one. The result depends only on the label
// sequence, k and seed, never on attribute values.
FoldAssignment stratified_folds(const Dataset& ds, int k, std::uint64_t seed);

// Disjoint, exhaustive split; both halves keep the original row order.
std::pair<Dataset, Dataset> split_by_fold(const Dataset& ds, const FoldAssignment& fa,
                                          int test_fold);

void write_folds(const FoldAssignment& fa, std::ostream& out);
FoldAssignment read_folds(std::istream& in);

}  // namespace fmdt
