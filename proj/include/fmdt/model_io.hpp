#pragma once

#include <string>

#include "json.hpp"

#include "fmdt/metrics.hpp"
#include "fmdt/tree.hpp"

namespace fmdt {

inline constexpr const char* kModelVersion = "fmdt-pit/1";

// Model file layout: {version, schema, class_labels, hyperparameters,
// majority_class, tables, partitions, tree} with tree nodes tagged
// "internal"/"leaf". Numbers round-trip exactly.
nlohmann::json model_to_json(const FMDTModel& model);
FMDTModel model_from_json(const nlohmann::json& j);

void save_model(const FMDTModel& model, const std::string& path);
FMDTModel load_model(const std::string& path);

// Evaluation report as JSON; timing fields are dropped when
// `include_timings` is false so runs can be compared byte for byte.
nlohmann::json report_to_json(const EvaluationReport& report, bool include_timings = true);

}  // namespace fmdt
