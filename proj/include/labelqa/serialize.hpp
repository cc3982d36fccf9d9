#pragma once

// JSON and CSV encodings of the toolkit's outputs. JSON keeps insertion
// order so that identical inputs give identical bytes.

#include <string>

#include <json.hpp>

#include "labelqa/campaign.hpp"
#include "labelqa/detect.hpp"
#include "labelqa/metrics.hpp"

namespace labelqa {

using Json = nlohmann::ordered_json;

/// Shortest decimal that round-trips, '.' as the decimal point.
std::string format_number(double value);

Json to_json(const DetectionConfig& cfg);
DetectionConfig detection_config_from_json(const Json& j);

/// {case_id, per_organ_mm3: {name: value}, total_mm3, components, config}
Json attention_sidecar(const AttentionMap& map, const OrganLabelMap& organs,
                       const DetectionConfig& cfg);

/// Undefined ratios become null.
Json to_json(const Ratio& ratio);

Json to_json(const MetricsReport& report);
/// case_id,organ,sensitivity,precision,tp,fp,fn,dsc; undefined as "undefined".
std::string to_csv(const MetricsReport& report);

std::string to_csv(const DscMatrix& matrix);

Json to_json(const FalsePositiveScan& scan);

Json to_json(const campaign::WorkloadEstimate& estimate);

/// Appends a trailing newline.
std::string dump(const Json& j);

}  // namespace labelqa
