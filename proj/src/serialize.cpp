#include "labelqa/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace labelqa {

std::string format_number(double value) {
    if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

Json to_json(const DetectionConfig& cfg) {
    Json j;
    j["tau_inconsistency"] = cfg.tau_inconsistency;
    j["tau_uncertainty"] = cfg.tau_uncertainty;
    j["binarize_threshold"] = cfg.binarize_threshold;
    j["min_component_voxels"] = cfg.min_component_voxels;
    j["connectivity"] = static_cast<int>(cfg.connectivity);
    return j;
}

DetectionConfig detection_config_from_json(const Json& j) {
    DetectionConfig cfg;
    cfg.tau_inconsistency = j.at("tau_inconsistency").get<double>();
    cfg.tau_uncertainty = j.at("tau_uncertainty").get<double>();
    cfg.binarize_threshold = j.at("binarize_threshold").get<double>();
    cfg.min_component_voxels = j.at("min_component_voxels").get<std::uint64_t>();
    cfg.connectivity = connectivity_from_int(j.at("connectivity").get<int>());
    cfg.validate();
    return cfg;
}

Json attention_sidecar(const AttentionMap& map, const OrganLabelMap& organs,
                       const DetectionConfig& cfg) {
    Json j;
    j["case_id"] = map.case_id;
    Json per_organ = Json::object();
    for (const auto& organ : organs.entries()) {
        per_organ[organ.name] = map.organ_mm3.at(static_cast<std::size_t>(organ.code - 1));
    }
    j["per_organ_mm3"] = per_organ;
    j["total_mm3"] = map.total_mm3;
    j["components"] = map.components.size();
    j["config"] = to_json(cfg);
    return j;
}

Json to_json(const Ratio& ratio) { return ratio ? Json(*ratio) : Json(nullptr); }

Json to_json(const MetricsReport& report) {
    Json j;
    j["connectivity"] = static_cast<int>(report.connectivity);
    j["dsc_both_empty"] = 1.0;
    Json rows = Json::array();
    std::vector<std::string> organ_order;
    for (const auto& r : report.rows) {
        Json row;
        row["case_id"] = r.case_id;
        row["organ"] = r.organ;
        row["sensitivity"] = to_json(r.component.sensitivity);
        row["precision"] = to_json(r.component.precision);
        row["tp"] = r.component.counts.tp;
        row["fp"] = r.component.counts.fp;
        row["fn"] = r.component.counts.fn;
        row["dsc"] = r.dsc;
        rows.push_back(row);
        if (std::find(organ_order.begin(), organ_order.end(), r.organ) == organ_order.end()) {
            organ_order.push_back(r.organ);
        }
    }
    Json summary = Json::object();
    for (const auto& organ : organ_order) {
        Json s;
        s["mean_sensitivity"] = to_json(report.mean_sensitivity(organ));
        s["mean_precision"] = to_json(report.mean_precision(organ));
        summary[organ] = s;
    }
    j["per_organ_mean"] = summary;
    j["rows"] = rows;
    return j;
}

namespace {

std::string csv_ratio(const Ratio& r) { return r ? format_number(*r) : "undefined"; }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string to_csv(const MetricsReport& report) {
    std::ostringstream os;
    os << "case_id,organ,sensitivity,precision,tp,fp,fn,dsc\n";
    for (const auto& r : report.rows) {
        os << csv_field(r.case_id) << ',' << csv_field(r.organ) << ','
           << csv_ratio(r.component.sensitivity) << ',' << csv_ratio(r.component.precision) << ','
           << r.component.counts.tp << ',' << r.component.counts.fp << ',' << r.component.counts.fn
           << ',' << format_number(r.dsc) << '\n';
    }
    return os.str();
}

std::string to_csv(const DscMatrix& matrix) {
    std::ostringstream os;
    os << "id";
    for (const auto& id : matrix.ids) os << ',' << csv_field(id);
    os << '\n';
    for (std::size_t i = 0; i < matrix.ids.size(); ++i) {
        os << csv_field(matrix.ids[i]);
        for (std::size_t k = 0; k < matrix.ids.size(); ++k) os << ',' << format_number(matrix.at(i, k));
        os << '\n';
    }
    return os.str();
}

Json to_json(const FalsePositiveScan& scan) {
    Json j;
    j["case_count"] = scan.case_count;
    j["flagged_case_count"] = scan.flagged_case_count;
    j["total_component_count"] = scan.total_component_count;
    j["false_positive_rate"] = scan.false_positive_rate;
    j["false_positive_rate_percent"] =
        100.0 * static_cast<double>(scan.flagged_case_count) / static_cast<double>(scan.case_count);
    Json cases = Json::array();
    for (const auto& c : scan.cases) {
        Json row;
        row["case_id"] = c.case_id;
        row["flagged"] = c.flagged;
        row["components"] = c.components;
        row["voxels"] = c.voxels;
        row["size_mm3"] = c.size_mm3;
        cases.push_back(row);
    }
    j["cases"] = cases;
    return j;
}

Json to_json(const campaign::WorkloadEstimate& e) {
    Json j;
    j["cases_needing_revision"] = e.cases_needing_revision;
    j["total_cases"] = e.total_cases;
    j["minutes_per_case"] = e.minutes_per_case;
    j["hours_per_day"] = e.hours_per_day;
    j["estimated_days"] = e.estimated_days;
    j["human_fraction"] = e.human_fraction;
    j["human_percent"] = e.human_percent;
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace labelqa
