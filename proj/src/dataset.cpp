#include "labelqa/dataset.hpp"

#include <algorithm>
#include <regex>

#include <json.hpp>

#include "labelqa/fileio.hpp"
#include "labelqa/nifti.hpp"

namespace labelqa::dataset {

namespace {

std::vector<fs::path> nifti_files(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && nifti::has_nifti_extension(entry.path())) {
            out.push_back(entry.path());
        }
    }
    if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
    std::sort(out.begin(), out.end());
    return out;
}

ModelDirectory scan_manifest(const fs::path& dir, const fs::path& manifest) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file_text(manifest));
    } catch (const nlohmann::json::parse_error& e) {
        throw DomainError(manifest.string() + ": " + e.what());
    }
    ModelDirectory md;
    md.model_id = j.value("model_id", dir.filename().string());
    try {
        for (const auto& [case_id, files] : j.at("cases").items()) {
            std::vector<fs::path> paths;
            for (const auto& f : files) paths.push_back(dir / f.get<std::string>());
            md.cases[case_id] = std::move(paths);
        }
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(manifest.string() + ": " + e.what());
    }
    return md;
}

}  // namespace

ModelDirectory scan_model_dir(const fs::path& dir) {
    if (const auto manifest = dir / "manifest.json"; fs::exists(manifest)) {
        return scan_manifest(dir, manifest);
    }
    static const std::regex pattern(R"((.+)_organ([0-9]+))");
    ModelDirectory md;
    md.model_id = fs::path(dir).lexically_normal().filename().string();
    if (md.model_id.empty()) md.model_id = fs::path(dir).lexically_normal().parent_path().filename().string();
    std::map<std::string, std::map<int, fs::path>> by_case;
    for (const auto& file : nifti_files(dir)) {
        std::smatch m;
        const std::string stem = nifti::stem(file);
        if (!std::regex_match(stem, m, pattern)) continue;
        const int code = std::stoi(m[2].str());
        auto& slots = by_case[m[1].str()];
        if (!slots.emplace(code, file).second) {
            throw DomainError(dir.string() + ": organ " + std::to_string(code) + " of case '" +
                              m[1].str() + "' appears twice");
        }
    }
    for (auto& [case_id, slots] : by_case) {
        std::vector<fs::path> channels;
        int expected = 1;
        for (auto& [code, path] : slots) {
            if (code != expected) {
                throw DomainError(dir.string() + ": case '" + case_id + "' is missing organ channel " +
                                  std::to_string(expected));
            }
            channels.push_back(path);
            ++expected;
        }
        md.cases[case_id] = std::move(channels);
    }
    return md;
}

std::vector<CaseFiles> discover_cases(const std::vector<fs::path>& model_dirs) {
    if (model_dirs.empty()) throw DomainError("no prediction directories given");
    std::vector<ModelDirectory> models;
    for (const auto& d : model_dirs) models.push_back(scan_model_dir(d));
    for (std::size_t i = 1; i < models.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (models[i].model_id == models[j].model_id) {
                models[i].model_id += "#" + std::to_string(i);
            }
        }
    }
    std::vector<CaseFiles> out;
    for (const auto& [case_id, channels] : models.front().cases) {
        CaseFiles cf;
        cf.case_id = case_id;
        for (const auto& m : models) {
            const auto it = m.cases.find(case_id);
            if (it == m.cases.end()) {
                throw DomainError("case '" + case_id + "' is missing from model '" + m.model_id + "'");
            }
            if (it->second.size() != channels.size()) {
                throw DomainError("case '" + case_id + "': model '" + m.model_id + "' has " +
                                  std::to_string(it->second.size()) + " channels, expected " +
                                  std::to_string(channels.size()));
            }
            cf.models.push_back({m.model_id, it->second});
        }
        out.push_back(std::move(cf));
    }
    for (const auto& m : models) {
        for (const auto& [case_id, channels] : m.cases) {
            if (!models.front().cases.contains(case_id)) {
                throw DomainError("case '" + case_id + "' is missing from model '" +
                                  models.front().model_id + "'");
            }
        }
    }
    return out;
}

PredictionSet load_case(const CaseFiles& files) {
    std::vector<SoftPrediction> members;
    for (const auto& m : files.models) {
        std::vector<VolumeGrid> channels;
        for (const auto& p : m.channels) {
            auto grid = nifti::read_volume(p);
            if (!grid.holds<float>()) {
                throw DomainError(p.string() + ": soft predictions must be float32, got " +
                                  std::string(to_string(grid.kind())));
            }
            channels.push_back(std::move(grid));
        }
        members.emplace_back(m.model_id, std::move(channels));
    }
    return PredictionSet(files.case_id, std::move(members));
}

std::map<std::string, fs::path> scan_label_dir(const fs::path& dir) {
    std::map<std::string, fs::path> out;
    for (const auto& file : nifti_files(dir)) {
        if (!out.emplace(nifti::stem(file), file).second) {
            throw DomainError(dir.string() + ": case '" + nifti::stem(file) + "' appears twice");
        }
    }
    return out;
}

LabelVolume load_labels(const fs::path& path, const OrganLabelMap& labels) {
    try {
        return to_label_volume(nifti::read_volume(path), labels);
    } catch (const DomainError& e) {
        throw DomainError(path.string() + ": " + e.what());
    }
}

std::string attention_union_name(const std::string& case_id) { return case_id + "_attention.nii.gz"; }

std::string attention_organ_name(const std::string& case_id, int code) {
    return case_id + "_attention_organ" + std::to_string(code) + ".nii.gz";
}

std::string attention_sidecar_name(const std::string& case_id) { return case_id + "_attention.json"; }

std::vector<std::string> scan_attention_dir(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
    constexpr std::string_view suffix = "_attention.json";
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > suffix.size() && name.ends_with(suffix)) {
            out.push_back(name.substr(0, name.size() - suffix.size()));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace labelqa::dataset
