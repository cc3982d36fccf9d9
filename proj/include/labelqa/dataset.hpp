#pragma once

// On-disk layout conventions used by the command-line front end.
//
// Model directory: one file per case and organ, <case>_organ<code>.nii[.gz],
// codes contiguous from 1. A manifest.json in the directory overrides this:
//   {"model_id": "unet", "cases": {"<case>": ["a.nii.gz", "b.nii.gz", ...]}}
// with paths relative to the directory, listed in organ-code order.
//
// Label directory: <case>.nii[.gz] holding integer organ codes.
//
// Attention directory: <case>_attention.nii.gz (union),
// <case>_attention_organ<code>.nii.gz and the <case>_attention.json sidecar.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "labelqa/volume.hpp"

namespace labelqa::dataset {

namespace fs = std::filesystem;

struct ModelCaseFiles {
    std::string model_id;
    std::vector<fs::path> channels;
};

struct CaseFiles {
    std::string case_id;
    std::vector<ModelCaseFiles> models;
};

struct ModelDirectory {
    std::string model_id;
    std::map<std::string, std::vector<fs::path>> cases;
};

ModelDirectory scan_model_dir(const fs::path& dir);

/// Cases present in every model directory, sorted by id. A case missing
/// from some model, or a channel count mismatch, is a DomainError.
std::vector<CaseFiles> discover_cases(const std::vector<fs::path>& model_dirs);

PredictionSet load_case(const CaseFiles& files);

/// <case> -> file, for every NIfTI directly inside `dir`.
std::map<std::string, fs::path> scan_label_dir(const fs::path& dir);

LabelVolume load_labels(const fs::path& path, const OrganLabelMap& labels);

std::string attention_union_name(const std::string& case_id);
std::string attention_organ_name(const std::string& case_id, int code);
std::string attention_sidecar_name(const std::string& case_id);

/// Case ids with an attention sidecar in `dir`, sorted.
std::vector<std::string> scan_attention_dir(const fs::path& dir);

}  // namespace labelqa::dataset
