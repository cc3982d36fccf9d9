// labelqa: batch front end for attention-map error detection, evaluation and
// annotation campaigns. Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "labelqa/campaign.hpp"
#include "labelqa/dataset.hpp"
#include "labelqa/detect.hpp"
#include "labelqa/ensemble.hpp"
#include "labelqa/fileio.hpp"
#include "labelqa/metrics.hpp"
#include "labelqa/nifti.hpp"
#include "labelqa/parallel.hpp"
#include "labelqa/serialize.hpp"

namespace fs = std::filesystem;
using namespace labelqa;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct DetectFlags {
    double tau_std = 0.1;
    double tau_entropy = 0.5;
    double bin_thresh = kDefaultBinarizeThreshold;
    std::uint64_t min_component = 0;
    int connectivity = 26;

    void add_to(CLI::App* app) {
        app->add_option("--tau-std", tau_std, "standard deviation threshold, (0, 0.5]")->capture_default_str();
        app->add_option("--tau-entropy", tau_entropy, "normalised entropy threshold, (0, 1]")->capture_default_str();
        app->add_option("--bin-thresh", bin_thresh, "organ presence threshold, (0, 1)")->capture_default_str();
        app->add_option("--min-component", min_component, "drop attention components below this many voxels")
            ->capture_default_str();
        app->add_option("--connectivity", connectivity, "6, 18 or 26")->capture_default_str();
    }

    DetectionConfig config() const {
        DetectionConfig cfg;
        cfg.tau_inconsistency = tau_std;
        cfg.tau_uncertainty = tau_entropy;
        cfg.binarize_threshold = bin_thresh;
        cfg.min_component_voxels = min_component;
        cfg.connectivity = connectivity_from_int(connectivity);
        cfg.validate();
        return cfg;
    }
};

OrganLabelMap organ_map(const std::vector<std::string>& names, std::size_t channels) {
    if (names.empty()) return default_labels_for(channels);
    if (names.size() != channels) {
        throw DomainError(std::to_string(names.size()) + " organ names for " + std::to_string(channels) +
                          " channels");
    }
    return OrganLabelMap::from_names(names);
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file_atomic(path, text);
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

Json read_json(const fs::path& path) {
    try {
        return Json::parse(read_file_text(path));
    } catch (const Json::parse_error& e) {
        throw DomainError(path.string() + ": " + e.what());
    }
}

// Binary mask of a label file: one organ code, or every nonzero voxel.
VolumeGrid mask_from_file(const fs::path& path, std::optional<int> organ) {
    const auto grid = nifti::read_volume(path);
    std::vector<std::uint8_t> out(grid.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = grid.at(i);
        out[i] = organ ? (v == *organ ? 1 : 0) : (v != 0.0 ? 1 : 0);
    }
    return VolumeGrid::from_values(grid.geometry(), std::move(out));
}

int max_code(const VolumeGrid& grid) {
    double m = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) m = std::max(m, grid.at(i));
    return static_cast<int>(m);
}

// ---------------------------------------------------------------- detect

struct DetectCmd {
    std::vector<std::string> preds;
    std::string out;
    DetectFlags flags;
    unsigned jobs = 1;
    std::vector<std::string> organ_names;

    int run() const {
        const auto cfg = flags.config();
        if (preds.size() < 2) throw DomainError("detect needs at least two --preds directories");
        const auto cases = dataset::discover_cases({preds.begin(), preds.end()});
        ensure_dir(out);
        std::vector<double> totals(cases.size());
        parallel_for(cases.size(), jobs, [&](std::size_t i) {
            const auto set = dataset::load_case(cases[i]);
            const auto organs = organ_map(organ_names, set.channel_count());
            const auto map = build_attention(set, cfg);
            const fs::path dir(out);
            nifti::write_volume(map.union_mask, dir / dataset::attention_union_name(set.case_id()), true);
            for (const auto& organ : organs.entries()) {
                nifti::write_volume(map.per_organ_masks[static_cast<std::size_t>(organ.code - 1)],
                                    dir / dataset::attention_organ_name(set.case_id(), organ.code), true);
            }
            write_file_atomic(dir / dataset::attention_sidecar_name(set.case_id()),
                              dump(attention_sidecar(map, organs, cfg)));
            totals[i] = map.total_mm3;
        });
        for (std::size_t i = 0; i < cases.size(); ++i) {
            std::cout << cases[i].case_id << '\t' << format_number(totals[i]) << " mm3\n";
        }
        return 0;
    }
};

// ---------------------------------------------------------------- rank

std::vector<campaign::CaseEntry> entries_from_attention(const fs::path& dir, std::vector<std::string>* organ_names,
                                                        DetectionConfig* cfg) {
    std::vector<campaign::CaseEntry> entries;
    const auto ids = dataset::scan_attention_dir(dir);
    if (ids.empty()) throw DomainError("no attention sidecars in " + dir.string());
    for (const auto& id : ids) {
        const auto j = read_json(dir / dataset::attention_sidecar_name(id));
        try {
            campaign::CaseEntry e;
            e.case_id = j.at("case_id").get<std::string>();
            std::vector<std::string> names;
            for (const auto& [name, value] : j.at("per_organ_mm3").items()) {
                names.push_back(name);
                e.organ_mm3.push_back(value.get<double>());
            }
            e.total_mm3 = j.at("total_mm3").get<double>();
            if (organ_names != nullptr) {
                if (organ_names->empty()) *organ_names = names;
                if (*organ_names != names) throw DomainError(id + ": organ set differs from other cases");
            }
            if (cfg != nullptr) *cfg = detection_config_from_json(j.at("config"));
            entries.push_back(std::move(e));
        } catch (const Json::exception& e) {
            throw DomainError(id + ": malformed attention sidecar: " + e.what());
        }
    }
    return entries;
}

struct RankCmd {
    std::string attention;
    std::string out;
    std::string curve;

    int run() const {
        campaign::CampaignConfig cfg;
        auto entries = entries_from_attention(attention, &cfg.organ_names, &cfg.detection);
        const auto state = campaign::init_state(std::move(entries), cfg, 0, "");
        write_text(out, campaign::ranking_csv(state));
        if (!curve.empty()) write_text(curve, campaign::curve_csv(campaign::rank_cases(state.cases)));
        return 0;
    }
};

// ---------------------------------------------------------------- select

campaign::Ranking read_ranking_csv(const fs::path& path) {
    std::istringstream in(read_file_text(path));
    std::string line;
    if (!std::getline(in, line) || line.rfind("rank,case_id,total_mm3", 0) != 0) {
        throw DomainError(path.string() + ": not a ranking CSV");
    }
    std::vector<campaign::CaseEntry> entries;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string rank, id, total;
        std::getline(row, rank, ',');
        std::getline(row, id, ',');
        std::getline(row, total, ',');
        campaign::CaseEntry e;
        e.case_id = id;
        try {
            e.total_mm3 = std::stod(total);
        } catch (const std::exception&) {
            throw DomainError(path.string() + ": bad size '" + total + "' for case " + id);
        }
        entries.push_back(std::move(e));
    }
    return campaign::rank_cases(entries);
}

struct SelectCmd {
    std::string ranking;
    double threshold = 0.0;
    bool knee = false;
    std::string out;

    int run() const {
        const auto r = read_ranking_csv(ranking);
        Json j;
        j["threshold_mm3"] = threshold;
        j["selected"] = campaign::select_for_revision(r, threshold);
        if (knee) {
            const auto cut = campaign::knee_cut(r.sizes_mm3);
            j["knee_cases"] = cut ? Json(*cut) : Json(nullptr);
        }
        if (out.empty()) {
            std::cout << dump(j);
        } else {
            write_text(out, dump(j));
        }
        return 0;
    }
};

// ---------------------------------------------------------------- evaluate

struct EvaluateCmd {
    std::string attention, pseudo, truth, out, csv;
    int connectivity = 26;
    unsigned jobs = 1;

    int run() const {
        const auto conn = connectivity_from_int(connectivity);
        std::vector<std::string> organ_names;
        entries_from_attention(attention, &organ_names, nullptr);
        const auto organs = OrganLabelMap::from_names(organ_names);
        const auto pseudo_files = dataset::scan_label_dir(pseudo);
        const auto truth_files = dataset::scan_label_dir(truth);
        std::vector<std::string> ids;
        for (const auto& [id, _] : truth_files) {
            if (!pseudo_files.contains(id)) throw DomainError("case '" + id + "' has truth but no pseudo labels");
            ids.push_back(id);
        }
        std::vector<std::vector<OrganMetrics>> rows(ids.size());
        parallel_for(ids.size(), jobs, [&](std::size_t i) {
            const auto& id = ids[i];
            std::vector<VolumeGrid> att;
            for (const auto& organ : organs.entries()) {
                att.push_back(nifti::read_volume(fs::path(attention) / dataset::attention_organ_name(id, organ.code)));
            }
            rows[i] = evaluate_case(id, att, dataset::load_labels(pseudo_files.at(id), organs),
                                    dataset::load_labels(truth_files.at(id), organs), conn);
        });
        MetricsReport report;
        report.connectivity = conn;
        for (auto& r : rows) report.rows.insert(report.rows.end(), r.begin(), r.end());
        Json j = to_json(report);
        Json provenance;
        provenance["attention"] = attention;
        provenance["pseudo"] = pseudo;
        provenance["truth"] = truth;
        j["inputs"] = provenance;
        write_text(out, dump(j));
        if (!csv.empty()) write_text(csv, to_csv(report));
        return 0;
    }
};

// ---------------------------------------------------------------- dsc / matrix

struct DscCmd {
    std::string a, b;
    std::optional<int> organ;

    int run() const {
        std::cout << format_number(dsc(mask_from_file(a, organ), mask_from_file(b, organ))) << '\n';
        return 0;
    }
};

struct MatrixCmd {
    std::vector<std::string> inputs;
    int organ = 1;
    std::string out;

    int run() const {
        if (inputs.size() < 2) throw DomainError("matrix needs at least two --inputs");
        std::vector<VolumeGrid> grids;
        int codes = organ;
        for (const auto& p : inputs) {
            grids.push_back(nifti::read_volume(p));
            codes = std::max(codes, max_code(grids.back()));
        }
        const auto labels = OrganLabelMap::numbered(codes);
        std::vector<LabelVolume> volumes;
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < grids.size(); ++i) {
            volumes.push_back(to_label_volume(grids[i], labels));
            ids.push_back(nifti::stem(inputs[i]));
        }
        write_text(out, to_csv(dsc_matrix(volumes, organ, ids)));
        return 0;
    }
};

// ---------------------------------------------------------------- ensemble

struct EnsembleCmd {
    std::vector<std::string> preds;
    std::string out;
    double bin_thresh = kDefaultBinarizeThreshold;
    unsigned jobs = 1;
    std::vector<std::string> organ_names;

    int run() const {
        const auto cases = dataset::discover_cases({preds.begin(), preds.end()});
        ensure_dir(out);
        parallel_for(cases.size(), jobs, [&](std::size_t i) {
            const auto set = dataset::load_case(cases[i]);
            const auto organs = organ_map(organ_names, set.channel_count());
            const auto labels = ensemble_label(set, bin_thresh, organs);
            nifti::write_volume(labels.grid(), fs::path(out) / (set.case_id() + ".nii.gz"), true);
            Json j;
            j["case_id"] = set.case_id();
            Json members = Json::array();
            for (const auto& m : set.members()) members.push_back(m.model_id());
            j["members"] = members;
            Json names = Json::array();
            for (const auto& o : organs.entries()) names.push_back(o.name);
            j["organs"] = names;
            j["config"]["binarize_threshold"] = bin_thresh;
            j["config"]["fusion"] = "unweighted_mean";
            write_file_atomic(fs::path(out) / (set.case_id() + ".json"), dump(j));
        });
        return 0;
    }
};

// ---------------------------------------------------------------- campaign

struct CampaignCmd {
    std::string state;
    std::string attention;
    double threshold = 0.0;
    std::int64_t loop = 0;
    std::string case_id;
    std::string status;
    std::vector<std::string> tags;
    std::string out;

    int init() const {
        const FileLock lock(state);
        if (fs::exists(state)) throw DomainError(state + " already exists");
        campaign::CampaignConfig cfg;
        cfg.size_threshold_mm3 = threshold;
        auto entries = entries_from_attention(attention, &cfg.organ_names, &cfg.detection);
        campaign::save_state(campaign::init_state(std::move(entries), cfg, loop), state);
        return 0;
    }

    int advance() const {
        const FileLock lock(state);
        const auto current = campaign::load_state(state);
        auto entries = entries_from_attention(attention, nullptr, nullptr);
        campaign::save_state(campaign::advance_loop(current, std::move(entries)), state);
        return 0;
    }

    int show() const {
        const auto s = campaign::load_state(state);
        Json j;
        j["loop_index"] = s.loop_index;
        j["size_threshold_mm3"] = s.config.size_threshold_mm3;
        Json ranked = Json::array();
        const auto order = s.ranking();
        const auto ranking = campaign::rank_cases(s.cases);
        const auto selected = campaign::select_for_revision(ranking, s.config.size_threshold_mm3);
        std::size_t counts[3] = {0, 0, 0};
        for (const auto& id : order) {
            const auto& c = s.find(id);
            ++counts[static_cast<int>(c.status)];
            Json row;
            row["case_id"] = id;
            row["total_mm3"] = c.total_mm3;
            row["status"] = campaign::to_string(c.status);
            row["needs_revision"] = std::find(selected.begin(), selected.end(), id) != selected.end();
            row["error_tags"] = c.error_tags;
            ranked.push_back(row);
        }
        j["pending"] = counts[0];
        j["revised"] = counts[1];
        j["confirmed"] = counts[2];
        j["stop"] = order.empty() ? false : campaign::stopping_check(s);
        j["ranking"] = ranked;
        std::cout << dump(j);
        return 0;
    }

    int mark() const {
        const FileLock lock(state);
        const auto current = campaign::load_state(state);
        campaign::save_state(
            campaign::mark_case(current, case_id, campaign::status_from_string(status), tags), state);
        return 0;
    }

    int stop_check() const {
        std::cout << (campaign::stopping_check(campaign::load_state(state)) ? "true" : "false") << '\n';
        return 0;
    }

    int export_ranking() const {
        write_text(out, campaign::ranking_csv(campaign::load_state(state)));
        return 0;
    }
};

// ---------------------------------------------------------------- simulate

struct SimulateCmd {
    std::vector<std::string> preds;
    std::string truth;
    std::string loop_dir;
    std::int64_t loops = 1;
    double threshold = 0.0;
    std::string out;
    DetectFlags flags;
    unsigned jobs = 1;
    std::vector<std::string> organ_names;

    std::vector<PredictionSet> load_all(const std::vector<fs::path>& dirs) const {
        const auto cases = dataset::discover_cases(dirs);
        std::vector<std::optional<PredictionSet>> loaded(cases.size());
        parallel_for(cases.size(), jobs, [&](std::size_t i) { loaded[i] = dataset::load_case(cases[i]); });
        std::vector<PredictionSet> sets;
        for (auto& s : loaded) sets.push_back(std::move(*s));
        return sets;
    }

    int run() const {
        campaign::CampaignConfig cfg;
        cfg.detection = flags.config();
        cfg.size_threshold_mm3 = threshold;
        auto initial = load_all({preds.begin(), preds.end()});
        if (initial.empty()) throw DomainError("no cases found");
        const auto organs = organ_map(organ_names, initial.front().channel_count());
        for (const auto& o : organs.entries()) cfg.organ_names.push_back(o.name);

        std::map<std::string, LabelVolume> truths;
        const auto truth_files = dataset::scan_label_dir(truth);
        for (const auto& set : initial) {
            const auto it = truth_files.find(set.case_id());
            if (it == truth_files.end()) throw DomainError("no truth labels for case '" + set.case_id() + "'");
            truths.emplace(set.case_id(), dataset::load_labels(it->second, organs));
        }

        campaign::PredictionSource source;
        if (loop_dir.empty()) {
            source = campaign::revised_as_next(std::move(initial));
        } else {
            // <loop-dir>/loop<t>/<model>/... for t >= 1; loop 0 from --preds.
            auto first = std::make_shared<std::vector<PredictionSet>>(std::move(initial));
            source = [this, first](std::int64_t t, const campaign::RevisedLabels&) {
                if (t == 0) return *first;
                const fs::path root = fs::path(loop_dir) / ("loop" + std::to_string(t));
                if (!fs::is_directory(root)) {
                    throw IoError("missing predictions for loop " + std::to_string(t) + " in " + root.string());
                }
                std::vector<fs::path> dirs;
                for (const auto& e : fs::directory_iterator(root)) {
                    if (e.is_directory()) dirs.push_back(e.path());
                }
                std::sort(dirs.begin(), dirs.end());
                return load_all(dirs);
            };
        }
        const auto report = campaign::run_loop(source, truths, cfg, {loops, jobs});
        write_text(out, campaign::to_json(report));
        for (const auto& l : report.loops) {
            std::cout << "loop " << l.loop << ": attention " << format_number(l.total_attention_mm3)
                      << " mm3, revised " << l.revised_count << ", residual error "
                      << format_number(l.residual_error_mm3) << " mm3" << (l.stop ? ", stop" : "") << '\n';
        }
        return 0;
    }
};

// ---------------------------------------------------------------- estimate / fpscan

struct EstimateCmd {
    std::uint64_t revised = 0;
    std::uint64_t total = 0;
    double minutes = 15.0;
    double hours = 8.0;

    int run() const {
        std::cout << dump(to_json(campaign::estimate_workload(revised, total, minutes, hours)));
        return 0;
    }
};

struct FpScanCmd {
    std::string preds;
    std::optional<int> organ;
    std::string out;
    int connectivity = 26;
    unsigned jobs = 1;

    int run() const {
        const auto conn = connectivity_from_int(connectivity);
        const auto files = dataset::scan_label_dir(preds);
        std::vector<CaseMask> masks(files.size());
        std::vector<std::pair<std::string, fs::path>> ordered(files.begin(), files.end());
        parallel_for(ordered.size(), jobs, [&](std::size_t i) {
            masks[i] = {ordered[i].first, mask_from_file(ordered[i].second, organ)};
        });
        auto j = to_json(false_positive_scan(masks, conn));
        j["organ"] = organ ? Json(*organ) : Json("any");
        j["connectivity"] = connectivity;
        write_text(out, dump(j));
        std::cout << "flagged " << j["flagged_case_count"] << " of " << j["case_count"] << " cases, "
                  << j["total_component_count"] << " components, FPR "
                  << format_number(j["false_positive_rate_percent"].get<double>()) << "%\n";
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"labelqa: attention maps for label error detection and annotation campaigns"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "labelqa 1.0.0");

    DetectCmd detect;
    auto* detect_app = app.add_subcommand("detect", "build attention maps from per-model soft predictions");
    detect_app->add_option("--preds", detect.preds, "one directory per model")->required()->expected(2, -1);
    detect_app->add_option("--out", detect.out, "output directory")->required();
    detect_app->add_option("--jobs", detect.jobs, "worker threads")->capture_default_str();
    detect_app->add_option("--organ-names", detect.organ_names, "names in channel order")->delimiter(',');
    detect.flags.add_to(detect_app);

    RankCmd rank;
    auto* rank_app = app.add_subcommand("rank", "rank cases by attention size");
    rank_app->add_option("--attention", rank.attention)->required();
    rank_app->add_option("--out", rank.out)->required();
    rank_app->add_option("--curve", rank.curve, "size-vs-rank curve CSV");

    SelectCmd select;
    auto* select_app = app.add_subcommand("select", "cases whose attention exceeds a size threshold");
    select_app->add_option("--ranking", select.ranking)->required();
    select_app->add_option("--threshold-mm3", select.threshold)->required();
    select_app->add_flag("--knee", select.knee, "also report the largest-drop cut");
    select_app->add_option("--out", select.out, "write JSON here instead of stdout");

    EvaluateCmd evaluate;
    auto* evaluate_app = app.add_subcommand("evaluate", "component-wise sensitivity/precision and DSC");
    evaluate_app->add_option("--attention", evaluate.attention)->required();
    evaluate_app->add_option("--pseudo", evaluate.pseudo)->required();
    evaluate_app->add_option("--truth", evaluate.truth)->required();
    evaluate_app->add_option("--out", evaluate.out)->required();
    evaluate_app->add_option("--csv", evaluate.csv, "per (case, organ) CSV");
    evaluate_app->add_option("--connectivity", evaluate.connectivity)->capture_default_str();
    evaluate_app->add_option("--jobs", evaluate.jobs)->capture_default_str();

    DscCmd dsc_cmd;
    auto* dsc_app = app.add_subcommand("dsc", "Dice coefficient of two label files");
    dsc_app->add_option("--a", dsc_cmd.a)->required();
    dsc_app->add_option("--b", dsc_cmd.b)->required();
    dsc_app->add_option("--organ", dsc_cmd.organ, "organ code (default: any foreground)");

    MatrixCmd matrix;
    auto* matrix_app = app.add_subcommand("matrix", "pairwise DSC matrix for one organ");
    matrix_app->add_option("--inputs", matrix.inputs)->required()->expected(2, -1);
    matrix_app->add_option("--organ", matrix.organ)->required();
    matrix_app->add_option("--out", matrix.out)->required();

    EnsembleCmd ensemble;
    auto* ensemble_app = app.add_subcommand("ensemble", "final labels from the mean of model predictions");
    ensemble_app->add_option("--preds", ensemble.preds)->required()->expected(1, -1);
    ensemble_app->add_option("--out", ensemble.out)->required();
    ensemble_app->add_option("--bin-thresh", ensemble.bin_thresh)->capture_default_str();
    ensemble_app->add_option("--jobs", ensemble.jobs)->capture_default_str();
    ensemble_app->add_option("--organ-names", ensemble.organ_names)->delimiter(',');

    CampaignCmd camp;
    auto* camp_app = app.add_subcommand("campaign", "annotation campaign state");
    camp_app->require_subcommand(1);
    auto* camp_init = camp_app->add_subcommand("init", "create a campaign from attention sidecars");
    camp_init->add_option("--state", camp.state)->required();
    camp_init->add_option("--attention", camp.attention)->required();
    camp_init->add_option("--threshold-mm3", camp.threshold)->capture_default_str();
    camp_init->add_option("--loop", camp.loop)->capture_default_str();
    auto* camp_advance = camp_app->add_subcommand("advance", "start the next loop from refreshed attention");
    camp_advance->add_option("--state", camp.state)->required();
    camp_advance->add_option("--attention", camp.attention)->required();
    auto* camp_status = camp_app->add_subcommand("status", "ranked cases and their statuses");
    camp_status->add_option("--state", camp.state)->required();
    auto* camp_mark = camp_app->add_subcommand("mark", "record a revision or confirmation");
    camp_mark->add_option("--state", camp.state)->required();
    camp_mark->add_option("--case", camp.case_id)->required();
    camp_mark->add_option("--status", camp.status, "revised or confirmed")->required();
    camp_mark->add_option("--tag", camp.tags, "error taxonomy note (repeatable)");
    auto* camp_stop = camp_app->add_subcommand("stop-check", "true when the top-ranked case is confirmed");
    camp_stop->add_option("--state", camp.state)->required();
    auto* camp_rank = camp_app->add_subcommand("ranking", "export the ranking CSV");
    camp_rank->add_option("--state", camp.state)->required();
    camp_rank->add_option("--out", camp.out)->required();

    SimulateCmd simulate;
    auto* simulate_app = app.add_subcommand("simulate", "run the campaign with an oracle annotator");
    simulate_app->add_option("--preds", simulate.preds)->required()->expected(2, -1);
    simulate_app->add_option("--truth", simulate.truth)->required();
    simulate_app->add_option("--loops", simulate.loops)->capture_default_str();
    simulate_app->add_option("--out", simulate.out)->required();
    simulate_app->add_option("--threshold-mm3", simulate.threshold)->capture_default_str();
    simulate_app->add_option("--loop-dir", simulate.loop_dir, "refreshed predictions as <dir>/loop<t>/<model>/");
    simulate_app->add_option("--jobs", simulate.jobs)->capture_default_str();
    simulate_app->add_option("--organ-names", simulate.organ_names)->delimiter(',');
    simulate.flags.add_to(simulate_app);

    EstimateCmd estimate;
    auto* estimate_app = app.add_subcommand("estimate", "annotation workload for a number of revisions");
    estimate_app->add_option("--revised", estimate.revised)->required();
    estimate_app->add_option("--total", estimate.total)->required();
    estimate_app->add_option("--minutes", estimate.minutes)->capture_default_str();
    estimate_app->add_option("--hours", estimate.hours)->capture_default_str();

    FpScanCmd fpscan;
    auto* fpscan_app = app.add_subcommand("fpscan", "false positives on target-free cases");
    fpscan_app->add_option("--preds", fpscan.preds)->required();
    fpscan_app->add_option("--organ", fpscan.organ, "organ code (default: any foreground)");
    fpscan_app->add_option("--out", fpscan.out)->required();
    fpscan_app->add_option("--connectivity", fpscan.connectivity)->capture_default_str();
    fpscan_app->add_option("--jobs", fpscan.jobs)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (detect_app->parsed()) return detect.run();
        if (rank_app->parsed()) return rank.run();
        if (select_app->parsed()) return select.run();
        if (evaluate_app->parsed()) return evaluate.run();
        if (dsc_app->parsed()) return dsc_cmd.run();
        if (matrix_app->parsed()) return matrix.run();
        if (ensemble_app->parsed()) return ensemble.run();
        if (camp_init->parsed()) return camp.init();
        if (camp_advance->parsed()) return camp.advance();
        if (camp_status->parsed()) return camp.show();
        if (camp_mark->parsed()) return camp.mark();
        if (camp_stop->parsed()) return camp.stop_check();
        if (camp_rank->parsed()) return camp.export_ranking();
        if (simulate_app->parsed()) return simulate.run();
        if (estimate_app->parsed()) return estimate.run();
        if (fpscan_app->parsed()) return fpscan.run();
    } catch (const labelqa::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.is_io() ? kExitIo : kExitValidation;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}
