#include "labelqa/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <memory>
#include <sstream>

#include "labelqa/ensemble.hpp"
#include "labelqa/fileio.hpp"
#include "labelqa/kernels.hpp"
#include "labelqa/metrics.hpp"
#include "labelqa/parallel.hpp"
#include "labelqa/serialize.hpp"

namespace labelqa::campaign {

std::string_view to_string(Status status) {
    switch (status) {
        case Status::Pending: return "pending";
        case Status::Revised: return "revised";
        case Status::Confirmed: return "confirmed";
    }
    return "unknown";
}

Status status_from_string(std::string_view text) {
    for (Status s : {Status::Pending, Status::Revised, Status::Confirmed}) {
        if (text == to_string(s)) return s;
    }
    throw DomainError("unknown case status '" + std::string(text) + "'");
}

bool is_legal_transition(Status from, Status to) {
    return from == Status::Pending && (to == Status::Revised || to == Status::Confirmed);
}

bool CampaignConfig::operator==(const CampaignConfig& o) const {
    const auto& a = detection;
    const auto& b = o.detection;
    return a.tau_inconsistency == b.tau_inconsistency && a.tau_uncertainty == b.tau_uncertainty &&
           a.binarize_threshold == b.binarize_threshold &&
           a.min_component_voxels == b.min_component_voxels && a.connectivity == b.connectivity &&
           size_threshold_mm3 == o.size_threshold_mm3 && organ_names == o.organ_names;
}

Ranking rank_cases(std::span<const CaseEntry> entries) {
    if (entries.empty()) throw DomainError("rank_cases needs at least one case");
    std::vector<const CaseEntry*> sorted;
    for (const auto& e : entries) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(), [](const CaseEntry* a, const CaseEntry* b) {
        if (a->total_mm3 != b->total_mm3) return a->total_mm3 > b->total_mm3;
        return a->case_id < b->case_id;
    });
    Ranking r;
    for (const auto* e : sorted) {
        r.order.push_back(e->case_id);
        r.sizes_mm3.push_back(e->total_mm3);
    }
    return r;
}

std::vector<std::string> select_for_revision(const Ranking& ranking, double size_threshold_mm3) {
    if (!(size_threshold_mm3 >= 0.0)) throw DomainError("size threshold must be >= 0");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ranking.order.size(); ++i) {
        if (ranking.sizes_mm3[i] > size_threshold_mm3) out.push_back(ranking.order[i]);
    }
    return out;
}

std::optional<std::size_t> knee_cut(std::span<const double> sizes) {
    if (sizes.size() < 2) return std::nullopt;
    std::optional<std::size_t> best;
    double best_ratio = 1.0;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        const double hi = sizes[i];
        const double lo = sizes[i + 1];
        if (!(hi > 0.0)) break;
        const double ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = i + 1;
        }
    }
    return best;
}

WorkloadEstimate estimate_workload(std::uint64_t revision_count, std::uint64_t total_cases,
                                   double minutes_per_case, double hours_per_day) {
    if (total_cases == 0) throw DomainError("total case count must be positive");
    if (revision_count > total_cases) throw DomainError("more revised cases than cases in total");
    if (!(minutes_per_case > 0.0) || !(hours_per_day > 0.0)) {
        throw DomainError("minutes per case and hours per day must be positive");
    }
    WorkloadEstimate e;
    e.cases_needing_revision = revision_count;
    e.total_cases = total_cases;
    e.minutes_per_case = minutes_per_case;
    e.hours_per_day = hours_per_day;
    e.estimated_days = static_cast<double>(revision_count) * minutes_per_case / (60.0 * hours_per_day);
    e.human_fraction = static_cast<double>(revision_count) / static_cast<double>(total_cases);
    e.human_percent = 100.0 * static_cast<double>(revision_count) / static_cast<double>(total_cases);
    return e;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<std::string> CampaignState::ranking() const {
    if (cases.empty()) return {};
    return rank_cases(cases).order;
}

const CaseEntry& CampaignState::find(const std::string& case_id) const {
    for (const auto& c : cases) {
        if (c.case_id == case_id) return c;
    }
    throw NotFoundError("no case '" + case_id + "' in the campaign");
}

CampaignState mark_case(const CampaignState& state, const std::string& case_id, Status new_status,
                        const std::vector<std::string>& tags, const std::string& now) {
    CampaignState next = state;
    auto it = std::find_if(next.cases.begin(), next.cases.end(),
                           [&](const CaseEntry& c) { return c.case_id == case_id; });
    if (it == next.cases.end()) throw NotFoundError("no case '" + case_id + "' in the campaign");
    if (!is_legal_transition(it->status, new_status)) {
        throw IllegalTransition("case '" + case_id + "' cannot go from " +
                                std::string(to_string(it->status)) + " to " +
                                std::string(to_string(new_status)));
    }
    it->status = new_status;
    it->error_tags.insert(it->error_tags.end(), tags.begin(), tags.end());
    it->updated_at = now;
    return next;
}

bool stopping_check(const CampaignState& state) {
    const auto order = state.ranking();
    if (order.empty()) throw DomainError("stopping_check on an empty campaign");
    return state.find(order.front()).status == Status::Confirmed;
}

CampaignState init_state(std::vector<CaseEntry> entries, const CampaignConfig& config,
                         std::int64_t loop_index, const std::string& now) {
    std::sort(entries.begin(), entries.end(),
              [](const CaseEntry& a, const CaseEntry& b) { return a.case_id < b.case_id; });
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].case_id == entries[i - 1].case_id) {
            throw DomainError("duplicate case id '" + entries[i].case_id + "'");
        }
    }
    for (auto& e : entries) {
        if (!(e.total_mm3 >= 0.0)) throw DomainError("case '" + e.case_id + "' has negative size");
        e.status = Status::Pending;
        e.loop_seen = loop_index;
        if (e.created_at.empty()) e.created_at = now;
        e.updated_at = now;
    }
    CampaignState state;
    state.loop_index = loop_index;
    state.config = config;
    state.cases = std::move(entries);
    return state;
}

CampaignState init_state(const std::vector<AttentionMap>& maps, const CampaignConfig& config,
                         std::int64_t loop_index, const std::string& now) {
    std::vector<CaseEntry> entries;
    for (const auto& m : maps) {
        CaseEntry e;
        e.case_id = m.case_id;
        e.organ_mm3 = m.organ_mm3;
        e.total_mm3 = m.total_mm3;
        entries.push_back(std::move(e));
    }
    return init_state(std::move(entries), config, loop_index, now);
}

CampaignState advance_loop(const CampaignState& state, std::vector<CaseEntry> entries,
                           const std::string& now) {
    for (auto& e : entries) {
        for (const auto& old : state.cases) {
            if (old.case_id != e.case_id) continue;
            std::vector<std::string> tags = old.error_tags;
            tags.insert(tags.end(), e.error_tags.begin(), e.error_tags.end());
            e.error_tags = std::move(tags);
            e.created_at = old.created_at;
        }
    }
    return init_state(std::move(entries), state.config, state.loop_index + 1, now);
}

namespace {

Json config_to_json(const CampaignConfig& c) {
    Json j;
    j["detection"] = labelqa::to_json(c.detection);
    j["size_threshold_mm3"] = c.size_threshold_mm3;
    j["organ_names"] = c.organ_names;
    return j;
}

CampaignConfig config_from_json(const Json& j) {
    CampaignConfig c;
    c.detection = detection_config_from_json(j.at("detection"));
    c.size_threshold_mm3 = j.at("size_threshold_mm3").get<double>();
    c.organ_names = j.at("organ_names").get<std::vector<std::string>>();
    return c;
}

}  // namespace

std::string to_json(const CampaignState& state) {
    Json j;
    j["version"] = CampaignState::kVersion;
    j["loop_index"] = state.loop_index;
    j["config"] = config_to_json(state.config);
    Json cases = Json::array();
    for (const auto& c : state.cases) {
        Json e;
        e["case_id"] = c.case_id;
        e["per_organ_mm3"] = c.organ_mm3;
        e["total_mm3"] = c.total_mm3;
        e["status"] = to_string(c.status);
        e["loop_seen"] = c.loop_seen;
        e["error_tags"] = c.error_tags;
        e["created_at"] = c.created_at;
        e["updated_at"] = c.updated_at;
        cases.push_back(e);
    }
    j["cases"] = cases;
    return dump(j);
}

CampaignState state_from_json(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw DomainError(std::string("campaign state is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("version").get<int>() != CampaignState::kVersion) {
            throw DomainError("unsupported campaign state version " + j.at("version").dump());
        }
        CampaignState s;
        s.loop_index = j.at("loop_index").get<std::int64_t>();
        s.config = config_from_json(j.at("config"));
        for (const auto& e : j.at("cases")) {
            CaseEntry c;
            c.case_id = e.at("case_id").get<std::string>();
            c.organ_mm3 = e.at("per_organ_mm3").get<std::vector<double>>();
            c.total_mm3 = e.at("total_mm3").get<double>();
            c.status = status_from_string(e.at("status").get<std::string>());
            c.loop_seen = e.at("loop_seen").get<std::int64_t>();
            c.error_tags = e.at("error_tags").get<std::vector<std::string>>();
            c.created_at = e.at("created_at").get<std::string>();
            c.updated_at = e.at("updated_at").get<std::string>();
            s.cases.push_back(std::move(c));
        }
        return s;
    } catch (const Json::exception& e) {
        throw DomainError(std::string("malformed campaign state: ") + e.what());
    }
}

void save_state(const CampaignState& state, const std::filesystem::path& path) {
    write_file_atomic(path, to_json(state));
}

CampaignState load_state(const std::filesystem::path& path) {
    return state_from_json(read_file_text(path));
}

std::string ranking_csv(const CampaignState& state) {
    std::ostringstream os;
    os << "rank,case_id,total_mm3";
    for (const auto& name : state.config.organ_names) os << ',' << name << "_mm3";
    os << '\n';
    const auto order = state.ranking();
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& c = state.find(order[i]);
        os << (i + 1) << ',' << c.case_id << ',' << format_number(c.total_mm3);
        for (std::size_t k = 0; k < state.config.organ_names.size(); ++k) {
            os << ',' << (k < c.organ_mm3.size() ? format_number(c.organ_mm3[k]) : "");
        }
        os << '\n';
    }
    return os.str();
}

std::string curve_csv(const Ranking& ranking) {
    std::ostringstream os;
    os << "rank,case_id,total_mm3\n";
    for (std::size_t i = 0; i < ranking.order.size(); ++i) {
        os << (i + 1) << ',' << ranking.order[i] << ',' << format_number(ranking.sizes_mm3[i]) << '\n';
    }
    return os.str();
}

LabelVolume simulate_revision(const LabelVolume& pseudo, const LabelVolume& truth,
                              const AttentionMap& attention) {
    require_aligned(pseudo.geometry(), truth.geometry(), "simulate_revision");
    require_aligned(pseudo.geometry(), attention.union_mask.geometry(), "simulate_revision");
    const auto mask = attention.union_mask.values<std::uint8_t>();
    const auto t = truth.codes();
    const auto p = pseudo.codes();
    std::vector<std::uint8_t> out(p.size());
    simd::active().select_u8(mask.data(), t.data(), p.data(), p.size(), out.data());
    const auto& labels = truth.labels().size() >= pseudo.labels().size() ? truth.labels() : pseudo.labels();
    return LabelVolume(VolumeGrid::from_values(pseudo.geometry(), std::move(out)), labels);
}

std::uint64_t count_label_errors(const LabelVolume& a, const LabelVolume& b) {
    require_aligned(a.geometry(), b.geometry(), "count_label_errors");
    const auto av = a.codes();
    const auto bv = b.codes();
    std::vector<std::uint8_t> diff(av.size());
    const auto& k = simd::active();
    k.xor_u8(av.data(), bv.data(), av.size(), diff.data());
    return k.count_nonzero_u8(diff.data(), diff.size());
}

SoftPrediction one_hot(const LabelVolume& labels, const std::string& model_id) {
    std::vector<VolumeGrid> channels;
    const auto codes = labels.codes();
    for (int code = 1; code <= labels.labels().size(); ++code) {
        std::vector<float> p(codes.size());
        for (std::size_t i = 0; i < codes.size(); ++i) p[i] = codes[i] == code ? 1.0F : 0.0F;
        channels.push_back(VolumeGrid::from_values(labels.geometry(), std::move(p)));
    }
    return SoftPrediction(model_id, std::move(channels));
}

PredictionSource supplied_predictions(std::vector<std::vector<PredictionSet>> per_loop) {
    return [per_loop = std::move(per_loop)](std::int64_t loop, const RevisedLabels&) {
        if (loop < 0 || static_cast<std::size_t>(loop) >= per_loop.size()) {
            throw NotFoundError("no predictions supplied for loop " + std::to_string(loop));
        }
        return per_loop[static_cast<std::size_t>(loop)];
    };
}

PredictionSource revised_as_next(std::vector<PredictionSet> initial) {
    auto current = std::make_shared<std::vector<PredictionSet>>(std::move(initial));
    return [current](std::int64_t loop, const RevisedLabels& previous) {
        if (loop == 0) return *current;
        std::vector<PredictionSet> next;
        for (const auto& preds : *current) {
            const auto it = previous.find(preds.case_id());
            if (it == previous.end()) {
                next.push_back(preds);
                continue;
            }
            std::vector<SoftPrediction> members;
            for (const auto& m : preds.members()) members.push_back(one_hot(it->second, m.model_id()));
            next.emplace_back(preds.case_id(), std::move(members));
        }
        *current = next;
        return next;
    };
}

namespace {

struct CaseWork {
    AttentionMap attention;
    std::optional<LabelVolume> pseudo;
};

}  // namespace

CampaignReport run_loop(const PredictionSource& source,
                        const std::map<std::string, LabelVolume>& truths,
                        const CampaignConfig& config, const LoopOptions& options) {
    config.detection.validate();
    if (options.max_loops < 1) throw DomainError("loop budget must be at least 1");
    CampaignReport report;
    report.config = config;
    RevisedLabels revised_last;

    for (std::int64_t loop = 0; loop < options.max_loops; ++loop) {
        auto preds = source(loop, revised_last);
        if (preds.empty()) throw NotFoundError("loop " + std::to_string(loop) + " has no cases");
        std::sort(preds.begin(), preds.end(), [](const PredictionSet& a, const PredictionSet& b) {
            return a.case_id() < b.case_id();
        });

        std::vector<CaseWork> work(preds.size());
        parallel_for(preds.size(), options.jobs, [&](std::size_t i) {
            const auto labels = config.organ_names.empty()
                                    ? default_labels_for(preds[i].channel_count())
                                    : OrganLabelMap::from_names(config.organ_names);
            work[i].attention = build_attention(preds[i], config.detection);
            work[i].pseudo = ensemble_label(preds[i], config.detection.binarize_threshold, labels);
        });

        std::vector<AttentionMap> maps;
        for (const auto& w : work) maps.push_back(w.attention);
        CampaignState state = init_state(maps, config, loop, "");
        const Ranking ranking = rank_cases(state.cases);
        const auto selected = select_for_revision(ranking, config.size_threshold_mm3);

        LoopReport lr;
        lr.loop = loop;
        lr.ranking = ranking.order;
        for (const auto& m : maps) lr.total_attention_mm3 += m.total_mm3;

        // Top case under the threshold: the annotator confirms it.
        if (ranking.sizes_mm3.front() <= config.size_threshold_mm3) {
            state = mark_case(state, ranking.order.front(), Status::Confirmed, {}, "");
        }
        for (const auto& id : selected) state = mark_case(state, id, Status::Revised, {}, "");

        std::vector<CaseLoopRecord> records(preds.size());
        std::vector<std::optional<LabelVolume>> revised(preds.size());
        parallel_for(preds.size(), options.jobs, [&](std::size_t i) {
            const auto& id = preds[i].case_id();
            const auto truth_it = truths.find(id);
            if (truth_it == truths.end()) throw NotFoundError("no truth labels for case '" + id + "'");
            const LabelVolume& truth = truth_it->second;
            const LabelVolume& pseudo = *work[i].pseudo;
            const bool is_revised = state.find(id).status == Status::Revised;
            LabelVolume after = is_revised ? simulate_revision(pseudo, truth, work[i].attention) : pseudo;

            auto& r = records[i];
            r.case_id = id;
            r.total_mm3 = work[i].attention.total_mm3;
            r.revised = is_revised;
            r.dsc_before = mean_organ_dsc(pseudo, truth);
            r.dsc_after = mean_organ_dsc(after, truth);
            r.error_voxels_before = count_label_errors(pseudo, truth);
            r.residual_error_voxels = count_label_errors(after, truth);
            r.residual_error_mm3 =
                static_cast<double>(r.residual_error_voxels) * pseudo.geometry().spacing.voxel_volume();
            if (is_revised) revised[i] = std::move(after);
        });

        revised_last.clear();
        for (std::size_t i = 0; i < preds.size(); ++i) {
            lr.residual_error_mm3 += records[i].residual_error_mm3;
            if (revised[i]) {
                ++lr.revised_count;
                revised_last.emplace(preds[i].case_id(), std::move(*revised[i]));
            }
        }
        lr.cases = std::move(records);
        lr.stop = stopping_check(state);
        report.loops.push_back(std::move(lr));
        if (report.loops.back().stop) {
            report.converged = true;
            break;
        }
    }
    return report;
}

std::string to_json(const CampaignReport& report) {
    Json j;
    j["version"] = 1;
    j["config"] = config_to_json(report.config);
    j["converged"] = report.converged;
    Json loops = Json::array();
    for (const auto& l : report.loops) {
        Json lj;
        lj["loop"] = l.loop;
        lj["total_attention_mm3"] = l.total_attention_mm3;
        lj["revised_count"] = l.revised_count;
        lj["residual_error_mm3"] = l.residual_error_mm3;
        lj["stop"] = l.stop;
        lj["ranking"] = l.ranking;
        Json cases = Json::array();
        for (const auto& c : l.cases) {
            Json cj;
            cj["case_id"] = c.case_id;
            cj["total_mm3"] = c.total_mm3;
            cj["revised"] = c.revised;
            cj["dsc_before"] = c.dsc_before;
            cj["dsc_after"] = c.dsc_after;
            cj["error_voxels_before"] = c.error_voxels_before;
            cj["residual_error_voxels"] = c.residual_error_voxels;
            cj["residual_error_mm3"] = c.residual_error_mm3;
            cases.push_back(cj);
        }
        lj["cases"] = cases;
        loops.push_back(lj);
    }
    j["loops"] = loops;
    return dump(j);
}

}  // namespace labelqa::campaign
