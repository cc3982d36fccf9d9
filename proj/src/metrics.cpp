#include "labelqa/metrics.hpp"

#include <algorithm>

namespace labelqa {

VolumeGrid error_region(const VolumeGrid& pseudo, const VolumeGrid& truth) {
    require_aligned(pseudo.geometry(), truth.geometry(), "error_region");
    require_binary(pseudo, "error_region pseudo");
    require_binary(truth, "error_region truth");
    return mask_xor(pseudo, truth);
}

namespace {

// For each component of `labels`, whether any of its voxels is set in `other`.
std::vector<bool> touches(const ComponentLabeling& labels, std::span<const std::uint8_t> other) {
    std::vector<bool> hit(labels.count() + 1, false);
    for (std::size_t i = 0; i < other.size(); ++i) {
        if (other[i] != 0 && labels.labels[i] != 0) hit[labels.labels[i]] = true;
    }
    return hit;
}

}  // namespace

ComponentMetrics componentwise_metrics(const VolumeGrid& attention,
                                       const VolumeGrid& benchmark_error,
                                       Connectivity connectivity) {
    require_aligned(attention.geometry(), benchmark_error.geometry(), "componentwise_metrics");
    const auto att_cc = connected_components(attention, connectivity);
    const auto err_cc = connected_components(benchmark_error, connectivity);

    const auto err_hit = touches(err_cc, attention.values<std::uint8_t>());
    const auto att_hit = touches(att_cc, benchmark_error.values<std::uint8_t>());

    ComponentMetrics m;
    m.attention_components = att_cc.count();
    m.error_components = err_cc.count();
    for (const auto& c : err_cc.components) {
        if (err_hit[c.id]) {
            ++m.counts.tp;
        } else {
            ++m.counts.fn;
        }
    }
    std::uint64_t attention_true = 0;
    for (const auto& c : att_cc.components) {
        if (att_hit[c.id]) {
            ++attention_true;
        } else {
            ++m.counts.fp;
        }
    }
    if (m.counts.tp + m.counts.fn > 0) {
        m.sensitivity = static_cast<double>(m.counts.tp) / static_cast<double>(m.counts.tp + m.counts.fn);
    }
    if (m.attention_components > 0) {
        m.precision = static_cast<double>(attention_true) / static_cast<double>(m.attention_components);
    }
    return m;
}

double dsc(const VolumeGrid& a, const VolumeGrid& b) {
    require_aligned(a.geometry(), b.geometry(), "dsc");
    const auto na = count_set(a);
    const auto nb = count_set(b);
    if (na + nb == 0) return 1.0;
    const auto both = count_intersection(a, b);
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

double mean_organ_dsc(const LabelVolume& a, const LabelVolume& b) {
    require_aligned(a.geometry(), b.geometry(), "mean_organ_dsc");
    const int organs = std::max(a.labels().size(), b.labels().size());
    double sum = 0.0;
    int present = 0;
    for (int code = 1; code <= organs; ++code) {
        const auto ma = a.labels().contains(code) ? a.organ_mask(code)
                                                  : VolumeGrid::filled<std::uint8_t>(a.geometry(), 0);
        const auto mb = b.labels().contains(code) ? b.organ_mask(code)
                                                  : VolumeGrid::filled<std::uint8_t>(b.geometry(), 0);
        if (count_set(ma) + count_set(mb) == 0) continue;
        sum += dsc(ma, mb);
        ++present;
    }
    return present == 0 ? 1.0 : sum / present;
}

DscMatrix dsc_matrix(std::span<const LabelVolume> labelings, int organ_code,
                     std::vector<std::string> ids) {
    if (labelings.size() < 2) throw DomainError("dsc_matrix needs at least two labelings");
    if (ids.empty()) {
        for (std::size_t i = 0; i < labelings.size(); ++i) ids.push_back("L" + std::to_string(i));
    }
    if (ids.size() != labelings.size()) throw DomainError("dsc_matrix: one id per labeling");
    std::vector<VolumeGrid> masks;
    for (const auto& l : labelings) {
        require_aligned(labelings.front().geometry(), l.geometry(), "dsc_matrix");
        masks.push_back(l.organ_mask(organ_code));
    }
    const std::size_t m = masks.size();
    DscMatrix out{std::move(ids), std::vector<double>(m * m, 1.0)};
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double v = dsc(masks[i], masks[j]);
            out.values[i * m + j] = v;
            out.values[j * m + i] = v;
        }
    }
    return out;
}

FalsePositiveScan false_positive_scan(std::span<const CaseMask> pred_masks,
                                      Connectivity connectivity) {
    if (pred_masks.empty()) throw DomainError("false_positive_scan needs at least one case");
    FalsePositiveScan scan;
    scan.case_count = pred_masks.size();
    for (const auto& c : pred_masks) {
        FalsePositiveCase detail;
        detail.case_id = c.case_id;
        detail.voxels = count_set(c.mask);
        detail.flagged = detail.voxels > 0;
        if (detail.flagged) {
            detail.components = connected_components(c.mask, connectivity).count();
            detail.size_mm3 = physical_volume(c.mask);
            ++scan.flagged_case_count;
            scan.total_component_count += detail.components;
        }
        scan.cases.push_back(std::move(detail));
    }
    scan.false_positive_rate =
        static_cast<double>(scan.flagged_case_count) / static_cast<double>(scan.case_count);
    return scan;
}

namespace {

template <class Field>
Ratio mean_defined(const std::vector<OrganMetrics>& rows, const std::string& organ, Field field) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rows) {
        if (r.organ != organ) continue;
        if (const Ratio v = field(r.component)) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

}  // namespace

Ratio MetricsReport::mean_sensitivity(const std::string& organ) const {
    return mean_defined(rows, organ, [](const ComponentMetrics& m) { return m.sensitivity; });
}

Ratio MetricsReport::mean_precision(const std::string& organ) const {
    return mean_defined(rows, organ, [](const ComponentMetrics& m) { return m.precision; });
}

std::vector<OrganMetrics> evaluate_case(const std::string& case_id,
                                        std::span<const VolumeGrid> organ_attention,
                                        const LabelVolume& pseudo, const LabelVolume& truth,
                                        Connectivity connectivity) {
    require_aligned(pseudo.geometry(), truth.geometry(), "evaluate_case '" + case_id + "'");
    if (static_cast<int>(organ_attention.size()) != pseudo.labels().size()) {
        throw AlignmentError("evaluate_case '" + case_id + "': " +
                             std::to_string(organ_attention.size()) + " attention masks for " +
                             std::to_string(pseudo.labels().size()) + " organs");
    }
    std::vector<OrganMetrics> rows;
    for (const auto& organ : pseudo.labels().entries()) {
        const auto p = pseudo.organ_mask(organ.code);
        const auto t = truth.organ_mask(organ.code);
        const auto& att = organ_attention[static_cast<std::size_t>(organ.code - 1)];
        require_aligned(att.geometry(), p.geometry(), "evaluate_case '" + case_id + "'");
        OrganMetrics row;
        row.case_id = case_id;
        row.organ = organ.name;
        row.component = componentwise_metrics(att, error_region(p, t), connectivity);
        row.dsc = dsc(p, t);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace labelqa
