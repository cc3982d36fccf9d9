#include "labelqa/volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "labelqa/kernels.hpp"

namespace labelqa {

std::string_view to_string(ElementKind kind) {
    switch (kind) {
        case ElementKind::UInt8: return "uint8";
        case ElementKind::Int16: return "int16";
        case ElementKind::Float32: return "float32";
    }
    return "unknown";
}

Affine scaled_identity(const Spacing& s) {
    return {s.x, 0, 0, 0,  //
            0, s.y, 0, 0,  //
            0, 0, s.z, 0,  //
            0, 0, 0, 1};
}

Geometry Geometry::make(Dims dims, Spacing spacing) {
    return make(dims, spacing, scaled_identity(spacing));
}

Geometry Geometry::make(Dims dims, Spacing spacing, const Affine& affine) {
    if (dims.x < 1 || dims.y < 1 || dims.z < 1) {
        throw DomainError("grid dims must be positive");
    }
    for (double s : {spacing.x, spacing.y, spacing.z}) {
        if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("grid spacing must be positive");
    }
    return Geometry{dims, spacing, affine};
}

namespace {

std::string describe(const Geometry& g) {
    std::ostringstream os;
    os << g.dims.x << "x" << g.dims.y << "x" << g.dims.z << " @ " << g.spacing.x << ","
       << g.spacing.y << "," << g.spacing.z << " mm";
    return os.str();
}

}  // namespace

void require_aligned(const Geometry& a, const Geometry& b, std::string_view what) {
    if (a == b) return;
    std::string msg(what);
    msg += ": grids are not aligned (" + describe(a) + " vs " + describe(b);
    if (a.dims == b.dims && a.spacing == b.spacing) msg += ", orientation differs";
    msg += ")";
    throw AlignmentError(msg);
}

ElementKind VolumeGrid::kind() const {
    switch (values_.index()) {
        case 0: return ElementKind::UInt8;
        case 1: return ElementKind::Int16;
        default: return ElementKind::Float32;
    }
}

double VolumeGrid::at(std::size_t index) const {
    return std::visit([index](const auto& v) { return static_cast<double>(v.at(index)); },
                      values_);
}

void VolumeGrid::validate() const {
    const auto& g = geometry_;
    if (g.dims.x < 1 || g.dims.y < 1 || g.dims.z < 1) throw DomainError("grid dims must be positive");
    if (!(g.spacing.voxel_volume() > 0.0)) throw DomainError("grid spacing must be positive");
    const std::size_t n = std::visit([](const auto& v) { return v.size(); }, values_);
    if (n != g.voxel_count()) {
        throw DomainError("grid holds " + std::to_string(n) + " values but dims imply " +
                          std::to_string(g.voxel_count()));
    }
}

void VolumeGrid::throw_kind_mismatch(ElementKind wanted) const {
    throw DomainError("expected " + std::string(to_string(wanted)) + " grid, got " +
                      std::string(to_string(kind())));
}

OrganLabelMap OrganLabelMap::standard() {
    return from_names({"Spl", "RKid", "LKid", "Gall", "Liv", "Sto", "Aor", "IVC", "Pan"});
}

OrganLabelMap OrganLabelMap::numbered(int count) {
    std::vector<std::string> names;
    for (int c = 1; c <= count; ++c) names.push_back("organ" + std::to_string(c));
    return from_names(std::move(names));
}

OrganLabelMap OrganLabelMap::from_names(std::vector<std::string> names) {
    if (names.empty()) throw DomainError("an organ label map needs at least one organ");
    if (names.size() > 255) throw DomainError("at most 255 organ codes are supported");
    OrganLabelMap map;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i].empty()) throw DomainError("organ names must be non-empty");
        if (map.code_of(names[i]) != 0) throw DomainError("duplicate organ name " + names[i]);
        map.entries_.push_back({static_cast<int>(i) + 1, std::move(names[i])});
    }
    return map;
}

const std::string& OrganLabelMap::name(int code) const {
    if (!contains(code)) throw NotFoundError("unknown organ code " + std::to_string(code));
    return entries_[static_cast<std::size_t>(code - 1)].name;
}

int OrganLabelMap::code_of(std::string_view name) const {
    for (const auto& e : entries_) {
        if (e.name == name) return e.code;
    }
    return 0;
}

LabelVolume::LabelVolume(VolumeGrid grid, OrganLabelMap labels)
    : grid_(std::move(grid)), labels_(std::move(labels)) {
    const auto codes = grid_.values<std::uint8_t>();
    const auto max_code = codes.empty() ? 0 : *std::max_element(codes.begin(), codes.end());
    if (max_code > labels_.size()) {
        throw DomainError("label volume holds code " + std::to_string(max_code) +
                          " but only " + std::to_string(labels_.size()) + " organs are defined");
    }
}

VolumeGrid LabelVolume::organ_mask(int code) const {
    if (!labels_.contains(code)) throw NotFoundError("unknown organ code " + std::to_string(code));
    const auto src = codes();
    std::vector<std::uint8_t> out(src.size());
    simd::active().equals_u8(src.data(), src.size(), static_cast<std::uint8_t>(code), out.data());
    return VolumeGrid::from_values(geometry(), std::move(out));
}

VolumeGrid LabelVolume::foreground_mask() const {
    const auto src = codes();
    std::vector<std::uint8_t> out(src.size());
    simd::active().threshold_u8(src.data(), src.size(), 1, out.data());
    return VolumeGrid::from_values(geometry(), std::move(out));
}

LabelVolume to_label_volume(const VolumeGrid& grid, const OrganLabelMap& labels) {
    if (grid.holds<std::uint8_t>()) return LabelVolume(grid, labels);
    std::vector<std::uint8_t> codes(grid.size());
    auto convert = [&](auto values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double v = static_cast<double>(values[i]);
            if (v < 0 || v > labels.size() || v != std::floor(v)) {
                throw DomainError("voxel " + std::to_string(i) + " holds " + std::to_string(v) +
                                  ", which is not a known organ code");
            }
            codes[i] = static_cast<std::uint8_t>(v);
        }
    };
    if (grid.holds<std::int16_t>()) {
        convert(grid.values<std::int16_t>());
    } else {
        convert(grid.values<float>());
    }
    return LabelVolume(VolumeGrid::from_values(grid.geometry(), std::move(codes)), labels);
}

void require_aligned_channels(std::span<const VolumeGrid> channels, std::string_view what) {
    if (channels.empty()) throw DomainError(std::string(what) + ": no channels");
    for (const auto& c : channels) {
        if (!c.holds<float>()) throw DomainError(std::string(what) + ": channels must be float32");
        require_aligned(channels.front().geometry(), c.geometry(), what);
    }
}

SoftPrediction::SoftPrediction(std::string model_id, std::vector<VolumeGrid> channels)
    : model_id_(std::move(model_id)), channels_(std::move(channels)) {
    require_aligned_channels(channels_, "soft prediction '" + model_id_ + "'");
    if (channels_.size() > 255) throw DomainError("at most 255 organ channels are supported");
    for (std::size_t c = 0; c < channels_.size(); ++c) {
        for (float p : channels_[c].values<float>()) {
            if (!(p >= 0.0F && p <= 1.0F)) {
                throw DomainError("soft prediction '" + model_id_ + "' channel " +
                                  std::to_string(c + 1) + " has probability outside [0,1]");
            }
        }
    }
}

PredictionSet::PredictionSet(std::string case_id, std::vector<SoftPrediction> members)
    : case_id_(std::move(case_id)), members_(std::move(members)) {
    if (members_.empty()) throw DomainError("prediction set '" + case_id_ + "' has no members");
    for (const auto& m : members_) {
        require_aligned(members_.front().geometry(), m.geometry(),
                        "prediction set '" + case_id_ + "'");
        if (m.channel_count() != members_.front().channel_count()) {
            throw AlignmentError("prediction set '" + case_id_ +
                                 "': members disagree on channel count");
        }
    }
}

float float_at_or_above(double value) {
    auto f = static_cast<float>(value);
    if (static_cast<double>(f) < value) f = std::nextafter(f, std::numeric_limits<float>::infinity());
    return f;
}

VolumeGrid binarize(const VolumeGrid& channel, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw DomainError("binarize threshold must lie in (0, 1]");
    }
    std::vector<std::uint8_t> out(channel.size());
    if (channel.holds<float>()) {
        const auto src = channel.values<float>();
        simd::active().threshold_f32(src.data(), src.size(), float_at_or_above(threshold),
                                     out.data());
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = channel.at(i) >= threshold ? 1 : 0;
    }
    return VolumeGrid::from_values(channel.geometry(), std::move(out));
}

LabelVolume labels_from_soft(std::span<const VolumeGrid> channels, double threshold) {
    return labels_from_soft(channels, threshold,
                            OrganLabelMap::numbered(static_cast<int>(channels.size())));
}

LabelVolume labels_from_soft(std::span<const VolumeGrid> channels, double threshold,
                             const OrganLabelMap& labels) {
    require_aligned_channels(channels, "labels_from_soft");
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw DomainError("label threshold must lie in (0, 1)");
    }
    if (static_cast<int>(channels.size()) != labels.size()) {
        throw AlignmentError("labels_from_soft: " + std::to_string(channels.size()) +
                             " channels but " + std::to_string(labels.size()) + " organ codes");
    }
    const auto& k = simd::active();
    const std::size_t n = channels.front().size();
    std::vector<float> best(n, -std::numeric_limits<float>::infinity());
    std::vector<std::uint8_t> label(n, 0);
    for (std::size_t c = 0; c < channels.size(); ++c) {
        k.argmax_step(channels[c].values<float>().data(), n, static_cast<std::uint8_t>(c + 1),
                      best.data(), label.data());
    }
    k.argmax_finish(best.data(), n, float_at_or_above(threshold), label.data());
    return LabelVolume(VolumeGrid::from_values(channels.front().geometry(), std::move(label)),
                       labels);
}

void require_binary(const VolumeGrid& mask, std::string_view what) {
    if (!mask.holds<std::uint8_t>()) {
        throw DomainError(std::string(what) + ": mask must be uint8, got " +
                          std::string(to_string(mask.kind())));
    }
    const auto v = mask.values<std::uint8_t>();
    if (simd::active().count_nonbinary_u8(v.data(), v.size()) != 0) {
        throw DomainError(std::string(what) + ": mask is not binary");
    }
}

std::uint64_t count_set(const VolumeGrid& mask) {
    require_binary(mask, "count_set");
    const auto v = mask.values<std::uint8_t>();
    return simd::active().count_nonzero_u8(v.data(), v.size());
}

double physical_volume(const VolumeGrid& mask) { return physical_volume(mask, mask.spacing()); }

double physical_volume(const VolumeGrid& mask, const Spacing& spacing) {
    if (!(spacing.voxel_volume() > 0.0)) throw DomainError("spacing must be positive");
    return static_cast<double>(count_set(mask)) * spacing.voxel_volume();
}

namespace {

using BinaryKernel = void (*)(const std::uint8_t*, const std::uint8_t*, std::size_t,
                              std::uint8_t*);

VolumeGrid combine(const VolumeGrid& a, const VolumeGrid& b, BinaryKernel kernel,
                   std::string_view what) {
    require_aligned(a.geometry(), b.geometry(), what);
    require_binary(a, what);
    require_binary(b, what);
    const auto av = a.values<std::uint8_t>();
    const auto bv = b.values<std::uint8_t>();
    std::vector<std::uint8_t> out(av.size());
    kernel(av.data(), bv.data(), av.size(), out.data());
    return VolumeGrid::from_values(a.geometry(), std::move(out));
}

}  // namespace

VolumeGrid mask_or(const VolumeGrid& a, const VolumeGrid& b) {
    return combine(a, b, simd::active().or_u8, "mask_or");
}
VolumeGrid mask_and(const VolumeGrid& a, const VolumeGrid& b) {
    return combine(a, b, simd::active().and_u8, "mask_and");
}
VolumeGrid mask_xor(const VolumeGrid& a, const VolumeGrid& b) {
    return combine(a, b, simd::active().xor_u8, "mask_xor");
}
VolumeGrid mask_andnot(const VolumeGrid& a, const VolumeGrid& b) {
    return combine(a, b, simd::active().andnot_u8, "mask_andnot");
}

std::uint64_t count_intersection(const VolumeGrid& a, const VolumeGrid& b) {
    require_aligned(a.geometry(), b.geometry(), "count_intersection");
    const auto av = a.values<std::uint8_t>();
    const auto bv = b.values<std::uint8_t>();
    return simd::active().count_both_u8(av.data(), bv.data(), av.size());
}

}  // namespace labelqa
