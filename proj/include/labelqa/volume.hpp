#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "labelqa/error.hpp"

namespace labelqa {

enum class ElementKind : std::uint8_t { UInt8, Int16, Float32 };

std::string_view to_string(ElementKind kind);

template <class T>
constexpr ElementKind element_kind_of();
template <>
constexpr ElementKind element_kind_of<std::uint8_t>() { return ElementKind::UInt8; }
template <>
constexpr ElementKind element_kind_of<std::int16_t>() { return ElementKind::Int16; }
template <>
constexpr ElementKind element_kind_of<float>() { return ElementKind::Float32; }

struct Dims {
    std::int64_t x = 1;
    std::int64_t y = 1;
    std::int64_t z = 1;

    std::size_t voxel_count() const { return static_cast<std::size_t>(x * y * z); }
    std::size_t index(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return static_cast<std::size_t>(i + x * (j + y * k));
    }
    bool operator==(const Dims&) const = default;
};

/// Voxel size in mm along each axis.
struct Spacing {
    double x = 1.0;
    double y = 1.0;
    double z = 1.0;

    double voxel_volume() const { return x * y * z; }
    bool operator==(const Spacing&) const = default;
};

/// Row-major 4x4 affine mapping voxel index to physical mm.
using Affine = std::array<double, 16>;

Affine scaled_identity(const Spacing& spacing);

/// Shape, spacing and orientation of a grid. Two grids are aligned iff their
/// geometries compare equal.
struct Geometry {
    Dims dims;
    Spacing spacing;
    Affine affine = scaled_identity(Spacing{});

    static Geometry make(Dims dims, Spacing spacing);
    static Geometry make(Dims dims, Spacing spacing, const Affine& affine);

    std::size_t voxel_count() const { return dims.voxel_count(); }
    bool operator==(const Geometry&) const = default;
};

/// Throws AlignmentError naming `what` when the geometries differ.
void require_aligned(const Geometry& a, const Geometry& b, std::string_view what);

/// Dense 3D scalar field, x-fastest. Immutable once constructed.
class VolumeGrid {
public:
    using Storage =
        std::variant<std::vector<std::uint8_t>, std::vector<std::int16_t>, std::vector<float>>;

    VolumeGrid() = default;

    template <class T>
    static VolumeGrid from_values(const Geometry& geometry, std::vector<T> values) {
        VolumeGrid g;
        g.geometry_ = geometry;
        g.values_ = std::move(values);
        g.validate();
        return g;
    }

    template <class T>
    static VolumeGrid filled(const Geometry& geometry, T value) {
        return from_values(geometry, std::vector<T>(geometry.voxel_count(), value));
    }

    const Geometry& geometry() const { return geometry_; }
    const Dims& dims() const { return geometry_.dims; }
    const Spacing& spacing() const { return geometry_.spacing; }
    const Affine& affine() const { return geometry_.affine; }
    std::size_t size() const { return geometry_.voxel_count(); }
    ElementKind kind() const;

    template <class T>
    bool holds() const {
        return std::holds_alternative<std::vector<T>>(values_);
    }

    /// Typed view of the values; throws DomainError on a kind mismatch.
    template <class T>
    std::span<const T> values() const {
        if (!holds<T>()) throw_kind_mismatch(element_kind_of<T>());
        return std::get<std::vector<T>>(values_);
    }

    /// Value at a linear index widened to double.
    double at(std::size_t index) const;

    bool operator==(const VolumeGrid&) const = default;

private:
    void validate() const;
    [[noreturn]] void throw_kind_mismatch(ElementKind wanted) const;

    Geometry geometry_;
    Storage values_{std::vector<std::uint8_t>{0}};
};

struct OrganLabel {
    int code = 0;
    std::string name;
    bool operator==(const OrganLabel&) const = default;
};

/// Ordered organ codes 1..N. Background is always 0.
class OrganLabelMap {
public:
    /// Spl, RKid, LKid, Gall, Liv, Sto, Aor, IVC, Pan as codes 1..9.
    static OrganLabelMap standard();
    /// Codes 1..count named "organ<code>".
    static OrganLabelMap numbered(int count);
    static OrganLabelMap from_names(std::vector<std::string> names);

    std::span<const OrganLabel> entries() const { return entries_; }
    int size() const { return static_cast<int>(entries_.size()); }
    bool contains(int code) const { return code >= 1 && code <= size(); }
    const std::string& name(int code) const;
    /// Returns 0 when no organ has that name.
    int code_of(std::string_view name) const;

    bool operator==(const OrganLabelMap&) const = default;

private:
    std::vector<OrganLabel> entries_;
};

/// Discrete segmentation: uint8 grid holding 0 or a code of `labels`.
class LabelVolume {
public:
    LabelVolume(VolumeGrid grid, OrganLabelMap labels);

    const VolumeGrid& grid() const { return grid_; }
    const OrganLabelMap& labels() const { return labels_; }
    const Geometry& geometry() const { return grid_.geometry(); }
    std::span<const std::uint8_t> codes() const { return grid_.values<std::uint8_t>(); }

    /// Binary uint8 mask of voxels equal to `code`.
    VolumeGrid organ_mask(int code) const;
    /// Binary uint8 mask of all non-background voxels.
    VolumeGrid foreground_mask() const;

    bool operator==(const LabelVolume&) const = default;

private:
    VolumeGrid grid_;
    OrganLabelMap labels_;
};

/// Converts an integer grid (uint8 or int16) into a LabelVolume, checking
/// that every code is known to `labels`.
LabelVolume to_label_volume(const VolumeGrid& grid, const OrganLabelMap& labels);

/// One model's per-organ probability channels, channel i holding code i+1.
class SoftPrediction {
public:
    SoftPrediction(std::string model_id, std::vector<VolumeGrid> channels);

    const std::string& model_id() const { return model_id_; }
    std::span<const VolumeGrid> channels() const { return channels_; }
    std::size_t channel_count() const { return channels_.size(); }
    const Geometry& geometry() const { return channels_.front().geometry(); }

private:
    std::string model_id_;
    std::vector<VolumeGrid> channels_;
};

/// K grid-aligned soft predictions for one case.
class PredictionSet {
public:
    PredictionSet(std::string case_id, std::vector<SoftPrediction> members);

    const std::string& case_id() const { return case_id_; }
    std::span<const SoftPrediction> members() const { return members_; }
    std::size_t member_count() const { return members_.size(); }
    std::size_t channel_count() const { return members_.front().channel_count(); }
    const Geometry& geometry() const { return members_.front().geometry(); }

private:
    std::string case_id_;
    std::vector<SoftPrediction> members_;
};

/// Checks that all channels are float32 and share one geometry.
void require_aligned_channels(std::span<const VolumeGrid> channels, std::string_view what);

inline constexpr double kDefaultBinarizeThreshold = 0.5;

/// 1 where value >= threshold, else 0. threshold must lie in (0, 1].
VolumeGrid binarize(const VolumeGrid& channel, double threshold = kDefaultBinarizeThreshold);

/// Per-voxel argmax over channels (ties to the lowest code) when the maximum
/// reaches `threshold`, background otherwise.
LabelVolume labels_from_soft(std::span<const VolumeGrid> channels,
                             double threshold = kDefaultBinarizeThreshold);
LabelVolume labels_from_soft(std::span<const VolumeGrid> channels, double threshold,
                             const OrganLabelMap& labels);

/// Number of set voxels in a binary uint8 mask. Throws DomainError otherwise.
std::uint64_t count_set(const VolumeGrid& mask);

/// Set-voxel count times voxel volume, in mm^3.
double physical_volume(const VolumeGrid& mask);
double physical_volume(const VolumeGrid& mask, const Spacing& spacing);

void require_binary(const VolumeGrid& mask, std::string_view what);

// Binary mask algebra on aligned uint8 masks.
VolumeGrid mask_or(const VolumeGrid& a, const VolumeGrid& b);
VolumeGrid mask_and(const VolumeGrid& a, const VolumeGrid& b);
VolumeGrid mask_xor(const VolumeGrid& a, const VolumeGrid& b);
/// a AND NOT b
VolumeGrid mask_andnot(const VolumeGrid& a, const VolumeGrid& b);
std::uint64_t count_intersection(const VolumeGrid& a, const VolumeGrid& b);

/// Smallest float that is >= value, so that `float(v) >= result` agrees with
/// `double(v) >= value` for every float v.
float float_at_or_above(double value);

}  // namespace labelqa
