#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "labelqa/volume.hpp"

namespace labelqa {

/// Voxel adjacency: faces (6), faces+edges (18), faces+edges+corners (26).
enum class Connectivity : int { Face = 6, Edge = 18, Vertex = 26 };

inline constexpr Connectivity kDefaultConnectivity = Connectivity::Vertex;

/// Accepts 6, 18 or 26; anything else is a DomainError.
Connectivity connectivity_from_int(int value);

struct Component {
    std::uint32_t id = 0;
    std::uint64_t voxel_count = 0;
    double size_mm3 = 0.0;
    std::array<std::int64_t, 3> bbox_min{};
    std::array<std::int64_t, 3> bbox_max{};
    std::array<double, 3> centroid{};
    /// Linear index of the component's first voxel in x-fastest order.
    std::size_t first_voxel = 0;
};

struct ComponentLabeling {
    Geometry geometry;
    /// 0 for background, otherwise the component id.
    std::vector<std::uint32_t> labels;
    /// Ordered by id; ids ascend with first-voxel linear index, starting at 1.
    std::vector<Component> components;

    std::size_t count() const { return components.size(); }
    /// Binary mask of one component.
    VolumeGrid component_mask(std::uint32_t id) const;
};

/// Labels the maximal connected sets of a binary uint8 mask.
ComponentLabeling connected_components(const VolumeGrid& mask,
                                       Connectivity connectivity = kDefaultConnectivity);

/// Clears components with fewer than `min_voxels` voxels. A threshold of 0 or
/// 1 returns the mask unchanged.
VolumeGrid remove_small_components(const VolumeGrid& mask, std::uint64_t min_voxels,
                                   Connectivity connectivity = kDefaultConnectivity);

}  // namespace labelqa
