#include "labelqa/components.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

namespace labelqa {

Connectivity connectivity_from_int(int value) {
    switch (value) {
        case 6: return Connectivity::Face;
        case 18: return Connectivity::Edge;
        case 26: return Connectivity::Vertex;
        default:
            throw DomainError("connectivity must be 6, 18 or 26, got " + std::to_string(value));
    }
}

namespace {

struct Offset {
    int dx, dy, dz;
};

// Neighbours that precede a voxel in x-fastest scan order.
std::vector<Offset> backward_neighbours(Connectivity connectivity) {
    const int max_nonzero = connectivity == Connectivity::Face   ? 1
                            : connectivity == Connectivity::Edge ? 2
                                                                 : 3;
    std::vector<Offset> out;
    for (int dz = -1; dz <= 0; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const bool before = dz < 0 || (dz == 0 && dy < 0) || (dz == 0 && dy == 0 && dx < 0);
                if (!before) continue;
                if (std::abs(dx) + std::abs(dy) + std::abs(dz) > max_nonzero) continue;
                out.push_back({dx, dy, dz});
            }
        }
    }
    return out;
}

class DisjointSets {
public:
    std::uint32_t make() {
        parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
        return parent_.back();
    }
    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) {
            parent_[b] = a;
        } else {
            parent_[a] = b;
        }
    }

private:
    std::vector<std::uint32_t> parent_;
};

}  // namespace

VolumeGrid ComponentLabeling::component_mask(std::uint32_t id) const {
    std::vector<std::uint8_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] == id ? 1 : 0;
    return VolumeGrid::from_values(geometry, std::move(out));
}

ComponentLabeling connected_components(const VolumeGrid& mask, Connectivity connectivity) {
    require_binary(mask, "connected_components");
    const auto values = mask.values<std::uint8_t>();
    const Dims d = mask.dims();
    const auto offsets = backward_neighbours(connectivity);

    // First pass: provisional labels (1-based) and equivalences.
    std::vector<std::uint32_t> provisional(values.size(), 0);
    DisjointSets sets;
    sets.make();  // slot 0 = background
    for (std::int64_t z = 0; z < d.z; ++z) {
        for (std::int64_t y = 0; y < d.y; ++y) {
            for (std::int64_t x = 0; x < d.x; ++x) {
                const std::size_t i = d.index(x, y, z);
                if (values[i] == 0) continue;
                std::uint32_t label = 0;
                for (const auto& o : offsets) {
                    const std::int64_t nx = x + o.dx;
                    const std::int64_t ny = y + o.dy;
                    const std::int64_t nz = z + o.dz;
                    if (nx < 0 || ny < 0 || nz < 0 || nx >= d.x || ny >= d.y) continue;
                    const std::uint32_t nl = provisional[d.index(nx, ny, nz)];
                    if (nl == 0) continue;
                    if (label == 0) {
                        label = nl;
                    } else {
                        sets.unite(label, nl);
                    }
                }
                provisional[i] = label != 0 ? label : sets.make();
            }
        }
    }

    // Second pass: resolve and number roots by first appearance.
    ComponentLabeling result;
    result.geometry = mask.geometry();
    result.labels.assign(values.size(), 0);
    std::vector<std::uint32_t> final_id;
    std::vector<std::array<double, 3>> sums;
    const double voxel_volume = mask.spacing().voxel_volume();
    for (std::int64_t z = 0; z < d.z; ++z) {
        for (std::int64_t y = 0; y < d.y; ++y) {
            for (std::int64_t x = 0; x < d.x; ++x) {
                const std::size_t i = d.index(x, y, z);
                if (provisional[i] == 0) continue;
                const std::uint32_t root = sets.find(provisional[i]);
                if (root >= final_id.size()) final_id.resize(root + 1, 0);
                if (final_id[root] == 0) {
                    Component c;
                    c.id = static_cast<std::uint32_t>(result.components.size() + 1);
                    c.first_voxel = i;
                    c.bbox_min = {x, y, z};
                    c.bbox_max = {x, y, z};
                    result.components.push_back(c);
                    sums.push_back({0.0, 0.0, 0.0});
                    final_id[root] = c.id;
                }
                const std::uint32_t id = final_id[root];
                result.labels[i] = id;
                auto& c = result.components[id - 1];
                ++c.voxel_count;
                const std::array<std::int64_t, 3> p{x, y, z};
                for (int a = 0; a < 3; ++a) {
                    c.bbox_min[a] = std::min(c.bbox_min[a], p[a]);
                    c.bbox_max[a] = std::max(c.bbox_max[a], p[a]);
                    sums[id - 1][a] += static_cast<double>(p[a]);
                }
            }
        }
    }
    for (auto& c : result.components) {
        for (int a = 0; a < 3; ++a) {
            c.centroid[a] = sums[c.id - 1][a] / static_cast<double>(c.voxel_count);
        }
        c.size_mm3 = static_cast<double>(c.voxel_count) * voxel_volume;
    }
    return result;
}

VolumeGrid remove_small_components(const VolumeGrid& mask, std::uint64_t min_voxels,
                                   Connectivity connectivity) {
    if (min_voxels <= 1) {
        require_binary(mask, "remove_small_components");
        return mask;
    }
    const auto cc = connected_components(mask, connectivity);
    std::vector<std::uint8_t> keep(cc.count() + 1, 0);
    for (const auto& c : cc.components) keep[c.id] = c.voxel_count >= min_voxels ? 1 : 0;
    std::vector<std::uint8_t> out(cc.labels.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = keep[cc.labels[i]];
    return VolumeGrid::from_values(mask.geometry(), std::move(out));
}

}  // namespace labelqa
