#pragma once

// NIfTI-1 single-file (.nii / .nii.gz) volumes, little-endian, 3D only.
// Supported datatypes: uint8 (2), int16 (4), float32 (16).

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "labelqa/volume.hpp"

namespace labelqa::nifti {

inline constexpr std::int32_t kHeaderSize = 348;
inline constexpr std::int16_t kDatatypeUInt8 = 2;
inline constexpr std::int16_t kDatatypeInt16 = 4;
inline constexpr std::int16_t kDatatypeFloat32 = 16;

enum class Errc {
    Io,
    Gzip,
    HeaderTooShort,
    BadHeaderSize,
    ByteSwapped,
    BadMagic,
    BadDim,
    UnsupportedDatatype,
    BadBitpix,
    BadPixdim,
    BadVoxOffset,
    Truncated,
    UnsupportedGrid,
};

std::string_view to_string(Errc code);

class NiftiError : public Error {
public:
    NiftiError(Errc code, const std::string& message);
    Errc code() const noexcept { return code_; }
    bool is_io() const noexcept override { return code_ == Errc::Io; }

private:
    Errc code_;
};

struct NiftiHeader {
    std::int32_t sizeof_hdr = kHeaderSize;
    std::array<std::int16_t, 8> dim{};
    std::int16_t datatype = 0;
    std::int16_t bitpix = 0;
    std::array<float, 8> pixdim{};
    float vox_offset = 352.0F;
    float scl_slope = 1.0F;
    float scl_inter = 0.0F;
    std::uint8_t xyzt_units = 0;
    std::int16_t qform_code = 0;
    std::int16_t sform_code = 0;
    std::array<float, 4> srow_x{};
    std::array<float, 4> srow_y{};
    std::array<float, 4> srow_z{};
    std::array<char, 80> descrip{};
    std::array<char, 4> magic{'n', '+', '1', '\0'};

    /// Parses and validates the first 348 bytes.
    static NiftiHeader parse(std::span<const std::uint8_t> bytes);
    /// 348 bytes, little-endian.
    std::array<std::uint8_t, kHeaderSize> serialize() const;

    bool scaling_applies() const;
    std::size_t bytes_per_voxel() const { return static_cast<std::size_t>(bitpix / 8); }
};

struct NiftiImage {
    NiftiHeader header;
    VolumeGrid grid;
    /// True when scl_slope/scl_inter were applied and the grid promoted to float32.
    bool scaled = false;
};

/// Decodes an in-memory file, gzip-wrapped or not (detected from 0x1F 0x8B).
NiftiImage decode(std::span<const std::uint8_t> bytes);
NiftiImage read(const std::filesystem::path& path);
NiftiImage read(std::istream& stream);

VolumeGrid read_volume(const std::filesystem::path& path);
VolumeGrid read_volume(std::istream& stream);
VolumeGrid read_volume(std::span<const std::uint8_t> bytes);

/// Header plus payload, gzip-wrapped when `compress`. Deterministic bytes.
std::vector<std::uint8_t> encode(const VolumeGrid& grid, bool compress);
/// Writes atomically (temporary file then rename).
void write_volume(const VolumeGrid& grid, const std::filesystem::path& path, bool compress);
/// Compression chosen from the extension (.gz).
void write_volume(const VolumeGrid& grid, const std::filesystem::path& path);

bool has_nifti_extension(const std::filesystem::path& path);
/// File name without .nii / .nii.gz.
std::string stem(const std::filesystem::path& path);

}  // namespace labelqa::nifti
