#include "labelqa/nifti.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <iterator>

#include "labelqa/fileio.hpp"

namespace labelqa::nifti {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "NIfTI codec assumes a little-endian host");

std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::Io: return "io";
        case Errc::Gzip: return "gzip";
        case Errc::HeaderTooShort: return "header_too_short";
        case Errc::BadHeaderSize: return "sizeof_hdr";
        case Errc::ByteSwapped: return "byte_swapped";
        case Errc::BadMagic: return "magic";
        case Errc::BadDim: return "dim";
        case Errc::UnsupportedDatatype: return "datatype";
        case Errc::BadBitpix: return "bitpix";
        case Errc::BadPixdim: return "pixdim";
        case Errc::BadVoxOffset: return "vox_offset";
        case Errc::Truncated: return "truncated";
        case Errc::UnsupportedGrid: return "unsupported_grid";
    }
    return "unknown";
}

NiftiError::NiftiError(Errc code, const std::string& message)
    : Error("nifti " + std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {

// Header field offsets.
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffSclInter = 116;
constexpr std::size_t kOffXyztUnits = 123;
constexpr std::size_t kOffDescrip = 148;
constexpr std::size_t kOffQformCode = 252;
constexpr std::size_t kOffSformCode = 254;
constexpr std::size_t kOffSrowX = 280;
constexpr std::size_t kOffSrowY = 296;
constexpr std::size_t kOffSrowZ = 312;
constexpr std::size_t kOffMagic = 344;
constexpr std::size_t kWrittenVoxOffset = 352;
constexpr std::uint8_t kUnitsMm = 2;

template <class T>
T get(std::span<const std::uint8_t> b, std::size_t off) {
    T v;
    std::memcpy(&v, b.data() + off, sizeof v);
    return v;
}

template <class T>
void put(std::span<std::uint8_t> b, std::size_t off, T v) {
    std::memcpy(b.data() + off, &v, sizeof v);
}

bool is_gzip(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 2 && bytes[0] == 0x1F && bytes[1] == 0x8B;
}

// Inflates at most `limit` bytes from a gzip stream (concatenated members
// allowed). The output grows with what actually decompresses, never with
// what a header claims.
std::vector<std::uint8_t> inflate_prefix(std::span<const std::uint8_t> in, std::size_t limit) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK) throw NiftiError(Errc::Gzip, "inflateInit2 failed");
    std::vector<std::uint8_t> out;
    constexpr std::size_t kChunk = 1 << 16;
    zs.next_in = const_cast<Bytef*>(in.data());
    std::size_t remaining_in = in.size();
    int rc = Z_OK;
    while (out.size() < limit) {
        if (zs.avail_in == 0) {
            const auto take = static_cast<uInt>(std::min<std::size_t>(remaining_in, 1U << 30));
            zs.avail_in = take;
            remaining_in -= take;
        }
        const std::size_t before = out.size();
        const std::size_t grow = std::min(kChunk, limit - before);
        out.resize(before + grow);
        zs.next_out = out.data() + before;
        zs.avail_out = static_cast<uInt>(grow);
        rc = inflate(&zs, Z_NO_FLUSH);
        out.resize(before + (grow - zs.avail_out));
        if (rc == Z_STREAM_END) {
            if (zs.avail_in == 0 && remaining_in == 0) break;
            // Another gzip member follows.
            if (inflateReset(&zs) != Z_OK) break;
            continue;
        }
        if (rc == Z_BUF_ERROR && zs.avail_in == 0 && remaining_in == 0) break;
        if (rc != Z_OK) {
            const std::string msg = zs.msg != nullptr ? zs.msg : "corrupt stream";
            inflateEnd(&zs);
            throw NiftiError(Errc::Gzip, msg);
        }
    }
    inflateEnd(&zs);
    return out;
}

std::vector<std::uint8_t> deflate_gzip(std::span<const std::uint8_t> in) {
    z_stream zs{};
    if (deflateInit2(&zs, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        throw NiftiError(Errc::Gzip, "deflateInit2 failed");
    }
    std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(in.size())) + 32);
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    out.resize(zs.total_out);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw NiftiError(Errc::Gzip, "deflate did not finish");
    return out;
}

std::int16_t datatype_for(ElementKind kind) {
    switch (kind) {
        case ElementKind::UInt8: return kDatatypeUInt8;
        case ElementKind::Int16: return kDatatypeInt16;
        case ElementKind::Float32: return kDatatypeFloat32;
    }
    return 0;
}

template <class T>
std::vector<T> copy_payload(std::span<const std::uint8_t> payload, std::size_t n) {
    std::vector<T> v(n);
    std::memcpy(v.data(), payload.data(), n * sizeof(T));
    return v;
}

template <class T>
std::vector<float> scale_payload(std::span<const std::uint8_t> payload, std::size_t n, float slope,
                                 float inter) {
    const auto raw = copy_payload<T>(payload, n);
    std::vector<float> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<float>(raw[i]) * slope + inter;
    return v;
}

}  // namespace

NiftiHeader NiftiHeader::parse(std::span<const std::uint8_t> b) {
    if (b.size() < static_cast<std::size_t>(kHeaderSize)) {
        throw NiftiError(Errc::HeaderTooShort,
                         "need 348 header bytes, have " + std::to_string(b.size()));
    }
    NiftiHeader h;
    h.sizeof_hdr = get<std::int32_t>(b, 0);
    if (h.sizeof_hdr != kHeaderSize) {
        if (__builtin_bswap32(static_cast<std::uint32_t>(h.sizeof_hdr)) == static_cast<std::uint32_t>(kHeaderSize)) {
            throw NiftiError(Errc::ByteSwapped, "big-endian files are not supported");
        }
        throw NiftiError(Errc::BadHeaderSize,
                         "sizeof_hdr is " + std::to_string(h.sizeof_hdr) + ", expected 348");
    }
    std::memcpy(h.magic.data(), b.data() + kOffMagic, 4);
    if (std::memcmp(h.magic.data(), "n+1\0", 4) != 0) {
        const bool pair = std::memcmp(h.magic.data(), "ni1\0", 4) == 0;
        throw NiftiError(Errc::BadMagic, pair ? "header/image pairs (ni1) are not supported"
                                              : "magic is not \"n+1\"");
    }
    for (std::size_t i = 0; i < 8; ++i) h.dim[i] = get<std::int16_t>(b, kOffDim + 2 * i);
    if (h.dim[0] != 3) {
        throw NiftiError(Errc::BadDim, "dim[0] is " + std::to_string(h.dim[0]) + ", expected 3");
    }
    for (std::size_t i = 1; i <= 3; ++i) {
        if (h.dim[i] < 1) {
            throw NiftiError(Errc::BadDim, "dim[" + std::to_string(i) + "] is " + std::to_string(h.dim[i]));
        }
    }
    h.datatype = get<std::int16_t>(b, kOffDatatype);
    h.bitpix = get<std::int16_t>(b, kOffBitpix);
    int expected_bitpix = 0;
    switch (h.datatype) {
        case kDatatypeUInt8: expected_bitpix = 8; break;
        case kDatatypeInt16: expected_bitpix = 16; break;
        case kDatatypeFloat32: expected_bitpix = 32; break;
        default:
            throw NiftiError(Errc::UnsupportedDatatype,
                             "datatype " + std::to_string(h.datatype) + " is not uint8, int16 or float32");
    }
    if (h.bitpix != expected_bitpix) {
        throw NiftiError(Errc::BadBitpix, "bitpix " + std::to_string(h.bitpix) + " does not match datatype " +
                                               std::to_string(h.datatype));
    }
    for (std::size_t i = 0; i < 8; ++i) h.pixdim[i] = get<float>(b, kOffPixdim + 4 * i);
    for (std::size_t i = 1; i <= 3; ++i) {
        const float p = std::fabs(h.pixdim[i]);
        if (!(p > 0.0F) || !std::isfinite(p)) {
            throw NiftiError(Errc::BadPixdim, "pixdim[" + std::to_string(i) + "] must be a positive spacing");
        }
    }
    h.vox_offset = get<float>(b, kOffVoxOffset);
    if (!std::isfinite(h.vox_offset) || h.vox_offset < static_cast<float>(kHeaderSize) ||
        h.vox_offset != std::floor(h.vox_offset) || h.vox_offset > 1.0e15F) {
        throw NiftiError(Errc::BadVoxOffset, "vox_offset must be an integer >= 348");
    }
    h.scl_slope = get<float>(b, kOffSclSlope);
    h.scl_inter = get<float>(b, kOffSclInter);
    h.xyzt_units = b[kOffXyztUnits];
    std::memcpy(h.descrip.data(), b.data() + kOffDescrip, h.descrip.size());
    h.qform_code = get<std::int16_t>(b, kOffQformCode);
    h.sform_code = get<std::int16_t>(b, kOffSformCode);
    for (std::size_t i = 0; i < 4; ++i) {
        h.srow_x[i] = get<float>(b, kOffSrowX + 4 * i);
        h.srow_y[i] = get<float>(b, kOffSrowY + 4 * i);
        h.srow_z[i] = get<float>(b, kOffSrowZ + 4 * i);
    }
    return h;
}

std::array<std::uint8_t, kHeaderSize> NiftiHeader::serialize() const {
    std::array<std::uint8_t, kHeaderSize> bytes{};
    std::span<std::uint8_t> b(bytes);
    put<std::int32_t>(b, 0, sizeof_hdr);
    b[38] = 'r';
    for (std::size_t i = 0; i < 8; ++i) put<std::int16_t>(b, kOffDim + 2 * i, dim[i]);
    put<std::int16_t>(b, kOffDatatype, datatype);
    put<std::int16_t>(b, kOffBitpix, bitpix);
    for (std::size_t i = 0; i < 8; ++i) put<float>(b, kOffPixdim + 4 * i, pixdim[i]);
    put<float>(b, kOffVoxOffset, vox_offset);
    put<float>(b, kOffSclSlope, scl_slope);
    put<float>(b, kOffSclInter, scl_inter);
    b[kOffXyztUnits] = xyzt_units;
    std::memcpy(b.data() + kOffDescrip, descrip.data(), descrip.size());
    put<std::int16_t>(b, kOffQformCode, qform_code);
    put<std::int16_t>(b, kOffSformCode, sform_code);
    for (std::size_t i = 0; i < 4; ++i) {
        put<float>(b, kOffSrowX + 4 * i, srow_x[i]);
        put<float>(b, kOffSrowY + 4 * i, srow_y[i]);
        put<float>(b, kOffSrowZ + 4 * i, srow_z[i]);
    }
    std::memcpy(b.data() + kOffMagic, magic.data(), 4);
    return bytes;
}

bool NiftiHeader::scaling_applies() const {
    if (!std::isfinite(scl_slope) || scl_slope == 0.0F) return false;
    return !(scl_slope == 1.0F && (scl_inter == 0.0F || !std::isfinite(scl_inter)));
}

NiftiImage decode(std::span<const std::uint8_t> bytes) {
    std::vector<std::uint8_t> inflated;
    std::span<const std::uint8_t> data = bytes;
    if (is_gzip(bytes)) {
        inflated = inflate_prefix(bytes, kHeaderSize);
        const auto h = NiftiHeader::parse(inflated);
        const std::size_t n = static_cast<std::size_t>(h.dim[1]) * static_cast<std::size_t>(h.dim[2]) *
                              static_cast<std::size_t>(h.dim[3]);
        const std::size_t needed = static_cast<std::size_t>(h.vox_offset) + n * h.bytes_per_voxel();
        inflated = inflate_prefix(bytes, needed);
        data = inflated;
    }

    NiftiImage image;
    image.header = NiftiHeader::parse(data);
    const NiftiHeader& h = image.header;
    const Dims dims{h.dim[1], h.dim[2], h.dim[3]};
    const std::size_t n = dims.voxel_count();
    const std::size_t offset = static_cast<std::size_t>(h.vox_offset);
    const std::size_t payload_bytes = n * h.bytes_per_voxel();
    if (data.size() < offset || data.size() - offset < payload_bytes) {
        throw NiftiError(Errc::Truncated, "data section needs " + std::to_string(payload_bytes) +
                                              " bytes at offset " + std::to_string(offset) + ", stream has " +
                                              std::to_string(data.size()));
    }
    const auto payload = data.subspan(offset, payload_bytes);

    const Spacing spacing{std::fabs(h.pixdim[1]), std::fabs(h.pixdim[2]), std::fabs(h.pixdim[3])};
    Affine affine = scaled_identity(spacing);
    if (h.sform_code > 0) {
        for (std::size_t c = 0; c < 4; ++c) {
            affine[c] = h.srow_x[c];
            affine[4 + c] = h.srow_y[c];
            affine[8 + c] = h.srow_z[c];
        }
        affine[12] = 0;
        affine[13] = 0;
        affine[14] = 0;
        affine[15] = 1;
    }
    const Geometry geometry = Geometry::make(dims, spacing, affine);

    image.scaled = h.scaling_applies();
    if (image.scaled) {
        switch (h.datatype) {
            case kDatatypeUInt8:
                image.grid = VolumeGrid::from_values(
                    geometry, scale_payload<std::uint8_t>(payload, n, h.scl_slope, h.scl_inter));
                break;
            case kDatatypeInt16:
                image.grid = VolumeGrid::from_values(
                    geometry, scale_payload<std::int16_t>(payload, n, h.scl_slope, h.scl_inter));
                break;
            default:
                image.grid = VolumeGrid::from_values(
                    geometry, scale_payload<float>(payload, n, h.scl_slope, h.scl_inter));
        }
    } else {
        switch (h.datatype) {
            case kDatatypeUInt8:
                image.grid = VolumeGrid::from_values(geometry, copy_payload<std::uint8_t>(payload, n));
                break;
            case kDatatypeInt16:
                image.grid = VolumeGrid::from_values(geometry, copy_payload<std::int16_t>(payload, n));
                break;
            default:
                image.grid = VolumeGrid::from_values(geometry, copy_payload<float>(payload, n));
        }
    }
    return image;
}

NiftiImage read(const fs::path& path) {
    std::vector<std::uint8_t> bytes;
    try {
        bytes = read_file_bytes(path);
    } catch (const IoError& e) {
        throw NiftiError(Errc::Io, e.what());
    }
    try {
        return decode(bytes);
    } catch (const NiftiError& e) {
        throw NiftiError(e.code(), path.string() + ": " + e.what());
    }
}

NiftiImage read(std::istream& stream) {
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(stream)),
                                    std::istreambuf_iterator<char>());
    if (stream.bad()) throw NiftiError(Errc::Io, "error reading stream");
    return decode(bytes);
}

VolumeGrid read_volume(const fs::path& path) { return read(path).grid; }
VolumeGrid read_volume(std::istream& stream) { return read(stream).grid; }
VolumeGrid read_volume(std::span<const std::uint8_t> bytes) { return decode(bytes).grid; }

std::vector<std::uint8_t> encode(const VolumeGrid& grid, bool compress) {
    const Dims& d = grid.dims();
    for (std::int64_t v : {d.x, d.y, d.z}) {
        if (v > 32767) throw NiftiError(Errc::UnsupportedGrid, "NIfTI-1 dims are limited to 32767");
    }
    NiftiHeader h;
    h.dim = {3, static_cast<std::int16_t>(d.x), static_cast<std::int16_t>(d.y),
             static_cast<std::int16_t>(d.z), 1, 1, 1, 1};
    h.datatype = datatype_for(grid.kind());
    h.bitpix = static_cast<std::int16_t>(h.datatype == kDatatypeUInt8 ? 8 : h.datatype == kDatatypeInt16 ? 16 : 32);
    h.pixdim = {1.0F,
                static_cast<float>(grid.spacing().x),
                static_cast<float>(grid.spacing().y),
                static_cast<float>(grid.spacing().z),
                0.0F, 0.0F, 0.0F, 0.0F};
    h.vox_offset = static_cast<float>(kWrittenVoxOffset);
    h.scl_slope = 1.0F;
    h.scl_inter = 0.0F;
    h.xyzt_units = kUnitsMm;
    h.qform_code = 0;
    h.sform_code = 1;
    const Affine& a = grid.affine();
    for (std::size_t c = 0; c < 4; ++c) {
        h.srow_x[c] = static_cast<float>(a[c]);
        h.srow_y[c] = static_cast<float>(a[4 + c]);
        h.srow_z[c] = static_cast<float>(a[8 + c]);
    }
    constexpr std::string_view kDescrip = "labelqa";
    std::memcpy(h.descrip.data(), kDescrip.data(), kDescrip.size());

    const auto header = h.serialize();
    const std::size_t payload = grid.size() * h.bytes_per_voxel();
    std::vector<std::uint8_t> out(kWrittenVoxOffset + payload, 0);
    std::memcpy(out.data(), header.data(), header.size());
    auto copy_in = [&](auto values) {
        std::memcpy(out.data() + kWrittenVoxOffset, values.data(), payload);
    };
    switch (grid.kind()) {
        case ElementKind::UInt8: copy_in(grid.values<std::uint8_t>()); break;
        case ElementKind::Int16: copy_in(grid.values<std::int16_t>()); break;
        case ElementKind::Float32: copy_in(grid.values<float>()); break;
    }
    return compress ? deflate_gzip(out) : out;
}

void write_volume(const VolumeGrid& grid, const fs::path& path, bool compress) {
    const auto bytes = encode(grid, compress);
    try {
        write_file_atomic(path, bytes);
    } catch (const IoError& e) {
        throw NiftiError(Errc::Io, e.what());
    }
}

void write_volume(const VolumeGrid& grid, const fs::path& path) {
    write_volume(grid, path, path.extension() == ".gz");
}

bool has_nifti_extension(const fs::path& path) {
    const std::string name = path.filename().string();
    auto ends_with = [&](std::string_view suffix) {
        return name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    return ends_with(".nii") || ends_with(".nii.gz");
}

std::string stem(const fs::path& path) {
    std::string name = path.filename().string();
    for (std::string_view suffix : {".nii.gz", ".nii"}) {
        if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            return name.substr(0, name.size() - suffix.size());
        }
    }
    return name;
}

}  // namespace labelqa::nifti
