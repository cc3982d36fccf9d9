#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference in
// src/kernels/scalar.cpp; vector variants must produce bit-identical output.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace labelqa::simd {

enum class Level : std::uint8_t { Scalar, Avx2, Neon };

std::string_view to_string(Level level);

struct KernelTable {
    Level level = Level::Scalar;

    /// out[i] = src[i] >= threshold
    void (*threshold_f32)(const float* src, std::size_t n, float threshold, std::uint8_t* out);

    /// count[i] += (src[i] >= threshold), saturating at 255.
    void (*count_ge_f32)(const float* src, std::size_t n, float threshold, std::uint8_t* count);

    /// out[i] = src[i] >= threshold
    void (*threshold_u8)(const std::uint8_t* src, std::size_t n, std::uint8_t threshold,
                         std::uint8_t* out);

    /// Per-voxel statistics over `k` member arrays. Members are sorted
    /// ascending per voxel before summation, so the result does not depend on
    /// member order. Arithmetic is double precision, results rounded to float:
    ///   mean = sum(sorted) / k,  std = sqrt(sum((sorted - mean)^2) / k)
    /// `std_out` may be null.
    void (*ensemble_stats)(const float* const* members, std::size_t k, std::size_t n,
                           float* mean_out, float* std_out);

    /// Running argmax step: where src[i] > best[i], best[i] = src[i] and
    /// label[i] = code.
    void (*argmax_step)(const float* src, std::size_t n, std::uint8_t code, float* best,
                        std::uint8_t* label);

    /// label[i] = best[i] >= threshold ? label[i] : 0
    void (*argmax_finish)(const float* best, std::size_t n, float threshold, std::uint8_t* label);

    void (*or_u8)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out);
    void (*and_u8)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out);
    void (*xor_u8)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out);
    /// a AND NOT b
    void (*andnot_u8)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n,
                      std::uint8_t* out);

    /// Number of nonzero bytes.
    std::uint64_t (*count_nonzero_u8)(const std::uint8_t* src, std::size_t n);
    /// Number of indices where both a and b are nonzero.
    std::uint64_t (*count_both_u8)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
    /// Number of bytes outside {0, 1}.
    std::uint64_t (*count_nonbinary_u8)(const std::uint8_t* src, std::size_t n);

    /// out[i] = mask[i] ? a[i] : b[i]
    void (*select_u8)(const std::uint8_t* mask, const std::uint8_t* a, const std::uint8_t* b,
                      std::size_t n, std::uint8_t* out);
    /// out[i] = (a[i] == code)
    void (*equals_u8)(const std::uint8_t* a, std::size_t n, std::uint8_t code, std::uint8_t* out);

    /// Normalised binary entropy of each probability, in double then rounded
    /// to float. Transcendental, so every level uses the scalar loop.
    void (*binary_entropy_f32)(const float* src, std::size_t n, float* out);
};

const KernelTable& scalar_kernels();
/// Null when the variant is not compiled into this build.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

/// Levels that are both compiled in and supported by the running CPU,
/// scalar first.
std::vector<Level> available_levels();

/// Table used by the library. Picked on first use from the best supported
/// level; the LABELQA_SIMD environment variable (scalar|avx2|neon) overrides.
const KernelTable& active();

/// Forces the active table (tests, benchmarking). Throws if unavailable.
void set_active(Level level);

}  // namespace labelqa::simd
