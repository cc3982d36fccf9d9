#pragma once

#include <cstddef>
#include <cstdint>

#include "labelqa/kernels.hpp"

namespace labelqa::simd {

/// Odd-even transposition sort. Compare-exchange uses the same min/max
/// semantics as the vector instructions so that all levels agree bit for bit.
inline void sort_network(float* v, std::size_t k) {
    for (std::size_t round = 0; round < k; ++round) {
        for (std::size_t i = round & 1U; i + 1 < k; i += 2) {
            const float a = v[i];
            const float b = v[i + 1];
            v[i] = a < b ? a : b;
            v[i + 1] = a > b ? a : b;
        }
    }
}

double binary_entropy(double p);

namespace scalar {
void threshold_f32(const float* src, std::size_t n, float threshold, std::uint8_t* out);
void count_ge_f32(const float* src, std::size_t n, float threshold, std::uint8_t* count);
void threshold_u8(const std::uint8_t* src, std::size_t n, std::uint8_t threshold,
                  std::uint8_t* out);
void ensemble_stats(const float* const* members, std::size_t k, std::size_t n, float* mean_out,
                    float* std_out);
void argmax_step(const float* src, std::size_t n, std::uint8_t code, float* best,
                 std::uint8_t* label);
void argmax_finish(const float* best, std::size_t n, float threshold, std::uint8_t* label);
void or_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out);
void and_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out);
void xor_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out);
void andnot_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out);
std::uint64_t count_nonzero_u8(const std::uint8_t* src, std::size_t n);
std::uint64_t count_both_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
std::uint64_t count_nonbinary_u8(const std::uint8_t* src, std::size_t n);
void select_u8(const std::uint8_t* mask, const std::uint8_t* a, const std::uint8_t* b,
               std::size_t n, std::uint8_t* out);
void equals_u8(const std::uint8_t* a, std::size_t n, std::uint8_t code, std::uint8_t* out);
void binary_entropy_f32(const float* src, std::size_t n, float* out);
}  // namespace scalar

}  // namespace labelqa::simd
