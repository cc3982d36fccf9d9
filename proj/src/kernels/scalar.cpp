#include "kernels_internal.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace labelqa::simd {

namespace scalar {

void threshold_f32(const float* src, std::size_t n, float threshold, std::uint8_t* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = src[i] >= threshold ? 1 : 0;
}

void count_ge_f32(const float* src, std::size_t n, float threshold, std::uint8_t* count) {
    for (std::size_t i = 0; i < n; ++i) {
        if (src[i] >= threshold && count[i] != 255) ++count[i];
    }
}

void threshold_u8(const std::uint8_t* src, std::size_t n, std::uint8_t threshold,
                  std::uint8_t* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = src[i] >= threshold ? 1 : 0;
}

void ensemble_stats(const float* const* members, std::size_t k, std::size_t n, float* mean_out,
                    float* std_out) {
    std::vector<float> column(k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < k; ++m) column[m] = members[m][i];
        sort_network(column.data(), k);
        double sum = 0.0;
        for (std::size_t m = 0; m < k; ++m) sum += static_cast<double>(column[m]);
        const double mean = sum / static_cast<double>(k);
        mean_out[i] = static_cast<float>(mean);
        if (std_out != nullptr) {
            double ss = 0.0;
            for (std::size_t m = 0; m < k; ++m) {
                const double d = static_cast<double>(column[m]) - mean;
                ss += d * d;
            }
            std_out[i] = static_cast<float>(std::sqrt(ss / static_cast<double>(k)));
        }
    }
}

void argmax_step(const float* src, std::size_t n, std::uint8_t code, float* best,
                 std::uint8_t* label) {
    for (std::size_t i = 0; i < n; ++i) {
        if (src[i] > best[i]) {
            best[i] = src[i];
            label[i] = code;
        }
    }
}

void argmax_finish(const float* best, std::size_t n, float threshold, std::uint8_t* label) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!(best[i] >= threshold)) label[i] = 0;
    }
}

void or_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] | b[i];
}

void and_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] & b[i];
}

void xor_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] ^ b[i];
}

void andnot_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] & static_cast<std::uint8_t>(~b[i]);
}

std::uint64_t count_nonzero_u8(const std::uint8_t* src, std::size_t n) {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < n; ++i) c += src[i] != 0;
    return c;
}

std::uint64_t count_both_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < n; ++i) c += (a[i] != 0) & (b[i] != 0);
    return c;
}

std::uint64_t count_nonbinary_u8(const std::uint8_t* src, std::size_t n) {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < n; ++i) c += src[i] > 1;
    return c;
}

void select_u8(const std::uint8_t* mask, const std::uint8_t* a, const std::uint8_t* b,
               std::size_t n, std::uint8_t* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = mask[i] != 0 ? a[i] : b[i];
}

void equals_u8(const std::uint8_t* a, std::size_t n, std::uint8_t code, std::uint8_t* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] == code ? 1 : 0;
}

void binary_entropy_f32(const float* src, std::size_t n, float* out) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = static_cast<float>(binary_entropy(static_cast<double>(src[i])));
    }
}

}  // namespace scalar

double binary_entropy(double p) {
    const double q = 1.0 - p;
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (q > 0.0) h -= q * std::log2(q);
    return h;
}

const KernelTable& scalar_kernels() {
    static const KernelTable table{
        .level = Level::Scalar,
        .threshold_f32 = scalar::threshold_f32,
        .count_ge_f32 = scalar::count_ge_f32,
        .threshold_u8 = scalar::threshold_u8,
        .ensemble_stats = scalar::ensemble_stats,
        .argmax_step = scalar::argmax_step,
        .argmax_finish = scalar::argmax_finish,
        .or_u8 = scalar::or_u8,
        .and_u8 = scalar::and_u8,
        .xor_u8 = scalar::xor_u8,
        .andnot_u8 = scalar::andnot_u8,
        .count_nonzero_u8 = scalar::count_nonzero_u8,
        .count_both_u8 = scalar::count_both_u8,
        .count_nonbinary_u8 = scalar::count_nonbinary_u8,
        .select_u8 = scalar::select_u8,
        .equals_u8 = scalar::equals_u8,
        .binary_entropy_f32 = scalar::binary_entropy_f32,
    };
    return table;
}

}  // namespace labelqa::simd
