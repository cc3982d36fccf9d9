// NEON variants. Advanced SIMD is baseline on AArch64, so no runtime check.

#include "kernels_internal.hpp"

#include <arm_neon.h>

#include <vector>

namespace labelqa::simd {

namespace {

// Four float lanes of 0/~0 from each half, narrowed to eight 0/~0 bytes.
inline uint8x8_t narrow_mask(uint32x4_t lo, uint32x4_t hi) {
    return vmovn_u16(vcombine_u16(vmovn_u32(lo), vmovn_u32(hi)));
}

void threshold_f32(const float* src, std::size_t n, float threshold, std::uint8_t* out) {
    const float32x4_t t = vdupq_n_f32(threshold);
    const uint8x8_t one = vdup_n_u8(1);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const uint8x8_t ge = narrow_mask(vcgeq_f32(vld1q_f32(src + i), t), vcgeq_f32(vld1q_f32(src + i + 4), t));
        vst1_u8(out + i, vand_u8(ge, one));
    }
    scalar::threshold_f32(src + i, n - i, threshold, out + i);
}

void count_ge_f32(const float* src, std::size_t n, float threshold, std::uint8_t* count) {
    const float32x4_t t = vdupq_n_f32(threshold);
    const uint8x8_t one = vdup_n_u8(1);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const uint8x8_t ge = narrow_mask(vcgeq_f32(vld1q_f32(src + i), t), vcgeq_f32(vld1q_f32(src + i + 4), t));
        vst1_u8(count + i, vqadd_u8(vld1_u8(count + i), vand_u8(ge, one)));
    }
    scalar::count_ge_f32(src + i, n - i, threshold, count + i);
}

void threshold_u8(const std::uint8_t* src, std::size_t n, std::uint8_t threshold,
                  std::uint8_t* out) {
    const uint8x16_t t = vdupq_n_u8(threshold);
    const uint8x16_t one = vdupq_n_u8(1);
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) vst1q_u8(out + i, vandq_u8(vcgeq_u8(vld1q_u8(src + i), t), one));
    scalar::threshold_u8(src + i, n - i, threshold, out + i);
}

// Same selection as the scalar compare-exchange, including ties.
inline void compare_exchange(float32x4_t& a, float32x4_t& b) {
    const float32x4_t lo = vbslq_f32(vcltq_f32(a, b), a, b);
    const float32x4_t hi = vbslq_f32(vcgtq_f32(a, b), a, b);
    a = lo;
    b = hi;
}

void ensemble_stats(const float* const* members, std::size_t k, std::size_t n, float* mean_out,
                    float* std_out) {
    std::vector<float32x4_t> col(k);
    const float64x2_t kd = vdupq_n_f64(static_cast<double>(k));
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (std::size_t m = 0; m < k; ++m) col[m] = vld1q_f32(members[m] + i);
        for (std::size_t round = 0; round < k; ++round) {
            for (std::size_t j = round & 1U; j + 1 < k; j += 2) compare_exchange(col[j], col[j + 1]);
        }
        float64x2_t mean[2];
        for (int half = 0; half < 2; ++half) {
            auto widen = [&](std::size_t m) {
                return half == 0 ? vcvt_f64_f32(vget_low_f32(col[m])) : vcvt_high_f64_f32(col[m]);
            };
            float64x2_t sum = vdupq_n_f64(0.0);
            for (std::size_t m = 0; m < k; ++m) sum = vaddq_f64(sum, widen(m));
            mean[half] = vdivq_f64(sum, kd);
            if (std_out != nullptr) {
                float64x2_t ss = vdupq_n_f64(0.0);
                for (std::size_t m = 0; m < k; ++m) {
                    const float64x2_t d = vsubq_f64(widen(m), mean[half]);
                    ss = vaddq_f64(ss, vmulq_f64(d, d));
                }
                vst1_f32(std_out + i + 2 * half, vcvt_f32_f64(vsqrtq_f64(vdivq_f64(ss, kd))));
            }
        }
        vst1q_f32(mean_out + i, vcombine_f32(vcvt_f32_f64(mean[0]), vcvt_f32_f64(mean[1])));
    }
    if (i < n) {
        std::vector<const float*> rest(k);
        for (std::size_t m = 0; m < k; ++m) rest[m] = members[m] + i;
        scalar::ensemble_stats(rest.data(), k, n - i, mean_out + i,
                               std_out != nullptr ? std_out + i : nullptr);
    }
}

void argmax_step(const float* src, std::size_t n, std::uint8_t code, float* best,
                 std::uint8_t* label) {
    const uint8x8_t c = vdup_n_u8(code);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const float32x4_t v0 = vld1q_f32(src + i);
        const float32x4_t v1 = vld1q_f32(src + i + 4);
        const float32x4_t b0 = vld1q_f32(best + i);
        const float32x4_t b1 = vld1q_f32(best + i + 4);
        const uint32x4_t gt0 = vcgtq_f32(v0, b0);
        const uint32x4_t gt1 = vcgtq_f32(v1, b1);
        vst1q_f32(best + i, vbslq_f32(gt0, v0, b0));
        vst1q_f32(best + i + 4, vbslq_f32(gt1, v1, b1));
        vst1_u8(label + i, vbsl_u8(narrow_mask(gt0, gt1), c, vld1_u8(label + i)));
    }
    scalar::argmax_step(src + i, n - i, code, best + i, label + i);
}

void argmax_finish(const float* best, std::size_t n, float threshold, std::uint8_t* label) {
    const float32x4_t t = vdupq_n_f32(threshold);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const uint8x8_t keep = narrow_mask(vcgeq_f32(vld1q_f32(best + i), t), vcgeq_f32(vld1q_f32(best + i + 4), t));
        vst1_u8(label + i, vand_u8(vld1_u8(label + i), keep));
    }
    scalar::argmax_finish(best + i, n - i, threshold, label + i);
}

template <class Op, class Tail>
inline void binary_op(const std::uint8_t* a, const std::uint8_t* b, std::size_t n,
                      std::uint8_t* out, Op op, Tail tail) {
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) vst1q_u8(out + i, op(vld1q_u8(a + i), vld1q_u8(b + i)));
    tail(a + i, b + i, n - i, out + i);
}

void or_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out) {
    binary_op(a, b, n, out, [](uint8x16_t x, uint8x16_t y) { return vorrq_u8(x, y); }, scalar::or_u8);
}

void and_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out) {
    binary_op(a, b, n, out, [](uint8x16_t x, uint8x16_t y) { return vandq_u8(x, y); }, scalar::and_u8);
}

void xor_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out) {
    binary_op(a, b, n, out, [](uint8x16_t x, uint8x16_t y) { return veorq_u8(x, y); }, scalar::xor_u8);
}

void andnot_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out) {
    binary_op(a, b, n, out, [](uint8x16_t x, uint8x16_t y) { return vbicq_u8(x, y); }, scalar::andnot_u8);
}

// 0/~0 bytes to a lane count; at most 16 per call so u16 cannot overflow.
inline std::uint64_t count_set_lanes(uint8x16_t mask) {
    return vaddlvq_u8(vshrq_n_u8(mask, 7));
}

std::uint64_t count_nonzero_u8(const std::uint8_t* src, std::size_t n) {
    std::uint64_t c = 0;
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        const uint8x16_t v = vld1q_u8(src + i);
        c += count_set_lanes(vtstq_u8(v, v));
    }
    return c + scalar::count_nonzero_u8(src + i, n - i);
}

std::uint64_t count_both_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
    std::uint64_t c = 0;
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        const uint8x16_t x = vld1q_u8(a + i);
        const uint8x16_t y = vld1q_u8(b + i);
        c += count_set_lanes(vandq_u8(vtstq_u8(x, x), vtstq_u8(y, y)));
    }
    return c + scalar::count_both_u8(a + i, b + i, n - i);
}

std::uint64_t count_nonbinary_u8(const std::uint8_t* src, std::size_t n) {
    const uint8x16_t one = vdupq_n_u8(1);
    std::uint64_t c = 0;
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) c += count_set_lanes(vcgtq_u8(vld1q_u8(src + i), one));
    return c + scalar::count_nonbinary_u8(src + i, n - i);
}

void select_u8(const std::uint8_t* mask, const std::uint8_t* a, const std::uint8_t* b,
               std::size_t n, std::uint8_t* out) {
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        const uint8x16_t m = vld1q_u8(mask + i);
        vst1q_u8(out + i, vbslq_u8(vtstq_u8(m, m), vld1q_u8(a + i), vld1q_u8(b + i)));
    }
    scalar::select_u8(mask + i, a + i, b + i, n - i, out + i);
}

void equals_u8(const std::uint8_t* a, std::size_t n, std::uint8_t code, std::uint8_t* out) {
    const uint8x16_t c = vdupq_n_u8(code);
    const uint8x16_t one = vdupq_n_u8(1);
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) vst1q_u8(out + i, vandq_u8(vceqq_u8(vld1q_u8(a + i), c), one));
    scalar::equals_u8(a + i, n - i, code, out + i);
}

}  // namespace

const KernelTable* neon_kernels() {
    static const KernelTable table{
        .level = Level::Neon,
        .threshold_f32 = threshold_f32,
        .count_ge_f32 = count_ge_f32,
        .threshold_u8 = threshold_u8,
        .ensemble_stats = ensemble_stats,
        .argmax_step = argmax_step,
        .argmax_finish = argmax_finish,
        .or_u8 = or_u8,
        .and_u8 = and_u8,
        .xor_u8 = xor_u8,
        .andnot_u8 = andnot_u8,
        .count_nonzero_u8 = count_nonzero_u8,
        .count_both_u8 = count_both_u8,
        .count_nonbinary_u8 = count_nonbinary_u8,
        .select_u8 = select_u8,
        .equals_u8 = equals_u8,
        .binary_entropy_f32 = scalar::binary_entropy_f32,
    };
    return &table;
}

}  // namespace labelqa::simd
