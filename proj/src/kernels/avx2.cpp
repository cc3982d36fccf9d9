// AVX2 variants. This translation unit is built with -mavx2 and only entered
// after a runtime CPU check.

#include "kernels_internal.hpp"

#include <immintrin.h>

#include <array>
#include <bit>
#include <cstring>
#include <vector>

namespace labelqa::simd {

namespace {

// Bit j of the index expands to byte j (0 or 1) of the value.
constexpr std::array<std::uint64_t, 256> make_byte_lut() {
    std::array<std::uint64_t, 256> lut{};
    for (unsigned m = 0; m < 256; ++m) {
        std::uint64_t v = 0;
        for (unsigned j = 0; j < 8; ++j) {
            if ((m >> j) & 1U) v |= std::uint64_t{1} << (8 * j);
        }
        lut[m] = v;
    }
    return lut;
}
constexpr auto kByteLut = make_byte_lut();

inline std::uint64_t load_u64(const std::uint8_t* p) {
    std::uint64_t v;
    std::memcpy(&v, p, sizeof v);
    return v;
}
inline void store_u64(std::uint8_t* p, std::uint64_t v) { std::memcpy(p, &v, sizeof v); }

inline __m256i load256(const std::uint8_t* p) {
    return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
}
inline void store256(std::uint8_t* p, __m256i v) {
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(p), v);
}

void threshold_f32(const float* src, std::size_t n, float threshold, std::uint8_t* out) {
    const __m256 t = _mm256_set1_ps(threshold);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 ge = _mm256_cmp_ps(_mm256_loadu_ps(src + i), t, _CMP_GE_OQ);
        store_u64(out + i, kByteLut[static_cast<unsigned>(_mm256_movemask_ps(ge))]);
    }
    scalar::threshold_f32(src + i, n - i, threshold, out + i);
}

void count_ge_f32(const float* src, std::size_t n, float threshold, std::uint8_t* count) {
    const __m256 t = _mm256_set1_ps(threshold);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 ge = _mm256_cmp_ps(_mm256_loadu_ps(src + i), t, _CMP_GE_OQ);
        const auto inc = static_cast<long long>(kByteLut[static_cast<unsigned>(_mm256_movemask_ps(ge))]);
        const auto cur = static_cast<long long>(load_u64(count + i));
        const __m128i sum = _mm_adds_epu8(_mm_cvtsi64_si128(cur), _mm_cvtsi64_si128(inc));
        store_u64(count + i, static_cast<std::uint64_t>(_mm_cvtsi128_si64(sum)));
    }
    scalar::count_ge_f32(src + i, n - i, threshold, count + i);
}

void threshold_u8(const std::uint8_t* src, std::size_t n, std::uint8_t threshold,
                  std::uint8_t* out) {
    const __m256i t = _mm256_set1_epi8(static_cast<char>(threshold));
    const __m256i one = _mm256_set1_epi8(1);
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i v = load256(src + i);
        const __m256i ge = _mm256_cmpeq_epi8(_mm256_max_epu8(v, t), v);
        store256(out + i, _mm256_and_si256(ge, one));
    }
    scalar::threshold_u8(src + i, n - i, threshold, out + i);
}

void ensemble_stats(const float* const* members, std::size_t k, std::size_t n, float* mean_out,
                    float* std_out) {
    struct Column {
        __m256 v;
    };
    std::vector<Column> cols(k);
    auto col = [&](std::size_t m) -> __m256& { return cols[m].v; };
    const __m256d kd = _mm256_set1_pd(static_cast<double>(k));
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (std::size_t m = 0; m < k; ++m) col(m) = _mm256_loadu_ps(members[m] + i);
        for (std::size_t round = 0; round < k; ++round) {
            for (std::size_t j = round & 1U; j + 1 < k; j += 2) {
                const __m256 a = col(j);
                const __m256 b = col(j + 1);
                col(j) = _mm256_min_ps(a, b);
                col(j + 1) = _mm256_max_ps(a, b);
            }
        }
        for (int half = 0; half < 2; ++half) {
            auto widen = [&](std::size_t m) {
                return _mm256_cvtps_pd(half == 0 ? _mm256_castps256_ps128(col(m))
                                                 : _mm256_extractf128_ps(col(m), 1));
            };
            __m256d sum = _mm256_setzero_pd();
            for (std::size_t m = 0; m < k; ++m) sum = _mm256_add_pd(sum, widen(m));
            const __m256d mean = _mm256_div_pd(sum, kd);
            _mm_storeu_ps(mean_out + i + 4 * half, _mm256_cvtpd_ps(mean));
            if (std_out != nullptr) {
                __m256d ss = _mm256_setzero_pd();
                for (std::size_t m = 0; m < k; ++m) {
                    const __m256d d = _mm256_sub_pd(widen(m), mean);
                    ss = _mm256_add_pd(ss, _mm256_mul_pd(d, d));
                }
                const __m256d sd = _mm256_sqrt_pd(_mm256_div_pd(ss, kd));
                _mm_storeu_ps(std_out + i + 4 * half, _mm256_cvtpd_ps(sd));
            }
        }
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
    const std::uint64_t code_bytes = kByteLut[0xFF] * code;
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 v = _mm256_loadu_ps(src + i);
        const __m256 b = _mm256_loadu_ps(best + i);
        const __m256 gt = _mm256_cmp_ps(v, b, _CMP_GT_OQ);
        _mm256_storeu_ps(best + i, _mm256_blendv_ps(b, v, gt));
        const std::uint64_t sel = kByteLut[static_cast<unsigned>(_mm256_movemask_ps(gt))] * 0xFF;
        store_u64(label + i, (load_u64(label + i) & ~sel) | (code_bytes & sel));
    }
    scalar::argmax_step(src + i, n - i, code, best + i, label + i);
}

void argmax_finish(const float* best, std::size_t n, float threshold, std::uint8_t* label) {
    const __m256 t = _mm256_set1_ps(threshold);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 ge = _mm256_cmp_ps(_mm256_loadu_ps(best + i), t, _CMP_GE_OQ);
        const std::uint64_t keep = kByteLut[static_cast<unsigned>(_mm256_movemask_ps(ge))] * 0xFF;
        store_u64(label + i, load_u64(label + i) & keep);
    }
    scalar::argmax_finish(best + i, n - i, threshold, label + i);
}

template <class Op, class Tail>
inline void binary_op(const std::uint8_t* a, const std::uint8_t* b, std::size_t n,
                      std::uint8_t* out, Op op, Tail tail) {
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) store256(out + i, op(load256(a + i), load256(b + i)));
    tail(a + i, b + i, n - i, out + i);
}

void or_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out) {
    binary_op(a, b, n, out, [](__m256i x, __m256i y) { return _mm256_or_si256(x, y); },
              scalar::or_u8);
}

void and_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out) {
    binary_op(a, b, n, out, [](__m256i x, __m256i y) { return _mm256_and_si256(x, y); },
              scalar::and_u8);
}

void xor_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out) {
    binary_op(a, b, n, out, [](__m256i x, __m256i y) { return _mm256_xor_si256(x, y); },
              scalar::xor_u8);
}

void andnot_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n, std::uint8_t* out) {
    binary_op(a, b, n, out, [](__m256i x, __m256i y) { return _mm256_andnot_si256(y, x); },
              scalar::andnot_u8);
}

inline unsigned zero_bits(__m256i v) {
    return static_cast<unsigned>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(v, _mm256_setzero_si256())));
}

std::uint64_t count_nonzero_u8(const std::uint8_t* src, std::size_t n) {
    std::uint64_t c = 0;
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) c += static_cast<unsigned>(std::popcount(~zero_bits(load256(src + i))));
    return c + scalar::count_nonzero_u8(src + i, n - i);
}

std::uint64_t count_both_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
    std::uint64_t c = 0;
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const unsigned either_zero = zero_bits(load256(a + i)) | zero_bits(load256(b + i));
        c += static_cast<unsigned>(std::popcount(~either_zero));
    }
    return c + scalar::count_both_u8(a + i, b + i, n - i);
}

std::uint64_t count_nonbinary_u8(const std::uint8_t* src, std::size_t n) {
    const __m256i one = _mm256_set1_epi8(1);
    std::uint64_t c = 0;
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i v = load256(src + i);
        const auto le_one = static_cast<unsigned>(
            _mm256_movemask_epi8(_mm256_cmpeq_epi8(_mm256_max_epu8(v, one), one)));
        c += static_cast<unsigned>(std::popcount(~le_one));
    }
    return c + scalar::count_nonbinary_u8(src + i, n - i);
}

void select_u8(const std::uint8_t* mask, const std::uint8_t* a, const std::uint8_t* b,
               std::size_t n, std::uint8_t* out) {
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i is_zero = _mm256_cmpeq_epi8(load256(mask + i), _mm256_setzero_si256());
        store256(out + i, _mm256_blendv_epi8(load256(a + i), load256(b + i), is_zero));
    }
    scalar::select_u8(mask + i, a + i, b + i, n - i, out + i);
}

void equals_u8(const std::uint8_t* a, std::size_t n, std::uint8_t code, std::uint8_t* out) {
    const __m256i c = _mm256_set1_epi8(static_cast<char>(code));
    const __m256i one = _mm256_set1_epi8(1);
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        store256(out + i, _mm256_and_si256(_mm256_cmpeq_epi8(load256(a + i), c), one));
    }
    scalar::equals_u8(a + i, n - i, code, out + i);
}

}  // namespace

const KernelTable* avx2_kernels() {
    static const KernelTable table{
        .level = Level::Avx2,
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
