#include <doctest.h>

#include <cstring>
#include <vector>

#include "generators.hpp"
#include "labelqa/kernels.hpp"

using namespace labelqa;
using labelqa::testing::Rng;

namespace {

std::vector<const simd::KernelTable*> vector_tables() {
    std::vector<const simd::KernelTable*> out;
    for (auto level : simd::available_levels()) {
        if (level == simd::Level::Avx2) out.push_back(simd::avx2_kernels());
        if (level == simd::Level::Neon) out.push_back(simd::neon_kernels());
    }
    return out;
}

// Mix of lattice values, exact thresholds and arbitrary floats.
std::vector<float> random_floats(Rng& rng, std::size_t n) {
    std::vector<float> v(n);
    for (auto& x : v) {
        switch (rng.uniform_int(0, 3)) {
            case 0: x = testing::lattice_probability(rng); break;
            case 1: x = 0.5F; break;
            default: x = static_cast<float>(rng.uniform()); break;
        }
    }
    return v;
}

std::vector<std::uint8_t> random_bytes(Rng& rng, std::size_t n, int max_value) {
    std::vector<std::uint8_t> v(n);
    for (auto& x : v) x = static_cast<std::uint8_t>(rng.uniform_int(0, max_value));
    return v;
}

template <class T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

constexpr int kTrials = 200;

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar level is always available and listed first") {
    const auto levels = simd::available_levels();
    REQUIRE_FALSE(levels.empty());
    CHECK(levels.front() == simd::Level::Scalar);
    CHECK(simd::scalar_kernels().level == simd::Level::Scalar);
}

TEST_CASE("set_active switches tables and rejects missing levels") {
    const auto before = simd::active().level;
    simd::set_active(simd::Level::Scalar);
    CHECK(simd::active().level == simd::Level::Scalar);
#if defined(__x86_64__)
    CHECK_THROWS_AS(simd::set_active(simd::Level::Neon), DomainError);
#endif
    simd::set_active(before);
}

TEST_CASE("vector float kernels are bit-identical to scalar, including tails") {
    const auto& ref = simd::scalar_kernels();
    for (const auto* t : vector_tables()) {
        CAPTURE(simd::to_string(t->level));
        Rng rng(11);
        for (int trial = 0; trial < kTrials; ++trial) {
            const auto n = static_cast<std::size_t>(rng.uniform_int(0, 70));
            const auto src = random_floats(rng, n);
            const float thr = rng.coin(0.5) ? 0.5F : static_cast<float>(rng.uniform());

            std::vector<std::uint8_t> a(n), b(n);
            ref.threshold_f32(src.data(), n, thr, a.data());
            t->threshold_f32(src.data(), n, thr, b.data());
            CHECK(same_bits(a, b));

            auto ca = random_bytes(rng, n, 255);
            auto cb = ca;
            ref.count_ge_f32(src.data(), n, thr, ca.data());
            t->count_ge_f32(src.data(), n, thr, cb.data());
            CHECK(same_bits(ca, cb));

            auto best_a = random_floats(rng, n);
            auto best_b = best_a;
            auto lab_a = random_bytes(rng, n, 9);
            auto lab_b = lab_a;
            const auto code = static_cast<std::uint8_t>(rng.uniform_int(1, 9));
            ref.argmax_step(src.data(), n, code, best_a.data(), lab_a.data());
            t->argmax_step(src.data(), n, code, best_b.data(), lab_b.data());
            CHECK(same_bits(best_a, best_b));
            CHECK(same_bits(lab_a, lab_b));
            ref.argmax_finish(best_a.data(), n, thr, lab_a.data());
            t->argmax_finish(best_b.data(), n, thr, lab_b.data());
            CHECK(same_bits(lab_a, lab_b));

            std::vector<float> ea(n), eb(n);
            ref.binary_entropy_f32(src.data(), n, ea.data());
            t->binary_entropy_f32(src.data(), n, eb.data());
            CHECK(same_bits(ea, eb));
        }
    }
}

TEST_CASE("vector ensemble statistics are bit-identical to scalar for K = 1..9") {
    const auto& ref = simd::scalar_kernels();
    for (const auto* t : vector_tables()) {
        CAPTURE(simd::to_string(t->level));
        Rng rng(12);
        for (int trial = 0; trial < kTrials; ++trial) {
            const auto k = static_cast<std::size_t>(rng.uniform_int(1, 9));
            const auto n = static_cast<std::size_t>(rng.uniform_int(0, 45));
            std::vector<std::vector<float>> members;
            std::vector<const float*> ptrs;
            for (std::size_t m = 0; m < k; ++m) members.push_back(random_floats(rng, n));
            for (const auto& m : members) ptrs.push_back(m.data());
            std::vector<float> ma(n), mb(n), sa(n), sb(n);
            ref.ensemble_stats(ptrs.data(), k, n, ma.data(), sa.data());
            t->ensemble_stats(ptrs.data(), k, n, mb.data(), sb.data());
            CHECK(same_bits(ma, mb));
            CHECK(same_bits(sa, sb));
            std::vector<float> mc(n);
            t->ensemble_stats(ptrs.data(), k, n, mc.data(), nullptr);
            CHECK(same_bits(ma, mc));
        }
    }
}

TEST_CASE("vector byte kernels are bit-identical to scalar, including tails") {
    const auto& ref = simd::scalar_kernels();
    for (const auto* t : vector_tables()) {
        CAPTURE(simd::to_string(t->level));
        Rng rng(13);
        for (int trial = 0; trial < kTrials; ++trial) {
            const auto n = static_cast<std::size_t>(rng.uniform_int(0, 100));
            const int range = rng.coin(0.5) ? 1 : 255;
            const auto a = random_bytes(rng, n, range);
            const auto b = random_bytes(rng, n, range);
            const auto m = random_bytes(rng, n, 3);

            using Binary = void (*)(const std::uint8_t*, const std::uint8_t*, std::size_t, std::uint8_t*);
            const std::pair<Binary, Binary> binaries[] = {
                {ref.or_u8, t->or_u8}, {ref.and_u8, t->and_u8}, {ref.xor_u8, t->xor_u8}, {ref.andnot_u8, t->andnot_u8}};
            for (const auto& [f, g] : binaries) {
                std::vector<std::uint8_t> x(n), y(n);
                f(a.data(), b.data(), n, x.data());
                g(a.data(), b.data(), n, y.data());
                CHECK(same_bits(x, y));
            }

            CHECK(ref.count_nonzero_u8(a.data(), n) == t->count_nonzero_u8(a.data(), n));
            CHECK(ref.count_both_u8(a.data(), b.data(), n) == t->count_both_u8(a.data(), b.data(), n));
            CHECK(ref.count_nonbinary_u8(a.data(), n) == t->count_nonbinary_u8(a.data(), n));

            const auto thr = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
            const auto code = static_cast<std::uint8_t>(rng.uniform_int(0, 3));
            std::vector<std::uint8_t> x(n), y(n);
            ref.threshold_u8(a.data(), n, thr, x.data());
            t->threshold_u8(a.data(), n, thr, y.data());
            CHECK(same_bits(x, y));
            ref.select_u8(m.data(), a.data(), b.data(), n, x.data());
            t->select_u8(m.data(), a.data(), b.data(), n, y.data());
            CHECK(same_bits(x, y));
            ref.equals_u8(m.data(), n, code, x.data());
            t->equals_u8(m.data(), n, code, y.data());
            CHECK(same_bits(x, y));
        }
    }
}

TEST_CASE("scalar count_ge saturates at 255") {
    std::vector<float> src{1.0F, 0.0F};
    std::vector<std::uint8_t> count{255, 255};
    simd::scalar_kernels().count_ge_f32(src.data(), 2, 0.5F, count.data());
    CHECK(count[0] == 255);
    CHECK(count[1] == 255);
}

TEST_CASE("ensemble statistics do not depend on member order") {
    Rng rng(14);
    for (int trial = 0; trial < kTrials; ++trial) {
        const auto k = static_cast<std::size_t>(rng.uniform_int(2, 6));
        const std::size_t n = 17;
        std::vector<std::vector<float>> members;
        for (std::size_t m = 0; m < k; ++m) members.push_back(random_floats(rng, n));
        auto stats = [&](const std::vector<std::vector<float>>& ms) {
            std::vector<const float*> p;
            for (const auto& m : ms) p.push_back(m.data());
            std::vector<float> mean(n), sd(n);
            simd::active().ensemble_stats(p.data(), k, n, mean.data(), sd.data());
            return std::pair{mean, sd};
        };
        const auto base = stats(members);
        std::shuffle(members.begin(), members.end(), rng.engine());
        const auto shuffled = stats(members);
        CHECK(same_bits(base.first, shuffled.first));
        CHECK(same_bits(base.second, shuffled.second));
    }
}

}  // TEST_SUITE
