#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"
#include "labelqa/error.hpp"

namespace labelqa::simd {

#if !defined(LABELQA_HAVE_AVX2)
const KernelTable* avx2_kernels() { return nullptr; }
#endif
#if !defined(LABELQA_HAVE_NEON)
const KernelTable* neon_kernels() { return nullptr; }
#endif

std::string_view to_string(Level level) {
    switch (level) {
        case Level::Scalar: return "scalar";
        case Level::Avx2: return "avx2";
        case Level::Neon: return "neon";
    }
    return "unknown";
}

namespace {

bool cpu_supports(Level level) {
    switch (level) {
        case Level::Scalar: return true;
        case Level::Avx2:
#if defined(LABELQA_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
            return __builtin_cpu_supports("avx2") != 0;
#else
            return false;
#endif
        case Level::Neon:
#if defined(LABELQA_HAVE_NEON)
            return true;  // baseline on AArch64
#else
            return false;
#endif
    }
    return false;
}

const KernelTable* table_for(Level level) {
    if (!cpu_supports(level)) return nullptr;
    switch (level) {
        case Level::Scalar: return &scalar_kernels();
        case Level::Avx2: return avx2_kernels();
        case Level::Neon: return neon_kernels();
    }
    return nullptr;
}

const KernelTable* pick_default() {
    if (const char* env = std::getenv("LABELQA_SIMD"); env != nullptr && *env != '\0') {
        const std::string wanted(env);
        for (Level level : {Level::Scalar, Level::Avx2, Level::Neon}) {
            if (wanted == to_string(level)) {
                if (const KernelTable* t = table_for(level)) return t;
            }
        }
        // Unknown or unsupported request: fall through to autodetection.
    }
    for (Level level : {Level::Avx2, Level::Neon}) {
        if (const KernelTable* t = table_for(level)) return t;
    }
    return &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> current{pick_default()};
    return current;
}

}  // namespace

std::vector<Level> available_levels() {
    std::vector<Level> out;
    for (Level level : {Level::Scalar, Level::Avx2, Level::Neon}) {
        if (table_for(level) != nullptr) out.push_back(level);
    }
    return out;
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void set_active(Level level) {
    const KernelTable* t = table_for(level);
    if (t == nullptr) {
        throw DomainError("SIMD level '" + std::string(to_string(level)) +
                          "' is not available on this machine");
    }
    slot().store(t, std::memory_order_release);
}

}  // namespace labelqa::simd
