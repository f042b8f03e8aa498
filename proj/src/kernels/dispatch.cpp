#include <atomic>
#include <cstdlib>
#include <string>

#include "smokegram/errors.hpp"
#include "smokegram/kernels.hpp"

namespace smokegram::kernels {
namespace {

const Ops* detect_best() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2")) {
        return &avx2_ops;
    }
#endif
#if defined(__aarch64__)
    return &neon_ops;
#endif
    return &scalar_ops;
}

const Ops* resolve(const std::string& name) {
    if (name == "auto") {
        return detect_best();
    }
    if (name == "scalar") {
        return &scalar_ops;
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (name == "avx2") {
        if (!__builtin_cpu_supports("avx2")) {
            throw Error("kernel backend 'avx2' not supported by this CPU");
        }
        return &avx2_ops;
    }
#endif
#if defined(__aarch64__)
    if (name == "neon") {
        return &neon_ops;
    }
#endif
    throw Error("unknown kernel backend '" + name + "'");
}

std::atomic<const Ops*> g_active{nullptr};

const Ops* init_from_env() {
    if (const char* env = std::getenv("SMOKEGRAM_KERNELS")) {
        return resolve(env);
    }
    return detect_best();
}

} // namespace

const Ops& active() {
    const Ops* ops = g_active.load(std::memory_order_acquire);
    if (ops == nullptr) {
        ops = init_from_env();
        g_active.store(ops, std::memory_order_release);
    }
    return *ops;
}

void set_backend(const std::string& name) {
    g_active.store(resolve(name), std::memory_order_release);
}

std::vector<const Ops*> available() {
    std::vector<const Ops*> out;
    out.push_back(&scalar_ops);
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2")) {
        out.push_back(&avx2_ops);
    }
#endif
#if defined(__aarch64__)
    out.push_back(&neon_ops);
#endif
    return out;
}

} // namespace smokegram::kernels
