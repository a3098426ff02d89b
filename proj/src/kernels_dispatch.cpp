#include <atomic>
#include <stdexcept>

#include "ietlab/errors.hpp"
#include "ietlab/iet.hpp"
#include "ietlab/kernels/kernels.hpp"
#include "ietlab/roof.hpp"

namespace ietlab::kernels {

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {
std::atomic<const Funcs*> g_active{nullptr};

const Funcs* pick_auto() {
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_available()) return &avx2_funcs();
#endif
    return &scalar_funcs();
}
} // namespace

const Funcs& active() {
    const Funcs* f = g_active.load(std::memory_order_acquire);
    if (!f) {
        f = pick_auto();
        g_active.store(f, std::memory_order_release);
    }
    return *f;
}

void select(const std::string& name) {
    if (name == "auto") g_active.store(pick_auto(), std::memory_order_release);
    else if (name == "scalar") g_active.store(&scalar_funcs(), std::memory_order_release);
    else if (name == "avx2") {
#if defined(__x86_64__) || defined(_M_X64)
        if (!avx2_available()) throw Error("avx2 not available on this cpu");
        g_active.store(&avx2_funcs(), std::memory_order_release);
#else
        throw Error("avx2 not available on this platform");
#endif
    } else {
        throw Error("unknown kernel '" + name + "'");
    }
}

std::string active_name() { return active().name; }

IetTables make_iet_tables(const BasicIet<double>& t) {
    if (t.size() > max_d) throw Error("too many intervals for the kernel tables");
    IetTables out;
    out.d = static_cast<int>(t.size());
    for (std::size_t i = 0; i <= t.size(); ++i) out.beta[i] = t.endpoints()[i];
    for (std::size_t i = 0; i < t.size(); ++i) out.delta[i] = t.displacements()[i];
    return out;
}

RoofTables make_roof_tables(const SymLogRoof& f) {
    if (f.endpoints().size() - 1 > max_d) throw Error("too many intervals for the kernel tables");
    RoofTables out;
    out.d = static_cast<int>(f.endpoints().size() - 1);
    for (std::size_t i = 0; i < f.endpoints().size(); ++i) out.beta[i] = f.endpoints()[i];
    for (std::size_t i = 0; i <= static_cast<std::size_t>(out.d); ++i) {
        out.cplus[i] = f.cplus_at(i);
        out.cminus[i] = f.cminus_at(i);
    }
    for (int i = 0; i < out.d; ++i) {
        out.gslope[i] = f.g().slopes[i];
        out.gicept[i] = f.g().intercepts[i];
    }
    return out;
}

} // namespace ietlab::kernels
