#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace ietlab {
template <class S> class BasicIet;
class SymLogRoof;
} // namespace ietlab

namespace ietlab::kernels {

inline constexpr std::size_t max_d = 16;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Flat lookup tables for the data-parallel inner loops.
struct IetTables {
    int d = 0;
    double beta[max_d + 1] = {};  // beta_0 .. beta_d
    double delta[max_d] = {};     // translation per interval
};

struct RoofTables {
    int d = 0;
    double beta[max_d + 1] = {};
    double cplus[max_d + 1] = {};  // weight of -log(x - beta_i), i = 0..d-1
    double cminus[max_d + 1] = {}; // weight of -log(beta_i - x), i = 1..d
    double gslope[max_d] = {};
    double gicept[max_d] = {};
};

// Per-lane running minima of one-sided distances to every endpoint.
struct ClosestTrack {
    std::size_t lanes = 0;
    int d = 0;
    std::vector<double> m_plus;   // (d+1) x lanes, +inf when never approached
    std::vector<double> m_minus;
    bool with_args = false;       // scalar kernel only
    std::vector<long> arg_plus;   // step index realizing each minimum
    std::vector<long> arg_minus;

    void init(int d_, std::size_t lanes_, bool args = false) {
        d = d_;
        lanes = lanes_;
        m_plus.assign(static_cast<std::size_t>(d + 1) * lanes, kInf);
        m_minus.assign(static_cast<std::size_t>(d + 1) * lanes, kInf);
        with_args = args;
        if (args) {
            arg_plus.assign(m_plus.size(), -1);
            arg_minus.assign(m_minus.size(), -1);
        }
    }
};

struct Funcs {
    const char* name;
    // x[lane] <- T^steps(x[lane]); min_dist[lane] (optional) collects the
    // smallest endpoint distance seen over the visited points.
    void (*orbit)(const IetTables&, double* x, std::size_t lanes, long steps,
                  double* min_dist);
    // acc[lane] += sum_{k<steps} f^(order)(T^k x[lane]); x advanced in place.
    void (*birkhoff)(const IetTables&, const RoofTables&, int order, double* x, double* acc,
                     std::size_t lanes, long steps, double* min_dist, ClosestTrack* track);
    // out[i] = f^(order)(x[i]) without moving the points.
    void (*roof_eval)(const RoofTables&, int order, const double* x, double* out,
                      std::size_t n);
    // Advance (x, s) with 0 <= s < f(x) forward by time t >= 0, counting roof
    // crossings; lanes whose orbit comes within `tol` of an endpoint get
    // flagged and frozen. Returns false when the step budget ran out.
    bool (*flow)(const IetTables&, const RoofTables&, double* x, double* s, long long* ncross,
                 std::size_t lanes, double t, long long step_budget, double tol,
                 std::uint8_t* flagged);
};

const Funcs& scalar_funcs();
#if defined(__x86_64__) || defined(_M_X64)
const Funcs& avx2_funcs();
#endif
bool avx2_available();

// Runtime-selected implementation; `select` accepts "auto", "scalar", "avx2".
const Funcs& active();
void select(const std::string& name);
std::string active_name();

IetTables make_iet_tables(const BasicIet<double>& t);
RoofTables make_roof_tables(const SymLogRoof& f);

} // namespace ietlab::kernels
