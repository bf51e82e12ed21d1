#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

// Seeded randomness with explicit substreams.
//
// Every consumer of randomness draws from an engine derived from
// (seed, stream tag, substream index). Samplers that conceptually loop over
// points give each point its own substream, so a point's draws do not depend
// on how the loop is chunked across threads or on how many points precede it
// being processed elsewhere. The raw engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the uniform and normal transforms are
// spelled out below instead of using std::*_distribution, whose streams vary
// across standard libraries.

namespace pielm::rng {

using Engine = std::mt19937_64;

/// splitmix64 finalizer; bijective 64-bit mixer used to key substreams.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Purpose tags keeping independent uses of the same user seed apart.
enum class Stream : std::uint64_t {
    weights = 0x11,
    interior = 0x21,
    spatial_boundary = 0x22,
    temporal_boundary = 0x23,
    test_points = 0x24,
    boundary_mc = 0x31,
    oracle_mc = 0x32,
};

inline Engine substream(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
    const std::uint64_t key =
        mix64(mix64(seed ^ 0x5bf0363546e95f13ULL) + static_cast<std::uint64_t>(stream));
    return Engine(mix64(key + index));
}

/// Uniform on the open interval (0, 1): top 52 bits offset by half an ulp,
/// so 0 and 1 are never produced and log() below is safe.
inline double uniform_open01(Engine& g) {
    return (static_cast<double>(g() >> 12) + 0.5) * 0x1.0p-52;
}

inline double uniform(Engine& g, double lo, double hi) {
    return lo + (hi - lo) * uniform_open01(g);
}

/// Standard normals via Box-Muller. Generates in pairs; callers that care
/// about draw order see cos-term first, sin-term second.
class NormalGen {
public:
    explicit NormalGen(Engine& g) : g_(&g) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open01(*g_);
        const double u2 = uniform_open01(*g_);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi_v<double> * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    Engine* g_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace pielm::rng
