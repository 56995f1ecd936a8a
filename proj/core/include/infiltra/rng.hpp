#pragma once

#include <cstdint>

namespace infiltra {

// Counter-based generator: a keyed avalanche hash of (seed, stream, counter).
// No sequential state, so any evaluation order -- including parallel pixel
// sweeps -- produces identical draws.
inline std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t counter) {
    std::uint64_t h = mix64(seed + 0x9E3779B97F4A7C15ull);
    h = mix64(h ^ (stream + 0xD1B54A32D192ED03ull));
    h = mix64(h ^ (counter + 0x8CB92BA72F3D8DD7ull));
    return h;
}

// Uniform double in [0, 1) with 53 significant bits.
inline double counter_uniform01(std::uint64_t seed, std::uint64_t stream,
                                std::uint64_t counter) {
    return static_cast<double>(counter_hash(seed, stream, counter) >> 11) * 0x1.0p-53;
}

}  // namespace infiltra
