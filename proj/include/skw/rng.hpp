#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace skw {

// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seed of the i-th derived stream. Stream contents are independent of how
// many workers consume them, so sampling stays reproducible under any split.
inline std::uint64_t derive_stream_seed(std::uint64_t root, std::uint64_t index) {
    return splitmix64_mix(root ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
}

// Minimal deterministic uniform generator over [0,1).
class UnitRng {
public:
    explicit UnitRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Inverse-CDF draw from a cumulative weight table (cum.back() == 1).
inline int draw_index(std::span<const double> cum, double u) {
    int lo = 0;
    int hi = static_cast<int>(cum.size()) - 1;
    while (lo < hi) {
        int mid = (lo + hi) / 2;
        if (u < cum[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return lo;
}

inline std::vector<double> cumulative_weights(std::span<const double> w) {
    std::vector<double> cum(w.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        cum[i] = acc;
    }
    if (!cum.empty()) cum.back() = 1.0;
    return cum;
}

} // namespace skw
