#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <type_traits>
#include <vector>

namespace tmex {

// splitmix64 step; used both as a stream generator seeder and as a hash mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_label(std::string_view label) {
    // FNV-1a 64-bit.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace detail {

inline std::uint64_t seed_part(std::string_view label) { return hash_label(label); }

template <typename T>
std::uint64_t seed_part(T value)
    requires std::is_integral_v<T> || std::is_enum_v<T>
{
    return static_cast<std::uint64_t>(value);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t part) {
    std::uint64_t s = seed ^ (part + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
    return splitmix64(s);
}

}  // namespace detail

// Deterministic seed derivation from a base seed plus index/label parts.
// Streams derived from distinct tuples never collide in practice, so adding a
// node/repeat/cell does not perturb the draws of any other stream.
template <typename... Parts>
std::uint64_t derive_seed(std::uint64_t seed, Parts... parts) {
    ((seed = detail::mix_seed(seed, detail::seed_part(parts))), ...);
    return seed;
}

// xoshiro256++ with splitmix64 seeding. Self-contained so sequences are
// bit-identical across platforms and standard library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
        have_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via the polar method (one spare cached per instance).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Zero-mean Laplace with unit variance (b = 1/sqrt(2)).
    double laplace_unit() {
        const double u = uniform01() - 0.5;
        const double b = 1.0 / std::sqrt(2.0);
        return (u < 0.0 ? 1.0 : -1.0) * b * std::log(1.0 - 2.0 * std::fabs(u));
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Unbiased bounded integer in [0, n) via rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Fisher-Yates; independent of std::shuffle's unspecified draw order.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    bool have_spare_;
    double spare_;
};

}  // namespace tmex
