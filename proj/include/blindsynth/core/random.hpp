#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace blindsynth {

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Folds a list of integers into one seed, order-sensitive.
[[nodiscard]] inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t s = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t p : parts) {
        s ^= p + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
        std::uint64_t tmp = s;
        s = splitmix64(tmp);
    }
    return s;
}

/// xoshiro256** 1.0 (Blackman & Vigna), seeded through splitmix64. Every
/// derived quantity below uses only integer ops and exact scaling, so streams
/// are identical across platforms and standard libraries.
class Xoshiro256 {
public:
    static constexpr const char* kName = "xoshiro256**";

    using result_type = std::uint64_t;
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    explicit Xoshiro256(std::uint64_t seed) noexcept {
        for (auto& s : state_) s = splitmix64(seed);
    }

    /// Raw state, for reference-vector checks. Must not be all zero.
    [[nodiscard]] static Xoshiro256 from_state(const std::array<std::uint64_t, 4>& state) {
        if (state == std::array<std::uint64_t, 4>{}) throw std::invalid_argument("xoshiro state must be nonzero");
        Xoshiro256 g(0);
        g.state_ = state;
        return g;
    }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("below: n must be > 0");
        const std::uint64_t limit = max() - max() % n;
        std::uint64_t v = 0;
        do {
            v = (*this)();
        } while (v >= limit);
        return v % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace blindsynth
