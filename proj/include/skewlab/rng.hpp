#pragma once

#include <cstdint>

namespace skewlab {

// SplitMix64 as a UniformRandomBitGenerator. Streams are addressed by
// (seed, index) so results do not depend on how work is split across threads.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t state = 0) : state_(state) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }

    result_type operator()()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n), n > 0
    int below(int n) { return static_cast<int>(((*this)() >> 32) * static_cast<std::uint64_t>(n) >> 32); }

private:
    std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t x)
{
    x = (x ^ (x >> 33)) * 0xff51afd7ed558ccdULL;
    x = (x ^ (x >> 33)) * 0xc4ceb9fe1a85ec53ULL;
    return x ^ (x >> 33);
}

inline SplitMix64 stream(std::uint64_t seed, std::uint64_t index)
{
    return SplitMix64(mix64(seed * 0x9e3779b97f4a7c15ULL + mix64(index + 0x632be59bd9b4e019ULL)));
}

} // namespace skewlab
