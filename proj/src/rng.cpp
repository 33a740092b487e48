#include "wienerlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace wienerlab {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint64_t kM0 = 0xD2511F53u;
    constexpr std::uint64_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = kM0 * ctr[0];
        const std::uint64_t p1 = kM1 * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

std::array<std::uint64_t, 2> CounterRng::bits(std::uint64_t index) const {
    const auto out = philox4x32({static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
                                 static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)},
                                {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    return {(std::uint64_t{out[0]} << 32) | out[1], (std::uint64_t{out[2]} << 32) | out[3]};
}

std::array<double, 2> CounterRng::uniforms(std::uint64_t index) const {
    const auto b = bits(index);
    constexpr double kScale = 0x1.0p-53;
    return {static_cast<double>(b[0] >> 11) * kScale, static_cast<double>(b[1] >> 11) * kScale};
}

std::array<double, 2> CounterRng::normals(std::uint64_t index) const {
    const auto u = uniforms(index);
    const double radius = std::sqrt(-2.0 * std::log(1.0 - u[0]));
    const double angle = 2.0 * std::numbers::pi * u[1];
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace wienerlab
