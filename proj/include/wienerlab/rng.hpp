#pragma once

#include <array>
#include <cstdint>

namespace wienerlab {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Stateless generator: every value is a pure function of (seed, stream, index),
/// so draws do not depend on evaluation order or thread count.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::array<std::uint64_t, 2> bits(std::uint64_t index) const;
    /// Two independent uniforms in [0, 1).
    std::array<double, 2> uniforms(std::uint64_t index) const;
    /// Two independent standard normals (Box-Muller).
    std::array<double, 2> normals(std::uint64_t index) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

}  // namespace wienerlab
