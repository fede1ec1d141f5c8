#pragma once

#include <array>
#include <cstdint>

namespace polydiv {

// Counter-based generator (Philox4x32-10).  Every draw is a pure function
// of (seed, path, step, substream, block), so simulation output does not
// depend on scheduling, thread count, or batch size.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)) {}

    std::array<std::uint32_t, 4> raw(std::uint32_t path, std::uint32_t step,
                                     std::uint32_t substream, std::uint32_t block) const;

    // four uniforms in (0,1)
    std::array<double, 4> uniforms(std::uint32_t path, std::uint32_t step,
                                   std::uint32_t substream, std::uint32_t block) const;

    // four standard normals (Box-Muller on one block)
    std::array<double, 4> normals(std::uint32_t path, std::uint32_t step,
                                  std::uint32_t substream, std::uint32_t block) const;

    // Poisson count by CDF inversion of the block's first uniform
    int poisson(double mean, std::uint32_t path, std::uint32_t step,
                std::uint32_t substream, std::uint32_t block) const;

private:
    std::uint32_t key0_, key1_;
};

} // namespace polydiv
