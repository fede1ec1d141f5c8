#include "polydiv/rng.hpp"

#include <cmath>

namespace polydiv {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& ctr, std::uint32_t k0,
                       std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const std::array<std::uint32_t, 4> next = {
        static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0,
        static_cast<std::uint32_t>(p1),
        static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1,
        static_cast<std::uint32_t>(p0)};
    ctr = next;
}

inline double to_unit(std::uint32_t x) {
    return (static_cast<double>(x) + 0.5) * 0x1p-32;
}

} // namespace

std::array<std::uint32_t, 4> CounterRng::raw(std::uint32_t path, std::uint32_t step,
                                             std::uint32_t substream,
                                             std::uint32_t block) const {
    std::array<std::uint32_t, 4> ctr = {path, step, substream, block};
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int r = 0; r < 10; ++r) {
        round_once(ctr, k0, k1);
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return ctr;
}

std::array<double, 4> CounterRng::uniforms(std::uint32_t path, std::uint32_t step,
                                           std::uint32_t substream,
                                           std::uint32_t block) const {
    const std::array<std::uint32_t, 4> r = raw(path, step, substream, block);
    return {to_unit(r[0]), to_unit(r[1]), to_unit(r[2]), to_unit(r[3])};
}

std::array<double, 4> CounterRng::normals(std::uint32_t path, std::uint32_t step,
                                          std::uint32_t substream,
                                          std::uint32_t block) const {
    const std::array<double, 4> u = uniforms(path, step, substream, block);
    const double r0 = std::sqrt(-2.0 * std::log(u[0]));
    const double a0 = 2.0 * M_PI * u[1];
    const double r1 = std::sqrt(-2.0 * std::log(u[2]));
    const double a1 = 2.0 * M_PI * u[3];
    return {r0 * std::cos(a0), r0 * std::sin(a0), r1 * std::cos(a1),
            r1 * std::sin(a1)};
}

int CounterRng::poisson(double mean, std::uint32_t path, std::uint32_t step,
                        std::uint32_t substream, std::uint32_t block) const {
    const double u = uniforms(path, step, substream, block)[0];
    double p = std::exp(-mean);
    double cdf = p;
    int k = 0;
    while (u > cdf && k < 64) {
        ++k;
        p *= mean / k;
        cdf += p;
    }
    return k;
}

} // namespace polydiv
