#ifndef DRESFL_RNG_HPP
#define DRESFL_RNG_HPP

#include <gmpxx.h>

#include <cstdint>
#include <random>

#include "dresfl/field.hpp"

namespace dresfl {

// Every random draw in a run flows from one of five named seeds; there is no
// ambient entropy anywhere.
struct Seeds {
    std::uint64_t sampling = 1;
    std::uint64_t masks = 2;
    std::uint64_t dropout = 3;
    std::uint64_t quantization = 4;
    std::uint64_t init = 5;
};

// splitmix64, used to derive sub-stream seeds (e.g. per client, per round).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform doubles in [0, 1).
class UnitStream {
public:
    explicit UnitStream(std::uint64_t seed) : rng_(seed) {}
    double next() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// Uniform residues in F_p.
class FieldStream {
public:
    explicit FieldStream(std::uint64_t seed) : rng_(gmp_randinit_mt) {
        rng_.seed(static_cast<unsigned long>(seed));
    }

    FieldElement next(const FieldParams& params) {
        return FieldElement(rng_.get_z_range(params.modulus()), params);
    }

private:
    gmp_randclass rng_;
};

}  // namespace dresfl

#endif
