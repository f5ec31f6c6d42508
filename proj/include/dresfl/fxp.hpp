#ifndef DRESFL_FXP_HPP
#define DRESFL_FXP_HPP

#include <cstdint>

#include "dresfl/field.hpp"
#include "dresfl/matrix.hpp"
#include "dresfl/rng.hpp"

namespace dresfl {

// Fixed-point embedding of real data: x -> Round(2^l * (x + c)).
struct QuantConfig {
    int scale_bits = 0;   // l
    double shift = 0.0;   // c
    const FieldParams* params = nullptr;

    QuantConfig() = default;
    QuantConfig(int l, double c, const FieldParams& p);

    double scale() const;  // 2^l

    // Largest |input| the embedding can carry without wrapping.
    void check_capacity(double max_abs_input) const;
};

// Element-wise Round(2^l * (x + c)) embedded into F_p. Rounding is
// half-away-from-zero; x + c must be nonnegative.
FieldMatrix real_to_field(const RealMatrix& x, const QuantConfig& cfg);
FieldElement real_to_field(double x, const QuantConfig& cfg);

// Integer form of the same transform (no field embedding).
IntMatrix real_to_int(const RealMatrix& x, const QuantConfig& cfg);

// Inverse transform: to_signed, divide by 2^l, subtract c.
RealMatrix field_to_real(const FieldMatrix& a, const QuantConfig& cfg);
double field_to_real(const FieldElement& a, const QuantConfig& cfg);

// Unbiased randomized rounding: floor(z) w.p. 1 - frac(z), floor(z)+1 w.p.
// frac(z). Expectation over the stream equals z.
mpz_class stochastic_round(double z, UnitStream& stream);

}  // namespace dresfl

#endif
