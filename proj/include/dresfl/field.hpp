#ifndef DRESFL_FIELD_HPP
#define DRESFL_FIELD_HPP

#include <gmpxx.h>

#include <string>

#include "dresfl/errors.hpp"

namespace dresfl {

// The prime field F_p. Residues live in [0, p); the signed view maps them
// onto Z_p = {-(p+1)/2, ..., (p-1)/2 - 1} (residues below (p-1)/2 keep their
// value, the rest wrap to residue - p).
class FieldParams {
public:
    // Verifies primality with a Miller-Rabin test (40 rounds) and p >= 3.
    explicit FieldParams(mpz_class modulus);

    // Accepts a decimal integer or a "2^k-c" / "2^k+c" expression.
    static FieldParams from_expression(const std::string& expr);

    const mpz_class& modulus() const { return modulus_; }
    const mpz_class& half() const { return half_; }  // (p-1)/2
    const std::string& expression() const { return expression_; }

    bool operator==(const FieldParams& other) const { return modulus_ == other.modulus_; }
    bool operator!=(const FieldParams& other) const { return !(*this == other); }

private:
    mpz_class modulus_;
    mpz_class half_;
    std::string expression_;
};

class FieldElement {
public:
    FieldElement() : residue_(0), params_(nullptr) {}
    FieldElement(mpz_class value, const FieldParams& params);

    const mpz_class& residue() const { return residue_; }
    const FieldParams* params() const { return params_; }

    FieldElement operator+(const FieldElement& other) const;
    FieldElement operator-(const FieldElement& other) const;
    FieldElement operator*(const FieldElement& other) const;
    FieldElement& operator+=(const FieldElement& other) { return *this = *this + other; }
    FieldElement& operator-=(const FieldElement& other) { return *this = *this - other; }
    FieldElement& operator*=(const FieldElement& other) { return *this = *this * other; }

    bool operator==(const FieldElement& other) const;
    bool operator!=(const FieldElement& other) const { return !(*this == other); }

    // Multiplicative inverse; rejects zero.
    FieldElement inv() const;
    FieldElement pow(const mpz_class& exponent) const;

    bool is_zero() const { return residue_ == 0; }

    // psi: residue if residue < (p-1)/2, else residue - p.
    mpz_class to_signed() const;

    // Inverse embedding of psi; z must lie in [-(p+1)/2, (p-1)/2 - 1].
    static FieldElement from_signed(const mpz_class& z, const FieldParams& params);

private:
    const FieldParams& checked_params(const FieldElement& other) const;

    mpz_class residue_;
    const FieldParams* params_;
};

// Zero element carrying the same field context as `like`.
inline FieldElement field_zero(const FieldElement& like) {
    return FieldElement(0, *like.params());
}

}  // namespace dresfl

#endif
