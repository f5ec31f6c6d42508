#include "dresfl/field.hpp"

#include <regex>

namespace dresfl {

FieldParams::FieldParams(mpz_class modulus)
    : modulus_(std::move(modulus)), expression_(modulus_.get_str()) {
    if (modulus_ < 3) {
        throw ConfigError("field modulus must be >= 3, got " + modulus_.get_str());
    }
    if (mpz_probab_prime_p(modulus_.get_mpz_t(), 40) == 0) {
        throw ConfigError("field modulus is not prime: " + modulus_.get_str());
    }
    half_ = (modulus_ - 1) / 2;
}

FieldParams FieldParams::from_expression(const std::string& expr) {
    static const std::regex pow_form(R"(^\s*2\s*\^\s*(\d+)\s*([+-])\s*(\d+)\s*$)");
    static const std::regex dec_form(R"(^\s*(\d+)\s*$)");
    std::smatch m;
    mpz_class value;
    if (std::regex_match(expr, m, pow_form)) {
        unsigned long k = std::stoul(m[1].str());
        mpz_class c(m[3].str());
        mpz_ui_pow_ui(value.get_mpz_t(), 2, k);
        value += (m[2].str() == "-") ? -c : c;
    } else if (std::regex_match(expr, m, dec_form)) {
        value = mpz_class(m[1].str());
    } else {
        throw ConfigError("cannot parse field modulus expression: '" + expr + "'");
    }
    FieldParams params(value);
    params.expression_ = expr;
    return params;
}

FieldElement::FieldElement(mpz_class value, const FieldParams& params)
    : residue_(std::move(value)), params_(&params) {
    mpz_mod(residue_.get_mpz_t(), residue_.get_mpz_t(), params.modulus().get_mpz_t());
}

const FieldParams& FieldElement::checked_params(const FieldElement& other) const {
    if (params_ == nullptr || other.params_ == nullptr) {
        throw ConfigError("field element used without field parameters");
    }
    if (*params_ != *other.params_) {
        throw ConfigError("field elements belong to different moduli");
    }
    return *params_;
}

FieldElement FieldElement::operator+(const FieldElement& other) const {
    const FieldParams& p = checked_params(other);
    mpz_class r = residue_ + other.residue_;
    if (r >= p.modulus()) r -= p.modulus();
    FieldElement out;
    out.residue_ = std::move(r);
    out.params_ = &p;
    return out;
}

FieldElement FieldElement::operator-(const FieldElement& other) const {
    const FieldParams& p = checked_params(other);
    mpz_class r = residue_ - other.residue_;
    if (r < 0) r += p.modulus();
    FieldElement out;
    out.residue_ = std::move(r);
    out.params_ = &p;
    return out;
}

FieldElement FieldElement::operator*(const FieldElement& other) const {
    const FieldParams& p = checked_params(other);
    FieldElement out;
    out.residue_ = residue_ * other.residue_;
    mpz_mod(out.residue_.get_mpz_t(), out.residue_.get_mpz_t(), p.modulus().get_mpz_t());
    out.params_ = &p;
    return out;
}

bool FieldElement::operator==(const FieldElement& other) const {
    checked_params(other);
    return residue_ == other.residue_;
}

FieldElement FieldElement::inv() const {
    if (params_ == nullptr) throw ConfigError("field element used without field parameters");
    if (residue_ == 0) throw DomainError("inverse of zero in F_p");
    FieldElement out;
    mpz_invert(out.residue_.get_mpz_t(), residue_.get_mpz_t(), params_->modulus().get_mpz_t());
    out.params_ = params_;
    return out;
}

FieldElement FieldElement::pow(const mpz_class& exponent) const {
    if (params_ == nullptr) throw ConfigError("field element used without field parameters");
    FieldElement out;
    if (exponent < 0) {
        FieldElement base = inv();
        mpz_class e = -exponent;
        mpz_powm(out.residue_.get_mpz_t(), base.residue_.get_mpz_t(), e.get_mpz_t(),
                 params_->modulus().get_mpz_t());
    } else {
        mpz_powm(out.residue_.get_mpz_t(), residue_.get_mpz_t(), exponent.get_mpz_t(),
                 params_->modulus().get_mpz_t());
    }
    out.params_ = params_;
    return out;
}

mpz_class FieldElement::to_signed() const {
    if (params_ == nullptr) throw ConfigError("field element used without field parameters");
    if (residue_ < params_->half()) return residue_;
    return residue_ - params_->modulus();
}

FieldElement FieldElement::from_signed(const mpz_class& z, const FieldParams& params) {
    // Representable range is [-(p+1)/2, (p-1)/2 - 1]; anything else cannot
    // round-trip through psi.
    if (z >= params.half() || z < -(params.half() + 1)) {
        throw CapacityError("signed value " + z.get_str() +
                            " exceeds the capacity of modulus " + params.expression());
    }
    return FieldElement(z, params);
}

}  // namespace dresfl
