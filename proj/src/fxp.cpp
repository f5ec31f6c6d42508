#include "dresfl/fxp.hpp"

#include <cmath>

namespace dresfl {

QuantConfig::QuantConfig(int l, double c, const FieldParams& p)
    : scale_bits(l), shift(c), params(&p) {
    if (l < 0) throw ConfigError("quantization scale_bits must be >= 0");
    if (c < 0) throw ConfigError("quantization shift must be >= 0");
}

double QuantConfig::scale() const { return std::ldexp(1.0, scale_bits); }

void QuantConfig::check_capacity(double max_abs_input) const {
    mpz_class bound(std::ceil(scale() * (max_abs_input + shift)));
    if (bound >= params->half()) {
        throw CapacityError("quantized inputs up to " + bound.get_str() +
                            " do not fit modulus " + params->expression());
    }
}

namespace {

mpz_class quantize_entry(double x, const QuantConfig& cfg) {
    double shifted = x + cfg.shift;
    if (shifted < 0) {
        throw DomainError("input " + std::to_string(x) + " still negative after shift " +
                          std::to_string(cfg.shift));
    }
    // Half away from zero; shifted is nonnegative here.
    return mpz_class(std::floor(cfg.scale() * shifted + 0.5));
}

}  // namespace

FieldElement real_to_field(double x, const QuantConfig& cfg) {
    return FieldElement::from_signed(quantize_entry(x, cfg), *cfg.params);
}

FieldMatrix real_to_field(const RealMatrix& x, const QuantConfig& cfg) {
    FieldMatrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = real_to_field(x(r, c), cfg);
    return out;
}

IntMatrix real_to_int(const RealMatrix& x, const QuantConfig& cfg) {
    IntMatrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = quantize_entry(x(r, c), cfg);
    return out;
}

double field_to_real(const FieldElement& a, const QuantConfig& cfg) {
    return a.to_signed().get_d() / cfg.scale() - cfg.shift;
}

RealMatrix field_to_real(const FieldMatrix& a, const QuantConfig& cfg) {
    RealMatrix out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = field_to_real(a(r, c), cfg);
    return out;
}

mpz_class stochastic_round(double z, UnitStream& stream) {
    double fl = std::floor(z);
    double frac = z - fl;
    mpz_class base(fl);
    if (frac > 0.0 && stream.next() < frac) base += 1;
    return base;
}

}  // namespace dresfl
