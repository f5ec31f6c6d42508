#ifndef DRESFL_VERIFY_HPP
#define DRESFL_VERIFY_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dresfl/field.hpp"

namespace dresfl {

struct PropertyResult {
    std::string name;
    bool pass = false;
};

// Fixed-seed property suites behind `dresfl verify --suite <s>`.
std::vector<PropertyResult> verify_field();
std::vector<PropertyResult> verify_coding();
std::vector<PropertyResult> verify_pinn();
std::vector<PropertyResult> verify_protocol();

// Reusable single checks (also exercised by the acceptance suite).
namespace checks {

// Gradient entries along a field-linear input path are polynomials in the
// path parameter of degree exactly 2^{L+1}: interpolation from 2^{L+1}+1
// points predicts a held-out evaluation, and from 2^{L+1} points it does not
// (for a generic model; degenerate draws are resampled).
bool degree_interpolation(int n_activations, const FieldParams& params, std::mt19937_64& rng);

// Chi-square statistic over F_p of one encoded share entry under fresh
// uniform masks. df = p-1.
double share_chi_square(const FieldParams& params, int privacy, int n_draws,
                        std::uint64_t seed);

// chi-square 0.99 quantile at 96 degrees of freedom (p = 97 bins).
inline constexpr double kChiSq99Df96 = 131.14;

}  // namespace checks

}  // namespace dresfl

#endif
