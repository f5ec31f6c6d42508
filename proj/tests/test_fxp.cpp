#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dresfl/fxp.hpp"

using namespace dresfl;

namespace {
FieldParams p97{mpz_class(97)};
FieldParams big = FieldParams::from_expression("2^61-1");
}

TEST_CASE("real_to_field quantizes to the closest integer") {
    QuantConfig cfg(4, 0.0, p97);
    CHECK(real_to_field(0.3, cfg).residue() == 5);  // round(4.8)
    CHECK(real_to_field(0.0, cfg).residue() == 0);
    QuantConfig shifted(4, 1.0, p97);
    CHECK(real_to_field(-0.03, shifted).residue() == 16);  // round(15.52)
    CHECK_THROWS_AS(real_to_field(-1.5, shifted), DomainError);
    CHECK_THROWS_AS(real_to_field(200.0, cfg), CapacityError);
}

TEST_CASE("field_to_real inverts the embedding") {
    QuantConfig cfg(4, 0.0, p97);
    CHECK(field_to_real(FieldElement(5, p97), cfg) == doctest::Approx(0.3125));
    QuantConfig shifted(4, 0.5, p97);
    CHECK(field_to_real(FieldElement(0, p97), shifted) == doctest::Approx(-0.5));
}

TEST_CASE("quantization error bounded by 2^-(l+1) after inversion") {
    QuantConfig cfg(8, 0.0, big);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        double x = unit(rng);
        double recovered = field_to_real(real_to_field(x, cfg), cfg);
        CHECK(std::abs(recovered - x) <= std::ldexp(1.0, -9) + 1e-12);
    }
}

TEST_CASE("stochastic rounding on integers is deterministic") {
    UnitStream stream(4);
    for (int i = 0; i < 100; ++i) {
        CHECK(stochastic_round(2.0, stream) == 2);
        CHECK(stochastic_round(-3.0, stream) == -3);
        CHECK(stochastic_round(0.0, stream) == 0);
    }
}

TEST_CASE("stochastic rounding frequencies match Eq-6 style proximity weights") {
    UnitStream stream(5);
    int ups = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        mpz_class r = stochastic_round(1.25, stream);
        CHECK((r == 1 || r == 2));
        if (r == 2) ++ups;
    }
    CHECK(std::abs(ups / static_cast<double>(n) - 0.25) < 0.01);

    int downs = 0;
    for (int i = 0; i < n; ++i) {
        mpz_class r = stochastic_round(-1.25, stream);
        CHECK((r == -2 || r == -1));
        if (r == -2) ++downs;
    }
    CHECK(std::abs(downs / static_cast<double>(n) - 0.25) < 0.01);
}

TEST_CASE("stochastic rounding is unbiased with bounded variance") {
    const int n = 100000;
    const double tol = 4.0 * std::sqrt(0.25 / n);
    for (double z : {0.1, 0.5, 1.25, -3.7}) {
        UnitStream stream(static_cast<std::uint64_t>(static_cast<long long>(z * 1000) + 10017));
        double sum = 0, sum_sq = 0;
        for (int i = 0; i < n; ++i) {
            double r = stochastic_round(z, stream).get_d();
            sum += r;
            sum_sq += (r - z) * (r - z);
        }
        double mean = sum / n;
        CHECK(std::abs(mean - z) <= tol);
        CHECK(sum_sq / n <= 0.25 + 1e-9);
    }
}

TEST_CASE("capacity invariant of the quantizer config") {
    QuantConfig cfg(4, 0.0, p97);
    CHECK_NOTHROW(cfg.check_capacity(1.0));
    CHECK_THROWS_AS(cfg.check_capacity(4.0), CapacityError);
    CHECK_THROWS_AS(QuantConfig(-1, 0.0, p97), ConfigError);
    CHECK_THROWS_AS(QuantConfig(4, -0.5, p97), ConfigError);
}
