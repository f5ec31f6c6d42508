#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dresfl/pinn.hpp"

using namespace dresfl;

namespace {

PinnModel<mpz_class> tiny_affine() {
    // y = 2x + 1
    PinnModel<mpz_class> m;
    m.arch = PinnArch({1, 1});
    m.weights = {IntMatrix(1, 1, mpz_class(2))};
    m.biases = {{mpz_class(1)}};
    return m;
}

}  // namespace

TEST_CASE("arch bookkeeping") {
    PinnArch arch({4, 3, 2});
    CHECK(arch.n_activations() == 1);
    CHECK(arch.n_affine() == 2);
    CHECK(arch.param_count() == (3 * 4 + 3) + (2 * 3 + 2));
    CHECK_THROWS_AS(PinnArch({5}), ConfigError);
    CHECK_THROWS_AS(PinnArch({5, 0, 1}), ConfigError);
}

TEST_CASE("gradient degree doubles per activation layer") {
    CHECK(degree_of_gradient(0) == 2);
    CHECK(degree_of_gradient(1) == 4);
    CHECK(degree_of_gradient(2) == 8);
    CHECK(degree_of_gradient(3) == 16);
}

TEST_CASE("forward: single affine layer") {
    PinnModel<mpz_class> m = tiny_affine();
    IntMatrix x(1, 1, mpz_class(3));
    CHECK(m.forward(x)(0, 0) == 7);
    CHECK_THROWS_AS(m.forward(IntMatrix(1, 2, mpz_class(0))), DomainError);
}

TEST_CASE("forward: the hidden activation squares") {
    // x -> 3x -> (3x)^2 -> passthrough affine
    PinnModel<mpz_class> m;
    m.arch = PinnArch({1, 1, 1});
    m.weights = {IntMatrix(1, 1, mpz_class(3)), IntMatrix(1, 1, mpz_class(1))};
    m.biases = {{mpz_class(0)}, {mpz_class(0)}};
    IntMatrix x(1, 1, mpz_class(1));
    CHECK(m.forward(x)(0, 0) == 9);
    x(0, 0) = -2;
    CHECK(m.forward(x)(0, 0) == 36);
}

TEST_CASE("gradient: hand-computed single-sample case") {
    // out = 2*3+1 = 7, y = 2, delta = 2*(7-2) = 10 -> dW = 30, db = 10.
    PinnModel<mpz_class> m = tiny_affine();
    IntMatrix x(1, 1, mpz_class(3)), y(1, 1, mpz_class(2));
    auto g = m.gradient(x, y);
    REQUIRE(g.size() == 2);
    CHECK(g[0] == 30);
    CHECK(g[1] == 10);
    CHECK_THROWS_AS(m.gradient(IntMatrix(0, 1), IntMatrix(0, 1)), DomainError);
}

TEST_CASE("gradient matches a central finite difference in the real carrier") {
    PinnArch arch({2, 2, 1});
    std::mt19937_64 rng(31);
    PinnModel<double> m = realize_model(init_integer_model(arch, 3, rng));
    RealMatrix x(3, 2), y(3, 1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (auto& v : x.data()) v = unit(rng);
    for (auto& v : y.data()) v = unit(rng);

    auto flat = m.flatten();
    auto analytic = m.gradient(x, y);
    const double h = 1e-4;
    auto loss = [&](const std::vector<double>& params) {
        auto probe = PinnModel<double>::unflatten(arch, params);
        RealMatrix out = probe.forward(x);
        double acc = 0;
        for (std::size_t i = 0; i < out.data().size(); ++i) {
            double d = out.data()[i] - y.data()[i];
            acc += d * d;
        }
        return acc;
    };
    for (std::size_t i = 0; i < flat.size(); ++i) {
        auto up = flat, dn = flat;
        up[i] += h;
        dn[i] -= h;
        double fd = (loss(up) - loss(dn)) / (2 * h);
        CHECK(std::abs(fd - analytic[i]) <=
              1e-5 * std::max(1.0, std::max(std::abs(fd), std::abs(analytic[i]))));
    }
}

TEST_CASE("field and integer carriers agree inside capacity") {
    FieldParams params = FieldParams::from_expression("2^200-75");
    PinnArch arch({3, 2, 2});
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<long> dist(-8, 8);
    for (int trial = 0; trial < 25; ++trial) {
        PinnModel<mpz_class> m = init_integer_model(arch, 5, rng);
        IntMatrix x(4, 3), y(4, 2);
        for (auto& v : x.data()) v = dist(rng);
        for (auto& v : y.data()) v = dist(rng);

        PinnModel<FieldElement> fm = embed_model(m, params);
        FieldMatrix fx = from_signed(x, params), fy = from_signed(y, params);
        auto gi = m.gradient(x, y);
        auto gf = fm.gradient(fx, fy);
        REQUIRE(gi.size() == gf.size());
        for (std::size_t i = 0; i < gi.size(); ++i) CHECK(gf[i].to_signed() == gi[i]);

        IntMatrix fwd_i = m.forward(x);
        FieldMatrix fwd_f = fm.forward(fx);
        for (std::size_t i = 0; i < fwd_i.data().size(); ++i)
            CHECK(fwd_f.data()[i].to_signed() == fwd_i.data()[i]);
    }
}

TEST_CASE("batch gradient is the sum of per-sample gradients") {
    PinnArch arch({2, 3, 2});
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<long> dist(-6, 6);
    PinnModel<mpz_class> m = init_integer_model(arch, 4, rng);
    IntMatrix x(5, 2), y(5, 2);
    for (auto& v : x.data()) v = dist(rng);
    for (auto& v : y.data()) v = dist(rng);

    auto batched = m.gradient(x, y);
    std::vector<mpz_class> summed(batched.size(), mpz_class(0));
    for (std::size_t r = 0; r < 5; ++r) {
        std::vector<std::size_t> one{r};
        auto g = m.gradient(x.select_rows(one), y.select_rows(one));
        for (std::size_t i = 0; i < g.size(); ++i) summed[i] += g[i];
    }
    CHECK(batched == summed);
}

TEST_CASE("capacity bound: hand case and domination of sampled gradients") {
    // {1,1}, |x|<=3, |w|<=2, |y|<=2, 1 row: pre = 2*(3+1) = 8,
    // delta = 2*(8+2) = 20, dW <= 20*3 = 60.
    CHECK(capacity_bound(PinnArch({1, 1}), 3, 2, 2, 1) == 60);

    PinnArch arch({3, 2, 2});
    mpz_class bound = capacity_bound(arch, 8, 5, 8, 4);
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<long> dist(-8, 8);
    for (int trial = 0; trial < 200; ++trial) {
        PinnModel<mpz_class> m = init_integer_model(arch, 5, rng);
        IntMatrix x(4, 3), y(4, 2);
        for (auto& v : x.data()) v = dist(rng);
        for (auto& v : y.data()) v = dist(rng);
        for (const mpz_class& g : m.gradient(x, y)) CHECK(abs(g) <= bound);
    }
}

TEST_CASE("flatten/unflatten round-trip and order") {
    std::mt19937_64 rng(47);
    PinnArch arch({2, 3, 1});
    PinnModel<mpz_class> m = init_integer_model(arch, 9, rng);
    auto flat = m.flatten();
    REQUIRE(flat.size() == arch.param_count());
    CHECK(flat[0] == m.weights[0](0, 0));
    CHECK(flat[6] == m.biases[0][0]);
    PinnModel<mpz_class> back = PinnModel<mpz_class>::unflatten(arch, flat);
    CHECK(back.weights[0] == m.weights[0]);
    CHECK(back.biases[1] == m.biases[1]);
    flat.pop_back();
    CHECK_THROWS_AS(PinnModel<mpz_class>::unflatten(arch, flat), DomainError);
}

TEST_CASE("checkpoint round-trip") {
    std::mt19937_64 rng(53);
    PinnArch arch({4, 3, 2});
    PinnModel<mpz_class> m = init_integer_model(arch, 1000, rng);
    m.weights[0](0, 0) = mpz_class("-123456789012345678901234567890");
    std::stringstream buf;
    save_checkpoint(m, "2^200-75", buf);
    std::string expr;
    PinnModel<mpz_class> back = load_checkpoint(buf, &expr);
    CHECK(expr == "2^200-75");
    CHECK(back.arch == m.arch);
    CHECK(back.flatten() == m.flatten());

    std::stringstream junk("something else\n");
    CHECK_THROWS_AS(load_checkpoint(junk, nullptr), IoError);
}
