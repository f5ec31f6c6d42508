#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <random>
#include <sstream>

#include "dresfl/lcc.hpp"

using namespace dresfl;

namespace {
FieldParams p97{mpz_class(97)};
}

TEST_CASE("evaluation points are distinct, disjoint, deterministic") {
    auto [alphas, betas] = gen_eval_points(3, 1, 1, p97);
    REQUIRE(betas.size() == 2);
    REQUIRE(alphas.size() == 3);
    CHECK(betas[0].residue() == 1);
    CHECK(betas[1].residue() == 2);
    CHECK(alphas[0].residue() == 3);
    CHECK(alphas[2].residue() == 5);

    FieldParams big = FieldParams::from_expression("2^200-75");
    auto [a2, b2] = gen_eval_points(20, 1, 1, big);
    CHECK(a2.size() + b2.size() == 22);

    CHECK_THROWS_AS(gen_eval_points(96, 2, 1, p97), ConfigError);
}

TEST_CASE("feasibility: Theorem-1 style threshold arithmetic") {
    FieldParams big = FieldParams::from_expression("2^61-1");
    CodingConfig cfg = CodingConfig::create(20, 1, 1, 8, big);
    CHECK(cfg.decode_threshold() == 9);
    CHECK(cfg.max_dropouts() == 11);
    CHECK(CodingConfig::create(10, 1, 1, 8, big).max_dropouts() == 1);
    CHECK_THROWS_AS(CodingConfig::create(9, 2, 1, 8, big), ConfigError);
}

TEST_CASE("encoding interpolates through the shards at the betas") {
    // K=1, T=1: u(beta_1) = shard regardless of the mask.
    CodingConfig cfg = CodingConfig::create(3, 1, 1, 2, p97);
    FieldMatrix shard(1, 1, FieldElement(5, p97));
    FieldMatrix mask(1, 1, FieldElement(77, p97));
    auto enc = encode_dataset({shard}, {mask}, cfg.betas, {cfg.betas[0]});
    CHECK(enc[0](0, 0).residue() == 5);

    // K=1, T=0: the polynomial is constant.
    CodingConfig plain = CodingConfig::create(3, 1, 0, 2, p97);
    auto enc2 = encode_dataset({shard}, {}, plain.betas, plain.alphas);
    for (const auto& m : enc2) CHECK(m(0, 0).residue() == 5);
}

TEST_CASE("encode then evaluate at betas recovers shards and masks") {
    CodingConfig cfg = CodingConfig::create(5, 2, 1, 2, p97);
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<long> val(0, 96);
    std::vector<FieldMatrix> shards, masks;
    for (int k = 0; k < 2; ++k) {
        FieldMatrix m(2, 3);
        for (auto& v : m.data()) v = FieldElement(val(rng), p97);
        shards.push_back(m);
    }
    {
        FieldMatrix m(2, 3);
        for (auto& v : m.data()) v = FieldElement(val(rng), p97);
        masks.push_back(m);
    }
    auto at_betas = encode_dataset(shards, masks, cfg.betas, cfg.betas);
    CHECK(at_betas[0] == shards[0]);
    CHECK(at_betas[1] == shards[1]);
    CHECK(at_betas[2] == masks[0]);
}

TEST_CASE("interpolation basics") {
    // Degree 0.
    std::vector<std::pair<FieldElement, std::vector<FieldElement>>> single{
        {FieldElement(1, p97), {FieldElement(7, p97)}}};
    CHECK(lagrange_interpolate_eval(single, FieldElement(50, p97))[0].residue() == 7);

    // q(z) = z^2 + 1 through {1,2,3}, evaluated at 5 -> 26.
    std::vector<std::pair<FieldElement, std::vector<FieldElement>>> pts;
    for (long z : {1L, 2L, 3L}) {
        pts.push_back({FieldElement(z, p97), {FieldElement(z * z + 1, p97)}});
    }
    CHECK(lagrange_interpolate_eval(pts, FieldElement(5, p97))[0].residue() == 26);

    pts.push_back({FieldElement(1, p97), {FieldElement(0, p97)}});
    CHECK_THROWS_AS(lagrange_interpolate_eval(pts, FieldElement(5, p97)), DomainError);
}

TEST_CASE("interpolation recovers a random degree-4 polynomial") {
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<long> val(0, 96);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<FieldElement> coeffs;
        for (int d = 0; d <= 4; ++d) coeffs.emplace_back(val(rng), p97);
        auto horner = [&](const FieldElement& z) {
            FieldElement acc(0, p97);
            for (int d = 4; d >= 0; --d) acc = acc * z + coeffs[d];
            return acc;
        };
        std::vector<std::pair<FieldElement, std::vector<FieldElement>>> pts;
        for (long z = 11; z < 16; ++z) {
            pts.push_back({FieldElement(z, p97), {horner(FieldElement(z, p97))}});
        }
        FieldElement target(val(rng), p97);
        CHECK(lagrange_interpolate_eval(pts, target)[0] == horner(target));
    }
}

TEST_CASE("decode threshold and round-skip signal") {
    FieldParams big = FieldParams::from_expression("2^61-1");
    CodingConfig cfg = CodingConfig::create(20, 1, 1, 4, big);
    REQUIRE(cfg.decode_threshold() == 5);
    std::map<int, std::vector<FieldElement>> uploads;
    for (int j = 0; j < 4; ++j) uploads[j] = {FieldElement(j, big)};
    CHECK(!decode_gradients(uploads, cfg).has_value());
    uploads[4] = {FieldElement(4, big)};
    CHECK(decode_gradients(uploads, cfg).has_value());
}

TEST_CASE("decoded list has one entry per shard") {
    CodingConfig cfg = CodingConfig::create(8, 2, 1, 2, p97);  // threshold 5
    std::map<int, std::vector<FieldElement>> uploads;
    for (int j = 0; j < 8; ++j) uploads[j] = {FieldElement(3 * j + 1, p97)};
    auto decoded = decode_gradients(uploads, cfg);
    REQUIRE(decoded.has_value());
    CHECK(decoded->size() == 2);
}

TEST_CASE("any large-enough survivor subset decodes identically (exhaustive N=8)") {
    CodingConfig cfg = CodingConfig::create(8, 1, 1, 4, p97);
    const int need = cfg.decode_threshold();
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<long> val(0, 96);
    std::vector<FieldElement> coeffs;
    for (int d = 0; d < need; ++d) coeffs.emplace_back(val(rng), p97);
    auto horner = [&](const FieldElement& z) {
        FieldElement acc(0, p97);
        for (int d = need - 1; d >= 0; --d) acc = acc * z + coeffs[d];
        return acc;
    };
    std::vector<std::vector<FieldElement>> reference;
    for (unsigned mask = 0; mask < 256u; ++mask) {
        if (std::popcount(mask) < need) continue;
        std::map<int, std::vector<FieldElement>> uploads;
        for (int j = 0; j < 8; ++j)
            if (mask & (1u << j)) uploads[j] = {horner(cfg.alphas[j])};
        auto decoded = decode_gradients(uploads, cfg);
        REQUIRE(decoded.has_value());
        if (reference.empty()) reference = *decoded;
        else CHECK(*decoded == reference);
    }
}

TEST_CASE("share set round-trips through the binary record") {
    FieldParams big = FieldParams::from_expression("2^200-75");
    CodingConfig cfg = CodingConfig::create(6, 2, 1, 2, big);
    gmp_randclass grand(gmp_randinit_mt);
    grand.seed(21UL);
    std::vector<FieldMatrix> xs, ys;
    for (int i = 0; i < 6; ++i) {
        FieldMatrix x(4, 3), y(4, 2);
        for (auto& v : x.data()) v = FieldElement(grand.get_z_range(big.modulus()), big);
        for (auto& v : y.data()) v = FieldElement(grand.get_z_range(big.modulus()), big);
        xs.push_back(x);
        ys.push_back(y);
    }
    ShareSet set = ShareSet::build(xs, ys, cfg, 1234);

    std::stringstream buf;
    set.save(buf);
    ShareSet loaded = ShareSet::load(buf, big);
    CHECK(loaded.n_clients == set.n_clients);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            CHECK(loaded.x_enc[i][j] == set.x_enc[i][j]);
            CHECK(loaded.y_enc[i][j] == set.y_enc[i][j]);
        }
        CHECK(loaded.x_masks[i][0] == set.x_masks[i][0]);
    }
    CHECK(loaded.x_at(2) == set.x_at(2));

    std::stringstream junk("not a share record");
    CHECK_THROWS_AS(ShareSet::load(junk, big), IoError);
}

TEST_CASE("share build rejects row counts not divisible by K") {
    CodingConfig cfg = CodingConfig::create(3, 2, 0, 2, p97);
    std::vector<FieldMatrix> xs(3, FieldMatrix(3, 1, FieldElement(1, p97)));
    std::vector<FieldMatrix> ys(3, FieldMatrix(3, 1, FieldElement(1, p97)));
    CHECK_THROWS_AS(ShareSet::build(xs, ys, cfg, 1), DomainError);
}
