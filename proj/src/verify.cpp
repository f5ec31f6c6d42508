#include "dresfl/verify.hpp"

#include <cmath>
#include <map>
#include <algorithm>
#include <bit>
#include <numeric>
#include <sstream>

#include "dresfl/config.hpp"
#include "dresfl/fedsim.hpp"
#include "dresfl/fxp.hpp"
#include "dresfl/lcc.hpp"
#include "dresfl/oracle.hpp"
#include "dresfl/pinn.hpp"

namespace dresfl {

namespace checks {

bool degree_interpolation(int n_activations, const FieldParams& params, std::mt19937_64& rng) {
    std::vector<std::size_t> dims{2};
    for (int l = 0; l < n_activations; ++l) dims.push_back(2);
    dims.push_back(1);
    PinnArch arch(dims);
    const int deg = degree_of_gradient(n_activations);

    std::uniform_int_distribution<long> small(0, 9);
    auto random_field_matrix = [&](std::size_t rows, std::size_t cols) {
        FieldMatrix m(rows, cols);
        for (auto& v : m.data()) v = FieldElement(small(rng), params);
        return m;
    };

    for (int attempt = 0; attempt < 50; ++attempt) {
        PinnModel<mpz_class> im = init_integer_model(arch, 3, rng);
        PinnModel<FieldElement> model = embed_model(im, params);
        FieldMatrix x0 = random_field_matrix(2, arch.input_dim());
        FieldMatrix x1 = random_field_matrix(2, arch.input_dim());
        FieldMatrix y0 = random_field_matrix(2, arch.output_dim());
        FieldMatrix y1 = random_field_matrix(2, arch.output_dim());

        // g_entry(s) with X(s) = X0 + s X1, Y(s) = Y0 + s Y1.
        auto entry_at = [&](long s_val) {
            FieldElement s(s_val, params);
            FieldMatrix x(x0.rows(), x0.cols()), y(y0.rows(), y0.cols());
            for (std::size_t i = 0; i < x.data().size(); ++i)
                x.data()[i] = x0.data()[i] + s * x1.data()[i];
            for (std::size_t i = 0; i < y.data().size(); ++i)
                y.data()[i] = y0.data()[i] + s * y1.data()[i];
            return model.gradient(x, y).front();  // dW_1(0,0)
        };

        std::vector<std::pair<FieldElement, std::vector<FieldElement>>> pts;
        for (long s = 0; s <= deg + 1; ++s) {
            pts.emplace_back(FieldElement(s, params),
                             std::vector<FieldElement>{entry_at(s)});
        }
        const FieldElement held1 = pts[deg].second[0];
        const FieldElement held2 = pts[deg + 1].second[0];
        const FieldElement s_held1 = pts[deg].first;
        const FieldElement s_held2 = pts[deg + 1].first;

        // deg+1 points (0..deg) must reproduce the evaluation at deg+1.
        std::vector<std::pair<FieldElement, std::vector<FieldElement>>> full(pts.begin(),
                                                                             pts.begin() + deg + 1);
        if (lagrange_interpolate_eval(full, s_held2)[0] != held2) return false;

        // deg points (0..deg-1) must fail on a held-out point, unless the
        // drawn model happened to have a vanishing leading coefficient.
        std::vector<std::pair<FieldElement, std::vector<FieldElement>>> short_set(
            pts.begin(), pts.begin() + deg);
        bool mismatch = lagrange_interpolate_eval(short_set, s_held1)[0] != held1 ||
                        lagrange_interpolate_eval(short_set, s_held2)[0] != held2;
        if (mismatch) return true;
        // Degenerate (degree < 2^{L+1} for this draw): resample.
    }
    return false;
}

double share_chi_square(const FieldParams& params, int privacy, int n_draws,
                        std::uint64_t seed) {
    // One shard entry, K = 1; the observed share is shard + basis * mask
    // terms at a fixed alpha. Fresh uniform masks every draw.
    const long p = static_cast<long>(params.modulus().get_si());
    CodingConfig cfg = CodingConfig::create(3, 1, privacy, 2, params);
    FieldMatrix shard(1, 1, FieldElement(5, params));
    FieldStream masks(seed);

    std::vector<long> counts(p, 0);
    for (int d = 0; d < n_draws; ++d) {
        std::vector<FieldMatrix> mask_mats;
        for (int t = 0; t < privacy; ++t) {
            mask_mats.emplace_back(1, 1, masks.next(params));
        }
        std::vector<FieldMatrix> enc = encode_dataset({shard}, mask_mats, cfg.betas,
                                                      {cfg.alphas[0]});
        counts[enc[0](0, 0).residue().get_si()]++;
    }
    const double expected = static_cast<double>(n_draws) / p;
    double stat = 0.0;
    for (long c : counts) {
        double d = c - expected;
        stat += d * d / expected;
    }
    return stat;
}

}  // namespace checks

namespace {

// Extended Euclid, kept independent of the field module's mpz_invert path.
mpz_class egcd_inverse(const mpz_class& a, const mpz_class& p) {
    mpz_class old_r = a % p, r = p, old_s = 1, s = 0;
    while (r != 0) {
        mpz_class q = old_r / r;
        mpz_class tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
    }
    mpz_class inv = old_s % p;
    if (inv < 0) inv += p;
    return inv;
}

PropertyResult make(const std::string& name, bool pass) { return {name, pass}; }

}  // namespace

std::vector<PropertyResult> verify_field() {
    std::vector<PropertyResult> out;

    {
        FieldParams p97((mpz_class(97)));
        bool ok = true;
        for (long z = -49; z <= 47; ++z) {
            if (FieldElement::from_signed(z, p97).to_signed() != z) ok = false;
        }
        out.push_back(make("signed round-trip exhaustive p=97", ok));
    }
    {
        bool ok = true;
        for (long p : {3L, 5L, 31L, 97L, 101L}) {
            FieldParams params((mpz_class(p)));
            for (long a = 1; a < p; ++a) {
                FieldElement e(a, params);
                if (!(e * e.inv() == FieldElement(1, params))) ok = false;
                if (!(e.inv() * e == FieldElement(1, params))) ok = false;
            }
        }
        out.push_back(make("inverse exhaustive small primes", ok));
    }
    {
        FieldParams big = FieldParams::from_expression("2^200-75");
        std::mt19937_64 rng(11);
        gmp_randclass grand(gmp_randinit_mt);
        grand.seed(11UL);
        bool ok = true;
        for (int i = 0; i < 200; ++i) {
            mpz_class a = grand.get_z_range(big.modulus() - 1) + 1;
            FieldElement e(a, big);
            if (!(e * e.inv() == FieldElement(1, big))) ok = false;
            if (e.inv().residue() != egcd_inverse(a, big.modulus())) ok = false;
        }
        out.push_back(make("inverse vs extended-Euclid oracle p=2^200-75", ok));
    }
    {
        FieldParams big = FieldParams::from_expression("2^200-75");
        gmp_randclass grand(gmp_randinit_mt);
        grand.seed(12UL);
        mpz_class cap;
        mpz_ui_pow_ui(cap.get_mpz_t(), 2, 90);
        bool ok = true;
        for (int i = 0; i < 200; ++i) {
            mpz_class a = grand.get_z_range(cap) - cap / 2;
            mpz_class b = grand.get_z_range(cap) - cap / 2;
            FieldElement fa = FieldElement::from_signed(a, big);
            FieldElement fb = FieldElement::from_signed(b, big);
            if ((fa * fb).to_signed() != a * b) ok = false;
            if ((fa + fb).to_signed() != a + b) ok = false;
        }
        out.push_back(make("ring homomorphism within capacity", ok));
    }
    return out;
}

std::vector<PropertyResult> verify_coding() {
    std::vector<PropertyResult> out;
    FieldParams p97((mpz_class(97)));

    {
        // Subset invariance, exhaustive over survivor subsets for N = 8.
        CodingConfig cfg = CodingConfig::create(8, 1, 1, 4, p97);
        const int need = cfg.decode_threshold();  // 5
        std::mt19937_64 rng(21);
        std::uniform_int_distribution<long> coeff(0, 96);
        // Random degree-(need-1) vector polynomial, evaluated at all alphas.
        std::vector<std::vector<FieldElement>> coeffs(3);
        for (auto& cs : coeffs)
            for (int d = 0; d < need; ++d) cs.emplace_back(coeff(rng), p97);
        auto eval_poly = [&](const FieldElement& z) {
            std::vector<FieldElement> v;
            for (const auto& cs : coeffs) {
                FieldElement acc(0, p97);
                for (int d = need - 1; d >= 0; --d) acc = acc * z + cs[d];
                v.push_back(acc);
            }
            return v;
        };
        std::vector<std::vector<FieldElement>> reference;
        bool ok = true;
        for (unsigned mask = 0; mask < 256; ++mask) {
            if (std::popcount(mask) != need) continue;
            std::map<int, std::vector<FieldElement>> uploads;
            for (int j = 0; j < 8; ++j)
                if (mask & (1u << j)) uploads[j] = eval_poly(cfg.alphas[j]);
            auto decoded = decode_gradients(uploads, cfg);
            if (!decoded) { ok = false; break; }
            if (reference.empty()) reference = *decoded;
            else if (*decoded != reference) ok = false;
        }
        out.push_back(make("subset invariance exhaustive N=8", ok));
    }
    {
        bool ok = true;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            PinnArch arch({2, 1});  // L=0, deg 2
            CodingConfig cfg = CodingConfig::create(8, 2, 1, 2, p97);
            if (!brute_force_composite_check(arch, cfg, 2, 4, seed)) ok = false;
        }
        out.push_back(make("coded-computation identity brute force p=97", ok));
    }
    {
        PinnArch arch({2, 1});
        CodingConfig cfg = CodingConfig::create(5, 1, 1, 2, p97);
        bool ok = !brute_force_composite_check(arch, cfg, 2, 4, 1, /*corrupt=*/true);
        out.push_back(make("corrupted upload detected", ok));
    }
    {
        double stat1 = checks::share_chi_square(p97, 1, 100000, 31);
        double stat0 = checks::share_chi_square(p97, 0, 100000, 32);
        out.push_back(make("share uniformity chi-square T=1", stat1 <= checks::kChiSq99Df96));
        out.push_back(make("share determinism rejected T=0", stat0 > checks::kChiSq99Df96));
    }
    {
        // Resiliency boundary at exactly max_dropouts.
        FieldParams big = FieldParams::from_expression("2^61-1");
        CodingConfig cfg = CodingConfig::create(20, 1, 1, 8, big);
        const int need = cfg.decode_threshold();  // 9
        bool ok = cfg.max_dropouts() == 11;
        std::map<int, std::vector<FieldElement>> uploads;
        for (int j = 0; j < need; ++j) uploads[j] = {FieldElement(j + 3, big)};
        ok = ok && decode_gradients(uploads, cfg).has_value();
        uploads.erase(uploads.begin()->first);
        ok = ok && !decode_gradients(uploads, cfg).has_value();
        out.push_back(make("resiliency boundary N=20 deg=8", ok));
    }
    return out;
}

std::vector<PropertyResult> verify_pinn() {
    std::vector<PropertyResult> out;
    FieldParams p97((mpz_class(97)));

    {
        bool ok = true;
        std::mt19937_64 rng(41);
        for (int L = 0; L <= 2 && ok; ++L) {
            for (int trial = 0; trial < 20; ++trial) {
                if (!checks::degree_interpolation(L, p97, rng)) { ok = false; break; }
            }
        }
        out.push_back(make("gradient degree 2^{L+1} interpolation", ok));
    }
    {
        // Real-carrier gradient vs central finite differences.
        bool ok = true;
        std::mt19937_64 rng(42);
        for (int trial = 0; trial < 20; ++trial) {
            PinnArch arch({2, 2, 1});
            PinnModel<mpz_class> im = init_integer_model(arch, 2, rng);
            PinnModel<double> m = realize_model(im);
            RealMatrix x(2, 2), y(2, 1);
            std::uniform_real_distribution<double> unit(-1.0, 1.0);
            for (auto& v : x.data()) v = unit(rng);
            for (auto& v : y.data()) v = unit(rng);
            std::vector<double> grad = m.gradient(x, y);
            std::vector<double> flat = m.flatten();
            const double h = 1e-4;
            for (std::size_t i = 0; i < flat.size(); ++i) {
                auto loss_at = [&](double delta) {
                    std::vector<double> f2 = flat;
                    f2[i] += delta;
                    PinnModel<double> m2 = PinnModel<double>::unflatten(arch, f2);
                    RealMatrix o = m2.forward(x);
                    double s = 0;
                    for (std::size_t k = 0; k < o.data().size(); ++k) {
                        double d = o.data()[k] - y.data()[k];
                        s += d * d;
                    }
                    return s;
                };
                double fd = (loss_at(h) - loss_at(-h)) / (2 * h);
                double denom = std::max(1.0, std::abs(fd));
                if (std::abs(fd - grad[i]) / denom > 1e-5) ok = false;
            }
        }
        out.push_back(make("finite-difference gradient check", ok));
    }
    {
        // Field carrier == integer carrier through to_signed, within capacity.
        FieldParams big = FieldParams::from_expression("2^200-75");
        bool ok = true;
        std::mt19937_64 rng(43);
        std::uniform_int_distribution<long> val(-8, 8);
        for (int trial = 0; trial < 100; ++trial) {
            PinnArch arch({3, 2, 2});
            PinnModel<mpz_class> im = init_integer_model(arch, 3, rng);
            IntMatrix x(4, 3), y(4, 2);
            for (auto& v : x.data()) v = val(rng);
            for (auto& v : y.data()) v = val(rng);
            std::vector<mpz_class> gi = im.gradient(x, y);
            PinnModel<FieldElement> fm = embed_model(im, big);
            std::vector<FieldElement> gf =
                fm.gradient(from_signed(x, big), from_signed(y, big));
            for (std::size_t i = 0; i < gi.size(); ++i)
                if (gf[i].to_signed() != gi[i]) ok = false;
        }
        out.push_back(make("field/integer carrier equivalence", ok));
    }
    {
        // Batch gradient == sum of per-sample gradients, exactly.
        bool ok = true;
        std::mt19937_64 rng(44);
        std::uniform_int_distribution<long> val(-5, 5);
        PinnArch arch({3, 2, 2});
        PinnModel<mpz_class> im = init_integer_model(arch, 3, rng);
        IntMatrix x(5, 3), y(5, 2);
        for (auto& v : x.data()) v = val(rng);
        for (auto& v : y.data()) v = val(rng);
        std::vector<mpz_class> batch = im.gradient(x, y);
        std::vector<mpz_class> acc(batch.size(), 0);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            std::vector<mpz_class> g = im.gradient(x.select_rows({r}), y.select_rows({r}));
            for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
        }
        ok = acc == batch;
        out.push_back(make("batch additivity", ok));
    }
    {
        // Sampled gradients stay under capacity_bound.
        bool ok = true;
        std::mt19937_64 rng(45);
        PinnArch arch({2, 2, 1});
        std::uniform_int_distribution<long> val(-6, 6);
        mpz_class bound = capacity_bound(arch, 6, 3, 6, 3);
        for (int trial = 0; trial < 1000; ++trial) {
            PinnModel<mpz_class> im = init_integer_model(arch, 3, rng);
            IntMatrix x(3, 2), y(3, 1);
            for (auto& v : x.data()) v = val(rng);
            for (auto& v : y.data()) v = val(rng);
            for (const auto& g : im.gradient(x, y))
                if (abs(g) > bound) ok = false;
        }
        out.push_back(make("capacity bound dominates sampled gradients", ok));
    }
    return out;
}

std::vector<PropertyResult> verify_protocol() {
    std::vector<PropertyResult> out;

    ExperimentSpec spec;
    spec.dims = {4, 3, 2};
    spec.n_clients = 10;
    spec.shards = 1;
    spec.privacy = 1;
    spec.scale_bits = 3;
    spec.batch = 8;
    spec.rounds = 6;
    spec.lr = 1.0;
    spec.clip_norm = 64.0;
    spec.synth_train = 80;
    spec.synth_test = 40;
    spec.synth_dx = 4;
    spec.synth_classes = 2;
    spec.dropout_enabled = true;

    LabeledDataset train = gen_synthetic(spec.synth_train, spec.synth_dx, spec.synth_classes,
                                         spec.synth_seed);
    LabeledDataset test = gen_synthetic(spec.synth_test, spec.synth_dx, spec.synth_classes,
                                        spec.synth_seed + 1);
    ExperimentWorld world(spec, train, test);

    {
        CodedRun coded(world);
        CentralizedRun oracle(world);
        bool ok = true;
        for (int t = 0; t < spec.rounds; ++t) {
            RoundRecord a = coded.step();
            RoundRecord b = oracle.step();
            if (a.t != b.t || a.skipped != b.skipped || a.survivors != b.survivors ||
                a.grad_norm != b.grad_norm || a.train_loss != b.train_loss ||
                a.test_acc != b.test_acc) {
                ok = false;
            }
        }
        ok = ok && coded.model().flatten() == oracle.model().flatten();
        out.push_back(make("coded trajectory equals centralized oracle", ok));
    }
    {
        CodedRun a(world), b(world);
        bool ok = true;
        for (int t = 0; t < spec.rounds; ++t) {
            RoundRecord ra = a.step(), rb = b.step();
            if (ra.survivors != rb.survivors || ra.grad_norm != rb.grad_norm ||
                ra.test_acc != rb.test_acc) {
                ok = false;
            }
        }
        out.push_back(make("determinism under identical seeds", ok));
    }
    {
        // Skip rule: survivors below threshold leave the model untouched.
        CodedRun coded(world);
        std::vector<mpz_class> before = coded.model().flatten();
        std::vector<int> few;
        for (int j = 0; j < world.coding.decode_threshold() - 1; ++j) few.push_back(j);
        RoundRecord rec = coded.step_with(few);
        bool ok = rec.skipped && coded.model().flatten() == before;
        std::vector<int> enough;
        for (int j = 0; j < world.coding.decode_threshold(); ++j) enough.push_back(j);
        RoundRecord rec2 = coded.step_with(enough);
        ok = ok && !rec2.skipped;
        out.push_back(make("round-skip rule at the decode threshold", ok));
    }
    {
        // Decoded gradient independent of which clients survive.
        CodedRun coded(world);
        CentralizedRun oracle(world);
        std::vector<std::size_t> rows = sample_minibatch(spec.seeds.sampling, 0, spec.batch,
                                                         world.global.span_sizes);
        std::vector<std::vector<mpz_class>> truth = oracle.batch_gradients(rows);
        bool ok = true;
        std::mt19937_64 rng(77);
        for (int trial = 0; trial < 4; ++trial) {
            std::vector<int> ids(world.coding.n_clients);
            std::iota(ids.begin(), ids.end(), 0);
            std::shuffle(ids.begin(), ids.end(), rng);
            ids.resize(world.coding.decode_threshold());
            std::map<int, std::vector<FieldElement>> uploads;
            for (int j : ids) uploads[j] = coded.client_compute(j, rows);
            auto decoded = decode_gradients(uploads, world.coding);
            if (!decoded) { ok = false; break; }
            for (int k = 0; k < world.coding.shards; ++k) {
                for (std::size_t i = 0; i < truth[k].size(); ++i)
                    if ((*decoded)[k][i].to_signed() != truth[k][i]) ok = false;
            }
        }
        out.push_back(make("dropout-pattern invariance of decoded gradient", ok));
    }
    return out;
}

}  // namespace dresfl
