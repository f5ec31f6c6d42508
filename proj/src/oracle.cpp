#include "dresfl/oracle.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

namespace dresfl {

std::vector<mpz_class> oracle_gradient(const PinnModel<mpz_class>& model, const IntMatrix& x,
                                       const IntMatrix& y) {
    const PinnArch& arch = model.arch;
    if (x.rows() != y.rows() || x.rows() == 0) throw DomainError("oracle_gradient: bad batch");
    const int n_aff = arch.n_affine();

    std::vector<IntMatrix> grad_w;
    std::vector<std::vector<mpz_class>> grad_b;
    for (int l = 0; l < n_aff; ++l) {
        grad_w.emplace_back(arch.layer_dims[l + 1], arch.layer_dims[l], mpz_class(0));
        grad_b.emplace_back(arch.layer_dims[l + 1], mpz_class(0));
    }

    // Sample-by-sample forward and backward, accumulated; structurally a
    // different loop from the batched backprop in pinn.
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::vector<std::vector<mpz_class>> pre(n_aff), act(n_aff + 1);
        act[0].resize(x.cols());
        for (std::size_t c = 0; c < x.cols(); ++c) act[0][c] = x(r, c);
        for (int l = 0; l < n_aff; ++l) {
            std::size_t out_d = arch.layer_dims[l + 1];
            pre[l].resize(out_d);
            for (std::size_t o = 0; o < out_d; ++o) {
                mpz_class acc = model.biases[l][o];
                for (std::size_t c = 0; c < act[l].size(); ++c)
                    acc += model.weights[l](o, c) * act[l][c];
                pre[l][o] = acc;
            }
            act[l + 1] = pre[l];
            if (l + 1 < n_aff)
                for (auto& v : act[l + 1]) v = v * v;
        }

        std::vector<mpz_class> delta(arch.output_dim());
        for (std::size_t c = 0; c < delta.size(); ++c)
            delta[c] = 2 * (act[n_aff][c] - y(r, c));

        for (int l = n_aff - 1; l >= 0; --l) {
            for (std::size_t o = 0; o < delta.size(); ++o) {
                grad_b[l][o] += delta[o];
                for (std::size_t c = 0; c < act[l].size(); ++c)
                    grad_w[l](o, c) += delta[o] * act[l][c];
            }
            if (l > 0) {
                std::vector<mpz_class> prev(act[l].size());
                for (std::size_t c = 0; c < prev.size(); ++c) {
                    mpz_class acc = 0;
                    for (std::size_t o = 0; o < delta.size(); ++o)
                        acc += delta[o] * model.weights[l](o, c);
                    prev[c] = acc * 2 * pre[l - 1][c];
                }
                delta = std::move(prev);
            }
        }
    }

    std::vector<mpz_class> flat;
    flat.reserve(arch.param_count());
    for (int l = 0; l < n_aff; ++l) {
        for (std::size_t o = 0; o < grad_w[l].rows(); ++o)
            for (std::size_t c = 0; c < grad_w[l].cols(); ++c) flat.push_back(grad_w[l](o, c));
        for (const auto& v : grad_b[l]) flat.push_back(v);
    }
    return flat;
}

std::pair<double, double> eval_metrics(const PinnModel<mpz_class>& model, const IntMatrix& x,
                                       const std::vector<int>& labels, int scale_bits) {
    if (x.rows() != labels.size()) throw DomainError("eval: row/label count mismatch");
    if (x.rows() == 0) return {0.0, 0.0};
    IntMatrix out = model.forward(x);
    const double scale = std::ldexp(1.0, scale_bits);
    double sum_sq = 0.0;
    std::size_t correct = 0;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 0; c < out.cols(); ++c) {
            mpz_class target(c == static_cast<std::size_t>(labels[r]) ? scale : 0.0);
            mpz_class resid = out(r, c) - target;
            double d = resid.get_d() / scale;
            sum_sq += d * d;
            if (out(r, c) > out(r, best)) best = c;
        }
        if (best == static_cast<std::size_t>(labels[r])) ++correct;
    }
    return {sum_sq / static_cast<double>(out.rows()),
            static_cast<double>(correct) / static_cast<double>(out.rows())};
}

std::pair<double, double> eval_metrics_real(const PinnModel<double>& model, const RealMatrix& x,
                                            const std::vector<int>& labels, int scale_bits) {
    if (x.rows() != labels.size()) throw DomainError("eval: row/label count mismatch");
    if (x.rows() == 0) return {0.0, 0.0};
    RealMatrix out = model.forward(x);
    const double scale = std::ldexp(1.0, scale_bits);
    double sum_sq = 0.0;
    std::size_t correct = 0;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 0; c < out.cols(); ++c) {
            double target = c == static_cast<std::size_t>(labels[r]) ? scale : 0.0;
            double d = (out(r, c) - target) / scale;
            sum_sq += d * d;
            if (out(r, c) > out(r, best)) best = c;
        }
        if (best == static_cast<std::size_t>(labels[r])) ++correct;
    }
    return {sum_sq / static_cast<double>(out.rows()),
            static_cast<double>(correct) / static_cast<double>(out.rows())};
}

CentralizedRun::CentralizedRun(const ExperimentWorld& world)
    : w_(world),
      model_(world.init_model),
      dropout_stream_(mix_seed(world.train.seeds.dropout, 0xB22)),
      quant_stream_(world.train.seeds.quantization) {}

std::vector<std::vector<mpz_class>> CentralizedRun::batch_gradients(
    const std::vector<std::size_t>& rows) const {
    std::vector<std::vector<mpz_class>> grads;
    for (int k = 0; k < w_.coding.shards; ++k) {
        grads.push_back(oracle_gradient(model_, w_.global.x_shards[k].select_rows(rows),
                                        w_.global.y_shards[k].select_rows(rows)));
    }
    return grads;
}

RoundRecord CentralizedRun::step() {
    return step_with(draw_survivors(w_.dropout, dropout_stream_));
}

RoundRecord CentralizedRun::step_with(const std::vector<int>& survivors) {
    ++t_;
    RoundRecord rec;
    rec.t = t_;
    rec.survivors = survivors;
    if (static_cast<int>(survivors.size()) < w_.coding.decode_threshold()) {
        rec.skipped = true;
    } else {
        std::vector<std::size_t> batch_rows = sample_minibatch(
            w_.train.seeds.sampling, sample_counter_++, w_.train.batch, w_.global.span_sizes);
        rec.grad_norm = server_update(model_, batch_gradients(batch_rows), w_.train.lr_at(t_),
                                      w_.train.batch, w_.coding.shards, w_.train.clip_norm,
                                      quant_stream_, w_.params);
    }
    auto [loss, acc_train] =
        eval_metrics(model_, w_.eval_x, w_.eval_labels, w_.label_quant.scale_bits);
    (void)acc_train;
    rec.train_loss = loss;
    rec.test_acc =
        eval_metrics(model_, w_.test_x, w_.test_labels, w_.label_quant.scale_bits).second;
    return rec;
}

std::vector<RoundRecord> CentralizedRun::run(std::ostream* csv) {
    std::vector<RoundRecord> records;
    if (csv) write_metrics_header(*csv);
    for (int t = 0; t < w_.train.rounds; ++t) {
        records.push_back(step());
        if (csv) write_metrics_row(*csv, records.back());
    }
    return records;
}

bool brute_force_composite_check(const PinnArch& arch, const CodingConfig& cfg,
                                 std::size_t rows_per_shard, long value_bound,
                                 std::uint64_t seed, bool corrupt_one_upload) {
    const FieldParams& params = *cfg.params;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> dist(0, value_bound);

    auto random_int_matrix = [&](std::size_t rows, std::size_t cols) {
        IntMatrix m(rows, cols);
        for (auto& v : m.data()) v = dist(rng);
        return m;
    };

    std::vector<IntMatrix> x_shards, y_shards;
    std::vector<FieldMatrix> x_shards_f, y_shards_f;
    for (int k = 0; k < cfg.shards; ++k) {
        x_shards.push_back(random_int_matrix(rows_per_shard, arch.input_dim()));
        y_shards.push_back(random_int_matrix(rows_per_shard, arch.output_dim()));
        x_shards_f.push_back(from_signed(x_shards.back(), params));
        y_shards_f.push_back(from_signed(y_shards.back(), params));
    }
    FieldStream mask_stream(mix_seed(seed, 0x3A5));
    std::vector<FieldMatrix> x_masks, y_masks;
    for (int t = 0; t < cfg.privacy; ++t) {
        FieldMatrix u(rows_per_shard, arch.input_dim()), v(rows_per_shard, arch.output_dim());
        for (auto& e : u.data()) e = mask_stream.next(params);
        for (auto& e : v.data()) e = mask_stream.next(params);
        x_masks.push_back(std::move(u));
        y_masks.push_back(std::move(v));
    }

    PinnModel<mpz_class> model = init_integer_model(arch, 2, rng);
    PinnModel<FieldElement> field_model = embed_model(model, params);

    std::vector<FieldMatrix> x_enc = encode_dataset(x_shards_f, x_masks, cfg.betas, cfg.alphas);
    std::vector<FieldMatrix> y_enc = encode_dataset(y_shards_f, y_masks, cfg.betas, cfg.alphas);

    std::vector<std::pair<FieldElement, std::vector<FieldElement>>> points;
    for (int j = 0; j < cfg.n_clients; ++j) {
        points.emplace_back(cfg.alphas[j], field_model.gradient(x_enc[j], y_enc[j]));
    }
    if (corrupt_one_upload) {
        points[0].second[0] += FieldElement(1, params);
    }

    for (int k = 0; k < cfg.shards; ++k) {
        std::vector<FieldElement> interp = lagrange_interpolate_eval(points, cfg.betas[k]);
        std::vector<mpz_class> truth = oracle_gradient(model, x_shards[k], y_shards[k]);
        for (std::size_t i = 0; i < interp.size(); ++i) {
            // Compare in the field so the check is capacity-independent.
            if (interp[i] != FieldElement(truth[i], params)) return false;
        }
    }
    return true;
}

}  // namespace dresfl
