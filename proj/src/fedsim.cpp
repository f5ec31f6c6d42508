#include "dresfl/fedsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "dresfl/oracle.hpp"

namespace dresfl {

double TrainConfig::lr_at(int t) const {
    int steps = (t - 1) / lr_decay_interval;
    return lr * std::pow(lr_decay_factor, steps);
}

DropoutModel DropoutModel::none(int n_clients) {
    DropoutModel m;
    m.probs.assign(n_clients, 0.0);
    return m;
}

DropoutModel DropoutModel::sample(int n_clients, std::uint64_t seed) {
    DropoutModel m;
    UnitStream stream(seed);
    for (int i = 0; i < n_clients; ++i) {
        double u = stream.next();
        m.probs.push_back(u < 0.5 ? 0.99 : 0.1 * stream.next());
    }
    return m;
}

std::vector<LabeledDataset> partition_noniid(const LabeledDataset& ds, int n_clients,
                                             int shards) {
    if (n_clients < 1) throw ConfigError("need at least one client");
    std::size_t unit = static_cast<std::size_t>(n_clients) * shards;
    std::size_t keep = (ds.size() / unit) * unit;
    if (keep == 0) {
        throw ConfigError("dataset of " + std::to_string(ds.size()) +
                          " samples cannot be split across " + std::to_string(n_clients) +
                          " clients with K = " + std::to_string(shards));
    }
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ds.labels[a] < ds.labels[b]; });
    order.resize(keep);

    std::size_t per_client = keep / n_clients;
    std::vector<LabeledDataset> out;
    for (int i = 0; i < n_clients; ++i) {
        std::vector<std::size_t> rows(order.begin() + i * per_client,
                                      order.begin() + (i + 1) * per_client);
        LabeledDataset local;
        local.n_classes = ds.n_classes;
        local.x = ds.x.select_rows(rows);
        for (std::size_t r : rows) local.labels.push_back(ds.labels[r]);
        out.push_back(std::move(local));
    }
    return out;
}

std::vector<std::size_t> sample_minibatch(std::uint64_t seed, int t, std::size_t b,
                                          const std::vector<std::size_t>& span_sizes) {
    std::size_t total = std::accumulate(span_sizes.begin(), span_sizes.end(), std::size_t{0});
    if (b > total) throw DomainError("batch size exceeds available rows");

    // Proportional allocation, largest remainder, never above the span size.
    std::vector<std::size_t> alloc(span_sizes.size());
    std::vector<std::pair<std::size_t, std::size_t>> rem;  // (remainder, source)
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < span_sizes.size(); ++i) {
        alloc[i] = b * span_sizes[i] / total;
        assigned += alloc[i];
        rem.emplace_back(b * span_sizes[i] % total, i);
    }
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t k = 0; assigned < b; k = (k + 1) % rem.size()) {
        std::size_t i = rem[k].second;
        if (alloc[i] < span_sizes[i]) {
            ++alloc[i];
            ++assigned;
        }
    }

    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> picked;
    picked.reserve(b);
    std::size_t offset = 0;
    for (std::size_t i = 0; i < span_sizes.size(); ++i) {
        // Partial Fisher-Yates over the span.
        std::vector<std::size_t> pool(span_sizes[i]);
        std::iota(pool.begin(), pool.end(), 0);
        for (std::size_t k = 0; k < alloc[i]; ++k) {
            std::uniform_int_distribution<std::size_t> dist(k, pool.size() - 1);
            std::swap(pool[k], pool[dist(rng)]);
        }
        std::sort(pool.begin(), pool.begin() + alloc[i]);
        for (std::size_t k = 0; k < alloc[i]; ++k) picked.push_back(offset + pool[k]);
        offset += span_sizes[i];
    }
    return picked;
}

std::vector<int> draw_survivors(const DropoutModel& model, UnitStream& stream) {
    std::vector<int> survivors;
    for (std::size_t j = 0; j < model.probs.size(); ++j) {
        double u = stream.next();
        if (u >= model.probs[j]) survivors.push_back(static_cast<int>(j));
    }
    return survivors;
}

void write_metrics_header(std::ostream& out) {
    out << "t,survivors,skipped,grad_norm,train_loss,test_acc\n";
}

void write_metrics_row(std::ostream& out, const RoundRecord& rec) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%d,%zu,%d,%.17g,%.17g,%.17g\n", rec.t,
                  rec.survivors.size(), rec.skipped ? 1 : 0, rec.grad_norm, rec.train_loss,
                  rec.test_acc);
    out << buf;
}

std::size_t GlobalDataset::shard_rows() const {
    return std::accumulate(span_sizes.begin(), span_sizes.end(), std::size_t{0});
}

ExperimentWorld::ExperimentWorld(const ExperimentSpec& spec, const LabeledDataset& train_set,
                                 const LabeledDataset& test_set)
    : params(FieldParams::from_expression(spec.modulus)),
      arch(spec.dims),
      feat_quant(spec.scale_bits, spec.shift, params),
      label_quant(spec.label_bits(), 0.0, params) {
    if (arch.output_dim() != static_cast<std::size_t>(train_set.n_classes)) {
        throw ConfigError("model output dim " + std::to_string(arch.output_dim()) +
                          " != number of classes " + std::to_string(train_set.n_classes));
    }
    coding = CodingConfig::create(spec.n_clients, spec.shards, spec.privacy,
                                  degree_of_gradient(arch.n_activations()), params);

    train.batch = spec.batch;
    train.rounds = spec.rounds;
    train.lr = spec.lr;
    train.lr_decay_factor = spec.lr_decay_factor;
    train.lr_decay_interval = spec.lr_decay_interval;
    train.clip_norm = spec.clip_norm;
    train.seeds = spec.seeds;

    if (!spec.capacity_override) {
        mpz_class in_bound(std::ceil(feat_quant.scale() * (1.0 + spec.shift)));
        mpz_class target_bound(label_quant.scale());
        mpz_class bound = capacity_bound(arch, in_bound, mpz_class(spec.init_bound),
                                         target_bound, spec.batch);
        if (bound >= params.half()) {
            throw CapacityError("capacity bound " + bound.get_str() + " exceeds (p-1)/2 for p = " +
                                params.expression() +
                                "; enlarge the modulus or set capacity.override");
        }
    }

    locals = partition_noniid(train_set, spec.n_clients, spec.shards);

    std::vector<FieldMatrix> field_x, field_y;
    std::vector<IntMatrix> int_x, int_y;
    for (const auto& local : locals) {
        IntMatrix xi = real_to_int(local.x, feat_quant);
        IntMatrix yi = real_to_int(one_hot(local.labels, local.n_classes), label_quant);
        field_x.push_back(from_signed(xi, params));
        field_y.push_back(from_signed(yi, params));
        int_x.push_back(std::move(xi));
        int_y.push_back(std::move(yi));
    }

    for (std::size_t i = 0; i < locals.size(); ++i) {
        global.source_sizes.push_back(locals[i].size());
        global.span_sizes.push_back(locals[i].size() / spec.shards);
    }
    for (int k = 0; k < spec.shards; ++k) {
        std::vector<IntMatrix> xs, ys;
        for (std::size_t i = 0; i < locals.size(); ++i) {
            std::size_t span = global.span_sizes[i];
            std::vector<std::size_t> rows(span);
            std::iota(rows.begin(), rows.end(), k * span);
            xs.push_back(int_x[i].select_rows(rows));
            ys.push_back(int_y[i].select_rows(rows));
        }
        global.x_shards.push_back(IntMatrix::vstack(xs));
        global.y_shards.push_back(IntMatrix::vstack(ys));
    }
    if (spec.batch > global.shard_rows()) {
        throw ConfigError("batch size " + std::to_string(spec.batch) +
                          " exceeds encoded rows " + std::to_string(global.shard_rows()));
    }

    shares = ShareSet::build(field_x, field_y, coding, spec.seeds.masks);

    eval_x = IntMatrix::vstack(int_x);
    for (const auto& local : locals)
        eval_labels.insert(eval_labels.end(), local.labels.begin(), local.labels.end());
    test_x = real_to_int(test_set.x, feat_quant);
    test_labels = test_set.labels;

    std::mt19937_64 init_rng(spec.seeds.init);
    init_model = init_integer_model(arch, spec.init_bound, init_rng);

    dropout = spec.dropout_enabled
                  ? DropoutModel::sample(spec.n_clients, mix_seed(spec.seeds.dropout, 0xA11))
                  : DropoutModel::none(spec.n_clients);
}

double server_update(PinnModel<mpz_class>& model,
                     const std::vector<std::vector<mpz_class>>& decoded, double lr_t,
                     std::size_t batch, int shards, const std::optional<double>& clip_norm,
                     UnitStream& quant_stream, const FieldParams& params) {
    const std::size_t d_w = model.arch.param_count();
    std::vector<mpz_class> sum(d_w, 0);
    for (const auto& g : decoded) {
        if (g.size() != d_w) throw DomainError("decoded gradient length mismatch");
        for (std::size_t i = 0; i < d_w; ++i) sum[i] += g[i];
    }
    mpz_class sumsq = 0;
    for (const auto& v : sum) sumsq += v * v;
    double grad_norm = std::sqrt(sumsq.get_d());

    double rescale = 1.0;
    if (clip_norm && grad_norm > *clip_norm) rescale = *clip_norm / grad_norm;
    const double step_scale = lr_t / (static_cast<double>(batch) * shards);

    std::vector<mpz_class> w = model.flatten();
    const mpz_class neg_limit = -(params.half() + 1);
    for (std::size_t i = 0; i < d_w; ++i) {
        double step = step_scale * (sum[i].get_d() * rescale);
        w[i] -= stochastic_round(step, quant_stream);
        if (w[i] >= params.half() || w[i] < neg_limit) {
            throw CapacityError("updated weight " + w[i].get_str() +
                                " left the representable range of p = " + params.expression());
        }
    }
    model = PinnModel<mpz_class>::unflatten(model.arch, w);
    return grad_norm;
}

CodedRun::CodedRun(const ExperimentWorld& world)
    : w_(world),
      model_(world.init_model),
      dropout_stream_(mix_seed(world.train.seeds.dropout, 0xB22)),
      quant_stream_(world.train.seeds.quantization) {
    for (int j = 0; j < w_.coding.n_clients; ++j) {
        client_x_.push_back(w_.shares.x_at(j));
        client_y_.push_back(w_.shares.y_at(j));
    }
}

std::vector<FieldElement> CodedRun::client_compute(int j,
                                                   const std::vector<std::size_t>& rows) const {
    PinnModel<FieldElement> fm = embed_model(model_, w_.params);
    return fm.gradient(client_x_[j].select_rows(rows), client_y_[j].select_rows(rows));
}

RoundRecord CodedRun::step() {
    return step_with(draw_survivors(w_.dropout, dropout_stream_));
}

RoundRecord CodedRun::step_with(const std::vector<int>& survivors) {
    ++t_;
    RoundRecord rec;
    rec.t = t_;
    rec.survivors = survivors;
    if (static_cast<int>(survivors.size()) < w_.coding.decode_threshold()) {
        rec.skipped = true;
    } else {
        std::vector<std::size_t> batch_rows = sample_minibatch(
            w_.train.seeds.sampling, sample_counter_++, w_.train.batch, w_.global.span_sizes);
        PinnModel<FieldElement> fm = embed_model(model_, w_.params);
        std::map<int, std::vector<FieldElement>> uploads;
        for (int j : survivors) {
            uploads[j] = fm.gradient(client_x_[j].select_rows(batch_rows),
                                     client_y_[j].select_rows(batch_rows));
        }
        auto decoded_field = decode_gradients(uploads, w_.coding);
        if (!decoded_field) throw DomainError("decode failed despite enough survivors");
        std::vector<std::vector<mpz_class>> decoded;
        for (const auto& vec : *decoded_field) {
            std::vector<mpz_class> g;
            g.reserve(vec.size());
            for (const auto& e : vec) g.push_back(e.to_signed());
            decoded.push_back(std::move(g));
        }
        rec.grad_norm =
            server_update(model_, decoded, w_.train.lr_at(t_), w_.train.batch,
                          w_.coding.shards, w_.train.clip_norm, quant_stream_, w_.params);
    }
    auto [loss, acc_train] = eval_metrics(model_, w_.eval_x, w_.eval_labels,
                                          w_.label_quant.scale_bits);
    (void)acc_train;
    rec.train_loss = loss;
    rec.test_acc = eval_metrics(model_, w_.test_x, w_.test_labels,
                                w_.label_quant.scale_bits).second;
    return rec;
}

std::vector<RoundRecord> CodedRun::run(std::ostream* csv) {
    std::vector<RoundRecord> records;
    if (csv) write_metrics_header(*csv);
    for (int t = 0; t < w_.train.rounds; ++t) {
        records.push_back(step());
        if (csv) write_metrics_row(*csv, records.back());
    }
    return records;
}

FedAvgRun::FedAvgRun(const ExperimentWorld& world)
    : w_(world),
      model_(realize_model(world.init_model)),
      dropout_stream_(mix_seed(world.train.seeds.dropout, 0xB22)) {
    const double scale = w_.feat_quant.scale();
    for (const auto& local : w_.locals) {
        RealMatrix x(local.x.rows(), local.x.cols());
        for (std::size_t r = 0; r < x.rows(); ++r)
            for (std::size_t c = 0; c < x.cols(); ++c)
                x(r, c) = scale * (local.x(r, c) + w_.feat_quant.shift);
        RealMatrix y = one_hot(local.labels, local.n_classes);
        for (double& v : y.data()) v *= w_.label_quant.scale();
        local_x_.push_back(std::move(x));
        local_y_.push_back(std::move(y));
    }
    // Evaluation inputs on the same scale, from the quantized global sets.
    auto realize = [](const IntMatrix& m) {
        RealMatrix out(m.rows(), m.cols());
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c).get_d();
        return out;
    };
    test_x_ = realize(w_.test_x);
    eval_x_ = realize(w_.eval_x);
}

RoundRecord FedAvgRun::step() {
    ++t_;
    RoundRecord rec;
    rec.t = t_;
    rec.survivors = draw_survivors(w_.dropout, dropout_stream_);
    if (rec.survivors.empty()) {
        rec.skipped = true;
    } else {
        const std::size_t d_w = w_.arch.param_count();
        std::vector<double> mean(d_w, 0.0);
        double weight_total = 0.0;
        for (int j : rec.survivors) {
            std::size_t m_j = local_x_[j].rows();
            std::size_t take = std::min(w_.train.batch, m_j);
            std::vector<std::size_t> rows(m_j);
            std::iota(rows.begin(), rows.end(), 0);
            std::mt19937_64 rng(
                mix_seed(mix_seed(w_.train.seeds.sampling, 0xFEDA),
                         static_cast<std::uint64_t>(t_) * 8191 + static_cast<std::uint64_t>(j)));
            for (std::size_t k = 0; k < take; ++k) {
                std::uniform_int_distribution<std::size_t> dist(k, m_j - 1);
                std::swap(rows[k], rows[dist(rng)]);
            }
            rows.resize(take);
            std::sort(rows.begin(), rows.end());
            std::vector<double> g = model_.gradient(local_x_[j].select_rows(rows),
                                                    local_y_[j].select_rows(rows));
            double w_client = static_cast<double>(w_.global.source_sizes[j]);
            for (std::size_t i = 0; i < d_w; ++i) mean[i] += w_client * g[i] / take;
            weight_total += w_client;
        }
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < d_w; ++i) {
            mean[i] /= weight_total;  // per-sample gradient estimate
            norm_sq += mean[i] * mean[i];
        }
        rec.grad_norm = std::sqrt(norm_sq);
        double rescale = 1.0;
        if (w_.train.clip_norm) {
            // Same rule as the coded server, applied at the summed-batch scale.
            double pseudo_sum_norm =
                rec.grad_norm * static_cast<double>(w_.train.batch) * w_.coding.shards;
            if (pseudo_sum_norm > *w_.train.clip_norm)
                rescale = *w_.train.clip_norm / pseudo_sum_norm;
        }
        std::vector<double> flat = model_.flatten();
        double lr_t = w_.train.lr_at(t_);
        for (std::size_t i = 0; i < d_w; ++i) flat[i] -= lr_t * rescale * mean[i];
        model_ = PinnModel<double>::unflatten(w_.arch, flat);
    }
    auto [loss, acc_train] =
        eval_metrics_real(model_, eval_x_, w_.eval_labels, w_.label_quant.scale_bits);
    (void)acc_train;
    rec.train_loss = loss;
    rec.test_acc =
        eval_metrics_real(model_, test_x_, w_.test_labels, w_.label_quant.scale_bits).second;
    return rec;
}

std::vector<RoundRecord> FedAvgRun::run(std::ostream* csv) {
    std::vector<RoundRecord> records;
    if (csv) write_metrics_header(*csv);
    for (int t = 0; t < w_.train.rounds; ++t) {
        records.push_back(step());
        if (csv) write_metrics_row(*csv, records.back());
    }
    return records;
}

}  // namespace dresfl
