#ifndef DRESFL_FEDSIM_HPP
#define DRESFL_FEDSIM_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "dresfl/config.hpp"
#include "dresfl/data.hpp"
#include "dresfl/fxp.hpp"
#include "dresfl/lcc.hpp"
#include "dresfl/pinn.hpp"
#include "dresfl/rng.hpp"

namespace dresfl {

struct TrainConfig {
    std::size_t batch = 32;
    int rounds = 100;
    double lr = 2.0;
    double lr_decay_factor = 0.65;
    int lr_decay_interval = 1500;
    std::optional<double> clip_norm;
    Seeds seeds;

    // Step-decay schedule; t is the 1-based round index.
    double lr_at(int t) const;
};

struct DropoutModel {
    std::vector<double> probs;  // per-client per-round dropout probability

    static DropoutModel none(int n_clients);
    // Each client: 0.99 with probability 0.5, else uniform on [0, 0.1].
    static DropoutModel sample(int n_clients, std::uint64_t seed);
};

// Skewed-label partition: stable sort by label (ties by original index),
// truncate to a multiple of N*K, split into N contiguous shards.
std::vector<LabeledDataset> partition_noniid(const LabeledDataset& ds, int n_clients,
                                             int shards = 1);

// b distinct row indices into [sum(span_sizes)), allocated across sources
// proportionally (largest-remainder rounding), sampled without replacement
// within each source. Deterministic given (seed, t). Sorted ascending.
std::vector<std::size_t> sample_minibatch(std::uint64_t seed, int t, std::size_t b,
                                          const std::vector<std::size_t>& span_sizes);

// One uniform draw per client, in id order; client survives when u >= prob.
std::vector<int> draw_survivors(const DropoutModel& model, UnitStream& stream);

struct RoundRecord {
    int t = 0;
    std::vector<int> survivors;
    bool skipped = false;
    double grad_norm = 0.0;
    double train_loss = 0.0;
    double test_acc = 0.0;
};

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const RoundRecord& rec);

// The K global shard matrices in plaintext integer form, plus the per-source
// layout shared by every client's encoded data.
struct GlobalDataset {
    std::vector<IntMatrix> x_shards, y_shards;  // K matrices of m~ rows
    std::vector<std::size_t> source_sizes;      // m_i
    std::vector<std::size_t> span_sizes;        // m_i / K

    std::size_t shard_rows() const;  // m~
};

// Everything the coded run, the centralized oracle, and the FedAvg baseline
// need, built once from one spec so the three pipelines share seeds and data.
struct ExperimentWorld {
    FieldParams params;
    PinnArch arch;
    CodingConfig coding;
    QuantConfig feat_quant, label_quant;
    TrainConfig train;
    DropoutModel dropout;

    std::vector<LabeledDataset> locals;  // plaintext partition (FedAvg inputs)
    GlobalDataset global;
    ShareSet shares;

    IntMatrix eval_x;  // quantized global train set, for the loss column
    std::vector<int> eval_labels;
    IntMatrix test_x;
    std::vector<int> test_labels;

    PinnModel<mpz_class> init_model;

    ExperimentWorld(const ExperimentSpec& spec, const LabeledDataset& train_set,
                    const LabeledDataset& test_set);
};

// Shared server step (Algorithm 1 line 11): sum the K signed gradients,
// optionally clip to clip_norm, scale by lr/(b*K), stochastically round, and
// subtract from the model. Returns the pre-clip L2 norm of the summed
// gradient. Aborts with CapacityError when an updated weight leaves Z_p.
double server_update(PinnModel<mpz_class>& model,
                     const std::vector<std::vector<mpz_class>>& decoded, double lr_t,
                     std::size_t batch, int shards, const std::optional<double>& clip_norm,
                     UnitStream& quant_stream, const FieldParams& params);

// DReS-FL: clients hold Lagrange-coded data, compute field gradients, the
// server decodes by interpolation.
class CodedRun {
public:
    explicit CodedRun(const ExperimentWorld& world);

    RoundRecord step();  // draws this round's dropouts from the stream
    RoundRecord step_with(const std::vector<int>& survivors);
    std::vector<RoundRecord> run(std::ostream* csv = nullptr);

    // Field gradient of the current model on the given rows of client j's
    // encoded data.
    std::vector<FieldElement> client_compute(int j, const std::vector<std::size_t>& rows) const;

    const PinnModel<mpz_class>& model() const { return model_; }
    int rounds_sampled() const { return sample_counter_; }

private:
    const ExperimentWorld& w_;
    std::vector<FieldMatrix> client_x_, client_y_;  // concatenated encoded data
    PinnModel<mpz_class> model_;
    UnitStream dropout_stream_, quant_stream_;
    int t_ = 0;
    int sample_counter_ = 0;
};

// FedAvg baseline: plaintext local data, real-carrier model, surviving
// clients upload local gradients, the server takes an m_i-weighted average.
class FedAvgRun {
public:
    explicit FedAvgRun(const ExperimentWorld& world);

    RoundRecord step();
    std::vector<RoundRecord> run(std::ostream* csv = nullptr);

    const PinnModel<double>& model() const { return model_; }

private:
    const ExperimentWorld& w_;
    std::vector<RealMatrix> local_x_, local_y_;  // quantization-scaled reals
    RealMatrix test_x_, eval_x_;
    PinnModel<double> model_;
    UnitStream dropout_stream_;
    int t_ = 0;
};

}  // namespace dresfl

#endif
