#ifndef DRESFL_ORACLE_HPP
#define DRESFL_ORACLE_HPP

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "dresfl/fedsim.hpp"
#include "dresfl/pinn.hpp"

namespace dresfl {

// Ground-truth gradient of the summed squared error, computed sample by
// sample in plain integer arithmetic. Deliberately a separate backprop
// implementation from PinnModel::gradient so equivalence tests against the
// coded path are non-circular.
std::vector<mpz_class> oracle_gradient(const PinnModel<mpz_class>& model, const IntMatrix& x,
                                       const IntMatrix& y);

// Loss and argmax accuracy of an integer-carrier model on quantized inputs.
// Loss is the mean squared error per sample, rescaled by 2^{-2l} so it is
// comparable across scale settings.
std::pair<double, double> eval_metrics(const PinnModel<mpz_class>& model, const IntMatrix& x,
                                       const std::vector<int>& labels, int scale_bits);

// Real-carrier variant used by the FedAvg baseline.
std::pair<double, double> eval_metrics_real(const PinnModel<double>& model, const RealMatrix& x,
                                            const std::vector<int>& labels, int scale_bits);

// Centralized finite-field trainer: mirrors the coded protocol round for
// round (same dropout draws, same skip rule, same mini-batches, same
// quantization stream) but computes the K global mini-batch gradients
// directly in integer arithmetic. The bit-exact reference.
class CentralizedRun {
public:
    explicit CentralizedRun(const ExperimentWorld& world);

    RoundRecord step();
    RoundRecord step_with(const std::vector<int>& survivors);
    std::vector<RoundRecord> run(std::ostream* csv = nullptr);

    // The K plaintext global mini-batch gradients at the current model.
    std::vector<std::vector<mpz_class>> batch_gradients(
        const std::vector<std::size_t>& rows) const;

    const PinnModel<mpz_class>& model() const { return model_; }

private:
    const ExperimentWorld& w_;
    PinnModel<mpz_class> model_;
    UnitStream dropout_stream_, quant_stream_;
    int t_ = 0;
    int sample_counter_ = 0;
};

// Recomputes the whole coded pipeline on a small instance: encodes random
// data, evaluates the composite gradient polynomial at every alpha,
// interpolates, and compares against the gradient of the plaintext shards.
bool brute_force_composite_check(const PinnArch& arch, const CodingConfig& cfg,
                                 std::size_t rows_per_shard, long value_bound,
                                 std::uint64_t seed, bool corrupt_one_upload = false);

}  // namespace dresfl

#endif
