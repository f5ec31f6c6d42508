#ifndef DRESFL_CONFIG_HPP
#define DRESFL_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dresfl/rng.hpp"

namespace dresfl {

// Parsed, validated experiment configuration. One key-value file with
// [section] headers; every random draw in a run is governed by the five
// seeds given here.
struct ExperimentSpec {
    // [field]
    std::string modulus = "2^200-75";

    // [coding]
    int n_clients = 20;
    int shards = 1;   // K
    int privacy = 1;  // T

    // [model]
    std::vector<std::size_t> dims;  // d_x,h_1,...,d_y
    long init_bound = 16;           // weight init range [-init_bound, init_bound]

    // [quant]
    int scale_bits = 4;
    int label_scale_bits = -1;  // -1: use scale_bits
    double shift = 0.0;

    int label_bits() const { return label_scale_bits < 0 ? scale_bits : label_scale_bits; }

    // [train]
    std::size_t batch = 32;
    int rounds = 100;
    double lr = 2.0;
    double lr_decay_factor = 0.65;
    int lr_decay_interval = 1500;
    std::optional<double> clip_norm;

    // [dropout]
    bool dropout_enabled = true;

    // [data]
    std::string source = "synthetic";  // "synthetic", "clusters", or "csv"
    std::string train_path, test_path;
    std::size_t synth_train = 200, synth_test = 200, synth_dx = 8;
    std::size_t synth_clusters = 20;  // used when source = clusters
    int synth_classes = 2;
    std::uint64_t synth_seed = 7;
    double synth_noise = 0.11;

    // [seeds]
    Seeds seeds;

    bool capacity_override = false;

    static ExperimentSpec parse_file(const std::string& path);
    static ExperimentSpec parse(std::istream& in, const std::string& name);

    // Every effective parameter, in the same key-value format parse() reads.
    void echo(std::ostream& out) const;

    void validate() const;
};

}  // namespace dresfl

#endif
