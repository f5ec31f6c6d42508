#ifndef DRESFL_DATA_HPP
#define DRESFL_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dresfl/matrix.hpp"

namespace dresfl {

struct LabeledDataset {
    RealMatrix x;             // features in [0, 1]
    std::vector<int> labels;  // 0..n_classes-1
    int n_classes = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return x.cols(); }
};

// Gaussian blobs, one per class, balanced labels i % n_classes, features
// clamped to [0, 1]. Deterministic for a given seed.
LabeledDataset gen_synthetic(std::size_t n_samples, std::size_t d_x, int n_classes,
                             std::uint64_t seed, double noise_sigma = 0.11);

// Cluster mosaic: n_clusters small, well-separated Gaussian clusters with
// seed-independent centers (differently seeded draws share one distribution).
// Cluster c carries label c % n_classes and its samples sit contiguously in
// within-class order, so a label-sorted equal split hands out whole clusters.
// Classifying a held-out draw from some cluster requires training data from
// that cluster, which makes such a split maximally non-IID.
// Requires n_clusters % n_classes == 0 and n_samples % n_clusters == 0.
LabeledDataset gen_clusters(std::size_t n_samples, std::size_t d_x, std::size_t n_clusters,
                            int n_classes, std::uint64_t seed, double noise_sigma = 0.03);

// CSV with header f_1,...,f_dx,label.
void save_csv(const LabeledDataset& ds, const std::string& path);
LabeledDataset load_csv(const std::string& path);

// n x n_classes 0/1 matrix.
RealMatrix one_hot(const std::vector<int>& labels, int n_classes);

// First n_train rows vs the rest. Label balance survives the split when
// n_train is a multiple of n_classes (labels cycle 0..n_classes-1).
std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& ds,
                                                           std::size_t n_train);

}  // namespace dresfl

#endif
