#include "dresfl/data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "dresfl/errors.hpp"
#include "dresfl/rng.hpp"

namespace dresfl {

LabeledDataset gen_synthetic(std::size_t n_samples, std::size_t d_x, int n_classes,
                             std::uint64_t seed, double noise_sigma) {
    if (n_samples == 0 || d_x == 0 || n_classes < 1 || noise_sigma <= 0) {
        throw ConfigError("synthetic dataset parameters must be positive");
    }
    // Blob centers depend only on (d_x, n_classes), never on the seed, so two
    // draws with different seeds are i.i.d. samples of one distribution and can
    // serve as a train/test pair.
    std::mt19937_64 center_rng(0x5EED5EEDULL ^ (static_cast<std::uint64_t>(d_x) << 8) ^
                               static_cast<std::uint64_t>(n_classes));
    std::uniform_real_distribution<double> center_dist(0.25, 0.75);
    RealMatrix centers(n_classes, d_x);
    for (int k = 0; k < n_classes; ++k)
        for (std::size_t c = 0; c < d_x; ++c) centers(k, c) = center_dist(center_rng);

    std::vector<double> centroid(d_x, 0.0);
    for (int k = 0; k < n_classes; ++k)
        for (std::size_t c = 0; c < d_x; ++c) centroid[c] += centers(k, c) / n_classes;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);

    // Draw each class's samples, then order them along the class's outward
    // direction. Rows stay label-interleaved (label r % n_classes), so the
    // label-sorted shard partition hands each shard a contiguous slice of one
    // blob: the non-IID split is skewed in feature space, not only in labels.
    LabeledDataset ds;
    ds.n_classes = n_classes;
    ds.x = RealMatrix(n_samples, d_x);
    ds.labels.resize(n_samples);
    for (int k = 0; k < n_classes; ++k) {
        std::size_t n_k = n_samples / n_classes + (static_cast<std::size_t>(k) < n_samples % n_classes ? 1 : 0);
        std::vector<std::vector<double>> pts(n_k, std::vector<double>(d_x));
        std::vector<std::pair<double, std::size_t>> keyed(n_k);
        for (std::size_t j = 0; j < n_k; ++j) {
            double proj = 0.0;
            for (std::size_t c = 0; c < d_x; ++c) {
                double v = std::clamp(centers(k, c) + noise(rng), 0.0, 1.0);
                pts[j][c] = v;
                proj += v * (n_classes > 1 ? centers(k, c) - centroid[c] : 1.0);
            }
            keyed[j] = {proj, j};
        }
        std::sort(keyed.begin(), keyed.end());
        for (std::size_t j = 0; j < n_k; ++j) {
            std::size_t r = j * n_classes + k;
            ds.labels[r] = k;
            for (std::size_t c = 0; c < d_x; ++c) ds.x(r, c) = pts[keyed[j].second][c];
        }
    }
    return ds;
}

LabeledDataset gen_clusters(std::size_t n_samples, std::size_t d_x, std::size_t n_clusters,
                            int n_classes, std::uint64_t seed, double noise_sigma) {
    if (n_samples == 0 || d_x == 0 || n_clusters == 0 || n_classes < 1 || noise_sigma <= 0) {
        throw ConfigError("cluster dataset parameters must be positive");
    }
    if (n_clusters % n_classes != 0 || n_samples % n_clusters != 0) {
        throw ConfigError("need n_clusters divisible by n_classes and n_samples by n_clusters");
    }
    std::mt19937_64 center_rng(0xC1A55E5ULL ^ (static_cast<std::uint64_t>(d_x) << 8) ^
                               n_clusters);
    std::uniform_real_distribution<double> center_dist(0.15, 0.85);
    RealMatrix centers(n_clusters, d_x);
    for (std::size_t k = 0; k < n_clusters; ++k)
        for (std::size_t c = 0; c < d_x; ++c) centers(k, c) = center_dist(center_rng);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    const std::size_t per_cluster = n_samples / n_clusters;
    LabeledDataset ds;
    ds.n_classes = n_classes;
    ds.x = RealMatrix(n_samples, d_x);
    ds.labels.resize(n_samples);
    for (std::size_t r = 0; r < n_samples; ++r) {
        int label = static_cast<int>(r % n_classes);
        std::size_t j = r / n_classes;  // index within the class
        std::size_t cluster = n_classes * (j / per_cluster) + label;
        ds.labels[r] = label;
        for (std::size_t c = 0; c < d_x; ++c)
            ds.x(r, c) = std::clamp(centers(cluster, c) + noise(rng), 0.0, 1.0);
    }
    return ds;
}

void save_csv(const LabeledDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (std::size_t c = 0; c < ds.dim(); ++c) out << 'f' << (c + 1) << ',';
    out << "label\n";
    out.precision(17);
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (std::size_t c = 0; c < ds.dim(); ++c) out << ds.x(r, c) << ',';
        out << ds.labels[r] << '\n';
    }
    if (!out) throw IoError("failed writing: " + path);
}

LabeledDataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty dataset file: " + path);
    std::size_t d_x = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    if (d_x == 0) throw IoError("malformed header in: " + path);

    std::vector<double> values;
    std::vector<int> labels;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        for (std::size_t c = 0; c < d_x; ++c) {
            if (!std::getline(row, cell, ',')) throw IoError("short row in: " + path);
            values.push_back(std::stod(cell));
        }
        if (!std::getline(row, cell)) throw IoError("missing label in: " + path);
        labels.push_back(std::stoi(cell));
    }
    LabeledDataset ds;
    ds.x = RealMatrix(labels.size(), d_x);
    std::copy(values.begin(), values.end(), ds.x.data().begin());
    ds.labels = std::move(labels);
    ds.n_classes = ds.labels.empty() ? 0 : *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    return ds;
}

std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& ds,
                                                           std::size_t n_train) {
    if (n_train == 0 || n_train >= ds.size()) throw DomainError("bad train/test split point");
    auto take = [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> rows(end - begin);
        std::iota(rows.begin(), rows.end(), begin);
        LabeledDataset part;
        part.n_classes = ds.n_classes;
        part.x = ds.x.select_rows(rows);
        for (std::size_t r : rows) part.labels.push_back(ds.labels[r]);
        return part;
    };
    return {take(0, n_train), take(n_train, ds.size())};
}

RealMatrix one_hot(const std::vector<int>& labels, int n_classes) {
    RealMatrix out(labels.size(), n_classes, 0.0);
    for (std::size_t r = 0; r < labels.size(); ++r) {
        if (labels[r] < 0 || labels[r] >= n_classes) throw DomainError("label out of range");
        out(r, labels[r]) = 1.0;
    }
    return out;
}

}  // namespace dresfl
