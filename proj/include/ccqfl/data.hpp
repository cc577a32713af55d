// Copyright 2026 The ccqfl developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * MNIST-style ingestion and preprocessing: IDX parsing, binary class
 * selection, PCA to a small feature dimension, min-max rescaling to
 * [-1, 1], and label-skewed (non-i.i.d.) client partitioning.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccqfl/errors.hpp"
#include "ccqfl/rng.hpp"

namespace ccqfl {

/**
 * @brief Raw images with labels. Labels hold digits 0-9 after load_idx and
 * bits 0/1 after select_binary.
 */
struct RawDataset {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::uint8_t> pixels; // count * rows * cols, row-major
    std::vector<std::uint8_t> labels;

    std::size_t count() const { return labels.size(); }
    std::size_t image_size() const {
        return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    }
    std::span<const std::uint8_t> image(std::size_t i) const {
        return std::span<const std::uint8_t>(pixels).subspan(i * image_size(), image_size());
    }
};

namespace detail {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

inline std::vector<std::uint8_t> read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestionError("cannot open " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

inline std::uint32_t read_be32(const std::vector<std::uint8_t> &bytes, std::size_t offset,
                               const std::string &path) {
    if (bytes.size() < offset + 4) {
        throw IngestionError(path + ": truncated at offset " + std::to_string(bytes.size()) +
                             " (expected 4 bytes at offset " + std::to_string(offset) + ")");
    }
    return (std::uint32_t(bytes[offset]) << 24) | (std::uint32_t(bytes[offset + 1]) << 16) |
           (std::uint32_t(bytes[offset + 2]) << 8) | std::uint32_t(bytes[offset + 3]);
}

} // namespace detail

/**
 * @brief Parse an IDX image/label file pair (big-endian headers, row-major
 * pixels). Images use magic 0x00000803, labels 0x00000801. Truncation and
 * mismatches are reported with the byte offset.
 */
inline RawDataset load_idx(const std::string &images_path, const std::string &labels_path) {
    const std::vector<std::uint8_t> img = detail::read_file(images_path);
    const std::vector<std::uint8_t> lab = detail::read_file(labels_path);

    const std::uint32_t img_magic = detail::read_be32(img, 0, images_path);
    if (img_magic != detail::kIdxImagesMagic) {
        std::ostringstream msg;
        msg << images_path << ": bad images magic 0x" << std::hex << img_magic
            << " at offset 0";
        throw IngestionError(msg.str());
    }
    const std::uint32_t lab_magic = detail::read_be32(lab, 0, labels_path);
    if (lab_magic != detail::kIdxLabelsMagic) {
        std::ostringstream msg;
        msg << labels_path << ": bad labels magic 0x" << std::hex << lab_magic
            << " at offset 0";
        throw IngestionError(msg.str());
    }

    RawDataset out;
    const std::uint32_t img_count = detail::read_be32(img, 4, images_path);
    out.rows = detail::read_be32(img, 8, images_path);
    out.cols = detail::read_be32(img, 12, images_path);
    const std::uint32_t lab_count = detail::read_be32(lab, 4, labels_path);
    if (img_count != lab_count) {
        throw IngestionError("image count " + std::to_string(img_count) +
                             " does not match label count " + std::to_string(lab_count));
    }
    if (out.rows == 0 || out.cols == 0) {
        throw IngestionError(images_path + ": zero image dimensions in header");
    }

    const std::size_t pixel_bytes = std::size_t{img_count} * out.rows * out.cols;
    if (img.size() != 16 + pixel_bytes) {
        throw IngestionError(images_path + ": expected " + std::to_string(16 + pixel_bytes) +
                             " bytes, found " + std::to_string(img.size()) +
                             " (truncated at offset " + std::to_string(img.size()) + ")");
    }
    if (lab.size() != 8 + std::size_t{lab_count}) {
        throw IngestionError(labels_path + ": expected " + std::to_string(8 + lab_count) +
                             " bytes, found " + std::to_string(lab.size()) +
                             " (truncated at offset " + std::to_string(lab.size()) + ")");
    }
    for (std::size_t i = 0; i < lab_count; ++i) {
        if (lab[8 + i] > 9) {
            throw IngestionError(labels_path + ": label " + std::to_string(lab[8 + i]) +
                                 " out of range at offset " + std::to_string(8 + i));
        }
    }

    out.pixels.assign(img.begin() + 16, img.end());
    out.labels.assign(lab.begin() + 8, lab.end());
    return out;
}

/**
 * @brief Keep only two digit classes, mapping class_a -> 0 and class_b -> 1
 * in the original order.
 */
inline RawDataset select_binary(const RawDataset &dataset, int class_a, int class_b) {
    if (class_a == class_b) {
        throw UsageError("binary classes must differ");
    }
    if (class_a < 0 || class_a > 9 || class_b < 0 || class_b > 9) {
        throw UsageError("digit classes must be in [0, 9]");
    }
    RawDataset out;
    out.rows = dataset.rows;
    out.cols = dataset.cols;
    for (std::size_t i = 0; i < dataset.count(); ++i) {
        const int label = dataset.labels[i];
        if (label != class_a && label != class_b) {
            continue;
        }
        const auto image = dataset.image(i);
        out.pixels.insert(out.pixels.end(), image.begin(), image.end());
        out.labels.push_back(label == class_b ? 1 : 0);
    }
    bool has_a = false;
    bool has_b = false;
    for (std::uint8_t bit : out.labels) {
        (bit ? has_b : has_a) = true;
    }
    if (!has_a || !has_b) {
        throw IngestionError("class " + std::to_string(has_a ? class_b : class_a) +
                             " absent from the dataset");
    }
    return out;
}

/**
 * @brief Mean and top-k orthonormal principal directions of the pixel data
 * (pixels scaled to [0, 1] by /255 before fitting).
 */
struct PcaModel {
    std::vector<double> mean;                    // image_size
    std::vector<std::vector<double>> components; // k rows, orthonormal
    std::vector<double> eigenvalues;             // matching, non-increasing

    int dim() const { return static_cast<int>(components.size()); }

    std::vector<double> project(std::span<const double> image) const {
        if (image.size() != mean.size()) {
            throw UsageError("image size does not match the PCA model");
        }
        std::vector<double> centered(image.size());
        for (std::size_t i = 0; i < image.size(); ++i) {
            centered[i] = image[i] - mean[i];
        }
        std::vector<double> out(components.size(), 0.0);
        for (std::size_t c = 0; c < components.size(); ++c) {
            double dot = 0.0;
            for (std::size_t i = 0; i < centered.size(); ++i) {
                dot += components[c][i] * centered[i];
            }
            out[c] = dot;
        }
        return out;
    }

    std::vector<double> project_pixels(std::span<const std::uint8_t> pixels) const {
        std::vector<double> scaled(pixels.size());
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            scaled[i] = static_cast<double>(pixels[i]) / 255.0;
        }
        return project(scaled);
    }
};

/**
 * @brief Fit PCA on the given images: mean-centered top-k eigenvectors of
 * the sample covariance. Each component's sign is fixed so its
 * largest-magnitude entry is positive, making fits reproducible across
 * platforms.
 */
inline PcaModel fit_pca(const RawDataset &dataset, int k = 8) {
    const std::size_t n = dataset.count();
    const std::size_t d = dataset.image_size();
    if (n < static_cast<std::size_t>(k)) {
        throw IngestionError("PCA needs at least " + std::to_string(k) + " samples, have " +
                             std::to_string(n));
    }

    Eigen::MatrixXd x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto image = dataset.image(i);
        for (std::size_t j = 0; j < d; ++j) {
            x(i, j) = static_cast<double>(image[j]) / 255.0;
        }
    }
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw IngestionError("PCA eigendecomposition failed");
    }

    PcaModel model;
    model.mean.assign(mean.data(), mean.data() + d);
    model.components.reserve(k);
    model.eigenvalues.reserve(k);
    // SelfAdjointEigenSolver returns ascending eigenvalues; take the top k.
    for (int c = 0; c < k; ++c) {
        const Eigen::Index col = static_cast<Eigen::Index>(d) - 1 - c;
        const double eigenvalue = solver.eigenvalues()(col);
        if (eigenvalue <= 1e-12) {
            throw IngestionError("covariance rank below " + std::to_string(k) +
                                 " (eigenvalue " + std::to_string(c + 1) + " is " +
                                 std::to_string(eigenvalue) + ")");
        }
        Eigen::VectorXd v = solver.eigenvectors().col(col);
        Eigen::Index argmax = 0;
        v.cwiseAbs().maxCoeff(&argmax);
        if (v(argmax) < 0.0) {
            v = -v;
        }
        model.components.emplace_back(v.data(), v.data() + d);
        model.eigenvalues.push_back(eigenvalue);
    }
    return model;
}

/// Feature vectors (flattened, count * dim) with binary labels.
struct FeatureDataset {
    std::size_t dim = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> labels;

    std::size_t count() const { return labels.size(); }
    std::span<const double> feature(std::size_t i) const {
        return std::span<const double>(values).subspan(i * dim, dim);
    }
    void append(std::span<const double> feature_values, std::uint8_t label) {
        values.insert(values.end(), feature_values.begin(), feature_values.end());
        labels.push_back(label);
    }
};

/// Project every image of a dataset through a fitted PCA model.
inline FeatureDataset project_dataset(const PcaModel &model, const RawDataset &dataset) {
    FeatureDataset out;
    out.dim = static_cast<std::size_t>(model.dim());
    out.values.reserve(dataset.count() * out.dim);
    out.labels.reserve(dataset.count());
    for (std::size_t i = 0; i < dataset.count(); ++i) {
        const std::vector<double> projected = model.project_pixels(dataset.image(i));
        out.append(projected, dataset.labels[i]);
    }
    return out;
}

/// Per-dimension training min/max for the affine map onto [-1, 1].
struct RescaleMap {
    std::vector<double> lo;
    std::vector<double> hi;

    double apply_one(std::size_t dim, double v, bool clip) const {
        const double span = hi[dim] - lo[dim];
        if (span == 0.0) {
            return 0.0; // constant dimension maps to 0
        }
        double scaled = 2.0 * (v - lo[dim]) / span - 1.0;
        if (clip) {
            scaled = std::clamp(scaled, -1.0, 1.0);
        }
        return scaled;
    }
};

inline RescaleMap fit_feature_range(const FeatureDataset &train) {
    if (train.count() == 0) {
        throw UsageError("cannot fit a feature range on an empty dataset");
    }
    RescaleMap map;
    map.lo.assign(train.dim, std::numeric_limits<double>::infinity());
    map.hi.assign(train.dim, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < train.count(); ++i) {
        const auto f = train.feature(i);
        for (std::size_t d = 0; d < train.dim; ++d) {
            map.lo[d] = std::min(map.lo[d], f[d]);
            map.hi[d] = std::max(map.hi[d], f[d]);
        }
    }
    return map;
}

/// Apply the training min-max map; test data is clipped into [-1, 1].
inline FeatureDataset apply_rescale(const RescaleMap &map, const FeatureDataset &dataset,
                                    bool clip) {
    if (map.lo.size() != dataset.dim) {
        throw UsageError("rescale map dimension does not match features");
    }
    FeatureDataset out;
    out.dim = dataset.dim;
    out.values.resize(dataset.values.size());
    out.labels = dataset.labels;
    for (std::size_t i = 0; i < dataset.count(); ++i) {
        for (std::size_t d = 0; d < dataset.dim; ++d) {
            out.values[i * dataset.dim + d] =
                map.apply_one(d, dataset.values[i * dataset.dim + d], clip);
        }
    }
    return out;
}

/// Min-max rescale a training split onto [-1, 1], returning the fitted map
/// for reuse on test data.
inline std::pair<FeatureDataset, RescaleMap> rescale_features(const FeatureDataset &train) {
    RescaleMap map = fit_feature_range(train);
    return {apply_rescale(map, train, false), map};
}

enum class PartitionMode { Proportions, Dirichlet };

/**
 * @brief Label-skew partition request: per-client sizes m_i plus either
 * explicit per-client class fractions or a Dirichlet concentration alpha.
 */
struct PartitionSpec {
    int n_clients = 1;
    PartitionMode mode = PartitionMode::Proportions;
    std::vector<std::array<double, 2>> proportions; // per client: (class0, class1)
    double alpha = 0.5;
    std::vector<std::size_t> sizes; // m_i

    void validate() const {
        if (n_clients < 1) {
            throw ConfigError("partition needs at least one client");
        }
        if (sizes.size() != static_cast<std::size_t>(n_clients)) {
            throw ConfigError("partition sizes must list one m_i per client");
        }
        for (std::size_t m : sizes) {
            if (m < 1) {
                throw ConfigError("every client size m_i must be >= 1");
            }
        }
        if (mode == PartitionMode::Proportions) {
            if (proportions.size() != static_cast<std::size_t>(n_clients)) {
                throw ConfigError("proportions must list one class mix per client");
            }
            for (const auto &mix : proportions) {
                if (mix[0] < 0.0 || mix[1] < 0.0 || std::abs(mix[0] + mix[1] - 1.0) > 1e-6) {
                    throw ConfigError("each client's class fractions must be nonnegative "
                                      "and sum to 1");
                }
            }
        } else if (alpha <= 0.0) {
            throw ConfigError("dirichlet alpha must be positive");
        }
    }
};

/// One row per (client, class): count and within-client fraction.
struct PartitionReport {
    struct Row {
        int client_id;
        int label;
        std::size_t count;
        double fraction;
    };
    std::vector<Row> rows;

    std::string to_csv() const {
        std::ostringstream out;
        out << "client_id,class,count,fraction\n";
        for (const Row &row : rows) {
            out << row.client_id << ',' << row.label << ',' << row.count << ','
                << row.fraction << '\n';
        }
        return out.str();
    }
};

struct Partition {
    std::vector<FeatureDataset> clients;
    PartitionReport report;
};

/// Partition result as per-client index lists into the source dataset.
struct IndexPartition {
    std::vector<std::vector<std::size_t>> clients;
    PartitionReport report;
};

namespace detail {

// Marsaglia-Tsang gamma sampling on our portable uniform/normal draws.
inline double sample_gamma(double shape, RngStream &rng) {
    if (shape < 1.0) {
        const double u = std::max(rng.uniform01(), 1e-300);
        return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = rng.normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) {
            continue;
        }
        v = v * v * v;
        const double u = rng.uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v;
        }
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

inline void seeded_shuffle(std::vector<std::size_t> &indices, RngStream &rng) {
    for (std::size_t i = indices.size(); i > 1; --i) {
        const std::size_t j = rng.uniform_int(i);
        std::swap(indices[i - 1], indices[j]);
    }
}

} // namespace detail

/**
 * @brief Pick label-skewed, disjoint per-client index sets. Sizes are exact;
 * Proportions mode uses the requested class mixes, Dirichlet mode draws each
 * client's mix from Dirichlet(alpha). Infeasible requests raise ConfigError
 * naming the shortfall.
 */
inline IndexPartition partition_indices(std::span<const std::uint8_t> labels,
                                        const PartitionSpec &spec, RngStream &rng) {
    spec.validate();

    std::array<std::vector<std::size_t>, 2> pools;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        pools[labels[i] ? 1 : 0].push_back(i);
    }
    detail::seeded_shuffle(pools[0], rng);
    detail::seeded_shuffle(pools[1], rng);

    // Resolve per-client class counts.
    std::vector<std::array<std::size_t, 2>> counts(spec.n_clients);
    for (int i = 0; i < spec.n_clients; ++i) {
        double frac1;
        if (spec.mode == PartitionMode::Proportions) {
            frac1 = spec.proportions[i][1];
        } else {
            const double g0 = detail::sample_gamma(spec.alpha, rng);
            const double g1 = detail::sample_gamma(spec.alpha, rng);
            frac1 = g1 / (g0 + g1);
        }
        const auto m = spec.sizes[i];
        const auto ones = static_cast<std::size_t>(std::llround(frac1 * static_cast<double>(m)));
        counts[i] = {m - std::min(m, ones), std::min(m, ones)};
    }

    for (int label = 0; label < 2; ++label) {
        std::size_t requested = 0;
        for (int i = 0; i < spec.n_clients; ++i) {
            requested += counts[i][label];
        }
        if (requested > pools[label].size()) {
            throw ConfigError("partition requests " + std::to_string(requested) +
                              " samples of class " + std::to_string(label) + " but only " +
                              std::to_string(pools[label].size()) + " are available (short " +
                              std::to_string(requested - pools[label].size()) + ")");
        }
    }

    IndexPartition out;
    out.clients.resize(spec.n_clients);
    std::array<std::size_t, 2> next = {0, 0};
    for (int i = 0; i < spec.n_clients; ++i) {
        for (int label = 0; label < 2; ++label) {
            for (std::size_t j = 0; j < counts[i][label]; ++j) {
                out.clients[i].push_back(pools[label][next[label]++]);
            }
            out.report.rows.push_back(PartitionReport::Row{
                i, label, counts[i][label],
                static_cast<double>(counts[i][label]) / static_cast<double>(spec.sizes[i])});
        }
        // Each client keeps the source dataset's order; a one-client
        // partition of the full dataset is then the identity.
        std::sort(out.clients[i].begin(), out.clients[i].end());
    }
    return out;
}

/**
 * @brief Split a feature dataset across clients with deliberate label skew;
 * see partition_indices for the drawing rules.
 */
inline Partition partition_noniid(const FeatureDataset &dataset, const PartitionSpec &spec,
                                  RngStream &rng) {
    IndexPartition indices = partition_indices(dataset.labels, spec, rng);
    Partition out;
    out.report = std::move(indices.report);
    out.clients.resize(indices.clients.size());
    for (std::size_t i = 0; i < indices.clients.size(); ++i) {
        out.clients[i].dim = dataset.dim;
        for (std::size_t index : indices.clients[i]) {
            out.clients[i].append(dataset.feature(index), dataset.labels[index]);
        }
    }
    return out;
}

/// Draw `count` indices from [0, total) without replacement, seeded.
inline std::vector<std::size_t> sample_indices(std::size_t total, std::size_t count,
                                               RngStream &rng) {
    if (count > total) {
        throw ConfigError("cannot draw " + std::to_string(count) + " samples from " +
                          std::to_string(total));
    }
    std::vector<std::size_t> all(total);
    for (std::size_t i = 0; i < total; ++i) {
        all[i] = i;
    }
    detail::seeded_shuffle(all, rng);
    all.resize(count);
    return all;
}

} // namespace ccqfl
