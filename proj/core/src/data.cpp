#include "gsfl/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>

#include "gsfl/errors.hpp"
#include "gsfl/rng.hpp"

namespace gsfl {

namespace {

// Sub-stream tags inside the dataset seed.
enum : std::uint64_t {
    kMeansStream = 1,
    kTrainDrawStream = 2,
    kTrainShuffleStream = 3,
    kTestDrawStream = 4,
    kTestShuffleStream = 5,
};

Dataset make_blobs(const std::vector<double>& means, std::size_t classes, std::size_t dim,
                   std::size_t n, SplitTag tag, std::uint64_t draw_seed,
                   std::uint64_t shuffle_seed) {
    const double noise_std = std::sqrt(0.5);
    const std::size_t base = n / classes;
    const std::size_t extra = n % classes;

    Tensor features = Tensor::matrix(n, dim);
    std::vector<std::size_t> labels(n);
    SeededRng draw(draw_seed);
    std::size_t row = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        const std::size_t count = base + (c < extra ? 1 : 0);
        for (std::size_t s = 0; s < count; ++s, ++row) {
            labels[row] = c;
            for (std::size_t k = 0; k < dim; ++k) {
                features.at(row, k) = means[c * dim + k] + noise_std * draw.normal();
            }
        }
    }

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    SeededRng shuffle(shuffle_seed);
    shuffle.shuffle(perm);

    Dataset out;
    out.features = Tensor::matrix(n, dim);
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.labels[i] = labels[perm[i]];
        for (std::size_t k = 0; k < dim; ++k) out.features.at(i, k) = features.at(perm[i], k);
    }
    out.num_classes = classes;
    out.tag = tag;
    return out;
}

std::uint32_t read_be_u32(std::ifstream& in, const std::string& path) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw IdxTruncated(path + ": truncated header");
    }
    return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
           (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
}

}  // namespace

std::pair<Dataset, Dataset> gen_synthetic(std::size_t classes, std::size_t dim,
                                          std::size_t n_train, std::size_t n_test,
                                          std::uint64_t seed) {
    if (classes < 2) throw ConfigError("gen_synthetic: classes must be >= 2");
    if (dim < 2) throw ConfigError("gen_synthetic: dim must be >= 2");
    if (n_train < classes || n_test < 1) {
        throw ConfigError("gen_synthetic: degenerate n_train/n_test");
    }

    std::vector<double> means(classes * dim);
    SeededRng mean_rng(derive_seed(seed, kMeansStream));
    for (double& m : means) m = mean_rng.uniform(-3.0, 3.0);

    Dataset train = make_blobs(means, classes, dim, n_train, SplitTag::kTrain,
                               derive_seed(seed, kTrainDrawStream),
                               derive_seed(seed, kTrainShuffleStream));
    Dataset test = make_blobs(means, classes, dim, n_test, SplitTag::kTest,
                              derive_seed(seed, kTestDrawStream),
                              derive_seed(seed, kTestShuffleStream));
    return {std::move(train), std::move(test)};
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream images(images_path, std::ios::binary);
    if (!images) throw IoError("cannot open " + images_path);
    std::ifstream labels(labels_path, std::ios::binary);
    if (!labels) throw IoError("cannot open " + labels_path);

    const std::uint32_t image_magic = read_be_u32(images, images_path);
    if (image_magic != 0x00000803u) {
        throw IdxBadMagic(images_path + ": bad image magic");
    }
    const std::uint32_t n_images = read_be_u32(images, images_path);
    const std::uint32_t rows = read_be_u32(images, images_path);
    const std::uint32_t cols = read_be_u32(images, images_path);

    const std::uint32_t label_magic = read_be_u32(labels, labels_path);
    if (label_magic != 0x00000801u) {
        throw IdxBadMagic(labels_path + ": bad label magic");
    }
    const std::uint32_t n_labels = read_be_u32(labels, labels_path);
    if (n_images != n_labels) {
        throw IdxCountMismatch(images_path + ": " + std::to_string(n_images) + " images vs " +
                               std::to_string(n_labels) + " labels");
    }

    const std::size_t pixels = std::size_t(rows) * cols;
    std::vector<unsigned char> image_bytes(std::size_t(n_images) * pixels);
    if (!images.read(reinterpret_cast<char*>(image_bytes.data()),
                     static_cast<std::streamsize>(image_bytes.size()))) {
        throw IdxTruncated(images_path + ": truncated pixel data");
    }
    std::vector<unsigned char> label_bytes(n_labels);
    if (!labels.read(reinterpret_cast<char*>(label_bytes.data()),
                     static_cast<std::streamsize>(label_bytes.size()))) {
        throw IdxTruncated(labels_path + ": truncated label data");
    }

    Dataset out;
    out.features = Tensor::matrix(n_images, pixels);
    for (std::size_t i = 0; i < image_bytes.size(); ++i) {
        out.features.data[i] = static_cast<double>(image_bytes[i]) / 255.0;
    }
    out.labels.resize(n_labels);
    std::size_t max_label = 0;
    for (std::size_t i = 0; i < label_bytes.size(); ++i) {
        out.labels[i] = label_bytes[i];
        max_label = std::max(max_label, out.labels[i]);
    }
    out.num_classes = max_label + 1;
    out.tag = SplitTag::kTrain;
    return out;
}

ShardPlan partition(const Dataset& train, const Topology& topo, PartitionMode mode,
                    std::size_t skew_classes, std::uint64_t seed) {
    validate_topology(topo);
    const std::size_t n = train.size();
    const std::size_t n_clients = topo.n_clients;
    if (n < n_clients) {
        throw ConfigError("partition: " + std::to_string(n) + " samples for " +
                          std::to_string(n_clients) + " clients");
    }

    ShardPlan plan;
    plan.shards.resize(n_clients);

    if (mode == PartitionMode::kIid) {
        std::vector<std::size_t> indices(n);
        std::iota(indices.begin(), indices.end(), 0);
        SeededRng rng(seed);
        rng.shuffle(indices);
        const std::size_t base = n / n_clients;
        const std::size_t extra = n % n_clients;
        std::size_t pos = 0;
        for (std::size_t c = 0; c < n_clients; ++c) {
            const std::size_t count = base + (c < extra ? 1 : 0);
            plan.shards[c].assign(indices.begin() + static_cast<std::ptrdiff_t>(pos),
                                  indices.begin() + static_cast<std::ptrdiff_t>(pos + count));
            pos += count;
        }
        return plan;
    }

    // label-skew(k)
    const std::size_t classes = train.num_classes;
    if (skew_classes < 1 || skew_classes > classes) {
        throw ConfigError("partition: label-skew k " + std::to_string(skew_classes) +
                          " out of range [1, " + std::to_string(classes) + "]");
    }
    std::vector<std::vector<std::size_t>> holders(classes);
    for (std::size_t i = 0; i < n_clients; ++i) {
        for (std::size_t j = 0; j < skew_classes; ++j) {
            holders[(i * skew_classes + j) % classes].push_back(i);
        }
    }
    for (std::size_t c = 0; c < classes; ++c) {
        if (holders[c].empty()) {
            throw ConfigError("partition: class " + std::to_string(c) +
                              " is held by no client; increase k or n_clients");
        }
    }
    for (std::size_t c = 0; c < classes; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (train.labels[i] == c) members.push_back(i);
        }
        SeededRng rng(derive_seed(seed, c + 1));
        rng.shuffle(members);
        for (std::size_t s = 0; s < members.size(); ++s) {
            plan.shards[holders[c][s % holders[c].size()]].push_back(members[s]);
        }
    }
    return plan;
}

std::vector<std::vector<std::size_t>> batches(const std::vector<std::size_t>& shard,
                                              std::size_t batch_size, std::uint64_t epoch_seed) {
    if (batch_size == 0) throw ConfigError("batches: batch_size must be positive");
    if (shard.size() < batch_size) {
        throw ConfigError("batches: shard of " + std::to_string(shard.size()) +
                          " samples cannot fill a batch of " + std::to_string(batch_size));
    }
    std::vector<std::size_t> order = shard;
    SeededRng rng(epoch_seed);
    rng.shuffle(order);
    const std::size_t n_batches = order.size() / batch_size;
    std::vector<std::vector<std::size_t>> out;
    out.reserve(n_batches);
    for (std::size_t b = 0; b < n_batches; ++b) {
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b * batch_size),
                         order.begin() + static_cast<std::ptrdiff_t>((b + 1) * batch_size));
    }
    return out;
}

std::pair<Tensor, std::vector<std::size_t>> gather(const Dataset& data,
                                                   const std::vector<std::size_t>& indices) {
    const std::size_t dim = data.dim();
    Tensor x = Tensor::matrix(indices.size(), dim);
    std::vector<std::size_t> y(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::size_t idx = indices[i];
        y[i] = data.labels[idx];
        for (std::size_t k = 0; k < dim; ++k) x.at(i, k) = data.features.at(idx, k);
    }
    return {std::move(x), std::move(y)};
}

}  // namespace gsfl
