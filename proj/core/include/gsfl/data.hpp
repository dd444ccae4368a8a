#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gsfl/tensor.hpp"
#include "gsfl/topology.hpp"

namespace gsfl {

enum class SplitTag { kTrain, kTest };

struct Dataset {
    Tensor features;  // num_samples x dim
    std::vector<std::size_t> labels;
    std::size_t num_classes = 0;
    SplitTag tag = SplitTag::kTrain;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return features.cols(); }
};

enum class PartitionMode { kIid, kLabelSkew };

// Per-client sample indices into the training set. Shards are disjoint and
// together cover every training sample.
struct ShardPlan {
    std::vector<std::vector<std::size_t>> shards;
};

// Gaussian blobs: class c has its mean drawn uniform in [-3,3]^dim and
// isotropic covariance 0.5*I. Per-class counts are as equal as n_train/n_test
// allow (remainders go to the earliest classes); sample order is shuffled.
std::pair<Dataset, Dataset> gen_synthetic(std::size_t classes, std::size_t dim,
                                          std::size_t n_train, std::size_t n_test,
                                          std::uint64_t seed);

// Parses the IDX image/label file pair (big-endian magics 0x00000803 and
// 0x00000801, u8 payloads). Pixels are scaled to [0,1] and flattened
// row-major. num_classes becomes max(label)+1.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// iid: seeded shuffle, then equal contiguous chunks (remainder to the
// earliest clients). label-skew(k): client i holds classes
// {(i*k + j) mod C, j < k}; each class's seeded shuffle is dealt round-robin
// to the clients holding it. Errors if some class would go undealt.
ShardPlan partition(const Dataset& train, const Topology& topo, PartitionMode mode,
                    std::size_t skew_classes, std::uint64_t seed);

// Seeded shuffle of the shard, then consecutive index batches; the final
// partial batch is dropped.
std::vector<std::vector<std::size_t>> batches(const std::vector<std::size_t>& shard,
                                              std::size_t batch_size, std::uint64_t epoch_seed);

// Materializes (features, labels) for one index batch.
std::pair<Tensor, std::vector<std::size_t>> gather(const Dataset& data,
                                                   const std::vector<std::size_t>& indices);

}  // namespace gsfl
