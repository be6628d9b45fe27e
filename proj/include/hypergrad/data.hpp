#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hypergrad/rng.hpp"

namespace hypergrad {

/// Dense dataset: n rows of d features (row-major) plus integer labels.
struct Dataset {
    std::int64_t n = 0;
    std::int64_t d = 0;
    std::vector<double> X;  // n*d, row-major
    std::vector<int> y;
    double feature_scale = 1.0;  // applied to raw values at load time

    std::span<const double> row(std::int64_t i) const {
        return {X.data() + i * d, static_cast<std::size_t>(d)};
    }
};

/// Reads an IDX image/label file pair (big-endian headers, magic 0x803 for
/// images and 0x801 for labels). Pixels are scaled to [0,1]; images are
/// flattened row-major.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Writes a dataset as an IDX pair with unsigned-byte pixels
/// round(value/feature_scale). Inverse of load_idx for integer pixel data.
void write_idx(const Dataset& ds, const std::string& images_path, const std::string& labels_path);

/// Odd digits map to +1, even to -1. Labels must lie in 0..9.
std::vector<int> binarize_odd_even(const std::vector<int>& labels);

/// Disjoint random split into (train, val) of the requested sizes,
/// deterministic in the seed.
std::pair<Dataset, Dataset> split_train_val(const Dataset& ds, std::int64_t n_tr, std::int64_t n_val,
                                            std::uint64_t seed);

enum class SamplerMode { IidWithReplacement, EpochShuffle };

/// Minibatch index stream. Draws are pure functions of the sample key:
/// iid mode picks b indices uniformly with replacement, independently per
/// key; epoch-shuffle partitions a seeded permutation into ceil(n/b)
/// batches per epoch, with the epoch indexed by key.counter.
class MinibatchSampler {
public:
    MinibatchSampler(std::int64_t n, std::int64_t b, SamplerMode mode, std::uint64_t seed);

    std::vector<std::int64_t> draw(const SampleKey& key) const;

    std::int64_t n() const { return n_; }
    std::int64_t batch_size() const { return b_; }
    SamplerMode mode() const { return mode_; }

private:
    std::int64_t n_;
    std::int64_t b_;
    SamplerMode mode_;
    std::uint64_t seed_;
};

MinibatchSampler minibatch_stream(std::int64_t n, std::int64_t b, SamplerMode mode, std::uint64_t seed);

/// Parses "label idx:val ..." lines with 1-based, strictly increasing
/// indices; absent features are zero.
Dataset load_libsvm(const std::string& path);

/// Numeric CSV with the label in the first column; a single header row is
/// skipped when the first field is not numeric.
Dataset load_csv(const std::string& path);
void write_csv_dataset(const Dataset& ds, const std::string& path);

}  // namespace hypergrad
