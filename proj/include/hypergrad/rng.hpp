#pragma once

#include <cstdint>
#include <vector>

namespace hypergrad {

/// Address of one random draw. Every draw made anywhere in the library is a
/// pure function of its key: identical keys reproduce identical values and
/// distinct keys give statistically independent values. Stream ids are
/// derived from a master seed (derive_stream), so a whole experiment replays
/// from a single integer.
struct SampleKey {
    std::uint64_t stream_id = 0;
    std::uint64_t counter = 0;

    SampleKey at(std::uint64_t c) const { return {stream_id, c}; }
    SampleKey advanced(std::uint64_t by) const { return {stream_id, counter + by}; }

    friend bool operator==(const SampleKey&, const SampleKey&) = default;
};

std::uint64_t mix64(std::uint64_t x);

/// Derives the stream id of substream `index` under `master_seed`.
/// Distinct (master_seed, index) pairs map to distinct streams.
std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t index);

/// Counter-based generator: the state is seeded from a SampleKey only, so
/// construction + a fixed draw pattern is reproducible and side-effect free.
class KeyedRng {
public:
    explicit KeyedRng(const SampleKey& key);

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double uniform();
    /// Standard normal (Box-Muller, spare value cached).
    double gaussian();
    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);

    std::vector<double> gaussian_vec(std::size_t n);

private:
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Fisher-Yates shuffle of 0..n-1 under a dedicated key.
std::vector<std::int64_t> seeded_permutation(std::int64_t n, const SampleKey& key);

}  // namespace hypergrad
