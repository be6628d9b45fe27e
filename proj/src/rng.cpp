#include "hypergrad/rng.hpp"

#include <cmath>

namespace hypergrad {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t index) {
    return mix64(mix64(master_seed) ^ mix64(index * kGolden + 1));
}

KeyedRng::KeyedRng(const SampleKey& key) {
    // Expand (stream, counter) into xoshiro256++ state via splitmix64 steps.
    std::uint64_t s = mix64(key.stream_id) ^ mix64(key.counter + kGolden);
    for (auto& w : state_) {
        s += kGolden;
        w = mix64(s);
    }
}

std::uint64_t KeyedRng::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double KeyedRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double KeyedRng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t KeyedRng::uniform_index(std::uint64_t n) {
    // rejection-free multiply-shift; bias is negligible for n << 2^64
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

std::vector<double> KeyedRng::gaussian_vec(std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) v = gaussian();
    return out;
}

std::vector<std::int64_t> seeded_permutation(std::int64_t n, const SampleKey& key) {
    std::vector<std::int64_t> perm(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    KeyedRng rng(key);
    for (std::int64_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return perm;
}

}  // namespace hypergrad
