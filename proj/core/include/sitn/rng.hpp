#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace sitn {

/// SplitMix64 step: advances `state` and returns the next output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Derives an independent stream seed from a master seed and a stream index.
/// Pure function of (master, stream): used to hand out per-purpose and
/// per-iteration RNG streams so that parallel and serial execution consume
/// identical randomness.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// Deterministic random generator with explicitly specified algorithms.
///
/// mt19937_64 supplies the raw 64-bit stream (fully pinned by the standard);
/// uniform and normal variates are derived with fixed algorithms below rather
/// than std::*_distribution, whose output is implementation-defined. Two runs
/// with the same seed therefore produce bit-identical sequences.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform();

    /// Uniform on [a, b).
    double uniform(double a, double b);

    /// Unbiased uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n);

    /// Standard normal via Box-Muller (pair cached).
    double normal();

    /// Fills `out[0..n)` with standard normals.
    void fill_normal(double* out, std::size_t n);
    void fill_normal(std::span<double> out) { fill_normal(out.data(), out.size()); }

    /// Independent child stream; pure function of this Rng's seed and `stream`
    /// (not of how much randomness has been consumed).
    Rng split(std::uint64_t stream) const;

private:
    std::mt19937_64 gen_;
    std::uint64_t seed_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Deterministic Fisher-Yates shuffle of indices [0, n) driven by `rng`.
/// (std::shuffle is implementation-defined; this one is pinned.)
void shuffle_indices(std::vector<std::size_t>& indices, Rng& rng);

}  // namespace sitn
