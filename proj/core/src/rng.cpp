#include "sitn/rng.hpp"

#include <cmath>
#include <numbers>

#include "sitn/errors.hpp"

namespace sitn {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    // Mix the master first so that (master, stream) and (master', stream')
    // with master + 1 == master' do not collide trivially.
    std::uint64_t state = master;
    std::uint64_t mixed = splitmix64(state);
    state = mixed ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    return splitmix64(state);
}

Rng::Rng(std::uint64_t seed) : gen_(seed), seed_(seed) {}

std::uint64_t Rng::next_u64() { return gen_(); }

double Rng::uniform() {
    // 53-bit mantissa taken from the high bits; result in [0, 1).
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

std::uint64_t Rng::below(std::uint64_t n) {
    require(n > 0, errc::invalid_input, "below(n) requires n > 0");
    // Rejection sampling on the top of the range removes modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller with u1 in (0, 1]: the +1 before scaling keeps log(u1)
    // finite for every raw draw.
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

void Rng::fill_normal(double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = normal();
}

Rng Rng::split(std::uint64_t stream) const {
    return Rng(derive_seed(seed_, stream));
}

void shuffle_indices(std::vector<std::size_t>& indices, Rng& rng) {
    if (indices.size() < 2) return;
    for (std::size_t i = indices.size() - 1; i > 0; --i) {
        const std::size_t j =
            static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(indices[i], indices[j]);
    }
}

}  // namespace sitn
