#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace permsel::detail {

using Rng = std::mt19937_64;

// Independent stream keyed by (seed, k0, k1, ...). Streams depend only on the
// key, never on the order in which they are created.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys = {}) {
    std::vector<std::uint32_t> words;
    words.reserve(2 * (keys.size() + 1));
    auto push = [&](std::uint64_t x) {
        words.push_back(static_cast<std::uint32_t>(x));
        words.push_back(static_cast<std::uint32_t>(x >> 32));
    };
    push(seed);
    for (auto k : keys) push(k);
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

// Unbiased integer in [0, n) by rejection. Portable across standard libraries,
// unlike std::uniform_int_distribution.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t rem = (UINT64_MAX % n + 1) % n;  // 2^64 mod n
    const std::uint64_t limit = UINT64_MAX - rem;         // accept r <= limit
    std::uint64_t r = rng();
    while (rem != 0 && r > limit) r = rng();
    return r % n;
}

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace permsel::detail
