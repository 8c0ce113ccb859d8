#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace agentcrowd {

/// 64-bit FNV-1a. Used for seed derivation and mock fixture keys, so its
/// output is part of the on-disk contract and must never change.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 14695981039346656037ULL);

/// Derives a child seed from a parent seed and a label (stage name,
/// "size:4/rep:2", ...). Pure and platform independent.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

/// Lower-case 16-digit hex rendering of a 64-bit value.
std::string hex64(std::uint64_t value);

/// Portable random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Bounded draws and shuffles are implemented here (rejection
/// sampling, Fisher-Yates) because the standard distributions are
/// implementation defined. A given seed therefore produces the same samples
/// with every compiler and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform real in [0, 1) with 53 bits of precision.
    double unit();

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

    /// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
};

}  // namespace agentcrowd
