#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ids {

/// Random stream used everywhere. Every experiment run owns its own instance.
using Rng = std::mt19937_64;

/// Tolerance for probability vectors on construction.
inline constexpr double kProbTolerance = 1e-12;

/// Invalid user configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An exact enumeration would exceed its work budget (CLI exit code 3).
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives the seed of child stream `stream` from a parent seed.
///
/// seed(base, k) = splitmix64(splitmix64(base) ^ splitmix64(k + 1)). Distinct
/// (base, k) pairs give statistically independent mt19937_64 streams, and each
/// child is reproducible on its own without replaying its siblings.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(splitmix64(base) ^ splitmix64(stream + 1));
}

inline Rng make_rng(std::uint64_t base, std::uint64_t stream) {
    return Rng(derive_seed(base, stream));
}

} // namespace ids
