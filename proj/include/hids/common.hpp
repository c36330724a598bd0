#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hids {

// Error categories map onto CLI exit codes (input=2, config=3, internal=4).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InternalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Deterministic 64-bit generator (splitmix64). Used everywhere a seeded
/// draw feeds a reproducible artifact: standard-library distributions are
/// implementation-defined and would break byte-identical outputs across
/// toolchains.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Unbiased draw in [0, n). n must be > 0.
    uint64_t below(uint64_t n) {
        const uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

/// Stream-independent seed derivation for sub-tasks of a master seed.
inline uint64_t derive_seed(uint64_t master, uint64_t salt) {
    SplitMix64 g(master ^ (salt * 0x9e3779b97f4a7c15ULL + 0x123456789abcdefULL));
    return g.next();
}

/// Shortest round-trip decimal form of a double (std::to_chars). All
/// serialized numbers go through this so artifacts are byte-stable.
std::string format_double(double v);

/// Inverse of format_double; throws InputError on malformed text.
double parse_double(std::string_view text);

/// Percentage with three decimals, round-half-up ("96.665").
std::string format_percent(double fraction);

uint64_t fnv1a64(std::string_view bytes);

std::string_view trim(std::string_view s);

std::vector<std::string> split_on(std::string_view s, char delim);

/// Splits on a multi-character separator; no empty trailing element for a
/// trailing separator is produced for empty input.
std::vector<std::string> split_on(std::string_view s, std::string_view delim);

}  // namespace hids
