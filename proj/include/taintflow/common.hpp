#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace taintflow {

using Satoshi = std::int64_t;

enum class ErrorKind {
    ParseError,
    DuplicateTx,
    DanglingInput,
    DoubleSpend,
    NonMonotonicValue,
    InsufficientInputValue,
    UnknownTx,
    UnknownType,
    ConflictingLabel,
    EmptyCorpus,
    SeedNotFound,
    EmptyVocabulary,
    NonFiniteLoss,
    NoKnownTokens,
    TooFewSamples,
    DegenerateData,
    LengthMismatch,
    ConfigInvalid,
    IoError,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// Counter-based 64-bit generator (SplitMix64). All randomized code in this
// library draws from it so results are identical across platforms.
struct Rng {
    std::uint64_t state = 0;

    explicit Rng(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, n). Lemire multiply-shift; the O(2^-64) bias is
    // irrelevant at the sample sizes used here.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

std::uint64_t fnv1a64(std::string_view data);

// Derives an independent stream seed from (seed, key, index); used to make
// per-walk and per-restart randomness schedule-independent.
std::uint64_t derive_stream(std::uint64_t seed, std::string_view key, std::uint64_t index);

// Calendar month index of a unix timestamp: (year - 1970) * 12 + month0, UTC.
std::int64_t month_index(std::int64_t unix_seconds);

// Unix seconds for the first day of the given calendar month, UTC.
std::int64_t month_start(int year, int month1);

std::uint64_t hash_file(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace taintflow
