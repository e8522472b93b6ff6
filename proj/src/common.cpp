#include "taintflow/common.hpp"

#include <fstream>
#include <sstream>

namespace taintflow {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::DuplicateTx: return "DuplicateTx";
        case ErrorKind::DanglingInput: return "DanglingInput";
        case ErrorKind::DoubleSpend: return "DoubleSpend";
        case ErrorKind::NonMonotonicValue: return "NonMonotonicValue";
        case ErrorKind::InsufficientInputValue: return "InsufficientInputValue";
        case ErrorKind::UnknownTx: return "UnknownTx";
        case ErrorKind::UnknownType: return "UnknownType";
        case ErrorKind::ConflictingLabel: return "ConflictingLabel";
        case ErrorKind::EmptyCorpus: return "EmptyCorpus";
        case ErrorKind::SeedNotFound: return "SeedNotFound";
        case ErrorKind::EmptyVocabulary: return "EmptyVocabulary";
        case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorKind::NoKnownTokens: return "NoKnownTokens";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::DegenerateData: return "DegenerateData";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::ConfigInvalid: return "ConfigInvalid";
        case ErrorKind::IoError: return "IoError";
    }
    return "Error";
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t derive_stream(std::uint64_t seed, std::string_view key, std::uint64_t index) {
    Rng r(seed ^ fnv1a64(key));
    r.state ^= index * 0xd1342543de82ef95ull;
    r.next();
    return r.next();
}

namespace {

// Civil-date conversion (Howard Hinnant's algorithm), UTC, no <ctime> state.
std::int64_t days_from_civil(std::int64_t y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y += (m <= 2);
}

}  // namespace

std::int64_t month_index(std::int64_t unix_seconds) {
    std::int64_t days = unix_seconds / 86400;
    if (unix_seconds % 86400 < 0) --days;
    std::int64_t y;
    int m, d;
    civil_from_days(days, y, m, d);
    return (y - 1970) * 12 + (m - 1);
}

std::int64_t month_start(int year, int month1) {
    return days_from_civil(year, month1, 1) * 86400;
}

std::uint64_t hash_file(const std::string& path) {
    return fnv1a64(read_text_file(path));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << content;
    if (!out) throw Error(ErrorKind::IoError, "short write to " + path);
}

}  // namespace taintflow
