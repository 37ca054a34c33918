#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace shapekit {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Failure categories surfaced by the library. Callers that want to react to a
// specific condition (e.g. falling back when corner detection finds too few
// points) switch on the code rather than parsing messages.
enum class Errc {
    DegenerateHistogram,
    InvalidScale,
    InvalidParams,
    TooFewCorners,
    EmptyMask,
    DegenerateContour,
    DegenerateCorners,
    EmptySignature,
    ZeroReference,
    ZeroDc,
    EmptyShape,
    KindMismatch,
    DimMismatch,
    SingleClass,
    EmptyData,
    LengthMismatch,
    EmptyDirectory,
    ClassTooSmall,
    IoError,
    ParseError,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

// SplitMix64 (Steele, Lea, Flood 2014). Fixed algorithm, no
// platform-dependent distributions, so seeded results reproduce everywhere.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, n). Modulo bias is irrelevant for our n << 2^64;
    // what matters is that the mapping is pinned down.
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::uint64_t state_;
};

}  // namespace shapekit
