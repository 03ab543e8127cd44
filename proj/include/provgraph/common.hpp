#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace provgraph {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// metadata
struct MalformedContainer : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct DanglingParent : Error { using Error::Error; };
struct EmptyCollection : Error { using Error::Error; };

// heuristics / visual / filtering
struct TooFewImages : Error { using Error::Error; };
struct ImageTooSmall : Error { using Error::Error; };
struct EmptyKeypoints : Error { using Error::Error; };
struct AsymmetryError : Error { using Error::Error; };
struct NegativeWeight : Error { using Error::Error; };
struct InsufficientTrainingData : Error { using Error::Error; };
struct EmptyIndex : Error { using Error::Error; };

// graphbuild / scoring
struct SizeMismatch : Error { using Error::Error; };
struct InvalidQueryIndex : Error { using Error::Error; };
struct CycleDetected : Error { using Error::Error; };
struct EmptyGraph : Error { using Error::Error; };

// datagen / cli
struct RootTooSmall : Error { using Error::Error; };
struct IncompatibleMenu : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// Deterministic 64-bit generator (splitmix64). Used everywhere randomness is
// needed so results never depend on platform or library internals.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, n)
    uint64_t below(uint64_t n) { return n ? next() % n : 0; }

    // uniform in [lo, hi] inclusive
    int64_t range(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

    // uniform in [0, 1)
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    uint64_t state_;
};

inline uint64_t fnv1a(const std::string& s, uint64_t h = 0xCBF29CE484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Worker-pool size: PROVGRAPH_THREADS env var, else hardware concurrency.
unsigned worker_count();

}  // namespace provgraph
