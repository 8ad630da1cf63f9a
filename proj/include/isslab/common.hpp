#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace isslab {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : Error {
    using Error::Error;
};

struct BracketError : Error {
    using Error::Error;
};

struct DegenerateSampleError : Error {
    using Error::Error;
};

struct BlowUpError : Error {
    double time = 0.0;
    BlowUpError(const std::string& msg, double t) : Error(msg), time(t) {}
};

struct NoOracleError : Error {
    using Error::Error;
};

struct SingularityError : Error {
    double time = 0.0;
    SingularityError(const std::string& msg, double t) : Error(msg), time(t) {}
};

struct ParseError : Error {
    int line = 0;
    ParseError(const std::string& msg, int line_no = 0) : Error(msg), line(line_no) {}
};

struct ConfigError : Error {
    using Error::Error;
};

// Deterministic RNG: raw generator bits mapped to doubles by hand so streams
// are bit-identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix(seed)) {}

    std::uint64_t next_u64() {
        // xorshift* on a splitmix-initialized state: tiny, reproducible, good enough
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545F4914F6CDD1DULL;
    }

    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    // Independent stream derived from this seed and a stream index; lets sample k
    // be generated identically regardless of evaluation order.
    Rng fork(std::uint64_t stream) const {
        Rng r(0);
        r.state_ = splitmix(state_ ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
        return r;
    }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        x = x ^ (x >> 31);
        return x == 0 ? 0x1234567887654321ULL : x;
    }

    std::uint64_t state_;
};

// Runs fn(i) for i in [0, n); results must be written to per-index storage by
// the caller so the outcome is independent of scheduling.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t workers = hw == 0 ? 1 : hw;
    if (workers > n) workers = n == 0 ? 1 : n;
    if (workers <= 1 || n < 4) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace isslab
