#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace vts {

// ---------------------------------------------------------------------------
// Error hierarchy. Every recoverable failure mode has a named type so callers
// can catch precisely; all derive from Error for blanket handling at the CLI.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define VTS_DEFINE_ERROR(Name)                                                \
    struct Name : Error {                                                     \
        using Error::Error;                                                   \
    }

VTS_DEFINE_ERROR(NoPathError);
VTS_DEFINE_ERROR(BehindCameraError);
VTS_DEFINE_ERROR(DegenerateError);
VTS_DEFINE_ERROR(InsufficientViewsError);
VTS_DEFINE_ERROR(DegenerateMotionError);
VTS_DEFINE_ERROR(TooFewPairsError);
VTS_DEFINE_ERROR(MisalignedInputError);
VTS_DEFINE_ERROR(OutOfBoundsError);
VTS_DEFINE_ERROR(RetryExhaustedError);
VTS_DEFINE_ERROR(InsufficientPhantomsError);
VTS_DEFINE_ERROR(ZeroSizeError);
VTS_DEFINE_ERROR(ShapeMismatchError);
VTS_DEFINE_ERROR(SingularBatchError);
VTS_DEFINE_ERROR(LabelOutOfRangeError);
VTS_DEFINE_ERROR(NonFiniteGradientError);
VTS_DEFINE_ERROR(MissingValLossError);
VTS_DEFINE_ERROR(LengthMismatchError);
VTS_DEFINE_ERROR(UnknownClassLabelError);
VTS_DEFINE_ERROR(MissingCheckpointError);
VTS_DEFINE_ERROR(InvalidConfigError);
VTS_DEFINE_ERROR(ConfigParseError);
VTS_DEFINE_ERROR(IoError);

#undef VTS_DEFINE_ERROR

// ---------------------------------------------------------------------------
// Deterministic RNG. mt19937_64 is fully specified by the standard; the
// distribution transforms below are our own so streams are identical on any
// platform/compiler (std::uniform_real_distribution et al. are not portable).
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // log-uniform on [lo, hi], lo > 0
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    // integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw OutOfBoundsError("uniform_index: n must be > 0");
        auto i = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    int uniform_int(int lo, int hi) {  // inclusive range
        return lo + static_cast<int>(uniform_index(
                        static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // standard normal via Box-Muller (cached second variate)
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Stable 64-bit hashing (FNV-1a) for deriving sub-seeds from a master seed.
// ---------------------------------------------------------------------------

inline std::uint64_t hash_bytes(std::uint64_t h, const void* data,
                                std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    return hash_bytes(h, b, 8);
}

inline std::uint64_t hash_mix(std::uint64_t h, std::string_view s) {
    return hash_bytes(h, s.data(), s.size());
}

template <typename... Parts>
std::uint64_t derive_seed(std::uint64_t master, const Parts&... parts) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = hash_mix(h, master);
    ((h = hash_mix(h, parts)), ...);
    return h;
}

// ---------------------------------------------------------------------------
// Minimal deterministic parallel-for: contiguous index chunks, one per worker.
// Output ownership must be disjoint per index; no reductions happen here, so
// results are identical regardless of the job count.
// ---------------------------------------------------------------------------

inline int effective_jobs(int jobs) {
    if (jobs > 0) return jobs;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    int workers = effective_jobs(jobs);
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::size_t chunk = (n + w - 1) / w;
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : threads) th.join();
}

}  // namespace vts
