#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace padam {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

}  // namespace detail

/// Counter-based pseudo-random stream: output i is mix64(key + i*golden),
/// where the key is derived from (master_seed, stream_id). The state is a
/// plain integer counter, so replay is exact and streams derived from the
/// same master seed with distinct ids never share state.
///
/// Not shareable between concurrent callers; move or copy instead.
class RngStream {
public:
    RngStream() = default;

    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : stream_id_(stream_id) {
        std::uint64_t k = detail::mix64(master_seed + detail::kGolden);
        key_ = detail::mix64(k ^ (stream_id + 0xD1B54A32D192ED03ull));
    }

    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() {
        counter_ += 1;
        return detail::mix64(key_ + counter_ * detail::kGolden);
    }

    /// Uniform draw in [0,1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform draw in [lo, hi). Consumes one variate even when lo == hi.
    double uniform(double lo, double hi) {
        if (!(lo <= hi)) {
            throw std::invalid_argument("RngStream::uniform: lo > hi");
        }
        const double r = lo + uniform01() * (hi - lo);
        if (r < hi) return r;
        return lo < hi ? std::nextafter(hi, lo) : lo;
    }

    /// Standard normal draw via Box-Muller; the pair is consumed in order
    /// (cosine output first, sine output on the following call).
    double standard_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0,1], keeps log finite
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    std::uint64_t stream_id_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Streams with distinct (master_seed, stream_id) pairs are independent;
/// identical pairs reproduce the exact same sequence.
inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    return RngStream(master_seed, stream_id);
}

}  // namespace padam
