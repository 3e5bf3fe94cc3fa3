#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>

namespace zdjscc {

/// Counter-based splittable random stream.
///
/// A stream is identified by (master_seed, job_id, chunk_id). Substreams
/// derived from the same master seed are statistically independent, so
/// parallel workers can each own a chunk and the merged results do not
/// depend on how work was split. Draws are reproducible bit-for-bit when
/// a stream is re-created with the same identifiers.
///
/// The generator is the SplitMix64 sequence: a 64-bit counter advanced by
/// the golden-ratio increment and passed through a finalizing mixer.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t master_seed, std::uint64_t job_id = 0,
                          std::uint64_t chunk_id = 0) noexcept {
        // Derive the stream key by mixing the identifiers through the
        // same finalizer; distinct (seed, job, chunk) give distinct keys.
        std::uint64_t k = mix(master_seed + kGamma);
        k = mix(k ^ mix(job_id + 2 * kGamma));
        k = mix(k ^ mix(chunk_id + 3 * kGamma));
        state_ = k;
    }

    std::uint64_t next_u64() noexcept {
        state_ += kGamma;
        return mix(state_);
    }

    /// Uniform draw in (0, 1].
    double next_uniform() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal draw (Box-Muller; pairs are cached).
    double next_gaussian() noexcept {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(t);
        have_cached_ = true;
        return r * std::cos(t);
    }

  private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

    static std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace zdjscc
