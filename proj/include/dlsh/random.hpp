#pragma once

#include <cstdint>
#include <initializer_list>

namespace dlsh {

/// Murmur3 64-bit finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent stream key from a root seed and a path of tags.
///
///   key = mix64(seed)
///   for t in tags: key = mix64(key ^ mix64(t + 0x9e3779b97f4a7c15))
///
/// Every random object in the library is drawn from a stream whose key is
/// derived this way, e.g. (seed, kTagOffsets, query_id, offset_index), so
/// any process holding the root seed regenerates the same values without
/// coordination.
std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept;

/// Stream tags. Values are part of the reproducibility contract.
inline constexpr std::uint64_t kTagInnerHash = 0x48;   // 'H'
inline constexpr std::uint64_t kTagOuterHash = 0x47;   // 'G'
inline constexpr std::uint64_t kTagOffsets = 0x4f;     // 'O'
inline constexpr std::uint64_t kTagDataPoint = 0x44;   // 'D'
inline constexpr std::uint64_t kTagQueryPoint = 0x51;  // 'Q'

/// Counter-based generator: the i-th output (i = 1, 2, ...) of the stream
/// with key K is the SplitMix64 output function applied to
/// K + i * 0x9e3779b97f4a7c15. Outputs depend only on (K, i), never on the
/// platform or on libstdc++ distribution internals.
///
/// Normals use the Box-Muller transform on two uniforms; both the cosine and
/// the sine variate are consumed, in that order.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) noexcept : state_(key) {}

    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() noexcept;

    /// Uniform on [0, width).
    double uniform(double width) noexcept;

    /// Standard normal draw.
    double normal() noexcept;

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace dlsh
