#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dlsh/lsh_core.hpp"

namespace dlsh {

/// The L random perturbations of one query, each of norm `radius`.
struct OffsetSet {
    std::uint64_t query_id = 0;
    double radius = 0.0;
    std::vector<std::vector<double>> offsets;

    std::size_t size() const noexcept { return offsets.size(); }
};

/// Draws `count` offsets uniformly from the sphere of radius `radius` in R^dim.
///
/// Offset i is a normalized standard-normal vector drawn from the stream
/// derive_key(seed, {kTagOffsets, query_id, i}), so offset i does not depend
/// on `count`: the first L offsets of a larger set are exactly the set for L.
/// A zero count yields an empty set.
OffsetSet sample_offsets(std::uint64_t query_id, std::size_t dim, std::size_t count, double radius,
                         std::uint64_t seed);

/// Same, with dim = params.d, count = params.L, radius = params.r.
OffsetSet sample_offsets(std::uint64_t query_id, const LshParams& params, std::uint64_t seed);

/// Returns q + delta for every offset (plus q itself first when probe_self).
std::vector<std::vector<double>> probe_points(std::span<const float> q, const OffsetSet& off, bool probe_self);

/// Distinct inner buckets probed for q, in first-occurrence order
/// (H(q) first when probe_self, then offsets by index).
std::vector<BucketId> probe_keys_simple(std::span<const float> q, const OffsetSet& off, const HashFamilyH& H,
                                        bool probe_self);

/// Distinct outer keys GH over the same probe points, in first-occurrence
/// order. Its size is the number of messages the query costs under Layered LSH.
std::vector<MachineKey> probe_keys_layered(std::span<const float> q, const OffsetSet& off, const HashFamilyH& H,
                                           const HashFunctionG& G, bool probe_self);

/// One probe point's inner bucket and outer key.
struct Probe {
    BucketId bucket;
    MachineKey key;
};

/// Buckets and keys of every probe point, in probe order, not deduplicated.
std::vector<Probe> probe_sequence(std::span<const float> q, const OffsetSet& off, const HashFamilyH& H,
                                  const HashFunctionG& G, bool probe_self);

/// min(ceil(n^(2/c)), 1000).
std::size_t default_offset_count(std::size_t n, double c);

}  // namespace dlsh
