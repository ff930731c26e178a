#include "dlsh/entropy_probe.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <unordered_set>

#include "dlsh/errors.hpp"
#include "dlsh/random.hpp"

namespace dlsh {

OffsetSet sample_offsets(std::uint64_t query_id, std::size_t dim, std::size_t count, double radius,
                         std::uint64_t seed) {
    if (dim == 0) {
        throw ParameterError("offset dimension must be >= 1");
    }
    if (!(radius > 0) || !std::isfinite(radius)) {
        throw ParameterError("offset radius must be positive");
    }
    OffsetSet set;
    set.query_id = query_id;
    set.radius = radius;
    set.offsets.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        CounterRng rng(derive_key(seed, {kTagOffsets, query_id, i}));
        std::vector<double> delta(dim);
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (double& x : delta) {
                x = rng.normal();
                norm2 += x * x;
            }
        } while (norm2 == 0.0);
        const double scale = radius / std::sqrt(norm2);
        for (double& x : delta) {
            x *= scale;
        }
        set.offsets.push_back(std::move(delta));
    }
    return set;
}

OffsetSet sample_offsets(std::uint64_t query_id, const LshParams& params, std::uint64_t seed) {
    params.validate();
    return sample_offsets(query_id, params.d, params.L, params.r, seed);
}

std::vector<std::vector<double>> probe_points(std::span<const float> q, const OffsetSet& off, bool probe_self) {
    if (!probe_self && off.offsets.empty()) {
        throw ParameterError("a query needs at least one offset when the self probe is disabled");
    }
    std::vector<std::vector<double>> points;
    points.reserve(off.size() + (probe_self ? 1 : 0));
    if (probe_self) {
        points.emplace_back(q.begin(), q.end());
    }
    for (const auto& delta : off.offsets) {
        if (delta.size() != q.size()) {
            throw DimensionError("offset dimension " + std::to_string(delta.size()) + " != query dimension " +
                                 std::to_string(q.size()));
        }
        std::vector<double> p(q.size());
        for (std::size_t j = 0; j < q.size(); ++j) {
            p[j] = static_cast<double>(q[j]) + delta[j];
        }
        points.push_back(std::move(p));
    }
    return points;
}

std::vector<BucketId> probe_keys_simple(std::span<const float> q, const OffsetSet& off, const HashFamilyH& H,
                                        bool probe_self) {
    std::vector<BucketId> keys;
    std::unordered_set<BucketId, BucketIdHash> seen;
    for (const auto& p : probe_points(q, off, probe_self)) {
        BucketId b = H.hash(p);
        if (seen.insert(b).second) {
            keys.push_back(std::move(b));
        }
    }
    return keys;
}

std::vector<MachineKey> probe_keys_layered(std::span<const float> q, const OffsetSet& off, const HashFamilyH& H,
                                           const HashFunctionG& G, bool probe_self) {
    std::vector<MachineKey> keys;
    std::set<MachineKey> seen;
    for (const auto& p : probe_points(q, off, probe_self)) {
        const MachineKey key = G.hash(H.hash(p));
        if (seen.insert(key).second) {
            keys.push_back(key);
        }
    }
    return keys;
}

std::vector<Probe> probe_sequence(std::span<const float> q, const OffsetSet& off, const HashFamilyH& H,
                                  const HashFunctionG& G, bool probe_self) {
    std::vector<Probe> probes;
    for (const auto& p : probe_points(q, off, probe_self)) {
        BucketId b = H.hash(p);
        const MachineKey key = G.hash(b);
        probes.push_back({std::move(b), key});
    }
    return probes;
}

std::size_t default_offset_count(std::size_t n, double c) {
    if (n < 1 || !(c > 1)) {
        throw ParameterError("default_offset_count requires n >= 1 and c > 1");
    }
    const double L = std::ceil(std::pow(static_cast<double>(n), 2.0 / c));
    return static_cast<std::size_t>(std::clamp(L, 1.0, 1000.0));
}

}  // namespace dlsh
