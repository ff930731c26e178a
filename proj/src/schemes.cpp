#include "dlsh/schemes.hpp"

#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "dlsh/errors.hpp"
#include "le_bytes.hpp"

namespace dlsh {

std::string_view to_string(Scheme scheme) {
    return scheme == Scheme::Simple ? "simple" : "layered";
}

Scheme parse_scheme(std::string_view text) {
    if (text == "simple") {
        return Scheme::Simple;
    }
    if (text == "layered") {
        return Scheme::Layered;
    }
    throw ParameterError("unknown scheme '" + std::string(text) + "' (expected simple or layered)");
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::size_t key_size(const ShuffleKey& key) {
    if (const auto* b = std::get_if<BucketId>(&key)) {
        return 8 * b->coords.size();
    }
    return 8;
}

void put_key(std::vector<std::uint8_t>& out, const ShuffleKey& key) {
    if (const auto* b = std::get_if<BucketId>(&key)) {
        for (std::int64_t c : b->coords) {
            detail::put_i64(out, c);
        }
    } else {
        detail::put_i64(out, std::get<MachineKey>(key).value);
    }
}

void put_point(std::vector<std::uint8_t>& out, std::uint64_t id, std::span<const float> point) {
    detail::put_u64(out, id);
    for (float x : point) {
        detail::put_f32(out, x);
    }
}

}  // namespace

std::vector<std::uint8_t> serialize_key(const ShuffleKey& key) {
    std::vector<std::uint8_t> out;
    out.reserve(key_size(key));
    put_key(out, key);
    return out;
}

std::size_t serialized_size(const ShuffleKey& key, const DataPayload& value) {
    const std::size_t inner = value.inner_bucket ? 8 * value.inner_bucket->coords.size() : 0;
    return key_size(key) + inner + 8 + 4 * value.record->point.size();
}

std::size_t serialized_size(const ShuffleKey& key, const QueryPayload& value) {
    return key_size(key) + 8 + 4 * value.record->point.size();
}

std::vector<std::uint8_t> serialize(const KeyValueMessage& msg) {
    std::vector<std::uint8_t> out;
    out.reserve(msg.byte_size);
    put_key(out, msg.key);
    if (const auto* data = std::get_if<DataPayload>(&msg.payload)) {
        if (data->inner_bucket) {
            for (std::int64_t c : data->inner_bucket->coords) {
                detail::put_i64(out, c);
            }
        }
        put_point(out, data->record->id, data->record->point);
    } else {
        const auto& query = std::get<QueryPayload>(msg.payload);
        put_point(out, query.record->id, query.record->point);
    }
    return out;
}

bool canonical_less(const MatchResult& a, const MatchResult& b) noexcept {
    if (a.query_id != b.query_id) {
        return a.query_id < b.query_id;
    }
    return a.point_id < b.point_id;
}

// ---------------------------------------------------------------------------
// Map side

SchemeContext SchemeContext::create(const LshParams& params, std::uint64_t seed, bool probe_self) {
    params.validate();
    return SchemeContext{params, sample_h_family(params, seed), sample_g_function(params, seed), seed, probe_self};
}

OffsetSet SchemeContext::offsets_for(std::uint64_t query_id) const {
    return sample_offsets(query_id, params.d, params.L, params.r, seed);
}

KeyValueMessage map_data_simple(const DataRecord& rec, const HashFamilyH& H) {
    KeyValueMessage msg{H.hash(rec.point), DataPayload{std::nullopt, &rec}, 0};
    msg.byte_size = serialized_size(msg.key, std::get<DataPayload>(msg.payload));
    return msg;
}

KeyValueMessage map_data_layered(const DataRecord& rec, const HashFamilyH& H, const HashFunctionG& G) {
    BucketId bucket = H.hash(rec.point);
    const MachineKey key = G.hash(bucket);
    KeyValueMessage msg{key, DataPayload{std::move(bucket), &rec}, 0};
    msg.byte_size = serialized_size(msg.key, std::get<DataPayload>(msg.payload));
    return msg;
}

KeyValueMessage map_data(const DataRecord& rec, Scheme scheme, const SchemeContext& ctx) {
    return scheme == Scheme::Simple ? map_data_simple(rec, ctx.H) : map_data_layered(rec, ctx.H, ctx.G);
}

std::vector<KeyValueMessage> map_query(const QueryRecord& rec, Scheme scheme, const SchemeContext& ctx) {
    if (rec.point.size() != ctx.params.d) {
        throw DimensionError("query " + std::to_string(rec.id) + " has dimension " +
                             std::to_string(rec.point.size()) + ", expected " + std::to_string(ctx.params.d));
    }
    const OffsetSet off = ctx.offsets_for(rec.id);
    std::vector<KeyValueMessage> out;
    auto emit = [&](ShuffleKey key) {
        KeyValueMessage msg{std::move(key), QueryPayload{&rec}, 0};
        msg.byte_size = serialized_size(msg.key, std::get<QueryPayload>(msg.payload));
        out.push_back(std::move(msg));
    };
    if (scheme == Scheme::Simple) {
        for (auto& bucket : probe_keys_simple(rec.point, off, ctx.H, ctx.probe_self)) {
            emit(std::move(bucket));
        }
    } else {
        for (const auto& key : probe_keys_layered(rec.point, off, ctx.H, ctx.G, ctx.probe_self)) {
            emit(key);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reduce side

double l2_distance(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw DimensionError("distance between vectors of dimension " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

namespace {

void scan_bucket(const QueryRecord& q, std::span<const DataRecord* const> bucket, double threshold,
                 ReduceOutput& out) {
    for (const DataRecord* p : bucket) {
        const double dist = l2_distance(q.point, p->point);
        ++out.distance_evals;
        if (dist <= threshold) {
            out.matches.push_back({q.id, p->id, dist});
        }
    }
}

}  // namespace

ReduceOutput reduce_simple(const BucketId& key, std::span<const DataRecord* const> data,
                           std::span<const QueryRecord* const> queries, const LshParams& params) {
    (void)key;
    ReduceOutput out;
    const double threshold = params.c * params.r;
    for (const QueryRecord* q : queries) {
        scan_bucket(*q, data, threshold, out);
    }
    return out;
}

ReduceOutput reduce_layered(const MachineKey& key, std::span<const DataPayload> data,
                            std::span<const QueryRecord* const> queries, const SchemeContext& ctx) {
    std::unordered_map<BucketId, std::vector<const DataRecord*>, BucketIdHash> buckets;
    for (const DataPayload& payload : data) {
        if (!payload.inner_bucket) {
            throw IntegrityError("layered data payload for point " + std::to_string(payload.record->id) +
                                 " carries no inner bucket");
        }
        if (ctx.G.hash(*payload.inner_bucket) != key) {
            throw IntegrityError("point " + std::to_string(payload.record->id) + " routed to key " +
                                 std::to_string(key.value) + " but its inner bucket maps elsewhere");
        }
        buckets[*payload.inner_bucket].push_back(payload.record);
    }

    ReduceOutput out;
    const double threshold = ctx.params.c * ctx.params.r;
    for (const QueryRecord* q : queries) {
        const OffsetSet off = ctx.offsets_for(q->id);
        std::unordered_set<BucketId, BucketIdHash> searched;
        for (const Probe& probe : probe_sequence(q->point, off, ctx.H, ctx.G, ctx.probe_self)) {
            if (probe.key != key || !searched.insert(probe.bucket).second) {
                continue;
            }
            if (auto it = buckets.find(probe.bucket); it != buckets.end()) {
                scan_bucket(*q, it->second, threshold, out);
            }
        }
    }
    return out;
}

}  // namespace dlsh
