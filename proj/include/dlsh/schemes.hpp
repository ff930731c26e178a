#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "dlsh/entropy_probe.hpp"
#include "dlsh/lsh_core.hpp"

namespace dlsh {

enum class Scheme { Simple, Layered };

std::string_view to_string(Scheme scheme);
/// Accepts "simple" or "layered"; throws ParameterError otherwise.
Scheme parse_scheme(std::string_view text);

struct DataRecord {
    std::uint64_t id = 0;
    std::vector<float> point;
};

struct QueryRecord {
    std::uint64_t id = 0;
    std::vector<float> point;
};

/// Simple LSH shuffles on the inner bucket, Layered LSH on the outer key.
using ShuffleKey = std::variant<BucketId, MachineKey>;

/// Value of a data message. The inner bucket is present only under Layered
/// LSH, so the receiving machine can file the point without rehashing it.
struct DataPayload {
    std::optional<BucketId> inner_bucket;
    const DataRecord* record = nullptr;
};

struct QueryPayload {
    const QueryRecord* record = nullptr;
};

/// One shuffled (Key, Value) pair. Records are referenced, not copied; the
/// referenced inputs must outlive the message.
struct KeyValueMessage {
    ShuffleKey key;
    std::variant<DataPayload, QueryPayload> payload;
    std::size_t byte_size = 0;
};

/// Wire layout used for byte accounting, all little-endian, no framing:
///
///   key     BucketId   k x int64
///           MachineKey int64
///   value   data       [k x int64 inner bucket, Layered only] uint64 id, d x float32
///           query      uint64 id, d x float32
std::vector<std::uint8_t> serialize(const KeyValueMessage& msg);
std::vector<std::uint8_t> serialize_key(const ShuffleKey& key);
std::size_t serialized_size(const ShuffleKey& key, const DataPayload& value);
std::size_t serialized_size(const ShuffleKey& key, const QueryPayload& value);

struct MatchResult {
    std::uint64_t query_id = 0;
    std::uint64_t point_id = 0;
    double distance = 0.0;

    friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Orders by (query_id, point_id).
bool canonical_less(const MatchResult& a, const MatchResult& b) noexcept;

/// Everything a mapper or reducer needs to reproduce H, G and the offsets.
/// Built once from the root seed; identical on every simulated machine.
struct SchemeContext {
    LshParams params;
    HashFamilyH H;
    HashFunctionG G;
    std::uint64_t seed = 0;
    bool probe_self = true;

    static SchemeContext create(const LshParams& params, std::uint64_t seed, bool probe_self);

    OffsetSet offsets_for(std::uint64_t query_id) const;
};

KeyValueMessage map_data_simple(const DataRecord& rec, const HashFamilyH& H);
KeyValueMessage map_data_layered(const DataRecord& rec, const HashFamilyH& H, const HashFunctionG& G);
KeyValueMessage map_data(const DataRecord& rec, Scheme scheme, const SchemeContext& ctx);

/// One message per distinct probe key of the query.
std::vector<KeyValueMessage> map_query(const QueryRecord& rec, Scheme scheme, const SchemeContext& ctx);

struct ReduceOutput {
    std::vector<MatchResult> matches;
    std::uint64_t distance_evals = 0;
};

/// Euclidean distance, accumulated in double.
double l2_distance(std::span<const float> a, std::span<const float> b);

/// Scans the bucket's data against each query, emitting pairs within c r
/// (inclusive).
ReduceOutput reduce_simple(const BucketId& key, std::span<const DataRecord* const> data,
                           std::span<const QueryRecord* const> queries, const LshParams& params);

/// Files data by inner bucket, then for each query regenerates its probe
/// sequence and scans every distinct inner bucket whose outer key is `key`.
/// Throws IntegrityError if a data payload lacks its inner bucket or does
/// not belong to `key`.
ReduceOutput reduce_layered(const MachineKey& key, std::span<const DataPayload> data,
                            std::span<const QueryRecord* const> queries, const SchemeContext& ctx);

}  // namespace dlsh
