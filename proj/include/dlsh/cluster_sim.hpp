#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "dlsh/schemes.hpp"

namespace dlsh {

enum class MappingMode {
    Identity,  ///< machine id = key value (BucketId keys go through stable_key_hash first)
    Modulo,    ///< machine id = stable_key_hash(key) mod num_machines
};

std::string_view to_string(MappingMode mode);
MappingMode parse_mapping(std::string_view text);

struct ClusterConfig {
    std::size_t num_machines = 16;
    MappingMode mapping = MappingMode::Modulo;
    std::uint64_t seed = 0;   ///< salt of the key-to-machine hash
    std::size_t workers = 1;  ///< simulator threads; never affects results

    void validate() const;
};

using MachineId = std::int64_t;

/// mix64(FNV-1a-64(serialize_key(key)) ^ mix64(salt)). Platform independent.
std::uint64_t stable_key_hash(const ShuffleKey& key, std::uint64_t salt);

MachineId assign_machine(const ShuffleKey& key, const ClusterConfig& cfg);

struct ShuffleLedger {
    std::uint64_t data_messages = 0;
    std::uint64_t query_messages = 0;
    std::uint64_t data_bytes = 0;
    std::uint64_t query_bytes = 0;
    /// Messages sent per query id; for Layered LSH this is f_q.
    std::map<std::uint64_t, std::uint64_t> per_query_keys;

    void record(const KeyValueMessage& msg);
    friend bool operator==(const ShuffleLedger&, const ShuffleLedger&) = default;
};

struct MachineLoad {
    MachineId machine_id = 0;
    std::uint64_t num_points = 0;
    std::uint64_t num_queries = 0;
    /// Distance computations performed by the machine's reducers. Not a
    /// quantity the scheme analysis talks about; it exposes compute skew.
    std::uint64_t num_distance_evals = 0;

    friend bool operator==(const MachineLoad&, const MachineLoad&) = default;
};

struct JobSpec {
    Scheme scheme = Scheme::Layered;
    LshParams params;
    bool probe_self = true;
    std::uint64_t seed = 0;
};

struct JobResult {
    std::vector<MatchResult> matches;  ///< sorted by (query_id, point_id)
    ShuffleLedger ledger;
    std::vector<MachineLoad> loads;    ///< machines holding >= 1 point or query, by id
};

/// One synchronous map -> shuffle -> reduce round of the chosen scheme.
///
/// Throws ParameterError for duplicate ids or invalid settings,
/// DimensionError for points of the wrong dimension, and IntegrityError if a
/// reducer receives a point it does not own or a (query, point) pair is
/// produced twice.
JobResult run_job(std::span<const DataRecord> data, std::span<const QueryRecord> queries, const JobSpec& spec,
                  const ClusterConfig& cluster);

struct LoadSummary {
    double avg = 0.0;
    std::uint64_t max = 0;
};

/// Average and maximum point count over machines holding a point or a query.
LoadSummary load_summary(std::span<const MachineLoad> loads);

}  // namespace dlsh
